//! Chow ring of the blowup of `P^r x P^r` along the diagonal.
//!
//! Generators are the two hyperplane pullbacks `h`, `k` and the exceptional
//! divisor `e`, subject to
//!
//! ```text
//! h^{r+1} = k^{r+1} = 0,   h e = k e,
//! e^r = sum_{0<i<r} (-1)^{i+1} C(r+1, i) h^i e^{r-i} + (-1)^{r+1} sum_{i=0}^{r} h^i k^{r-i}
//! ```
//!
//! A class is stored in normal form: every monomial is either `h^a k^b`
//! (`a, b <= r`) or `h^a e^c` (`a <= r`, `1 <= c <= r-1`). The only top-degree
//! normal monomial is `h^r k^r`, whose coefficient is the degree.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{binomial, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChowError {
    #[error("class is not homogeneous of degree {expected}")]
    WrongDegree { expected: u32 },
    #[error("mismatched ambient dimensions {0} and {1}")]
    DimensionMismatch(u8, u8),
    #[error("cannot parse class expression: {0}")]
    Parse(String),
}

/// Exponents of `h^h k^k e^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub h: u32,
    pub k: u32,
    pub e: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { h: 0, k: 0, e: 0 };

    pub fn new(h: u32, k: u32, e: u32) -> Self {
        Monomial { h, k, e }
    }

    pub fn degree(&self) -> u32 {
        self.h + self.k + self.e
    }

    pub fn is_normal(&self, r: u8) -> bool {
        let r = u32::from(r);
        if self.e == 0 {
            self.h <= r && self.k <= r
        } else {
            self.k == 0 && self.h <= r && self.e < r
        }
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.h + other.h, self.k + other.k, self.e + other.e)
    }
}

/// All normal-form monomials of total degree `codim`.
pub fn monomial_basis(r: u8, codim: u32) -> Vec<Monomial> {
    let rr = u32::from(r);
    let mut out = Vec::new();
    for a in (0..=rr.min(codim)).rev() {
        let b = codim - a;
        if b <= rr {
            out.push(Monomial::new(a, b, 0));
        }
    }
    for c in 1..rr {
        if c > codim {
            break;
        }
        let a = codim - c;
        if a <= rr {
            out.push(Monomial::new(a, 0, c));
        }
    }
    out
}

/// An element of the blowup Chow ring with coefficients in `S`.
#[derive(Clone, PartialEq)]
pub struct BlowupClass<S: Scalar> {
    r: u8,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> BlowupClass<S> {
    pub fn zero(r: u8) -> Self {
        BlowupClass { r, terms: BTreeMap::new() }
    }

    pub fn one(r: u8) -> Self {
        Self::monomial(r, Monomial::ONE, S::one())
    }

    pub fn h(r: u8) -> Self {
        Self::monomial(r, Monomial::new(1, 0, 0), S::one())
    }

    pub fn k(r: u8) -> Self {
        Self::monomial(r, Monomial::new(0, 1, 0), S::one())
    }

    pub fn e(r: u8) -> Self {
        Self::monomial(r, Monomial::new(0, 0, 1), S::one())
    }

    pub fn scalar(r: u8, c: S) -> Self {
        Self::monomial(r, Monomial::ONE, c)
    }

    /// `c * m`, reduced to normal form.
    pub fn monomial(r: u8, m: Monomial, c: S) -> Self {
        Self::reduce(r, [(m, c)])
    }

    /// Rewrite an arbitrary polynomial in `h, k, e` into normal form.
    pub fn reduce<I>(r: u8, raw: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, S)>,
    {
        assert!(r >= 1, "ambient dimension must be positive");
        let rr = u32::from(r);
        let mut out: BTreeMap<Monomial, S> = BTreeMap::new();
        let mut stack: Vec<(Monomial, S)> = raw.into_iter().collect();
        while let Some((mut m, c)) = stack.pop() {
            if c.is_negligible() {
                continue;
            }
            if m.e > 0 && m.k > 0 {
                m.h += m.k;
                m.k = 0;
            }
            if m.h > rr || m.k > rr {
                continue;
            }
            if m.e >= rr {
                let rest = Monomial::new(m.h, m.k, m.e - rr);
                for (rel, coef) in e_power_relation::<S>(r) {
                    stack.push((rest.times(&rel), c.clone() * coef));
                }
                continue;
            }
            let slot = out.entry(m).or_insert_with(S::zero);
            *slot = slot.clone() + c;
        }
        out.retain(|_, c| !c.is_negligible());
        BlowupClass { r, terms: out }
    }

    pub fn ambient(&self) -> u8 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Degree of the class if homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.r);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, c: &S) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (*m, v.clone() * c.clone()))
            .filter(|(_, v)| !v.is_negligible())
            .collect();
        BlowupClass { r: self.r, terms }
    }

    /// Degree of a top-dimensional class (`codim 2r`).
    pub fn integrate(&self) -> Result<S, ChowError> {
        let top = 2 * u32::from(self.r);
        if self.is_zero() {
            return Ok(S::zero());
        }
        if self.homogeneous_degree() != Some(top) {
            return Err(ChowError::WrongDegree { expected: top });
        }
        let point = Monomial::new(u32::from(self.r), u32::from(self.r), 0);
        Ok(self.coefficient(&point))
    }

    /// Product followed by integration; zero when degrees do not add to `2r`.
    pub fn pairing(&self, other: &Self) -> S {
        let p = self * other;
        let top = 2 * u32::from(self.r);
        let point = Monomial::new(u32::from(self.r), u32::from(self.r), 0);
        p.terms
            .iter()
            .filter(|(m, _)| m.degree() == top && **m == point)
            .map(|(_, c)| c.clone())
            .fold(S::zero(), |a, b| a + b)
    }

    /// Parse an expression such as `(2(h^2k+hk^2)-6h^2e+2he^2)^2`.
    pub fn parse(r: u8, text: &str) -> Result<Self, ChowError> {
        let mut p = Parser { r, chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
        let v = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(ChowError::Parse(format!("unexpected input at offset {}", p.pos)));
        }
        Ok(v)
    }
}

/// Normal-form expansion of `e^r` (monomials may still need the `ke -> he` fold).
fn e_power_relation<S: Scalar>(r: u8) -> Vec<(Monomial, S)> {
    let rr = u32::from(r);
    let mut rel = Vec::new();
    for i in 1..rr {
        let sign: i64 = if i % 2 == 1 { 1 } else { -1 };
        let c = sign * binomial(rr + 1, i) as i64;
        rel.push((Monomial::new(i, 0, rr - i), S::from_i64(c)));
    }
    let diag_sign: i64 = if rr % 2 == 1 { 1 } else { -1 };
    for i in 0..=rr {
        rel.push((Monomial::new(i, rr - i, 0), S::from_i64(diag_sign)));
    }
    rel
}

fn check_same(a: u8, b: u8) {
    assert_eq!(a, b, "{}", ChowError::DimensionMismatch(a, b));
}

impl<S: Scalar> Add for &BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn add(self, rhs: Self) -> BlowupClass<S> {
        check_same(self.r, rhs.r);
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            let slot = terms.entry(*m).or_insert_with(S::zero);
            *slot = slot.clone() + c.clone();
        }
        terms.retain(|_, c| !c.is_negligible());
        BlowupClass { r: self.r, terms }
    }
}

impl<S: Scalar> Sub for &BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn sub(self, rhs: Self) -> BlowupClass<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn neg(self) -> BlowupClass<S> {
        self.scale(&(S::zero() - S::one()))
    }
}

impl<S: Scalar> Mul for &BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn mul(self, rhs: Self) -> BlowupClass<S> {
        check_same(self.r, rhs.r);
        let raw = self.terms.iter().flat_map(|(m1, c1)| {
            rhs.terms.iter().map(move |(m2, c2)| (m1.times(m2), c1.clone() * c2.clone()))
        });
        BlowupClass::reduce(self.r, raw.collect::<Vec<_>>())
    }
}

impl<S: Scalar> Add for BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn add(self, rhs: Self) -> BlowupClass<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn sub(self, rhs: Self) -> BlowupClass<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for BlowupClass<S> {
    type Output = BlowupClass<S>;
    fn mul(self, rhs: Self) -> BlowupClass<S> {
        &self * &rhs
    }
}

fn write_var(f: &mut fmt::Formatter<'_>, name: char, exp: u32) -> fmt::Result {
    match exp {
        0 => Ok(()),
        1 => write!(f, "{name}"),
        n => write!(f, "{name}^{n}"),
    }
}

/// Signed monomial sum, exceptional terms first (highest `e` power first),
/// then the `h,k` part by descending `h` power.
impl<S: Scalar> fmt::Display for BlowupClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<(&Monomial, &S)> = self.terms.iter().collect();
        order.sort_by(|(a, _), (b, _)| {
            (b.degree(), b.e, b.h).cmp(&(a.degree(), a.e, a.h))
        });
        for (i, (m, c)) in order.into_iter().enumerate() {
            let neg = format!("{c}").starts_with('-');
            let mag = if neg { S::zero() - c.clone() } else { c.clone() };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit = mag == S::one();
            if !unit || *m == Monomial::ONE {
                let s = format!("{mag}");
                if s.contains('/') && *m != Monomial::ONE {
                    write!(f, "({s})")?;
                } else {
                    write!(f, "{s}")?;
                }
            }
            write_var(f, 'h', m.h)?;
            write_var(f, 'k', m.k)?;
            write_var(f, 'e', m.e)?;
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for BlowupClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[r={}] {}", self.r, self)
    }
}

struct Parser {
    r: u8,
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, what: &str) -> Result<T, ChowError> {
        Err(ChowError::Parse(format!("{what} at offset {}", self.pos)))
    }

    fn expr<S: Scalar>(&mut self) -> Result<BlowupClass<S>, ChowError> {
        let mut acc = BlowupClass::zero(self.r);
        let mut sign_neg = false;
        if let Some(c @ ('+' | '-')) = self.peek() {
            sign_neg = c == '-';
            self.pos += 1;
        }
        loop {
            let t = self.term()?;
            acc = if sign_neg { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some('+') => sign_neg = false,
                Some('-') => sign_neg = true,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term<S: Scalar>(&mut self) -> Result<BlowupClass<S>, ChowError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(c) if c == '(' || c.is_ascii_digit() || matches!(c, 'h' | 'k' | 'e') => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor<S: Scalar>(&mut self) -> Result<BlowupClass<S>, ChowError> {
        let base = self.base()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let n = self.integer()?;
            return Ok(base.pow(n as u32));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ChowError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ChowError::Parse(format!("integer too large: {s}")))
    }

    fn base<S: Scalar>(&mut self) -> Result<BlowupClass<S>, ChowError> {
        let r = self.r;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Some('h') => {
                self.pos += 1;
                Ok(BlowupClass::h(r))
            }
            Some('k') => {
                self.pos += 1;
                Ok(BlowupClass::k(r))
            }
            Some('e') => {
                self.pos += 1;
                Ok(BlowupClass::e(r))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let mut v = S::from_i64(n);
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d == 0 {
                        return self.err("zero denominator");
                    }
                    v = v / S::from_i64(d);
                }
                Ok(BlowupClass::scalar(r, v))
            }
            _ => self.err("unexpected character"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Count};
    use proptest::prelude::*;

    fn c(r: u8, s: &str) -> BlowupClass<Count> {
        BlowupClass::parse(r, s).unwrap()
    }

    #[test]
    fn low_dimensional_relations() {
        assert_eq!(c(1, "e"), c(1, "h + k"));
        assert_eq!(c(2, "e^2"), c(2, "3he - h^2 - hk - k^2"));
        assert_eq!(c(3, "e^3"), c(3, "4he^2 - 6h^2e + h^3 + h^2k + hk^2 + k^3"));
        assert_eq!(c(4, "e^4"), c(4, "5he^3 - 10h^2e^2 + 10h^3e - h^4 - h^3k - h^2k^2 - hk^3 - k^4"));
    }

    #[test]
    fn point_class_has_degree_one() {
        for r in 1..=5u8 {
            let top = c(r, &format!("h^{r}k^{r}"));
            assert_eq!(top.integrate().unwrap(), int(1));
            assert_eq!(c(r, &format!("h^{}k^{}", r + 1, r - 1)).integrate().unwrap(), int(0));
        }
    }

    #[test]
    fn top_integrals_match_segre_classes() {
        // int h^a e^m over the blowup is (-1)^(r-1) C(m, r) for m >= 1.
        for r in 1..=5u8 {
            let rr = u32::from(r);
            for m in 1..=2 * rr {
                let a = 2 * rr - m;
                let v = BlowupClass::<Count>::monomial(r, Monomial::new(a, 0, m), int(1)).integrate().unwrap();
                let sign = if rr % 2 == 1 { 1 } else { -1 };
                let expect = if a <= rr { sign * binomial(m, rr) as i64 } else { 0 };
                assert_eq!(v, int(expect), "r={r} a={a} m={m}");
            }
        }
    }

    #[test]
    fn proper_transforms_of_generic_curves() {
        // the class e(h+k-e) is the pullback of the diagonal's normal data
        let x = c(2, "(h+k-e)e");
        assert_eq!(x, c(2, "-he + h^2 + hk + k^2"));
        assert_eq!(c(2, "(2(h^2k+hk^2)-6h^2e+2he^2)^2").integrate().unwrap(), int(0));
    }

    #[test]
    fn display_orders_exceptional_terms_first() {
        assert_eq!(c(2, "e^2").to_string(), "3he - h^2 - hk - k^2");
        assert_eq!(c(3, "0").to_string(), "0");
        assert_eq!(c(2, "1/2 h").to_string(), "(1/2)h");
    }

    #[test]
    fn parse_errors() {
        assert!(BlowupClass::<Count>::parse(2, "h^").is_err());
        assert!(BlowupClass::<Count>::parse(2, "(h+k").is_err());
        assert!(BlowupClass::<Count>::parse(2, "x").is_err());
    }

    #[test]
    fn integrate_rejects_wrong_degree() {
        assert!(c(2, "h^2").integrate().is_err());
    }

    #[test]
    fn float_scalar_agrees() {
        let f: BlowupClass<f64> = BlowupClass::parse(3, "e^6").unwrap();
        let q = c(3, "e^6");
        let exact = q.integrate().unwrap();
        let approx = f.integrate().unwrap();
        assert!((approx - exact.to_integer().to_string().parse::<f64>().unwrap()).abs() < 1e-9);
    }

    fn arb_class(r: u8) -> impl Strategy<Value = BlowupClass<Count>> {
        proptest::collection::vec((0u32..=3, 0u32..=3, 0u32..=3, -3i64..=3), 0..5).prop_map(move |ts| {
            BlowupClass::reduce(r, ts.into_iter().map(|(h, k, e, v)| (Monomial::new(h, k, e), int(v))))
        })
    }

    proptest! {
        #[test]
        fn ring_laws((a, b, x) in (2u8..=4).prop_flat_map(|r| (arb_class(r), arb_class(r), arb_class(r)))) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &x, &a * &(&b * &x));
            prop_assert_eq!(&a * &(&b + &x), &(&a * &b) + &(&a * &x));
        }

        #[test]
        fn reduction_is_idempotent(h in 0u32..6, k in 0u32..6, e in 0u32..9, r in 2u8..=5) {
            let once = BlowupClass::<Count>::monomial(r, Monomial::new(h, k, e), int(1));
            let twice = BlowupClass::reduce(r, once.terms().map(|(m, v)| (*m, v.clone())));
            prop_assert!(once.terms().all(|(m, _)| m.is_normal(r)));
            prop_assert_eq!(once, twice);
        }
    }
}
