//! Coefficient fields used by the ring and linear-algebra layers.
//!
//! Everything enumerative is computed over exact rationals; the blowup ring
//! and the linear solver are written against [`Scalar`] so they can also be
//! run over `f64` (handy for quick experiments) or any other field.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, One, Signed, Zero};

/// A field element usable as a coefficient.
pub trait Scalar:
    Num + Clone + Debug + Display + PartialEq + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    /// Exact fields answer `is_zero` exactly; floats use a small tolerance.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn is_negligible(&self) -> bool {
        self.abs() < 1e-9
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Scalar for Ratio<i128> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
}

/// Exact rational count. Characteristic numbers can be non-integral.
pub type Count = BigRational;

pub fn int(v: i64) -> Count {
    Count::from_integer(BigInt::from(v))
}

pub fn frac(n: i64, d: i64) -> Count {
    Count::new(BigInt::from(n), BigInt::from(d))
}

/// Binomial coefficient as a plain integer (small arguments only).
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * u64::from(n - i) / u64::from(i + 1);
    }
    acc
}

pub fn binomial_count(n: u32, k: u32) -> Count {
    Count::from_u64(binomial(n, k)).unwrap()
}

/// Render a count the way the tables print it: `12`, `-3`, `3/2`.
pub fn format_count(c: &Count) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Parse `p` or `p/q`.
pub fn parse_count(s: &str) -> Option<Count> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Count::new(n, d))
        }
        None => Some(Count::from_integer(s.parse().ok()?)),
    }
}

pub fn is_nonnegative(c: &Count) -> bool {
    !c.is_negative()
}
