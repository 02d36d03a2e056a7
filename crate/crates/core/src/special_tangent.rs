//! Curves with a marked point `A` on a codim-`u` space whose tangent line
//! at `A` meets `v` general codim-2 spaces.
//!
//! For `v <= min(3, r - 2)` one special tangent is expanded at a time by
//! `W_A = (2 - 2/d) L_A + H/d^2 + sum_j ((d-j)/d)^2 K^{A,j}`; from the second
//! factor on, the locus where `A` sits on a contracted component meeting two
//! others contributes an excess term with weight `(2j^2 - 2jd)/d^2` per
//! unordered pair. Larger `v` goes through the class of the two-marked
//! family in the blowup of `P^r x P^r`.

use num_traits::Zero;

use crate::cache::CountKey;
use crate::constraints::{expected_dimension, Constraint, FamilyHandle};
use crate::engine::{
    check_ambient, check_codims, decorate, diagonal_splits, glue_splits, ratio, Engine, EngineError,
    EngineResult,
};
use crate::scalar::Count;
use crate::ExactClass;

/// Which evaluation path a special-tangent count takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Expand one special tangent at a time on the space of stable maps.
    Divisor,
    /// Integrate against the family class in the blowup.
    Blowup,
}

impl Engine {
    /// Degree-`d` rational curves with `c`, a marked point on a general
    /// codim-`u` space and `v` special tangents at that point.
    pub fn special(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        self.check_special(r, d, c, u, v)?;
        self.special_raw(r, d, c, u, v)
    }

    /// The same count forced through one route. The divisor route needs
    /// `v <= min(3, r - 2)`; the blowup route needs `d >= 1`.
    pub fn special_via(&self, route: Route, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        self.check_special(r, d, c, u, v)?;
        if !self.special_in_range(r, d, c, u, v) {
            return Ok(Count::zero());
        }
        match route {
            Route::Divisor if v == 0 || d == 1 || divisor_expansion_applies(r, v) => self.special_divisor(r, d, c, u, v),
            Route::Divisor => Err(EngineError::RouteUnavailable(format!(
                "divisor route unavailable for {v} special tangents in P^{r}"
            ))),
            Route::Blowup => self.special_blowup(r, d, c, u, v),
        }
    }

    fn check_special(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<()> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        if c.node.is_some() {
            return Err(EngineError::UnexpectedNode);
        }
        let dim = expected_dimension(FamilyHandle::Special { r, d, u, v }, c);
        if dim > 0 {
            return Err(EngineError::PositiveDimension(dim));
        }
        Ok(())
    }

    fn special_in_range(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> bool {
        let rr = u32::from(r);
        d > 0
            && u <= rr
            && v <= 2 * rr - 2
            && c.max_codim() <= rr
            && expected_dimension(FamilyHandle::Special { r, d, u, v }, c) == 0
    }

    pub(crate) fn special_raw(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        if !self.special_in_range(r, d, c, u, v) {
            return Ok(Count::zero());
        }
        if v == 0 {
            return Ok(self.rational_with(r, d, c, &[u]));
        }
        let key = CountKey::Special { r, d, c: *c, u, v };
        self.cache.get_or_try_compute(key, || {
            if d == 1 || divisor_expansion_applies(r, v) {
                self.special_divisor(r, d, c, u, v)
            } else {
                self.special_blowup(r, d, c, u, v)
            }
        })
    }

    /// `special_raw` with extra incidences; hyperplanes give factors of `d`.
    pub(crate) fn special_with(&self, r: u8, d: u32, c: &Constraint, extra: &[u32], u: u32, v: u32) -> EngineResult<Count> {
        match decorate(r, d, *c, extra) {
            Some((f, c)) => Ok(f * self.special_raw(r, d, &c, u, v)?),
            None => Ok(Count::zero()),
        }
    }

    fn special_divisor(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        if v == 0 {
            return Ok(self.rational_with(r, d, c, &[u]));
        }
        if d == 1 {
            // the tangent line is the line itself
            return self.special_with(r, 1, c, &[2], u, v - 1);
        }
        let dd = i64::from(d);
        let mut total = ratio(2 * dd - 2, dd) * self.special_raw(r, d, c, u + 1, v - 1)?
            + ratio(1, dd * dd) * self.special_with(r, d, c, &[2], u, v - 1)?;
        for j in 1..d {
            let jj = i64::from(j);
            total += ratio((dd - jj) * (dd - jj), dd * dd) * self.marked_component_pair(r, j, d - j, c, u, v - 1)?;
        }
        if v >= 2 {
            // Only the locus with A on a contracted component meeting two
            // others has excess dimension for v <= 3.
            debug_assert!(v <= 3, "higher excess loci are not modelled");
            for j in 1..d {
                let jj = i64::from(j);
                let weight = ratio(2 * jj * jj - 2 * jj * dd, 2 * dd * dd);
                total += weight * self.contracted_excess(r, j, d - j, c, u, v)?;
            }
        }
        Ok(total)
    }

    /// Degree `j` component carrying `A` (with `v` special tangents) glued to
    /// a degree `d2` component; ordered, since `A` tells the sides apart.
    fn marked_component_pair(&self, r: u8, j: u32, d2: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        let mut total = Count::zero();
        for split in glue_splits(r, 0, c) {
            let mut sum = Count::zero();
            for (a, b) in diagonal_splits(r, split.raised) {
                let right = self.rational_with(r, d2, &split.second, &[b]);
                if right.is_zero() {
                    continue;
                }
                sum += self.special_with(r, j, &split.first, &[a], u, v)? * right;
            }
            total += sum * split.weight;
        }
        Ok(total)
    }

    /// Ordered pairs of components meeting at `A`. With `v = 2` both are
    /// plain; with `v = 3` the remaining special tangent sits on either one.
    fn contracted_excess(&self, r: u8, j: u32, d2: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        let mut total = Count::zero();
        for split in glue_splits(r, u, c) {
            let mut sum = Count::zero();
            for (a, b) in diagonal_splits(r, split.raised) {
                if v == 2 {
                    let left = self.rational_with(r, j, &split.first, &[a]);
                    if !left.is_zero() {
                        sum += left * self.rational_with(r, d2, &split.second, &[b]);
                    }
                } else {
                    sum += self.special_raw(r, j, &split.first, a, 1)?
                        * self.rational_with(r, d2, &split.second, &[b]);
                    sum += self.rational_with(r, j, &split.first, &[a])
                        * self.special_raw(r, d2, &split.second, b, 1)?;
                }
            }
            total += sum * split.weight;
        }
        Ok(total)
    }

    fn special_blowup(&self, r: u8, d: u32, c: &Constraint, u: u32, v: u32) -> EngineResult<Count> {
        let Some(t) = self.family_class_raw(r, d, c)? else {
            return Ok(Count::zero());
        };
        let h = ExactClass::h(r);
        let e = ExactClass::e(r);
        let tangent = &(&h + &ExactClass::k(r)) - &e;
        let test = &(&h.pow(u) * &e) * &tangent.pow(v);
        Ok(t.pairing(&test))
    }
}

/// The divisor expansion is valid while the excess loci it ignores are empty.
fn divisor_expansion_applies(r: u8, v: u32) -> bool {
    v <= 3 && v + 2 <= u32::from(r)
}
