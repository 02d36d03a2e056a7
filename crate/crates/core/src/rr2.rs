//! Two rational components meeting twice. The image of a two-marked family
//! under `(A, C)` has a class in the blowup of `P^r x P^r` along the
//! diagonal; it is recovered from one- and two-marked counts, and pairs of
//! such classes are intersected to count curves meeting at two points.

use std::sync::Arc;

use num_traits::Zero;

use crate::cache::CountKey;
use crate::chow_blowup::{monomial_basis, Monomial};
use crate::constraints::{expected_dimension, Constraint, FamilyHandle};
use crate::engine::{check_ambient, check_codims, glue_splits, Engine, EngineError, EngineResult};
use crate::linalg::solve;
use crate::scalar::Count;
use crate::ExactClass;

/// Class of the `(A, C)` image of a constrained two-marked family, together
/// with the counts it was solved from.
#[derive(Debug, Clone)]
pub struct FamilyClass {
    pub r: u8,
    pub d: u32,
    pub constraint: Constraint,
    pub class: Arc<ExactClass>,
    /// `(test class, count)` pairs the class reproduces.
    pub determining: Vec<(ExactClass, Count)>,
}

impl FamilyClass {
    /// Codimension of the class in the blowup.
    pub fn codim(&self) -> u32 {
        self.class.homogeneous_degree().unwrap_or(0)
    }

    /// Pair the class against every determining product and compare with
    /// the input counts.
    pub fn round_trip(&self) -> bool {
        self.determining.iter().all(|(test, count)| self.class.pairing(test) == *count)
    }
}

impl Engine {
    /// Class of the closure of `(A, C)` over degree-`d` curves satisfying
    /// `c`, or `None` when the image is empty for dimension reasons.
    pub fn family_class(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Option<FamilyClass>> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        let Some(class) = self.family_class_raw(r, d, c)? else {
            return Ok(None);
        };
        let dim = family_dimension(r, d, c) as u32;
        let determining = self
            .determining_products(r, d, c, dim)?
            .into_iter()
            
            .collect();
        Ok(Some(FamilyClass { r, d, constraint: *c, class, determining }))
    }

    pub(crate) fn family_class_raw(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Option<Arc<ExactClass>>> {
        let key = (r, d, *c);
        if let Some(hit) = self.classes.read().get(&key) {
            return Ok(hit.clone());
        }
        let dim = family_dimension(r, d, c);
        let top = 2 * i64::from(r);
        let computed = if dim < 0 || dim > top || c.max_codim() > u32::from(r) {
            None
        } else {
            Some(Arc::new(self.solve_family_class(r, d, c, dim as u32)?))
        };
        self.classes.write().insert(key, computed.clone());
        Ok(computed)
    }

    fn determining_products(&self, r: u8, d: u32, c: &Constraint, dim: u32) -> EngineResult<Vec<(ExactClass, Count)>> {
        let rr = u32::from(r);
        let mut rows = Vec::new();
        for m in 0..=dim.min(rr) {
            let n = dim - m;
            if n > rr {
                continue;
            }
            let test = ExactClass::monomial(r, Monomial::new(m, n, 0), Count::from_integer(1.into()));
            rows.push((test, self.rational_with(r, d, c, &[m, n])));
        }
        let h = ExactClass::h(r);
        let e = ExactClass::e(r);
        let tangent = &(&h + &ExactClass::k(r)) - &e;
        for n in 0..=rr.saturating_sub(2) {
            let Some(m) = dim.checked_sub(1 + n) else { break };
            if m > rr {
                continue;
            }
            let test = &(&h.pow(m) * &e) * &tangent.pow(n);
            rows.push((test, self.special_raw(r, d, c, m, n)?));
        }
        Ok(rows)
    }

    fn solve_family_class(&self, r: u8, d: u32, c: &Constraint, dim: u32) -> EngineResult<ExactClass> {
        let codim = 2 * u32::from(r) - dim;
        let basis: Vec<ExactClass> = monomial_basis(r, codim)
            .into_iter()
            .map(|m| ExactClass::monomial(r, m, Count::from_integer(1.into())))
            .collect();
        let rows = self.determining_products(r, d, c, dim)?;
        let matrix: Vec<Vec<Count>> = rows
            .iter()
            .map(|(test, _)| basis.iter().map(|b| b.pairing(test)).collect())
            .collect();
        let rhs: Vec<Count> = rows.iter().map(|(_, v)| v.clone()).collect();
        let coeffs = solve(&matrix, &rhs).map_err(|source| EngineError::FamilyClass {
            d,
            constraint: c.to_string(),
            source,
        })?;
        let mut class = ExactClass::zero(r);
        for (b, x) in basis.iter().zip(coeffs) {
            if !x.is_zero() {
                class = &class + &b.scale(&x);
            }
        }
        Ok(class)
    }

    /// Ordered pairs (degree `d1` with `g1`, degree `d2` with `g2`) glued at
    /// `C`, meeting again at a second point; the second meeting point lies
    /// on a general codim-`k` space and `C` on a codim-`l` space.
    #[allow(clippy::too_many_arguments)]
    pub fn rr2(&self, r: u8, d1: u32, d2: u32, g1: &Constraint, g2: &Constraint, k: u32, l: u32) -> EngineResult<Count> {
        check_ambient(r)?;
        check_codims(r, g1)?;
        check_codims(r, g2)?;
        if d1 == 0 || d2 == 0 {
            return Err(EngineError::ZeroDegree);
        }
        let dim = family_dimension(r, d1, g1) + family_dimension(r, d2, g2) - 2 * i64::from(r) - i64::from(k + l);
        if dim > 0 {
            return Err(EngineError::PositiveDimension(dim));
        }
        self.rr2_raw(r, d1, d2, g1, g2, k, l)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn rr2_raw(&self, r: u8, d1: u32, d2: u32, g1: &Constraint, g2: &Constraint, k: u32, l: u32) -> EngineResult<Count> {
        let rr = u32::from(r);
        let (f1, f2) = (family_dimension(r, d1, g1), family_dimension(r, d2, g2));
        if k > rr || l > rr || f1 + f2 != 2 * i64::from(r) + i64::from(k + l) {
            return Ok(Count::zero());
        }
        let key = CountKey::Rr2 { r, d1, d2, g1: *g1, g2: *g2, k, l };
        self.cache.get_or_try_compute(key, || {
            let (Some(t1), Some(t2)) = (self.family_class_raw(r, d1, g1)?, self.family_class_raw(r, d2, g2)?) else {
                return Ok(Count::zero());
            };
            let nodes = ExactClass::monomial(r, Monomial::new(k, l, 0), Count::from_integer(1.into()));
            Ok((&*t1 * &*t2).pairing(&nodes))
        })
    }

    /// Ordered pairs of degrees `(d1, d2)` satisfying `c` jointly: the
    /// constraint is distributed over both components in every way, and
    /// tangencies may fall on `C`.
    pub fn rr2_total(&self, r: u8, d1: u32, d2: u32, c: &Constraint, k: u32, l: u32) -> EngineResult<Count> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d1 == 0 || d2 == 0 {
            return Err(EngineError::ZeroDegree);
        }
        self.rr2_total_raw(r, d1, d2, c, k, l)
    }

    pub(crate) fn rr2_total_raw(&self, r: u8, d1: u32, d2: u32, c: &Constraint, k: u32, l: u32) -> EngineResult<Count> {
        let key = CountKey::Rr2Total { r, d1, d2, c: c.without_node(), k, l };
        self.cache.get_or_try_compute(key, || {
            let mut total = Count::zero();
            for split in glue_splits(r, l, c) {
                let v = self.rr2_raw(r, d1, d2, &split.first, &split.second, k, split.raised)?;
                total += v * split.weight;
            }
            Ok(total)
        })
    }
}

/// Dimension of the `(A, C)` image of the two-marked family.
pub fn family_dimension(r: u8, d: u32, c: &Constraint) -> i64 {
    expected_dimension(FamilyHandle::TwoMarked { r, d, a: 0, c: 0 }, c)
}
