//! Irreducible rational curves: incidence counts through the associativity
//! recursion for genus-zero invariants of `P^r`, and tangency conditions
//! through the tangency divisor relation on the space of stable maps.

use num_traits::Zero;

use crate::cache::CountKey;
use crate::constraints::{expected_dimension, Constraint, FamilyHandle};
use crate::engine::{
    check_ambient, check_codims, decorate, diagonal_splits, glue_splits, ratio, Engine, EngineError,
    EngineResult,
};
use crate::scalar::Count;

impl Engine {
    /// Degree-`d` rational curves in `P^r` satisfying `c` (no node).
    pub fn rational(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        if c.node.is_some() {
            return Err(EngineError::UnexpectedNode);
        }
        let dim = expected_dimension(FamilyHandle::Rational { r, d }, c);
        if dim > 0 {
            return Err(EngineError::PositiveDimension(dim));
        }
        Ok(self.rational_raw(r, d, c))
    }

    /// Genus-zero invariant with a marked point on a general space of each
    /// listed codimension (`1..=r`).
    pub fn gw_incidence(&self, r: u8, d: u32, codims: &[u32]) -> EngineResult<Count> {
        check_ambient(r)?;
        if let Some(&bad) = codims.iter().find(|&&c| c == 0 || c > u32::from(r)) {
            return Err(EngineError::Codim { codim: bad, r });
        }
        match decorate(r, d, Constraint::empty(), codims) {
            Some((f, c)) => Ok(f * self.rational(r, d, &c)?),
            None => Ok(Count::zero()),
        }
    }

    /// Unchecked count; zero whenever the conditions are not zero-dimensional.
    pub(crate) fn rational_raw(&self, r: u8, d: u32, c: &Constraint) -> Count {
        if d == 0
            || c.max_codim() > u32::from(r)
            || expected_dimension(FamilyHandle::Rational { r, d }, c) != 0
        {
            return Count::zero();
        }
        let key = CountKey::Rational { r, d, c: *c };
        self.cache.get_or_compute(key, || {
            if c.tangencies == 0 {
                self.incidence_recursion(r, d, c)
            } else {
                self.tangency_recursion(r, d, c)
            }
        })
    }

    /// `rational_raw` after adding the listed conditions.
    pub(crate) fn rational_with(&self, r: u8, d: u32, base: &Constraint, extra: &[u32]) -> Count {
        match decorate(r, d, *base, extra) {
            Some((f, c)) => f * self.rational_raw(r, d, &c),
            None => Count::zero(),
        }
    }

    fn incidence_recursion(&self, r: u8, d: u32, c: &Constraint) -> Count {
        let codims = c.codims();
        if codims.len() < 3 {
            // dimension count leaves only lines through two points
            return if d == 1 && codims == [u32::from(r), u32::from(r)] {
                Count::from_integer(1.into())
            } else {
                Count::zero()
            };
        }
        let (a, b, cc) = (codims[0], codims[1], codims[2]);
        let rest = c
            .remove_incidence(a)
            .and_then(|x| x.remove_incidence(b))
            .and_then(|x| x.remove_incidence(cc))
            .expect("chosen codims are present");
        let df = Count::from_integer(d.into());
        let mut total = df.clone() * self.rational_with(r, d, &rest, &[a + b - 1, cc])
            + self.rational_with(r, d, &rest, &[a - 1, b, cc + 1])
            - df * self.rational_with(r, d, &rest, &[a - 1, b + cc]);
        let rr = u32::from(r);
        for d1 in 1..d {
            let d2 = d - d1;
            for (r1, r2, m) in rest.partitions() {
                let mut sum = Count::zero();
                for e in 0..=rr {
                    let f = rr - e;
                    let left = self.rational_with(r, d1, &r1, &[a - 1, b, e]);
                    if !left.is_zero() {
                        sum += left * self.rational_with(r, d2, &r2, &[f, 1, cc]);
                    }
                    let left = self.rational_with(r, d1, &r1, &[a - 1, 1, e]);
                    if !left.is_zero() {
                        sum -= left * self.rational_with(r, d2, &r2, &[f, b, cc]);
                    }
                }
                total += sum * Count::from_integer(m.into());
            }
        }
        total
    }

    fn tangency_recursion(&self, r: u8, d: u32, c: &Constraint) -> Count {
        if d == 1 {
            return Count::zero();
        }
        let rest = c.remove_tangency().expect("tangency present");
        let mut total = ratio(i64::from(d) - 1, i64::from(d)) * self.rational_with(r, d, &rest, &[2]);
        for d1 in 1..d {
            let d2 = d - d1;
            // ordered degree splits, each unordered boundary divisor twice
            let weight = ratio(i64::from(d1 * d2), 2 * i64::from(d));
            total += weight * self.glued_rational_pair(r, d1, d2, &rest, 0);
        }
        total
    }

    /// Ordered pairs of rational curves of degrees `d1`, `d2` meeting at a
    /// point on a general codim-`node` space, with `c` distributed over the
    /// two components and tangencies allowed to fall on the node.
    pub(crate) fn glued_rational_pair(&self, r: u8, d1: u32, d2: u32, c: &Constraint, node: u32) -> Count {
        let mut total = Count::zero();
        for split in glue_splits(r, node, c) {
            let mut sum = Count::zero();
            for (a, b) in diagonal_splits(r, split.raised) {
                let left = self.rational_with(r, d1, &split.first, &[a]);
                if !left.is_zero() {
                    sum += left * self.rational_with(r, d2, &split.second, &[b]);
                }
            }
            total += sum * split.weight;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn points(r: u8, n: u32) -> Constraint {
        Constraint::empty().with_incidence(u32::from(r), n)
    }

    #[test]
    fn plane_curves_through_points() {
        let e = Engine::new();
        assert_eq!(e.rational(2, 1, &points(2, 2)).unwrap(), int(1));
        assert_eq!(e.rational(2, 2, &points(2, 5)).unwrap(), int(1));
        assert_eq!(e.rational(2, 3, &points(2, 8)).unwrap(), int(12));
        assert_eq!(e.rational(2, 4, &points(2, 11)).unwrap(), int(620));
        assert_eq!(e.rational(2, 5, &points(2, 14)).unwrap(), int(87304));
    }

    #[test]
    fn space_curves() {
        let e = Engine::new();
        assert_eq!(e.rational(3, 1, &Constraint::empty().with_incidence(2, 4)).unwrap(), int(2));
        assert_eq!(e.rational(3, 2, &points(3, 4)).unwrap(), int(0));
        let c = Constraint::empty().with_incidence(3, 3).with_incidence(2, 2);
        assert_eq!(e.rational(3, 2, &c).unwrap(), int(1));
        // twisted cubics through 6 points
        assert_eq!(e.rational(3, 3, &points(3, 6)).unwrap(), int(1));
    }

    #[test]
    fn conics_with_tangencies() {
        let e = Engine::new();
        let expect = [1, 2, 4, 4, 2, 1];
        for (t, &n) in expect.iter().enumerate() {
            let c = points(2, 5 - t as u32).with_tangencies(t as u32);
            assert_eq!(e.rational(2, 2, &c).unwrap(), int(n), "t={t}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let e = Engine::new();
        assert!(matches!(e.rational(2, 2, &points(2, 4)), Err(EngineError::PositiveDimension(1))));
        assert_eq!(e.rational(2, 2, &points(2, 6)).unwrap(), int(0));
        assert!(e.rational(6, 1, &points(2, 2)).is_err());
        assert!(e.rational(2, 0, &points(2, 2)).is_err());
    }

    #[test]
    fn glued_lines_in_the_plane() {
        // ordered pairs of lines through 2 + 2 of 4 points; they always meet
        let e = Engine::new();
        assert_eq!(e.glued_rational_pair(2, 1, 1, &points(2, 4), 0), int(6));
    }

    #[test]
    fn glued_lines_in_space() {
        // one line through 2 of 3 points, the other through the third point
        // and a fixed line, meeting the first
        let e = Engine::new();
        let c = points(3, 3).with_incidence(2, 1);
        assert_eq!(e.glued_rational_pair(3, 1, 1, &c, 0), int(6));
    }

    #[test]
    fn glued_pairs_are_symmetric() {
        let e = Engine::new();
        let c = points(3, 2).with_incidence(2, 4).with_tangencies(1);
        for node in 0..=2 {
            assert_eq!(e.glued_rational_pair(3, 1, 2, &c, node), e.glued_rational_pair(3, 2, 1, &c, node));
        }
    }
}
