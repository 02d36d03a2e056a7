//! Rational curves with a chosen node, and elliptic curves with fixed
//! generic j-invariant.
//!
//! Counts use the unordered node: a curve with one node counts once, not
//! once per ordering of the two preimages.

use num_traits::Zero;

use crate::cache::CountKey;
use crate::constraints::{expected_dimension, is_lower, Constraint, FamilyHandle};
use crate::engine::{
    check_ambient, check_codims, decorate, diagonal_splits, glue_splits, ratio, Engine, EngineError,
    EngineResult, Selection,
};
use crate::scalar::{binomial, Count};

impl Engine {
    /// Degree-`d` rational curves in `P^r` satisfying `c`, with a node on a
    /// general codim-`k` space where `k = c.node`.
    pub fn nodal(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        let k = c.node.ok_or(EngineError::MissingNode)?;
        if k > u32::from(r) {
            return Err(EngineError::Codim { codim: k, r });
        }
        let dim = expected_dimension(FamilyHandle::Nodal { r, d }, c);
        if dim > 0 {
            return Err(EngineError::PositiveDimension(dim));
        }
        self.nodal_raw(r, d, c)
    }

    /// Elliptic curves of degree `d` with fixed generic j-invariant
    /// satisfying `c`.
    pub fn elliptic(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        check_ambient(r)?;
        check_codims(r, c)?;
        if d == 0 {
            return Err(EngineError::ZeroDegree);
        }
        if c.node.is_some() {
            return Err(EngineError::UnexpectedNode);
        }
        let dim = expected_dimension(FamilyHandle::Nodal { r, d }, c);
        if dim > 0 {
            return Err(EngineError::PositiveDimension(dim));
        }
        let key = CountKey::Elliptic { r, d, c: *c };
        self.cache.get_or_try_compute(key, || {
            let t = c.tangencies;
            let mut total = Count::zero();
            for i in 0..=t.min(u32::from(r)) {
                let weight = Count::from_integer(((1u64 << i) * binomial(t, i)).into());
                let ci = c.with_tangencies(t - i).with_node(i);
                total += weight * self.nodal_raw(r, d, &ci)?;
            }
            Ok(total)
        })
    }

    pub(crate) fn nodal_raw(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        let k = c.node.unwrap_or(0);
        let c = c.with_node(k);
        if d <= 1
            || k > u32::from(r)
            || c.max_codim() > u32::from(r)
            || expected_dimension(FamilyHandle::Nodal { r, d }, &c) != 0
        {
            return Ok(Count::zero());
        }
        let key = CountKey::Nodal { r, d, c };
        self.cache.get_or_try_compute(key, || {
            if c.tangencies > 0 {
                self.nodal_tangency(r, d, &c)
            } else if d == 2 {
                // a double cover of a line meets incidence conditions only
                // in positive-dimensional families
                Ok(Count::zero())
            } else {
                self.nodal_incidence(r, d, &c)
            }
        })
    }

    fn nodal_with(&self, r: u8, d: u32, c: &Constraint, extra: &[u32]) -> EngineResult<Count> {
        match decorate(r, d, *c, extra) {
            Some((f, c)) => Ok(f * self.nodal_raw(r, d, &c)?),
            None => Ok(Count::zero()),
        }
    }

    /// One tangency traded for the tangency divisor relation.
    fn nodal_tangency(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        let k = c.node.unwrap_or(0);
        let rest = c.remove_tangency().expect("tangency present");
        let dd = i64::from(d);
        let mut total = ratio(dd - 1, dd) * self.nodal_with(r, d, &rest, &[2])?;
        let free = rest.without_node();
        for d1 in 1..d {
            let d2 = d - d1;
            let weight = ratio(i64::from(d1 * d2), dd);
            let mut boundary = self.nodal_rational_pair(r, d1, d2, &free, k)?;
            // the two meeting points are unordered in the nodal family
            boundary += self.rr2_total_raw(r, d1, d2, &free, k, 0)? * ratio(1, 2);
            total += weight * boundary;
        }
        Ok(total)
    }

    /// A nodal component of degree `d1` (node on a codim-`k` space) glued
    /// to a rational component of degree `d2`, `c` distributed over both.
    fn nodal_rational_pair(&self, r: u8, d1: u32, d2: u32, c: &Constraint, k: u32) -> EngineResult<Count> {
        let mut total = Count::zero();
        for split in glue_splits(r, 0, c) {
            let mut sum = Count::zero();
            for (a, b) in diagonal_splits(r, split.raised) {
                let right = self.rational_with(r, d2, &split.second, &[b]);
                if right.is_zero() {
                    continue;
                }
                sum += self.nodal_with(r, d1, &split.first.with_node(k), &[a])? * right;
            }
            total += sum * split.weight;
        }
        Ok(total)
    }

    /// Incidence-only recursion from the cross-ratio relation on four
    /// marked points `p, q, s, t`, where `p` is a hyperplane and
    /// `p ∩ q = u`.
    fn nodal_incidence(&self, r: u8, d: u32, c: &Constraint) -> EngineResult<Count> {
        let k = c.node.unwrap_or(0);
        let codims = c.codims();
        if codims.len() < 3 {
            return Err(EngineError::Invariant(format!(
                "nodal recursion needs three incidence conditions, got {c}"
            )));
        }
        let (u, s, t) = match self.selection {
            Selection::Ascending => (codims[0], codims[1], codims[2]),
            Selection::Descending => (codims[0], codims[codims.len() - 1], codims[codims.len() - 2]),
        };
        let tilde = c
            .remove_incidence(u)
            .and_then(|x| x.remove_incidence(s))
            .and_then(|x| x.remove_incidence(t))
            .expect("chosen codims are present");
        let (p, q) = (1, u - 1);

        let derived: [(i64, Vec<u32>); 3] = [
            (1, vec![q, p + s, t]),
            (1, vec![p, q + t, s]),
            (-1, vec![p, q, s + t]),
        ];
        let mut total = Count::zero();
        for (sign, extra) in derived {
            if let Some((f, dc)) = decorate(r, d, tilde, &extra) {
                if !is_lower(&dc, c) {
                    return Err(EngineError::Invariant(format!("{dc} is not lower than {c}")));
                }
                total += Count::from_integer(sign.into()) * f * self.nodal_raw(r, d, &dc)?;
            }
        }

        let tilde_free = tilde.without_node();
        for d1 in 1..d {
            let d2 = d - d1;
            for (g1, g2, m) in tilde_free.partitions() {
                let m = Count::from_integer(m.into());
                let plus = self.nodal_split_terms(r, (d1, &g1, &[p, s]), (d2, &g2, &[q, t]), k)?;
                let minus = self.nodal_split_terms(r, (d1, &g1, &[p, q]), (d2, &g2, &[s, t]), k)?;
                total += m * (plus - minus);
            }
        }
        Ok(total)
    }

    /// Boundary contributions when the four marks split as given: the node
    /// on either component, or the two components meeting twice.
    fn nodal_split_terms(
        &self,
        r: u8,
        (d1, g1, x1): (u32, &Constraint, &[u32]),
        (d2, g2, x2): (u32, &Constraint, &[u32]),
        k: u32,
    ) -> EngineResult<Count> {
        let (Some((f1, g1)), Some((f2, g2))) = (decorate(r, d1, *g1, x1), decorate(r, d2, *g2, x2)) else {
            return Ok(Count::zero());
        };
        let mut sum = Count::zero();
        for (a, b) in diagonal_splits(r, 0) {
            let right = self.rational_with(r, d2, &g2, &[b]);
            if !right.is_zero() {
                sum += self.nodal_with(r, d1, &g1.with_node(k), &[a])? * right;
            }
            let left = self.rational_with(r, d1, &g1, &[a]);
            if !left.is_zero() {
                sum += left * self.nodal_with(r, d2, &g2.with_node(k), &[b])?;
            }
        }
        sum += self.rr2_raw(r, d1, d2, &g1, &g2, k, 0)?;
        Ok(f1 * f2 * sum)
    }
}
