//! Shared evaluation context and the helpers every recursion uses to glue
//! two components together.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

use crate::cache::Cache;
use crate::constraints::{Constraint, MAX_R};
use crate::linalg::SolveError;
use crate::scalar::{binomial, Count};
use crate::ExactClass;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("ambient dimension {0} outside 2..=5")]
    Ambient(u8),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("condition codimension {codim} exceeds the ambient dimension {r}")]
    Codim { codim: u32, r: u8 },
    #[error("expected dimension is {0}, the count is not finite")]
    PositiveDimension(i64),
    #[error("a node condition is required here")]
    MissingNode,
    #[error("a node condition is not allowed here")]
    UnexpectedNode,
    #[error("family class for degree {d} with {constraint} could not be solved: {source}")]
    FamilyClass { d: u32, constraint: String, source: SolveError },
    #[error("{0}")]
    RouteUnavailable(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type EngineResult<T> = Result<T, EngineError>;

/// How the incidence recursion for nodal curves picks the distinguished elements
/// `s`, `t` after `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// `s`, `t` are the next two elements in ascending codimension.
    #[default]
    Ascending,
    /// `s`, `t` are the two largest-codimension elements.
    Descending,
}

type ClassKey = (u8, u32, Constraint);

/// Evaluation context holding the memo tables. Cheap to share across
/// threads; all methods take `&self`.
#[derive(Default)]
pub struct Engine {
    pub(crate) cache: Cache,
    pub(crate) classes: RwLock<HashMap<ClassKey, Option<Arc<ExactClass>>>>,
    pub(crate) selection: Selection,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cache(cache: Cache) -> Self {
        Engine { cache, ..Default::default() }
    }

    /// An engine whose nodal recursion uses another admissible choice of
    /// the auxiliary elements. Used to check choice independence.
    pub fn with_selection(selection: Selection) -> Self {
        Engine { selection, ..Default::default() }
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn clear(&self) {
        self.cache.clear();
        self.classes.write().clear();
    }
}

pub(crate) fn check_ambient(r: u8) -> EngineResult<()> {
    if (2..=MAX_R).contains(&r) {
        Ok(())
    } else {
        Err(EngineError::Ambient(r))
    }
}

pub(crate) fn check_codims(r: u8, c: &Constraint) -> EngineResult<()> {
    match c.max_codim() {
        m if m > u32::from(r) => Err(EngineError::Codim { codim: m, r }),
        _ => Ok(()),
    }
}

/// Add incidence conditions of the listed codimensions to `base` on a
/// degree-`d` component. Hyperplanes become factors of `d`; empty
/// conditions (codim 0 for marked points, or above `r`) give `None`.
pub(crate) fn decorate(r: u8, d: u32, base: Constraint, extra: &[u32]) -> Option<(Count, Constraint)> {
    let mut c = base;
    let mut factor = 1u64;
    for &codim in extra {
        match codim {
            0 => return None,
            1 => factor *= u64::from(d),
            x if x > u32::from(r) => return None,
            x => c = c.with_incidence(x, 1),
        }
    }
    Some((Count::from_integer(factor.into()), c))
}

/// Split of a constraint between two glued components, following the
/// tangency distribution rule: `l` tangencies move onto the gluing point
/// (raising its codimension by `l`, weight `2^l C(t, l)`) and the rest are
/// shared out with weight `C(t - l, t1)`; incidences split in every
/// labelled way.
pub(crate) struct GlueSplit {
    pub first: Constraint,
    pub second: Constraint,
    pub raised: u32,
    pub weight: Count,
}

pub(crate) fn glue_splits(r: u8, base_node: u32, c: &Constraint) -> Vec<GlueSplit> {
    let t = c.tangencies;
    let incidences = c.without_node().with_tangencies(0);
    let mut out = Vec::new();
    for l in 0..=t {
        let raised = base_node + l;
        if raised > 2 * u32::from(r) {
            break;
        }
        let wl = (1u64 << l) * binomial(t, l);
        for t1 in 0..=t - l {
            let wt = wl * binomial(t - l, t1);
            for (g1, g2, m) in incidences.partitions() {
                out.push(GlueSplit {
                    first: g1.with_tangencies(t1),
                    second: g2.with_tangencies(t - l - t1),
                    raised,
                    weight: Count::from_integer((wt * m).into()),
                });
            }
        }
    }
    out
}

/// Pairs `(a, b)` of marked-point codimensions with `a + b = r + k`,
/// `0 <= a, b <= r`: the diagonal of `P^r` cut with a codim-`k` condition.
pub(crate) fn diagonal_splits(r: u8, k: u32) -> impl Iterator<Item = (u32, u32)> {
    let r = u32::from(r);
    let total = r + k;
    (total.saturating_sub(r)..=r.min(total)).map(move |a| (a, total - a))
}

pub(crate) fn ratio(n: i64, d: i64) -> Count {
    Count::new(n.into(), d.into())
}
