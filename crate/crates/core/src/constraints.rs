//! Constraint bookkeeping: tangencies, incidences by codimension, and an
//! optional condition on the node.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use thiserror::Error;

use crate::scalar::{binomial, Count};

/// Largest ambient dimension supported.
pub const MAX_R: u8 = 5;
const SLOTS: usize = MAX_R as usize + 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("malformed constraint field `{0}`")]
    Field(String),
    #[error("codimension {codim} out of range 1..={r}")]
    Codim { codim: u32, r: u8 },
    #[error("node codimension {0} exceeds the ambient dimension")]
    Node(u32),
}

/// Tangency count, incidence counts for codimensions `2..=r`, and an optional
/// codimension for the node. Hyperplane incidences are never stored; see
/// [`normalize_hyperplanes`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Constraint {
    pub tangencies: u32,
    incidences: [u32; SLOTS],
    pub node: Option<u32>,
}

impl Constraint {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_tangencies(mut self, t: u32) -> Self {
        self.tangencies = t;
        self
    }

    pub fn with_incidence(mut self, codim: u32, count: u32) -> Self {
        assert!((2..SLOTS as u32).contains(&codim), "incidence codim {codim} not storable");
        self.incidences[codim as usize] += count;
        self
    }

    pub fn with_node(mut self, k: u32) -> Self {
        self.node = Some(k);
        self
    }

    pub fn without_node(mut self) -> Self {
        self.node = None;
        self
    }

    /// Number of incidences of the given codimension.
    pub fn count(&self, codim: u32) -> u32 {
        self.incidences.get(codim as usize).copied().unwrap_or(0)
    }

    /// Sorted `(codim, count)` pairs with nonzero count.
    pub fn incidence_pairs(&self) -> Vec<(u32, u32)> {
        (2..SLOTS)
            .filter(|&c| self.incidences[c] > 0)
            .map(|c| (c as u32, self.incidences[c]))
            .collect()
    }

    /// Codimensions of all incidence conditions, ascending, with repetition.
    pub fn codims(&self) -> Vec<u32> {
        self.incidence_pairs()
            .into_iter()
            .flat_map(|(c, n)| std::iter::repeat_n(c, n as usize))
            .collect()
    }

    pub fn max_codim(&self) -> u32 {
        self.incidence_pairs().last().map_or(0, |p| p.0)
    }

    /// Number of non-hyperplane incidence conditions.
    pub fn incidence_total(&self) -> u32 {
        self.incidences.iter().sum()
    }

    /// Dimensions cut by incidences: a codim-`c` condition costs `c - 1`.
    pub fn incidence_cost(&self) -> u32 {
        (2..SLOTS).map(|c| self.incidences[c] * (c as u32 - 1)).sum()
    }

    pub fn remove_incidence(mut self, codim: u32) -> Option<Self> {
        let slot = self.incidences.get_mut(codim as usize)?;
        if *slot == 0 {
            return None;
        }
        *slot -= 1;
        Some(self)
    }

    pub fn remove_tangency(mut self) -> Option<Self> {
        self.tangencies = self.tangencies.checked_sub(1)?;
        Some(self)
    }

    /// Canonical key `(tangencies, non-hyperplane count, rank)`.
    pub fn rank_key(&self) -> RankKey {
        RankKey {
            tangencies: self.tangencies,
            elements: self.incidence_total(),
            rank: self.rank_value(),
        }
    }

    /// `-sum_{i>=2} count(i) * i^2`.
    pub fn rank_value(&self) -> i64 {
        -(2..SLOTS)
            .map(|c| i64::from(self.incidences[c]) * (c as i64) * (c as i64))
            .sum::<i64>()
    }

    /// Every ordered split of the incidence conditions into two sides, with
    /// the number of labelled splits it represents. Tangencies and node stay
    /// with neither side.
    pub fn partitions(&self) -> Partitions {
        Partitions::new(self)
    }

    pub fn text(&self) -> String {
        self.to_string()
    }
}

/// Lexicographic ranking triple for the recursion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RankKey {
    pub tangencies: u32,
    pub elements: u32,
    pub rank: i64,
}

/// Total preorder on constraints used by the nodal recursion. Within equal
/// tangency counts, fewer non-hyperplane elements is smaller; more
/// tangencies is smaller; then smaller rank value. Remaining ties are broken
/// lexicographically on the fields.
pub fn compare(a: &Constraint, b: &Constraint) -> Ordering {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    let by_elements = if ka.tangencies == kb.tangencies {
        ka.elements.cmp(&kb.elements)
    } else {
        Ordering::Equal
    };
    by_elements
        .then_with(|| kb.tangencies.cmp(&ka.tangencies))
        .then_with(|| ka.rank.cmp(&kb.rank))
        .then_with(|| a.incidences.cmp(&b.incidences))
        .then_with(|| a.node.cmp(&b.node))
}

/// Strict "lower rank" relation used as the termination witness.
pub fn is_lower(a: &Constraint, b: &Constraint) -> bool {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    if ka.tangencies == kb.tangencies && ka.elements != kb.elements {
        return ka.elements < kb.elements;
    }
    if ka.tangencies != kb.tangencies {
        return ka.tangencies > kb.tangencies;
    }
    ka.rank < kb.rank
}

impl PartialOrd for Constraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Constraint {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

pub struct Partitions {
    source: Constraint,
    current: [u32; SLOTS],
    done: bool,
}

impl Partitions {
    fn new(c: &Constraint) -> Self {
        Partitions { source: *c, current: [0; SLOTS], done: false }
    }
}

impl Iterator for Partitions {
    /// `(first side, second side, multiplicity)`
    type Item = (Constraint, Constraint, u64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut left = Constraint::empty();
        let mut right = Constraint::empty();
        let mut mult = 1u64;
        for c in 2..SLOTS {
            let total = self.source.incidences[c];
            let here = self.current[c];
            left.incidences[c] = here;
            right.incidences[c] = total - here;
            mult *= binomial(total, here);
        }
        // odometer step
        self.done = true;
        for c in 2..SLOTS {
            if self.current[c] < self.source.incidences[c] {
                self.current[c] += 1;
                self.done = false;
                break;
            }
            self.current[c] = 0;
        }
        Some((left, right, mult))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t:{}", self.tangencies)?;
        for (c, n) in self.incidence_pairs() {
            write!(f, ";c{c}:{n}")?;
        }
        if let Some(k) = self.node {
            write!(f, ";node:{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Constraint({self})")
    }
}

/// A constraint as a user writes it, possibly with hyperplane incidences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawConstraint {
    pub tangencies: u32,
    /// `(codim, count)`; codim 1 allowed.
    pub incidences: Vec<(u32, u32)>,
    pub node: Option<u32>,
}

impl RawConstraint {
    /// Read a tuple `(Delta(0), Delta(1), ..., Delta(r)[, node])`.
    pub fn from_tuple(values: &[u32], r: u8, with_node: bool) -> Self {
        let r = usize::from(r);
        let mut raw = RawConstraint { tangencies: values[0], ..Default::default() };
        for (i, &n) in values.iter().enumerate().take(r + 1).skip(1) {
            if n > 0 {
                raw.incidences.push((i as u32, n));
            }
        }
        if with_node && values.len() > r + 1 {
            raw.node = Some(values[r + 1]);
        }
        raw
    }

    /// Parse `t:<n>;c2:<n>;...;node:<k>`; field order is irrelevant.
    pub fn parse(text: &str, r: u8) -> Result<Self, ConstraintError> {
        let mut raw = RawConstraint::default();
        for field in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = field
                .split_once(':')
                .ok_or_else(|| ConstraintError::Field(field.to_string()))?;
            let n = u32::from_str(value.trim()).map_err(|_| ConstraintError::Field(field.to_string()))?;
            match key.trim() {
                "t" => raw.tangencies += n,
                "node" => {
                    if n > u32::from(r) {
                        return Err(ConstraintError::Node(n));
                    }
                    raw.node = Some(n);
                }
                k if k.starts_with('c') => {
                    let codim = u32::from_str(&k[1..]).map_err(|_| ConstraintError::Field(field.to_string()))?;
                    if codim == 0 || codim > u32::from(r) {
                        return Err(ConstraintError::Codim { codim, r });
                    }
                    if n > 0 {
                        raw.incidences.push((codim, n));
                    }
                }
                _ => return Err(ConstraintError::Field(field.to_string())),
            }
        }
        Ok(raw)
    }
}

/// Strip hyperplane incidences: each one multiplies the count by the degree.
pub fn normalize_hyperplanes(raw: &RawConstraint, d: u32) -> (Constraint, Count) {
    let mut c = Constraint::empty().with_tangencies(raw.tangencies);
    c.node = raw.node;
    let mut hyperplanes = 0;
    for &(codim, n) in &raw.incidences {
        if codim == 1 {
            hyperplanes += n;
        } else {
            c = c.with_incidence(codim, n);
        }
    }
    let mult = Count::from_integer(BigInt::from(d).pow(hyperplanes));
    (c, mult)
}

/// Families whose dimension bookkeeping the engine needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyHandle {
    /// Unmarked rational curves.
    Rational { r: u8, d: u32 },
    /// Rational curves with a marked point on a codim-`u` space and `v`
    /// special tangent conditions there.
    Special { r: u8, d: u32, u: u32, v: u32 },
    /// Rational curves with two marks on codim `a` and codim `c` spaces.
    TwoMarked { r: u8, d: u32, a: u32, c: u32 },
    /// Rational curves with a chosen node (condition taken from the constraint).
    Nodal { r: u8, d: u32 },
}

/// Moduli dimension minus the number of conditions imposed.
pub fn expected_dimension(family: FamilyHandle, delta: &Constraint) -> i64 {
    let conditions = i64::from(delta.tangencies) + i64::from(delta.incidence_cost());
    let base = |r: u8, d: u32| i64::from(r + 1) * i64::from(d) + i64::from(r) - 3;
    match family {
        FamilyHandle::Rational { r, d } => base(r, d) - conditions,
        FamilyHandle::Special { r, d, u, v } => base(r, d) + 1 - conditions - i64::from(u) - i64::from(v),
        FamilyHandle::TwoMarked { r, d, a, c } => base(r, d) + 2 - conditions - i64::from(a) - i64::from(c),
        FamilyHandle::Nodal { r, d } => {
            base(r, d) + 2 - i64::from(r) - conditions - i64::from(delta.node.unwrap_or(0))
        }
    }
}
