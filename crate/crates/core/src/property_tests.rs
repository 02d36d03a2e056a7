use std::cmp::Ordering;

use crate::cache::{deserialize_value, serialize_record, Cache, CountKey};
use crate::chow_blowup::{monomial_basis, Monomial};
use crate::constraints::{compare, expected_dimension, FamilyHandle};
use crate::linalg::rank;
use crate::scalar::{int, is_nonnegative, Count};
use crate::tables::{self, Body};
use crate::{Constraint, Engine, EngineError, ExactClass};
use num_traits::Zero;
use proptest::prelude::*;

fn arb_constraint(r: u32) -> impl Strategy<Value = Constraint> {
    (0u32..=3, proptest::collection::vec((2..=r, 0u32..=3), 0..4), proptest::option::of(0..=r)).prop_map(
        |(t, inc, node)| {
            let c = inc.into_iter().fold(Constraint::empty().with_tangencies(t), |c, (codim, n)| c.with_incidence(codim, n));
            match node {
                Some(k) => c.with_node(k),
                None => c,
            }
        },
    )
}

/// Multisets of codimensions in `2..=r` with total cost (codim - 1) `cost`.
fn incidence_sets(r: u32, cost: u32) -> Vec<Constraint> {
    fn go(codim: u32, r: u32, cost: u32, acc: Constraint, out: &mut Vec<Constraint>) {
        if cost == 0 {
            out.push(acc);
        } else if codim <= r {
            for n in 0..=cost / (codim - 1) {
                go(codim + 1, r, cost - n * (codim - 1), acc.with_incidence(codim, n), out);
            }
        }
    }
    let mut out = Vec::new();
    go(2, r, cost, Constraint::empty(), &mut out);
    out
}

fn rational_dim(r: u32, d: u32) -> u32 {
    (r + 1) * d + r - 3
}

// ---- constraints ----

proptest! {
    #[test]
    fn compare_is_a_total_preorder(a in arb_constraint(5), b in arb_constraint(5), c in arb_constraint(5)) {
        prop_assert_eq!(compare(&a, &a), Ordering::Equal);
        prop_assert_eq!(compare(&a, &b), compare(&b, &a).reverse());
        if compare(&a, &b) != Ordering::Greater && compare(&b, &c) != Ordering::Greater {
            prop_assert_ne!(compare(&a, &c), Ordering::Greater);
        }
    }

    #[test]
    fn partition_multiplicities(c in arb_constraint(5)) {
        let total: u64 = c.partitions().map(|(_, _, m)| m).sum();
        let n: u32 = c.incidence_pairs().iter().map(|&(_, n)| n).sum();
        prop_assert_eq!(total, 1u64 << n);
        for (a, b, _) in c.partitions() {
            for codim in 2..=5 {
                prop_assert_eq!(a.count(codim) + b.count(codim), c.count(codim));
            }
        }
    }

    #[test]
    fn constraint_text_round_trips(c in arb_constraint(5)) {
        let raw = crate::RawConstraint::parse(&c.text(), 5).unwrap();
        let (back, mult) = crate::constraints::normalize_hyperplanes(&raw, 3);
        prop_assert_eq!(back, c);
        prop_assert_eq!(mult, int(1));
    }
}

// ---- rational curves ----

/// Zero-dimensional codimension lists: a random prefix, padded with lines.
fn arb_incidence_problem() -> impl Strategy<Value = (u8, u32, Vec<u32>)> {
    (2u8..=4, 1u32..=3)
        .prop_flat_map(|(r, d)| {
            let target = rational_dim(u32::from(r), d) + if d == 1 { 0 } else { 1 };
            (Just(r), Just(d), proptest::collection::vec(2..=u32::from(r), 0..4), Just(target))
        })
        .prop_filter_map("prefix too costly", |(r, d, prefix, target)| {
            let cost: u32 = prefix.iter().map(|c| c - 1).sum();
            let mut codims = prefix;
            codims.extend(std::iter::repeat_n(2, target.checked_sub(cost)? as usize));
            Some((r, d, codims))
        })
        .prop_flat_map(|(r, d, codims)| (Just(r), Just(d), Just(codims).prop_shuffle()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gw_incidence_ignores_order((r, d, codims) in arb_incidence_problem()) {
        let e = Engine::new();
        let mut sorted = codims.clone();
        sorted.sort_unstable();
        sorted.reverse();
        let a = e.gw_incidence(r, d, &codims);
        let b = e.gw_incidence(r, d, &sorted);
        prop_assert_eq!(&a, &b);
        if let Ok(v) = a {
            prop_assert!(is_nonnegative(&v));
        }
    }
}

/// Intersection numbers on the Grassmannian of lines in `P^r` by the Pieri
/// rule, as an independent check on degree-1 counts.
fn schubert_lines(r: u32, specials: &[u32]) -> u64 {
    let m = r - 1;
    let mut state: Vec<((u32, u32), u64)> = vec![((0, 0), 1)];
    for &a in specials {
        let mut next: Vec<((u32, u32), u64)> = Vec::new();
        for &((l1, l2), n) in &state {
            for mu1 in l1..=m {
                let Some(mu2) = (l1 + l2 + a).checked_sub(mu1) else { continue };
                if mu2 < l2 || mu2 > l1 {
                    continue;
                }
                match next.iter_mut().find(|(p, _)| *p == (mu1, mu2)) {
                    Some((_, v)) => *v += n,
                    None => next.push(((mu1, mu2), n)),
                }
            }
        }
        state = next;
    }
    state.iter().find(|(p, _)| *p == (m, m)).map_or(0, |(_, n)| *n)
}

#[test]
fn lines_agree_with_schubert_calculus() {
    let e = Engine::new();
    for r in 2..=4u32 {
        for c in incidence_sets(r, rational_dim(r, 1)) {
            let codims = c.codims();
            let specials: Vec<u32> = codims.iter().map(|c| c - 1).collect();
            let want = schubert_lines(r, &specials);
            let got = e.gw_incidence(r as u8, 1, &codims).unwrap();
            assert_eq!(got, Count::from_integer(want.into()), "r={r} {c}");
        }
    }
    // lines meeting 4 general lines in P^3
    assert_eq!(schubert_lines(3, &[1, 1, 1, 1]), 2);
}

fn nodal_column(id: u32, label: &str) -> Vec<(u32, Count)> {
    let table = tables::get(id).unwrap();
    let Body::Nodal { columns, rows, .. } = &table.body else { unreachable!() };
    let col = columns.iter().position(|(l, _)| l == label).unwrap();
    rows.iter().filter_map(|row| Some((row.tangencies, row.cells[col].clone()?))).collect()
}

#[test]
fn rational_cubics_match_nodal_cubics() {
    // a rational plane cubic has exactly one node
    let e = Engine::new();
    for (t, want) in nodal_column(8, "N") {
        let c = Constraint::empty().with_tangencies(t).with_incidence(2, 8 - t);
        assert_eq!(e.rational(2, 3, &c).unwrap(), want, "t={t}");
    }
}

#[test]
fn rational_quartics_have_three_nodes() {
    let e = Engine::new();
    for (t, nodal) in nodal_column(9, "N") {
        let c = Constraint::empty().with_tangencies(t).with_incidence(2, 11 - t);
        assert_eq!(int(3) * e.rational(2, 4, &c).unwrap(), nodal, "t={t}");
        assert_eq!(e.nodal(2, 4, &c.with_node(0)).unwrap(), nodal, "t={t}");
    }
}

#[test]
fn tangency_reduction_is_confluent() {
    // the same constraint assembled in different orders, on cold and warm
    // engines, gives one value
    let warm = Engine::new();
    for r in 2..=3u32 {
        for d in 1..=3u32 {
            for t in 0..=3u32 {
                let Some(cost) = rational_dim(r, d).checked_sub(t) else { continue };
                for c in incidence_sets(r, cost) {
                    let c = c.with_tangencies(t);
                    let mut rebuilt = Constraint::empty();
                    for codim in c.codims().into_iter().rev() {
                        rebuilt = rebuilt.with_incidence(codim, 1);
                    }
                    for _ in 0..t {
                        rebuilt = rebuilt.with_tangencies(rebuilt.tangencies + 1);
                    }
                    assert_eq!(rebuilt, c);
                    let a = warm.rational(r as u8, d, &c).unwrap();
                    let b = Engine::new().rational(r as u8, d, &rebuilt).unwrap();
                    assert_eq!(a, b, "r={r} d={d} {c}");
                    assert!(is_nonnegative(&a), "r={r} d={d} {c}");
                }
            }
        }
    }
}

#[test]
fn off_dimension_requests() {
    let e = Engine::new();
    let over = Constraint::empty().with_incidence(2, 9);
    assert_eq!(expected_dimension(FamilyHandle::Rational { r: 2, d: 3 }, &over), -1);
    assert_eq!(e.rational(2, 3, &over).unwrap(), int(0));
    let under = Constraint::empty().with_incidence(2, 7);
    assert_eq!(e.rational(2, 3, &under), Err(EngineError::PositiveDimension(1)));
}

// ---- two-nodal pairs and family classes ----

fn rr2_inputs(r: u32) -> Vec<(u32, u32, Constraint, Constraint, u32, u32)> {
    let mut out = Vec::new();
    for (d1, d2) in [(1u32, 1u32), (1, 2), (2, 2)] {
        for k in 0..=r {
            for l in 0..=r {
                // each family keeps two free marks: dimension + 2 - cost
                let total = rational_dim(r, d1) + rational_dim(r, d2) + 4;
                let Some(cost) = total.checked_sub(2 * r + k + l) else { continue };
                for g in incidence_sets(r, cost) {
                    for (g1, g2, _) in g.partitions().step_by(3) {
                        out.push((d1, d2, g1, g2, k, l));
                    }
                }
            }
        }
    }
    out
}

/// Whether some line satisfies both constraints. Two distinct lines never
/// meet twice, but a single line taken twice does.
fn lines_can_coincide(r: u32, g1: &Constraint, g2: &Constraint) -> bool {
    g1.incidence_cost() + g2.incidence_cost() <= 2 * r - 2
}

#[test]
fn rr2_is_symmetric_and_lines_never_meet_twice() {
    let e = Engine::new();
    for r in 2..=3u32 {
        for (d1, d2, g1, g2, k, l) in rr2_inputs(r) {
            let r8 = r as u8;
            let a = e.rr2(r8, d1, d2, &g1, &g2, k, l).unwrap();
            let b = e.rr2(r8, d2, d1, &g2, &g1, k, l).unwrap();
            assert_eq!(a, b, "r={r} {d1}/{d2} {g1} | {g2} ({k},{l})");
            let swapped = e.rr2(r8, d1, d2, &g1, &g2, l, k).unwrap();
            assert_eq!(a, swapped, "node order r={r} {d1}/{d2} {g1} | {g2} ({k},{l})");
            if d1 == 1 && d2 == 1 && !lines_can_coincide(r, &g1, &g2) {
                assert!(a.is_zero(), "r={r} {g1} | {g2} ({k},{l}) = {a}");
            }
        }
    }
}

#[test]
fn lines_never_meet_twice_in_higher_space() {
    let e = Engine::new();
    for r in 4..=5u32 {
        let pairs = rr2_inputs(r).into_iter().filter(|x| x.0 == 1 && x.1 == 1 && !lines_can_coincide(r, &x.2, &x.3));
        for (d1, d2, g1, g2, k, l) in pairs {
            assert!(e.rr2(r as u8, d1, d2, &g1, &g2, k, l).unwrap().is_zero(), "r={r} {g1} | {g2}");
        }
    }
}

#[test]
fn family_classes_round_trip_and_are_symmetric() {
    let e = Engine::new();
    for r in 2..=4u32 {
        for d in 1..=2u32 {
            let dim = rational_dim(r, d) + 2;
            for codim in 1..=(2 * r).min(dim) {
                for c in incidence_sets(r, dim - codim).into_iter().take(6) {
                    let Some(fc) = e.family_class(r as u8, d, &c).unwrap() else { continue };
                    assert!(fc.round_trip(), "r={r} d={d} {c}");
                    // he = ke, so only e-free monomials have a distinct mirror
                    for (m, v) in fc.class.terms().filter(|(m, _)| m.e == 0) {
                        let mirrored = Monomial::new(m.k, m.h, m.e);
                        assert_eq!(&fc.class.coefficient(&mirrored), v, "r={r} d={d} {c}: {}", fc.class);
                    }
                }
            }
        }
    }
}

// ---- Chow ring ----

#[test]
fn pairing_matrices_are_nonsingular() {
    for r in 1..=5u8 {
        for c in 0..=2 * u32::from(r) {
            let rows = monomial_basis(r, c);
            let cols = monomial_basis(r, 2 * u32::from(r) - c);
            assert_eq!(rows.len(), cols.len(), "r={r} c={c}");
            let m: Vec<Vec<Count>> = rows
                .iter()
                .map(|a| {
                    cols.iter()
                        .map(|b| {
                            ExactClass::monomial(r, *a, int(1)).pairing(&ExactClass::monomial(r, *b, int(1)))
                        })
                        .collect()
                })
                .collect();
            assert_eq!(rank(&m), rows.len(), "r={r} c={c}");
        }
    }
}

proptest! {
    #[test]
    fn reduction_is_confluent(
        (r, order) in (1u8..=5).prop_flat_map(|r| {
            let top = 2 * u32::from(r);
            (Just(r), proptest::collection::vec(0u8..3, 0..=top as usize + 2))
        })
    ) {
        let (mut h, mut k, mut e) = (0, 0, 0);
        let mut stepwise = ExactClass::one(r);
        for g in &order {
            let gen = match g {
                0 => { h += 1; ExactClass::h(r) }
                1 => { k += 1; ExactClass::k(r) }
                _ => { e += 1; ExactClass::e(r) }
            };
            stepwise = &stepwise * &gen;
        }
        let direct = ExactClass::reduce(r, [(Monomial::new(h, k, e), int(1))]);
        prop_assert_eq!(stepwise, direct);
    }
}

// ---- nodal ----

#[test]
fn lines_have_no_nodes() {
    let e = Engine::new();
    for r in 2..=5u32 {
        for k in 0..=r {
            let dim = rational_dim(r, 1) + 2 - r;
            for t in 0..=1 {
                let Some(cost) = dim.checked_sub(k + t) else { continue };
                for c in incidence_sets(r, cost) {
                    let c = c.with_tangencies(t).with_node(k);
                    assert!(e.nodal(r as u8, 1, &c).unwrap().is_zero(), "r={r} {c}");
                }
            }
        }
    }
}

#[test]
fn nodal_values_are_nonnegative() {
    let e = Engine::new();
    for (r, d) in [(2u8, 3u32), (2, 4), (3, 2), (3, 3)] {
        let rr = u32::from(r);
        let dim = (rr + 1) * d - 1;
        for k in 0..=rr {
            for t in 0..=2 {
                for c in incidence_sets(rr, dim - k - t) {
                    let c = c.with_tangencies(t).with_node(k);
                    let v = e.nodal(r, d, &c).unwrap();
                    assert!(is_nonnegative(&v), "r={r} d={d} {c} = {v}");
                }
            }
        }
    }
}

// ---- cache ----

fn sample_queries() -> Vec<(u8, u32, Constraint)> {
    vec![
        (2, 3, Constraint::empty().with_tangencies(2).with_incidence(2, 5).with_node(1)),
        (3, 2, Constraint::empty().with_tangencies(3).with_incidence(2, 2).with_node(2)),
        (3, 3, Constraint::empty().with_incidence(3, 2).with_incidence(2, 7).with_node(0)),
    ]
}

#[test]
fn clearing_the_cache_changes_nothing() {
    let e = Engine::new();
    let first: Vec<_> = sample_queries().iter().map(|(r, d, c)| e.nodal(*r, *d, c).unwrap()).collect();
    assert!(!e.cache().is_empty());
    e.clear();
    assert!(e.cache().is_empty());
    let second: Vec<_> = sample_queries().iter().map(|(r, d, c)| e.nodal(*r, *d, c).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn file_cache_replays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counts.tsv");
    let fresh: Vec<_> = {
        let e = Engine::with_cache(Cache::with_file(&path));
        sample_queries().iter().map(|(r, d, c)| e.nodal(*r, *d, c).unwrap()).collect()
    };
    let replayed = Cache::with_file(&path);
    for ((r, d, c), want) in sample_queries().iter().zip(&fresh) {
        let key = CountKey::Nodal { r: *r, d: *d, c: *c };
        assert_eq!(replayed.get(&key).as_ref(), Some(want));
    }
    let e = Engine::with_cache(replayed);
    let again: Vec<_> = sample_queries().iter().map(|(r, d, c)| e.nodal(*r, *d, c).unwrap()).collect();
    assert_eq!(again, fresh);
}

proptest! {
    #[test]
    fn records_round_trip(n in any::<i64>(), d in 1i64..=i64::MAX, c in arb_constraint(5)) {
        let v = Count::new(n.into(), d.into());
        let key = CountKey::Rational { r: 5, d: 2, c };
        prop_assert_eq!(deserialize_value(&serialize_record(&key, &v)), Some(v));
    }
}
