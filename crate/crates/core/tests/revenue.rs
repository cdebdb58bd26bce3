mod common;

use std::collections::BTreeMap;

use common::{alphas, two_miner_points};
use proptest::prelude::*;
use ssmlab::closedform::ssm_relative_revenue;
use ssmlab::revenue::{revenue_matrix, PropagationTable};
use ssmlab::*;

fn hd(a: &[f64]) -> HashDistribution {
    HashDistribution::new(a.to_vec()).unwrap()
}

/// The two-miner reward matrix as printed, rows S00..S22, columns (1, 2, honest).
fn printed_r(a1: f64, a2: f64) -> Vec<[f64; 3]> {
    let b = 1.0 - a1 - a2;
    let b2 = b * b;
    vec![
        [0.0, 0.0, b],
        [b * a1, 2.0 * b * a2 + 0.5 * b * (1.0 - a2), 0.5 * b * a1 + 1.5 * b2],
        [2.0 * b * a1 + 0.5 * b * (1.0 - a1), b * a2, 0.5 * b * a2 + 1.5 * b2],
        [0.0, a2 + 2.0 * b, 0.0],
        [2.0 * b * a1 + b2 / 3.0, 2.0 * b * a2 + b2 / 3.0, 4.0 / 3.0 * b2],
        [a1 + 2.0 * b, 0.0, 0.0],
        [0.0, 2.0 * b + 2.0 * a2 * a2 + 3.0 * a2 * (1.0 - a2), 0.0],
        [2.0 * b + 2.0 * a1 * a1 + 3.0 * a1 * (1.0 - a1), 0.0, 0.0],
        [3.0 * a1 + 3.0 * b * a1 + 0.5 * b2, 3.0 * a2 + 3.0 * b * a2 + 0.5 * b2, b2],
    ]
}

#[test]
fn printed_variant_matches_printed_matrix() {
    for (a1, a2) in two_miner_points(20, 5) {
        let r = revenue_matrix(&hd(&[a1, a2]), &PropagationModel::Uniform, S22Variant::Printed).unwrap();
        for (row, want) in r.iter().zip(printed_r(a1, a2)) {
            for k in 0..3 {
                assert!((row[k] - want[k]).abs() <= 1e-12, "({a1},{a2}) {row:?} {want:?}");
            }
        }
    }
}

#[test]
fn appendix_variant_differs_only_in_last_row() {
    for (a1, a2) in two_miner_points(20, 6) {
        let b = 1.0 - a1 - a2;
        let r = revenue_matrix(&hd(&[a1, a2]), &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
        let mut want = printed_r(a1, a2);
        want[8] = [3.0 * a1 + 3.0 * b * a1 + b * b, 3.0 * a2 + 3.0 * b * a2 + b * b, b * b];
        for (row, want) in r.iter().zip(want) {
            for k in 0..3 {
                assert!((row[k] - want[k]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn uniform_single_miner_is_half_gamma_closed_form() {
    for k in 1..=50 {
        let a = k as f64 / 100.0;
        let s = relative_revenue(&hd(&[a]), &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
        assert!((s.shares[0] - ssm_relative_revenue(a, 0.5).unwrap()).abs() <= 1e-10, "{a}");
    }
}

#[test]
fn two_way_gamma_single_miner_matches_closed_form() {
    for g in [0.0, 0.25, 0.7, 1.0] {
        let prop = PropagationModel::two_way(g).unwrap();
        for k in 1..=50 {
            let a = k as f64 / 100.0;
            let s = relative_revenue(&hd(&[a]), &prop, S22Variant::Appendix).unwrap();
            assert!((s.shares[0] - ssm_relative_revenue(a, g).unwrap()).abs() <= 1e-10, "{a} {g}");
        }
    }
}

#[test]
fn no_strategic_hash_means_all_honest() {
    let s = relative_revenue(&hd(&[0.0, 0.0]), &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
    assert_eq!(s.shares, vec![0.0, 0.0, 1.0]);
}

/// Uniform spreading written out as an explicit table.
fn uniform_table(miners: usize) -> PropagationTable<f64> {
    let mut entries = BTreeMap::new();
    for mask in 1usize..(1 << miners) {
        let mut set: Vec<usize> = (0..miners).filter(|i| mask >> i & 1 == 1).collect();
        set.push(miners);
        let d = set.len() as f64;
        let rows = (0..=miners)
            .map(|i| {
                set.iter()
                    .map(|&j| {
                        if i < miners && set.contains(&i) {
                            if i == j { 1.0 } else { 0.0 }
                        } else {
                            1.0 / d
                        }
                    })
                    .collect()
            })
            .collect();
        entries.insert(set, rows);
    }
    for a in 0..miners {
        for b in a + 1..miners {
            let set = vec![a, b];
            let rows = (0..=miners)
                .map(|i| {
                    set.iter()
                        .map(|&j| if set.contains(&i) { if i == j { 1.0 } else { 0.0 } } else { 0.5 })
                        .collect()
                })
                .collect();
            entries.insert(set, rows);
        }
    }
    PropagationTable::new(miners, entries).unwrap()
}

#[test]
fn explicit_uniform_table_reproduces_uniform() {
    let table = PropagationModel::Table(uniform_table(2));
    for (a1, a2) in two_miner_points(10, 9) {
        for v in [S22Variant::Appendix, S22Variant::Printed] {
            let u = relative_revenue(&hd(&[a1, a2]), &PropagationModel::Uniform, v).unwrap();
            let t = relative_revenue(&hd(&[a1, a2]), &table, v).unwrap();
            for (x, y) in u.shares.iter().zip(&t.shares) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn table_for_wrong_miner_count_is_rejected() {
    let table = PropagationModel::Table(uniform_table(2));
    let err = relative_revenue(&hd(&[0.1, 0.1, 0.1]), &table, S22Variant::Appendix).unwrap_err();
    assert!(matches!(err, Error::PropagationTable(_)));
}

fn variant() -> impl Strategy<Value = S22Variant> {
    prop_oneof![Just(S22Variant::Appendix), Just(S22Variant::Printed)]
}

fn prop_model() -> impl Strategy<Value = PropagationModel> {
    prop_oneof![
        Just(PropagationModel::Uniform),
        (0.0f64..=1.0).prop_map(PropagationModel::TwoWayGamma),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn shares_are_conserved(a in alphas(1, 4), p in prop_model(), v in variant()) {
        let s = relative_revenue(&hd(&a), &p, v).unwrap();
        prop_assert_eq!(s.shares.len(), a.len() + 1);
        prop_assert!(s.shares.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((s.shares.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(s.residual <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn shares_are_anonymous(a in alphas(2, 4), v in variant(), rot in 1usize..4) {
        let m = a.len();
        let mut b = a.clone();
        b.rotate_left(rot % m);
        let sa = relative_revenue(&hd(&a), &PropagationModel::Uniform, v).unwrap();
        let sb = relative_revenue(&hd(&b), &PropagationModel::Uniform, v).unwrap();
        for i in 0..m {
            prop_assert!((sb.shares[i] - sa.shares[(i + rot) % m]).abs() <= 1e-12);
        }
        prop_assert!((sb.shares[m] - sa.shares[m]).abs() <= 1e-12);
    }

    #[test]
    fn zero_hash_miner_earns_nothing(a in alphas(1, 3), at in 0usize..4) {
        let mut z = a.clone();
        let at = at.min(a.len());
        z.insert(at, 0.0);
        let full = relative_revenue(&hd(&z), &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
        let small = relative_revenue(&hd(&a), &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
        prop_assert_eq!(full.shares[at], 0.0);
        let mut rest = full.shares.clone();
        rest.remove(at);
        for (x, y) in rest.iter().zip(&small.shares) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
    }
}
