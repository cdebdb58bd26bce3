mod common;

use common::{alphas, power_iteration, two_miner_points};
use proptest::prelude::*;
use ssmlab::chain::steady_state_dense;
use ssmlab::*;

fn build(a: &[f64]) -> ChainModel {
    transition_matrix(&HashDistribution::new(a.to_vec()).unwrap()).unwrap()
}

/// The 9x9 matrix as printed for two miners, states S00..S22.
fn printed_p(a1: f64, a2: f64) -> Vec<Vec<f64>> {
    let b = 1.0 - a1 - a2;
    vec![
        vec![b, b, b, b, b, b, a2 * (1.0 - a2) + b, a1 * (1.0 - a1) + b, 1.0],
        vec![a2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![a1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, a2, 0.0, a2, 0.0, 0.0, a2 * a2, 0.0, 0.0],
        vec![0.0, a1, a2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, a1, 0.0, 0.0, a1, 0.0, a1 * a1, 0.0],
        vec![0.0, 0.0, 0.0, a1, a2, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, a1, a2, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, a1, a2, 0.0],
    ]
}

#[test]
fn two_miner_matrix_matches_printed() {
    for (a1, a2) in two_miner_points(20, 11) {
        let p = build(&[a1, a2]).dense();
        let want = printed_p(a1, a2);
        for r in 0..9 {
            for c in 0..9 {
                assert!((p[r][c] - want[r][c]).abs() <= 1e-12, "({a1},{a2}) [{r}][{c}]");
            }
        }
    }
}

#[test]
fn stationary_matches_power_iteration() {
    let c = build(&[0.33, 0.48]);
    let pi = steady_state(&c).unwrap();
    let oracle = power_iteration(&c.dense());
    for (x, y) in pi.iter().zip(&oracle) {
        assert!((x - y).abs() <= 1e-10);
    }
}

#[test]
fn single_miner_closed_form_pi() {
    for a in [0.01, 0.1, 0.3, 0.5] {
        let pi = steady_state(&build(&[a])).unwrap();
        let want = [1.0 - a, a * (1.0 - a), a * a];
        for (x, y) in pi.iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

#[test]
fn eight_miner_chain_is_fast_and_exact() {
    let c = build(&[0.11; 8]);
    assert_eq!(c.len(), 6561);
    let pi = steady_state(&c).unwrap();
    assert!(c.residual(&pi) <= 1e-12);
    assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn f32_tracks_f64() {
    let a64 = [0.21, 0.17, 0.3];
    let c64 = build(&a64);
    let c32 = transition_matrix(&HashDistributionF32::new(a64.iter().map(|&v| v as f32).collect()).unwrap())
        .unwrap();
    let p64 = steady_state(&c64).unwrap();
    let p32 = steady_state(&c32).unwrap();
    for (x, y) in p64.iter().zip(&p32) {
        assert!((x - *y as f64).abs() < 1e-5);
    }
}

fn swapped(c: &ChainModel, k: usize) -> usize {
    let mut l = c.states()[k].leads().to_vec();
    l.swap(0, 1);
    c.index_of(&LeadState::new(l).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn columns_are_stochastic(a in alphas(1, 4)) {
        let c = build(&a);
        for from in 0..c.len() {
            let col = c.column(from);
            prop_assert!(col.iter().all(|&(_, p)| p >= 0.0));
            let s: f64 = col.iter().map(|&(_, p)| p).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn stationary_residual(a in alphas(1, 5)) {
        let c = build(&a);
        let pi = steady_state(&c).unwrap();
        prop_assert!(c.residual(&pi) <= 1e-12);
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(pi.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn permutation_equivariance(a in alphas(2, 4)) {
        let mut b = a.clone();
        b.swap(0, 1);
        let ca = build(&a);
        let cb = build(&b);
        let pa = steady_state(&ca).unwrap();
        let pb = steady_state(&cb).unwrap();
        for k in 0..ca.len() {
            prop_assert!((pa[k] - pb[swapped(&ca, k)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_consistency(a in alphas(2, 3), at in 0usize..3) {
        let mut with_zero = a.clone();
        with_zero.insert(at.min(a.len()), 0.0);
        let full = build(&with_zero);
        let small = build(&a);
        prop_assert_eq!(full.dense(), small.dense());
        prop_assert_eq!(steady_state(&full).unwrap(), steady_state(&small).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn structured_matches_dense(a in alphas(1, 4)) {
        let c = build(&a);
        let s = steady_state(&c).unwrap();
        let d = steady_state_dense(&c).unwrap();
        for (x, y) in s.iter().zip(&d) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
