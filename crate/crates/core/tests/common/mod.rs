#![allow(dead_code)]

use proptest::prelude::*;

/// Valid strategic hash vectors with `lo..=hi` miners.
pub fn alphas(lo: usize, hi: usize) -> impl Strategy<Value = Vec<f64>> {
    (lo..=hi)
        .prop_flat_map(|m| prop::collection::vec(0.001f64..0.5, m))
        .prop_map(|mut v| {
            let s: f64 = v.iter().sum();
            if s > 0.95 {
                for x in v.iter_mut() {
                    *x *= 0.95 / s;
                }
            }
            v
        })
}

/// Power iteration on `P`; the oracle for stationary distributions.
pub fn power_iteration(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut w = vec![0.0; n];
        for (to, row) in p.iter().enumerate() {
            w[to] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-16 {
            break;
        }
    }
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Deterministic pseudo-random points inside the two-miner hash space.
pub fn two_miner_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let a1: f64 = rng.gen_range(0.01..0.5);
            let a2: f64 = rng.gen_range(0.01..0.5);
            if a1 + a2 < 0.97 {
                break (a1, a2);
            }
        })
        .collect()
}
