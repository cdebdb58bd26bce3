mod common;

use std::collections::BTreeSet;

use common::alphas;
use proptest::prelude::*;
use ssmlab::games::*;
use ssmlab::*;

fn game(a: &[f64]) -> Game {
    Game::new(HashDistribution::new(a.to_vec()).unwrap()).unwrap()
}

fn p(s: &str) -> StrategyProfile {
    s.parse().unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn published_non_ss_entries() {
    let g = game(&[0.33, 0.48]);
    let hs = g.utilities(&p("HS")).unwrap();
    let sh = g.utilities(&p("SH")).unwrap();
    assert!(close(hs[0], 0.26794954, 1e-6) && close(hs[1], 0.57777649, 1e-6));
    assert!(close(sh[0], 0.35517387, 1e-6) && close(sh[1], 0.46196499, 1e-6));

    let g = game(&[0.24, 0.24]);
    assert!(close(g.utilities(&p("HS")).unwrap()[0], 0.24293956, 1e-6));
    assert!(close(g.utilities(&p("SH")).unwrap()[0], 0.23069139, 1e-6));

    let g = game(&[0.2, 0.225]);
    let hs = g.utilities(&p("HS")).unwrap();
    assert!(close(hs[0], 0.20352746, 1e-6) && close(hs[1], 0.21133109, 1e-6));
}

#[test]
fn all_honest_pays_hash() {
    let a = [0.1, 0.2, 0.15];
    assert_eq!(game(&a).utilities(&StrategyProfile::honest(3)).unwrap(), a.to_vec());
}

#[test]
fn pne_examples() {
    assert_eq!(game(&[0.24, 0.24]).enumerate_pne().unwrap(), vec![p("HH"), p("SS")]);
    assert_eq!(game(&[0.05, 0.05]).enumerate_pne().unwrap(), vec![p("HH")]);
}

#[test]
fn best_response_examples() {
    let br = game(&[0.33, 0.48]).best_response(1, &[1.0, 0.0]).unwrap();
    assert_eq!(br.choice, 1);
    let br = game(&[0.2, 0.225]).best_response(0, &[0.0, 1.0]).unwrap();
    assert_eq!(br.choice, 0);
}

#[test]
fn interior_partition_is_below_endpoints() {
    let g = game(&[0.46, 0.25]);
    for s2 in [0.0, 0.3, 0.7, 1.0] {
        let u = |s1: f64| g.partition_utilities(&[s1, s2]).unwrap()[0];
        let ends = u(0.0).max(u(1.0));
        for k in 1..20 {
            let s1 = k as f64 / 20.0;
            assert!(u(s1) < ends);
            // midpoint convexity on neighbouring samples
            let h = 0.025;
            assert!(u(s1) <= 0.5 * (u(s1 - h) + u(s1 + h)) + 1e-12);
        }
    }
}

#[test]
fn dominant_honest_commits_to_zero() {
    let g = game(&[0.05, 0.05]);
    let (t, r) = g.commitment_type(1e-3).unwrap();
    assert!(r.best.commitment <= ENDPOINT_TOL);
    assert!(close(r.best.leader_value, 0.05, 1e-12));
    assert_eq!(t, 0);
}

#[test]
fn symmetric_coexistence_is_type_one() {
    assert_eq!(game(&[0.24, 0.24]).commitment_type(1e-3).unwrap().0, 1);
}

#[test]
fn victim_two_has_no_penalizers() {
    let g = game(&[0.33, 0.48]);
    assert!(g.penalizing_coalitions(1).unwrap().is_empty());
    assert!(game(&[0.05, 0.05]).penalizing_coalitions(0).unwrap().is_empty());
}

#[test]
fn reported_coalitions_have_positive_penalty() {
    for a in [[0.33, 0.48, 0.1], [0.3, 0.3, 0.3], [0.2, 0.4, 0.25]] {
        for c in game(&a).penalizing_coalitions(0).unwrap() {
            assert!(c.penalty > 0.0);
        }
    }
}

#[test]
fn pessimistic_three_player_search_runs() {
    let g = game(&[0.3, 0.25, 0.2]);
    let r = g.stackelberg(0, 1e-2, StackelbergMode::Pessimistic).unwrap();
    let lo = g
        .enumerate_pne()
        .unwrap()
        .iter()
        .map(|x| g.utilities(x).unwrap()[0])
        .fold(f64::INFINITY, f64::min);
    assert!(r.best.leader_value >= lo - 1e-9);
}

#[test]
fn two_miner_threshold_is_below_single() {
    let one = uniform_profitability_threshold(1, 1e-7, &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
    let two = uniform_profitability_threshold(2, 1e-7, &PropagationModel::Uniform, S22Variant::Appendix).unwrap();
    let (Threshold::At(a), Threshold::At(b)) = (one.threshold, two.threshold) else {
        panic!("no thresholds");
    };
    assert!(close(a, 2.0 - 3f64.sqrt(), 1e-6));
    assert!(b > 0.2 && b < 0.27 && b < a);
}

#[test]
fn pareto_and_leader_bound_on_coarse_grid() {
    let mut a1 = 0.02;
    while a1 <= 0.5 {
        let mut a2 = 0.02;
        while a2 <= 0.5 && a1 + a2 < 0.99 {
            let g = game(&[a1, a2]);
            let pne = g.enumerate_pne().unwrap();
            assert!(!pne.is_empty());
            if pne.contains(&p("HH")) && pne.contains(&p("SS")) {
                let ss = g.utilities(&p("SS")).unwrap();
                assert!(ss[0] > a1 && ss[1] > a2, "({a1},{a2})");
            }
            let (_, r) = g.commitment_type(1e-2).unwrap();
            let lo = pne.iter().map(|x| g.utilities(x).unwrap()[0]).fold(f64::INFINITY, f64::min);
            assert!(r.best.leader_value >= lo - 1e-9, "({a1},{a2})");
            a2 += 0.04;
        }
        a1 += 0.04;
    }
}

fn pne_from_partition(g: &Game, v: PartitionVariant) -> Vec<StrategyProfile> {
    let m = g.miners();
    let u = |x: &StrategyProfile| g.partition_utilities_with(&x.as_fractions(), v).unwrap();
    (0..1usize << m)
        .map(|k| StrategyProfile::from_index(m, k))
        .filter(|x| {
            let ux = u(x);
            (0..m).all(|i| u(&x.flipped(i))[i] <= ux[i] + PNE_TOL)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn partition_pne_matches_binary(a in alphas(2, 3)) {
        let g = game(&a);
        let want: BTreeSet<_> = g.enumerate_pne().unwrap().into_iter().collect();
        for v in [PartitionVariant::Literal, PartitionVariant::ShareConsistent] {
            let got: BTreeSet<_> = pne_from_partition(&g, v).into_iter().collect();
            prop_assert_eq!(&got, &want);
        }
    }

    #[test]
    fn endpoint_convexity(a in alphas(2, 3), i in 0usize..3, others in prop::collection::vec(0.0f64..=1.0, 3)) {
        let m = a.len();
        let i = i % m;
        let g = game(&a);
        let mut s = others[..m].to_vec();
        let mut at = |x: f64| {
            s[i] = x;
            g.partition_utilities(&s).unwrap()[i]
        };
        let ends = at(0.0).max(at(1.0));
        let best = (0..=100).map(|k| at(k as f64 / 100.0)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best <= ends + 1e-9, "{} > {}", best, ends);
    }

    #[test]
    fn partition_endpoints_coincide(a in alphas(2, 4), bits in 0usize..16) {
        let m = a.len();
        let g = game(&a);
        let x = StrategyProfile::from_index(m, bits % (1 << m));
        let u = g.utilities(&x).unwrap();
        let lit = g.partition_utilities_with(&x.as_fractions(), PartitionVariant::Literal).unwrap();
        let sc = g.partition_utilities_with(&x.as_fractions(), PartitionVariant::ShareConsistent).unwrap();
        prop_assert_eq!(&u, &lit);
        prop_assert_eq!(&u, &sc);
    }
}
