mod common;

use cardmatch::certificates::{check_cardinality_certificate, check_cut_feasibility, transform_duals};
use cardmatch::engine::{solve, DualPolicy, Mode, Status};
use cardmatch::graph::{matching_weight, normalize_weights, Matching};
use cardmatch::oracle::min_weight_by_cardinality;
use cardmatch::rational::{int, ratio};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn engine_duals_stay_feasible() {
    for (i, inst) in common::suite(11, 60, 20).iter().enumerate() {
        let (shifted, _) = normalize_weights(inst);
        let run = solve(&shifted, Mode::Maximum, &DualPolicy::Uniform, int(0)).unwrap();
        for p in &run.phases {
            let v = check_cut_feasibility(&shifted, &p.duals);
            assert!(v.pass(), "instance {i}: {:?}", v.violations);
        }
    }
}

#[test]
fn certificates_also_certify_oracle_witnesses() {
    // Any optimal dual satisfies complementary slackness with every optimal primal.
    for (i, inst) in common::suite(12, 80, 20).iter().enumerate() {
        let (shifted, _) = normalize_weights(inst);
        let run = solve(&shifted, Mode::Maximum, &DualPolicy::Uniform, int(0)).unwrap();
        let table = min_weight_by_cardinality(&shifted, 16).unwrap();
        for s in &run.snapshots {
            let cert = transform_duals(&s.duals, s.cardinality);
            let witness = &table.by_cardinality[s.cardinality].witness;
            let v = check_cardinality_certificate(&shifted, witness, &cert);
            assert!(v.pass(), "instance {i}, k={}: {:?}", s.cardinality, v.violations);
        }
    }
}

#[test]
fn passing_certificates_are_sound() {
    // Pair engine certificates with random matchings of the same size; any
    // pair that passes must be optimal.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut passed = 0;
    for inst in common::suite(13, 80, 0) {
        let run = solve(&inst, Mode::Maximum, &DualPolicy::Uniform, int(0)).unwrap();
        let table = min_weight_by_cardinality(&inst, 16).unwrap();
        for s in &run.snapshots {
            let cert = transform_duals(&s.duals, s.cardinality);
            for _ in 0..5 {
                let mut edges: Vec<_> = inst.edges().iter().map(|e| e.key()).collect();
                edges.shuffle(&mut rng);
                let mut m = Matching::empty();
                for (u, v) in edges {
                    if m.len() < s.cardinality && !m.covers(u) && !m.covers(v) {
                        m.insert(u, v).unwrap();
                    }
                }
                if m.len() == s.cardinality && check_cardinality_certificate(&inst, &m, &cert).pass() {
                    passed += 1;
                    assert_eq!(Some(&matching_weight(&inst, &m).unwrap()), table.min_weight(s.cardinality));
                }
            }
        }
    }
    assert!(passed > 0);
}

#[test]
fn nonzero_beta_gives_the_same_weights() {
    for inst in common::suite(14, 40, 0) {
        let a = solve(&inst, Mode::Maximum, &DualPolicy::Uniform, int(0)).unwrap();
        let b = solve(&inst, Mode::Maximum, &DualPolicy::Uniform, ratio(-3, 2)).unwrap();
        let wa: Vec<_> = a.snapshots.iter().map(|s| s.weight.clone()).collect();
        let wb: Vec<_> = b.snapshots.iter().map(|s| s.weight.clone()).collect();
        assert_eq!(wa, wb);
    }
}

#[test]
fn perfect_mode_agrees_with_maximum_mode() {
    for inst in common::suite(15, 60, 0) {
        let p = solve(&inst, Mode::Perfect, &DualPolicy::Uniform, int(0)).unwrap();
        let m = solve(&inst, Mode::Maximum, &DualPolicy::Uniform, int(0)).unwrap();
        assert_eq!(p.snapshots, m.snapshots);
        assert_eq!(p.is_infeasible(), m.status == Status::NoPerfectMatching);
    }
}
