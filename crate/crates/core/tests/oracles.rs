mod common;

use std::collections::HashMap;

use bfw::engine::{stage_blocked, Engine, EngineConfig, StepCase};
use bfw::observables::{case_counts, p2_vanishes};
use bfw::theory::{solve_giant_fraction, solve_sizes, TheoryOptions, DEFAULT_TOL};
use bfw::ComponentPartition;
use proptest::prelude::*;

#[test]
fn cap_closed_form_matches_stage_loop_on_grid() {
    let report = common::check_cap_grid();
    assert_eq!(report.cells, 9 * 200 * 201 / 2 * 200);
    assert!(report.mismatches.is_empty(), "{:?}", &report.mismatches[..report.mismatches.len().min(5)]);
}

#[test]
fn recorded_observables_match_pair_enumeration() {
    let report = common::pair_oracle_suite();
    assert!(report.instants > 100);
    assert!(report.mismatches.is_empty(), "{:#?}", report.mismatches);
}

fn recompute(n: usize, edges: &[(u32, u32)]) -> Vec<u32> {
    // Labels propagated to a fixed point, independent of union-find.
    let mut label: Vec<u32> = (0..n as u32).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            let m = label[a as usize].min(label[b as usize]);
            for v in [a, b] {
                if label[v as usize] != m {
                    label[v as usize] = m;
                    changed = true;
                }
            }
        }
    }
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for l in label {
        *counts.entry(l).or_default() += 1;
    }
    let mut sizes: Vec<u32> = counts.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2usize..60).prop_flat_map(|n| {
        let e = (0..n as u32, 0..n as u32);
        (Just(n), prop::collection::vec(e, 0..120))
    })
}

proptest! {
    #[test]
    fn partition_agrees_with_recomputation((n, edges) in edges_strategy()) {
        let mut p = ComponentPartition::new(n).unwrap();
        let mut applied = Vec::new();
        for &(a, b) in &edges {
            if p.find(a).unwrap() != p.find(b).unwrap() {
                p.merge(a, b).unwrap();
            }
            applied.push((a, b));
            let sizes = recompute(n, &applied);
            prop_assert_eq!(p.sizes_descending().collect::<Vec<_>>(), sizes.clone());
            prop_assert_eq!(p.component_count(), sizes.len());
            prop_assert_eq!(p.sum_sq_sizes(), sizes.iter().map(|&s| s as u64 * s as u64).sum::<u64>());
            prop_assert_eq!(p.largest(), sizes[0]);
            let total: u64 = p.size_classes().map(|(s, c)| s as u64 * c as u64).sum();
            prop_assert_eq!(total, n as u64);
            if sizes.len() >= 2 {
                let (a, b) = p.two_smallest().unwrap();
                prop_assert_eq!((a, b), (sizes[sizes.len() - 1], sizes[sizes.len() - 2]));
            }
        }
    }

    #[test]
    fn case_counts_cover_all_pairs((n, edges) in edges_strategy(), k in 1u64..80) {
        let mut p = ComponentPartition::new(n).unwrap();
        for &(a, b) in &edges {
            if p.find(a).unwrap() != p.find(b).unwrap() {
                p.merge(a, b).unwrap();
            }
        }
        let fast = case_counts(&p, k);
        prop_assert_eq!(fast, common::enumerate_cases(&p, k));
        prop_assert_eq!(fast.total(), (n * n) as u64);
        prop_assert_eq!(p2_vanishes(&p, k), fast.small == 0);
    }

    #[test]
    fn engine_invariants(alpha in 0.15f64..1.0, n in 2usize..400, seed in any::<u64>()) {
        let mut e = Engine::new(EngineConfig::new(alpha, n, seed)).unwrap();
        let mut merges = 0usize;
        while !e.is_finished() {
            let (t, u, k) = (e.t(), e.u(), e.k());
            let out = e.step().unwrap();
            prop_assert!(e.k() >= k);
            prop_assert_eq!(e.k(), k + out.delta_k);
            prop_assert!(e.partition().largest() as u64 <= e.k());
            if out.case == StepCase::BigMergeRejected {
                prop_assert!(stage_blocked(t, u, k + out.delta_k, alpha));
                prop_assert_eq!(e.t(), t);
            } else {
                prop_assert_eq!(e.t(), t + 1);
            }
            prop_assert_eq!(e.u(), u + 1);
            if out.merged_sizes.is_some() {
                merges += 1;
            }
            prop_assert_eq!(n - e.partition().component_count(), merges);
        }
        prop_assert_eq!(e.t(), 2 * n as u64);
        let g = alpha + 1.0 / (2.0 * e.k() as f64).sqrt();
        prop_assert!(e.t() as f64 / e.u() as f64 > alpha - 1.0 / (2.0 * e.k() as f64).sqrt());
        prop_assert!(g > alpha);
    }

    #[test]
    fn runs_are_reproducible(alpha in 0.2f64..1.0, n in 2usize..300, seed in any::<u64>()) {
        let a = Engine::run(EngineConfig::new(alpha, n, seed).with_sample_every(7)).unwrap();
        let b = Engine::run(EngineConfig::new(alpha, n, seed).with_sample_every(7)).unwrap();
        prop_assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn giant_fraction_solves_its_equation(alpha in 0.05f64..0.999) {
        let x = solve_giant_fraction(alpha, DEFAULT_TOL).unwrap();
        prop_assert!(x > 0.0 && x <= 1.0);
        prop_assert!((1.0 - x - (-2.0 * x / alpha).exp()).abs() < 1e-12);
    }
}

#[test]
fn feasible_size_solutions_meet_both_constraints() {
    for empirical in [false, true] {
        let opts = TheoryOptions {
            empirical_alpha2: empirical,
            ..Default::default()
        };
        for m in 1..=6 {
            if let Ok(sol) = solve_sizes(m, 1.0 / m as f64, &opts) {
                let r = sol.residuals.expect("solved sizes carry residuals");
                assert!(r.max() < 1e-10, "m {m}: {r:?}");
                assert!(sol.fractions.windows(2).all(|w| w[0] >= w[1]));
                assert!(sol.fractions.iter().all(|&c| c > 0.0));
            }
        }
    }
}

#[test]
fn steady_giants_cannot_merge_under_final_stage() {
    use bfw::ensemble::{run_instance_with_trace, EnsembleConfig};
    let n = 20_000;
    let config = EnsembleConfig::new(vec![0.45, 0.3, 0.22], n, 2, 11);
    for ai in 0..3 {
        for i in 0..2 {
            let (result, trace) = run_instance_with_trace(&config, ai, i).unwrap();
            let Some(report) = result.report else { continue };
            let k = trace.last().unwrap().k as f64;
            for (a, &ci) in report.fractions.iter().enumerate() {
                for &cj in &report.fractions[a + 1..] {
                    assert!(n as f64 * (ci + cj) - k > 0.0, "{ci} + {cj} under k = {k}");
                }
            }
        }
    }
}
