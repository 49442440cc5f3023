//! Brute-force references shared by the integration and acceptance targets.

#![allow(dead_code)]

use bfw::engine::{cap_increments, stage_blocked, Engine, EngineConfig, StageCap};
use bfw::observables::{case_counts, CaseCounts};
use bfw::ComponentPartition;

pub const CAP_GRID_MAX: u64 = 200;
pub const CAP_GRID_ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// Steps spent confirming that a loop which cannot stop indeed keeps going.
pub const CAP_SPIN_CHECK: u64 = 10_000;

/// The stage loop taken literally: starting from `k`, raise it one unit at a
/// time until the guard blocks. Returns the stage it stops at, or `None`
/// once `limit` is reached.
pub fn walk_stage(t: u64, u: u64, k: u64, alpha: f64, limit: u64) -> Option<u64> {
    let mut k = k;
    while !stage_blocked(t, u, k, alpha) {
        k += 1;
        if k > limit {
            return None;
        }
    }
    Some(k)
}

/// `t/u > α` in exact integer arithmetic for α on the tenths grid.
fn exceeds_alpha(t: u64, u: u64, alpha: f64) -> bool {
    10 * t > (alpha * 10.0).round() as u64 * u
}

#[derive(Debug, Default)]
pub struct CapGridReport {
    pub cells: u64,
    pub unbounded: u64,
    pub mismatches: Vec<(u64, u64, u64, f64, StageCap, Option<u64>)>,
}

/// Closed form against the literal loop on every `t ≤ u ≤ 200`, `k ≤ 200`.
///
/// One walk from `k = 1` visits every later `k` on its way, so it yields the
/// loop's answer for all starting stages at once. When `t/u ≤ α` the guard
/// can never block; those walks are only run for a bounded spin.
pub fn check_cap_grid() -> CapGridReport {
    let mut report = CapGridReport::default();
    for &alpha in &CAP_GRID_ALPHAS {
        for u in 1..=CAP_GRID_MAX {
            for t in 1..=u {
                let stop = if exceeds_alpha(t, u, alpha) {
                    walk_stage(t, u, 1, alpha, u64::MAX)
                } else {
                    walk_stage(t, u, 1, alpha, CAP_SPIN_CHECK)
                };
                for k in 1..=CAP_GRID_MAX {
                    let expected = stop.map(|s| s.saturating_sub(k));
                    let got = cap_increments(t, u, k, alpha);
                    report.cells += 1;
                    let ok = match (got, expected) {
                        (StageCap::Unbounded, None) => {
                            report.unbounded += 1;
                            true
                        }
                        (StageCap::Finite(x), Some(e)) => x == e,
                        _ => false,
                    };
                    if !ok {
                        report.mismatches.push((t, u, k, alpha, got, expected));
                    }
                }
            }
        }
    }
    report
}

/// Ordered node pairs `(i, j)` over all `n²`, classified one by one.
pub fn enumerate_cases(p: &ComponentPartition, k: u64) -> CaseCounts {
    let mut p = p.clone();
    let n = p.node_count() as u32;
    let roots: Vec<u32> = (0..n).map(|v| p.find(v).unwrap()).collect();
    let sizes: Vec<u64> = (0..n).map(|v| p.component_size(v).unwrap() as u64).collect();
    let mut c = CaseCounts {
        same: 0,
        small: 0,
        big: 0,
    };
    for i in 0..n as usize {
        for j in 0..n as usize {
            if roots[i] == roots[j] {
                c.same += 1;
            } else if sizes[i] + sizes[j] <= k {
                c.small += 1;
            } else {
                c.big += 1;
            }
        }
    }
    c
}

#[derive(Debug, Default)]
pub struct PairOracleReport {
    pub instants: u64,
    pub mismatches: Vec<String>,
}

/// Replays a run step by step and, at every instant the trace samples,
/// compares the recorded `P₁`, `P₂` and the exact case counts with
/// pair enumeration.
pub fn check_pair_oracle(config: EngineConfig, report: &mut PairOracleReport) {
    let out = Engine::run(config.clone()).unwrap();
    let mut engine = Engine::new(config).unwrap();
    let n2 = (engine.partition().node_count() as u64).pow(2);
    let nn = n2 as f64;
    let mut next = 0;
    loop {
        while next < out.trace.len() && out.trace[next].u == engine.u() && out.trace[next].k <= engine.k() {
            let rec = &out.trace[next];
            let snap = engine.snapshot();
            let brute = enumerate_cases(engine.partition(), rec.k);
            let fast = case_counts(engine.partition(), rec.k);
            let tag = format!("alpha {} seed {} u {}", engine.config().alpha, engine.config().seed, rec.u);
            if rec.k == engine.k() && *rec != snap {
                report.mismatches.push(format!("{tag}: trace record differs from replay"));
            }
            if brute != fast {
                report.mismatches.push(format!("{tag}: counts {fast:?} vs brute {brute:?}"));
            }
            if brute.same + brute.small + brute.big != n2 {
                report.mismatches.push(format!("{tag}: brute counts do not cover n²"));
            }
            if rec.p1 != brute.same as f64 / nn || rec.p2 != brute.small as f64 / nn {
                report.mismatches.push(format!("{tag}: p1/p2 differ from enumeration"));
            }
            report.instants += 1;
            next += 1;
        }
        if engine.is_finished() {
            break;
        }
        engine.step().unwrap();
    }
    if next != out.trace.len() {
        report
            .mismatches
            .push(format!("{} trace records never matched a replay instant", out.trace.len() - next));
    }
}

/// Runs the pair oracle on a spread of small complete runs.
pub fn pair_oracle_suite() -> PairOracleReport {
    let mut report = PairOracleReport::default();
    for (i, &(alpha, n)) in [(0.5, 400usize), (1.0 / 3.0, 600), (0.25, 300), (0.8, 500), (0.2, 1000)]
        .iter()
        .enumerate()
    {
        let config = EngineConfig::new(alpha, n, 1000 + i as u64).with_sample_every(97);
        check_pair_oracle(config, &mut report);
    }
    report
}
