//! Order parameters, the candidate giant set, steady-state detection and
//! jump-point analysis.
//!
//! With `n` nodes and component sizes `s_i`, a sampled edge (counted as an
//! ordered pair of nodes, `n²` outcomes) falls into one of three cases:
//!
//! * same component, probability `P₁ = Σ s_i² / n²`;
//! * two components with `s_i + s_j ≤ k`, probability `P₂`;
//! * two components with `s_i + s_j > k`, the remainder.
//!
//! All three are computed as exact integer counts; the floating-point values
//! are only the final division by `n²`.

use serde::{Deserialize, Serialize};

use crate::partition::ComponentPartition;

/// Fraction above which a component is counted as giant at steady state.
pub const GIANT_THRESHOLD: f64 = 0.01;

/// Number of components in the truncated `P₁` used for plotting.
pub const PLOT_TOP: usize = 100;

/// One sampled observation of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub u: u64,
    pub t: u64,
    pub k: u64,
    pub p1: f64,
    pub p2: f64,
    pub component_count: usize,
    /// Largest component fractions, descending.
    pub top_sizes: Vec<f64>,
}

impl TraceRecord {
    pub fn capture(p: &ComponentPartition, t: u64, u: u64, k: u64, top_k: usize) -> Self {
        let n = p.node_count() as f64;
        Self {
            u,
            t,
            k,
            p1: p1(p),
            p2: p2(p, k),
            component_count: p.component_count(),
            top_sizes: p.sizes_descending().take(top_k).map(|s| s as f64 / n).collect(),
        }
    }

    /// Accepted fraction `t/u`.
    pub fn accepted_fraction(&self) -> f64 {
        self.t as f64 / self.u as f64
    }

    pub fn c_max(&self) -> f64 {
        self.top_sizes.first().copied().unwrap_or(0.0)
    }
}

/// Exact integer counts of the three edge cases over `n²` ordered node pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseCounts {
    pub same: u64,
    pub small: u64,
    pub big: u64,
}

impl CaseCounts {
    pub fn total(&self) -> u64 {
        self.same + self.small + self.big
    }
}

/// `P₁ = Σ s² / n²` over every component.
pub fn p1(p: &ComponentPartition) -> f64 {
    let n = p.node_count() as f64;
    p.sum_sq_sizes() as f64 / (n * n)
}

/// `P₁` restricted to the `top` largest components.
pub fn p1_top(p: &ComponentPartition, top: usize) -> f64 {
    let n = p.node_count() as f64;
    let sq: u64 = p.sizes_descending().take(top).map(|s| s as u64 * s as u64).sum();
    sq as f64 / (n * n)
}

/// `Σ s_i s_j` over ordered pairs of distinct components with
/// `s_i + s_j ≤ k`.
///
/// For a size class `s` with multiplicity `c`, every member pairs with all
/// mass of size at most `k − s`; when `2s ≤ k` that mass includes the member
/// itself, which is subtracted. A descending pointer walks the prefix sums,
/// so the cost is linear in the number of distinct sizes.
pub fn small_pair_mass(p: &ComponentPartition, k: u64) -> u64 {
    let classes: Vec<(u64, u64)> = p
        .size_classes()
        .map(|(s, c)| (s as u64, c as u64))
        .collect();
    let mut prefix = Vec::with_capacity(classes.len() + 1);
    prefix.push(0u64);
    for &(s, c) in &classes {
        prefix.push(prefix.last().unwrap() + s * c);
    }
    // `hi` = number of classes with size ≤ k − s for the current s.
    let mut hi = classes.len();
    let mut total = 0u64;
    for &(s, c) in &classes {
        if s > k {
            break;
        }
        let limit = k - s;
        while hi > 0 && classes[hi - 1].0 > limit {
            hi -= 1;
        }
        total += c * s * prefix[hi];
        if 2 * s <= k {
            total -= c * s * s;
        }
    }
    total
}

/// `P₂`: probability that a sampled edge joins two components whose merged
/// size is at most `k`.
pub fn p2(p: &ComponentPartition, k: u64) -> f64 {
    let n = p.node_count() as f64;
    small_pair_mass(p, k) as f64 / (n * n)
}

pub fn case_counts(p: &ComponentPartition, k: u64) -> CaseCounts {
    let n = p.node_count() as u64;
    let same = p.sum_sq_sizes();
    let small = small_pair_mass(p, k);
    CaseCounts {
        same,
        small,
        big: n * n - same - small,
    }
}

/// `P₂ = 0` exactly when no two components fit together under `k`.
pub fn p2_vanishes(p: &ComponentPartition, k: u64) -> bool {
    match p.two_smallest() {
        Ok((a, b)) => a as u64 + b as u64 > k,
        Err(_) => true,
    }
}

/// Fractions of the components with `k/2 < s < k`, descending.
pub fn giant_set(p: &ComponentPartition, k: u64) -> Vec<f64> {
    let n = p.node_count() as f64;
    p.sizes_descending()
        .take_while(|&s| 2 * s as u64 > k)
        .filter(|&s| (s as u64) < k)
        .map(|s| s as f64 / n)
        .collect()
}

/// The giant set read back from a trace record. Only the stored top
/// fractions are visible.
pub fn giant_set_of(record: &TraceRecord, node_count: usize) -> Vec<f64> {
    let n = node_count as f64;
    let k = record.k as f64;
    record
        .top_sizes
        .iter()
        .copied()
        .filter(|&c| {
            let s = (c * n).round();
            2.0 * s > k && s < k
        })
        .collect()
}

/// Criteria for accepting a trace suffix as steady.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyCriteria {
    pub alpha: f64,
    /// Minimum span of the steady suffix, in sampled edges.
    pub window: u64,
    /// Largest `P₂` still treated as vanished. Zero demands the exact
    /// condition.
    pub p2_tolerance: f64,
}

impl SteadyCriteria {
    pub fn exact(alpha: f64, window: u64) -> Self {
        Self {
            alpha,
            window,
            p2_tolerance: 0.0,
        }
    }

    pub fn holds(&self, r: &TraceRecord) -> bool {
        r.p1 > self.alpha && r.p2 <= self.p2_tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub m: usize,
    /// Giant fractions at the end of the trace, descending.
    pub fractions: Vec<f64>,
    pub p1_final: f64,
    pub p2_final: f64,
    /// Total giant fraction `Σ C_i`.
    pub x: f64,
    pub detected_at_u: u64,
    pub stable_window: u64,
}

/// Finds the start of the trailing stretch of records on which
/// `P₁ > α` and `P₂` vanishes, provided it spans at least `window` sampled
/// edges.
///
/// The reported fractions are taken from the last record and count only
/// components above [`GIANT_THRESHOLD`].
pub fn detect_steady_state(trace: &[TraceRecord], criteria: SteadyCriteria) -> Option<SteadyStateReport> {
    let last = trace.last()?;
    let start = trace
        .iter()
        .rposition(|r| !criteria.holds(r))
        .map_or(0, |i| i + 1);
    let first = trace.get(start)?;
    let span = last.u - first.u;
    if span < criteria.window {
        return None;
    }
    let fractions: Vec<f64> = last
        .top_sizes
        .iter()
        .copied()
        .filter(|&c| c > GIANT_THRESHOLD)
        .collect();
    Some(SteadyStateReport {
        m: fractions.len(),
        x: fractions.iter().sum(),
        fractions,
        p1_final: last.p1,
        p2_final: last.p2,
        detected_at_u: first.u,
        stable_window: span,
    })
}

/// Index of the first record at which the steady criteria hold, whether or
/// not they keep holding.
pub fn first_steady_index(trace: &[TraceRecord], criteria: SteadyCriteria) -> Option<usize> {
    trace.iter().position(|r| criteria.holds(r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub u_at_jump: u64,
    /// Fractions, just before the jump, of the two smallest giant-set
    /// members, larger first.
    pub before_sizes: (f64, f64),
    /// Largest fraction just after the jump.
    pub after_size: f64,
    pub delta_cmax: f64,
    /// `after_size` equals the sum of `before_sizes` within `1/n`.
    pub merges_two_smallest: bool,
    /// Every other giant-set member survives the jump with its size intact.
    pub others_unchanged: bool,
}

fn giants_above_threshold(r: &TraceRecord) -> usize {
    r.top_sizes.iter().filter(|&&c| c > GIANT_THRESHOLD).count()
}

/// Locates the largest single-record increase of `C_max` and checks that it
/// came from the two smallest giant-set members merging.
///
/// The giant set is read at the first record of the configuration the jump
/// ends (same number of components above the giant threshold). Just before
/// the jump, the stage has already grown past the merged size, which puts the
/// smaller partner below `k/2`. Members are followed to the pre-jump record
/// by rank.
///
/// Returns `None` when `C_max` never increases or fewer than two giant-set
/// members exist.
pub fn detect_jump(trace: &[TraceRecord], node_count: usize) -> Option<JumpEvent> {
    let (idx, delta) = trace
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, w[1].c_max() - w[0].c_max()))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((i, d)),
        })?;
    if delta <= 0.0 {
        return None;
    }
    let before = &trace[idx - 1];
    let after = &trace[idx];
    let giants = giants_above_threshold(before);
    let mut start = idx - 1;
    while start > 0 && giants_above_threshold(&trace[start - 1]) == giants {
        start -= 1;
    }
    let reference = &trace[start];
    let members = giant_set_of(reference, node_count);
    if members.len() < 2 {
        return None;
    }
    // Rank of each member in the reference record, then its pre-jump size.
    let first = reference
        .top_sizes
        .iter()
        .position(|&c| c == members[0])
        .expect("giant set members come from top_sizes");
    let ranks: Vec<usize> = (first..first + members.len()).collect();
    let size_at = |rank: usize| before.top_sizes.get(rank).copied().unwrap_or(0.0);
    let tol = 1.0 / node_count as f64;
    let half = 0.5 * tol;
    let (a, b) = (size_at(ranks[ranks.len() - 2]), size_at(ranks[ranks.len() - 1]));
    let after_size = after.c_max();
    let merges_two_smallest = (after_size - (a + b)).abs() <= tol;

    let mut remaining: Vec<f64> = after.top_sizes.iter().skip(1).copied().collect();
    let others_unchanged = ranks[..ranks.len() - 2].iter().all(|&rank| {
        let c = size_at(rank);
        match remaining.iter().position(|&r| (r - c).abs() <= half) {
            Some(pos) => {
                remaining.swap_remove(pos);
                true
            }
            None => false,
        }
    });
    Some(JumpEvent {
        u_at_jump: after.u,
        before_sizes: (a, b),
        after_size,
        delta_cmax: delta,
        merges_two_smallest,
        others_unchanged,
    })
}
