//! The BFW(α) edge-acceptance process.
//!
//! Each step resolves one sampled edge. The edge is held fixed while the
//! stage `k` is raised one unit at a time, exactly like the reference loop:
//!
//! ```text
//! k = 2; t = u = 1; e = sample()
//! while t < 2n:
//!     l = largest component size in A ∪ {e}
//!     if l <= k:                       accept e; t += 1; u += 1; e = sample()
//!     else if t/u < α + 1/sqrt(2k):    k += 1
//!     else:                            u += 1; e = sample()
//! ```
//!
//! The run of `k += 1` iterations is folded into a single step using
//! [`cap_increments`], so the cost of a step does not depend on how far `k`
//! moves.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{BfwError, Result};
use crate::observables::{TraceRecord, GIANT_THRESHOLD};
use crate::partition::ComponentPartition;

/// Name of the random source, echoed into every output header.
pub const GENERATOR_IDENTITY: &str = "rand_pcg::Pcg64 seeded via SeedableRng::seed_from_u64 (rand 0.9)";

/// Default number of top component fractions stored per trace record.
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub alpha: f64,
    pub node_count: usize,
    pub seed: u64,
    /// Accepted-edge budget; the run stops once `t` reaches it.
    pub max_accepted: u64,
    /// Record a trace sample whenever `u` is a multiple of this stride.
    pub sample_every: u64,
    pub top_k: usize,
}

impl EngineConfig {
    /// Config with the reference loop bound `t < 2n` and a stride of 1000.
    pub fn new(alpha: f64, node_count: usize, seed: u64) -> Self {
        Self {
            alpha,
            node_count,
            seed,
            max_accepted: 2 * node_count as u64,
            sample_every: 1000,
            top_k: DEFAULT_TOP_K,
        }
    }

    pub fn with_sample_every(mut self, sample_every: u64) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn with_top_k(mut self, top_k: usize) -> Self {
        self.top_k = top_k;
        self
    }

    pub fn with_max_accepted(mut self, max_accepted: u64) -> Self {
        self.max_accepted = max_accepted;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(BfwError::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.node_count < 2 {
            return Err(BfwError::InvalidConfig(format!(
                "node count must be at least 2, got {}",
                self.node_count
            )));
        }
        if self.max_accepted < 1 {
            return Err(BfwError::InvalidConfig("max_accepted must be at least 1".into()));
        }
        if self.sample_every < 1 {
            return Err(BfwError::InvalidConfig("sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of stage increments available before the acceptance-rate guard
/// stops `k` from growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageCap {
    Finite(u64),
    Unbounded,
}

/// The guard on the `else if` branch: `true` when `t/u ≥ α + 1/√(2k)`, i.e.
/// when `k` may *not* be raised and an oversized merge must be rejected.
///
/// `t/u` is a single correctly rounded division and the square root is
/// evaluated in double precision. Exact equality counts as blocked, matching
/// the strict `<` of the loop guard.
#[inline]
pub fn stage_blocked(t: u64, u: u64, k: u64, alpha: f64) -> bool {
    accepted_fraction(t, u) >= alpha + 1.0 / (2.0 * k as f64).sqrt()
}

#[inline]
fn accepted_fraction(t: u64, u: u64) -> f64 {
    t as f64 / u as f64
}

/// Smallest `x ≥ 0` with `t/u ≥ α + 1/√(2(k+x))`, or `Unbounded` when
/// `t/u ≤ α`.
///
/// Closed form `max(0, ⌈1/(2r²)⌉ − k)` with `r = t/u − α`, then nudged
/// against [`stage_blocked`] so it agrees with stepping `k` one unit at a time.
pub fn cap_increments(t: u64, u: u64, k: u64, alpha: f64) -> StageCap {
    let r = accepted_fraction(t, u) - alpha;
    if r <= 0.0 {
        return StageCap::Unbounded;
    }
    let target = (1.0 / (2.0 * r * r)).ceil();
    // Beyond 2^62 the step-by-step comparison is meaningless in f64.
    if target >= (1u64 << 62) as f64 {
        return StageCap::Finite((target as u64).saturating_sub(k));
    }
    let mut x = (target as u64).saturating_sub(k);
    while x > 0 && stage_blocked(t, u, k + x - 1, alpha) {
        x -= 1;
    }
    while !stage_blocked(t, u, k + x, alpha) {
        x += 1;
    }
    StageCap::Finite(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepCase {
    /// Both endpoints already in one component.
    SameComponent,
    /// Two components whose merged size fits under the current stage.
    SmallMerge,
    /// Oversized merge accepted after raising the stage.
    BigMergeAccepted,
    /// Oversized merge refused; the stage may still have grown.
    BigMergeRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub case: StepCase,
    pub delta_k: u64,
    pub accepted: bool,
    /// Sizes of the two components joined by an accepted merge.
    pub merged_sizes: Option<(u32, u32)>,
}

/// Resolution of the pending edge before it is applied.
#[derive(Debug, Clone, Copy)]
struct Decision {
    case: StepCase,
    delta_k: u64,
    roots: (u32, u32),
    sizes: (u32, u32),
}

/// Live state of one BFW(α) run.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    t: u64,
    u: u64,
    k: u64,
    partition: ComponentPartition,
    pending: (u32, u32),
    rng: Pcg64,
}

/// Final state of a run plus its sampled trace.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub engine: Engine,
    pub trace: Vec<TraceRecord>,
}

impl Engine {
    /// Initial state: `k = 2`, `t = u = 1`, one edge already sampled.
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let partition = ComponentPartition::new(config.node_count)?;
        let mut rng = Pcg64::seed_from_u64(config.seed);
        let pending = sample_pair(&mut rng, config.node_count as u32);
        Ok(Self {
            config,
            t: 1,
            u: 1,
            k: 2,
            partition,
            pending,
            rng,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Accepted-edge count.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Sampled-edge count.
    pub fn u(&self) -> u64 {
        self.u
    }

    /// Current stage: the cap on the largest component size.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn partition(&self) -> &ComponentPartition {
        &self.partition
    }

    pub fn pending_edge(&self) -> (u32, u32) {
        self.pending
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.config.max_accepted
    }

    /// Draws the next candidate edge: a uniform pair of distinct nodes.
    pub fn sample_edge(&mut self) -> (u32, u32) {
        sample_pair(&mut self.rng, self.config.node_count as u32)
    }

    fn decide(&mut self) -> Decision {
        let (a, b) = self.pending;
        let ra = self.partition.find_root(a);
        let rb = self.partition.find_root(b);
        let sa = self.partition.root_size(ra);
        let sizes = if ra == rb {
            (sa, 0)
        } else {
            (sa, self.partition.root_size(rb))
        };
        let l = (sizes.0 + sizes.1) as u64;
        let roots = (ra, rb);
        if l <= self.k {
            let case = if ra == rb {
                StepCase::SameComponent
            } else {
                StepCase::SmallMerge
            };
            return Decision {
                case,
                delta_k: 0,
                roots,
                sizes,
            };
        }
        let needed = l - self.k;
        match cap_increments(self.t, self.u, self.k, self.config.alpha) {
            StageCap::Finite(x) if x < needed => Decision {
                case: StepCase::BigMergeRejected,
                delta_k: x,
                roots,
                sizes,
            },
            _ => Decision {
                case: StepCase::BigMergeAccepted,
                delta_k: needed,
                roots,
                sizes,
            },
        }
    }

    fn apply(&mut self, d: Decision) -> StepOutcome {
        self.k += d.delta_k;
        let accepted = d.case != StepCase::BigMergeRejected;
        let mut merged_sizes = None;
        if accepted {
            if d.roots.0 != d.roots.1 {
                self.partition.merge_roots(d.roots.0, d.roots.1);
                merged_sizes = Some(d.sizes);
            }
            self.t += 1;
        }
        self.u += 1;
        self.pending = sample_pair(&mut self.rng, self.config.node_count as u32);
        StepOutcome {
            case: d.case,
            delta_k: d.delta_k,
            accepted,
            merged_sizes,
        }
    }

    /// Resolves the pending edge, folding all stage increments into one
    /// outcome.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.is_finished() {
            return Err(BfwError::RunFinished(self.config.max_accepted));
        }
        let d = self.decide();
        Ok(self.apply(d))
    }

    /// Observation of the current state.
    pub fn snapshot(&self) -> TraceRecord {
        TraceRecord::capture(&self.partition, self.t, self.u, self.k, self.config.top_k)
    }

    /// Runs to the accepted-edge budget.
    ///
    /// A record is taken at the start, whenever `u` hits a multiple of
    /// `sample_every`, immediately before and after every accepted merge
    /// that raised `k` or joined two components above the giant threshold,
    /// and at the end.
    pub fn run(config: EngineConfig) -> Result<RunOutput> {
        let mut engine = Self::new(config)?;
        let mut trace = vec![engine.snapshot()];
        let stride = engine.config.sample_every;
        let giant = GIANT_THRESHOLD * engine.config.node_count as f64;
        while !engine.is_finished() {
            let d = engine.decide();
            let stage_merge = match d.case {
                StepCase::BigMergeAccepted => d.delta_k > 0 || d.sizes.1 as f64 > giant && d.sizes.0 as f64 > giant,
                StepCase::SmallMerge => d.sizes.0.min(d.sizes.1) as f64 > giant,
                _ => false,
            };
            if stage_merge {
                let pre = engine.snapshot();
                if trace.last() != Some(&pre) {
                    trace.push(pre);
                }
            }
            engine.apply(d);
            if stage_merge || engine.u % stride == 0 {
                trace.push(engine.snapshot());
            }
        }
        if trace.last().map(|r| r.u) != Some(engine.u) {
            trace.push(engine.snapshot());
        }
        Ok(RunOutput { engine, trace })
    }
}

fn sample_pair<R: Rng>(rng: &mut R, n: u32) -> (u32, u32) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}
