//! Independent-instance ensembles over a list of α values.
//!
//! Every instance gets its own seed from [`derive_seed`], so results do not
//! depend on scheduling. Instances run on the rayon pool; the summary sorts
//! them by index before reducing, which makes every aggregate independent of
//! completion order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineConfig, DEFAULT_TOP_K};
use crate::error::{BfwError, Result};
use crate::observables::{
    detect_jump, detect_steady_state, JumpEvent, SteadyCriteria, SteadyStateReport, TraceRecord,
    GIANT_THRESHOLD,
};
use crate::theory::{predict_m, TheoryPrediction};

/// Default largest `P₂` treated as vanished by steady-state detection.
pub const DEFAULT_P2_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub alphas: Vec<f64>,
    pub node_count: usize,
    pub instances: usize,
    pub base_seed: u64,
    pub sample_every: u64,
    /// Steady-state window in sampled edges; `None` means `n / 10`.
    pub window: Option<u64>,
    pub p2_tolerance: f64,
    pub top_k: usize,
}

impl EnsembleConfig {
    pub fn new(alphas: Vec<f64>, node_count: usize, instances: usize, base_seed: u64) -> Self {
        Self {
            alphas,
            node_count,
            instances,
            base_seed,
            sample_every: 1000,
            window: None,
            p2_tolerance: DEFAULT_P2_TOLERANCE,
            top_k: DEFAULT_TOP_K,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(BfwError::InvalidConfig("alpha list is empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(BfwError::InvalidConfig(format!("alpha must lie in (0, 1], got {a}")));
        }
        if self.instances < 1 {
            return Err(BfwError::InvalidConfig("need at least one instance".into()));
        }
        if self.p2_tolerance.is_nan() || self.p2_tolerance < 0.0 {
            return Err(BfwError::InvalidConfig("p2 tolerance must be non-negative".into()));
        }
        Ok(())
    }

    pub fn window_len(&self) -> u64 {
        self.window.unwrap_or(self.node_count as u64 / 10)
    }

    pub fn criteria(&self, alpha: f64) -> SteadyCriteria {
        SteadyCriteria {
            alpha,
            window: self.window_len(),
            p2_tolerance: self.p2_tolerance,
        }
    }

    /// Enough stored top fractions to see every expected giant.
    fn top_k_for(&self, alpha: f64) -> usize {
        let m = predict_m(alpha).unwrap_or(1);
        self.top_k.max(m + 5)
    }

    pub fn engine_config(&self, alpha_index: usize, instance_index: usize) -> EngineConfig {
        let alpha = self.alphas[alpha_index];
        EngineConfig::new(
            alpha,
            self.node_count,
            derive_seed(self.base_seed, alpha_index as u64, instance_index as u64),
        )
        .with_sample_every(self.sample_every)
        .with_top_k(self.top_k_for(alpha))
    }
}

/// SplitMix64 output function (Steele, Lea and Flood).
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one instance: SplitMix64 chained over the base seed, the α index
/// and the instance index.
pub fn derive_seed(base_seed: u64, alpha_index: u64, instance_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ alpha_index) ^ instance_index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub alpha: f64,
    pub alpha_index: usize,
    pub instance_index: usize,
    pub seed: u64,
    /// `None` when no steady state was reached before the run ended.
    pub report: Option<SteadyStateReport>,
    pub jump: Option<JumpEvent>,
    /// Fractions above the giant threshold in the final state.
    pub terminal_fractions: Vec<f64>,
}

impl InstanceResult {
    pub fn detected_m(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.m)
    }
}

/// Runs one instance and keeps its trace.
pub fn run_instance_with_trace(
    config: &EnsembleConfig,
    alpha_index: usize,
    instance_index: usize,
) -> Result<(InstanceResult, Vec<TraceRecord>)> {
    let engine_config = config.engine_config(alpha_index, instance_index);
    let alpha = engine_config.alpha;
    let seed = engine_config.seed;
    let out = Engine::run(engine_config)?;
    let trace = out.trace;
    let report = detect_steady_state(&trace, config.criteria(alpha));
    let jump = detect_jump(&trace, config.node_count);
    let terminal_fractions = trace
        .last()
        .map(|r| {
            r.top_sizes
                .iter()
                .copied()
                .filter(|&c| c > GIANT_THRESHOLD)
                .collect()
        })
        .unwrap_or_default();
    Ok((
        InstanceResult {
            alpha,
            alpha_index,
            instance_index,
            seed,
            report,
            jump,
            terminal_fractions,
        },
        trace,
    ))
}

pub fn run_instance(config: &EnsembleConfig, alpha_index: usize, instance_index: usize) -> Result<InstanceResult> {
    run_instance_with_trace(config, alpha_index, instance_index).map(|(r, _)| r)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std, count })
    }

    pub fn std_error(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// Detected giant counts; undetected instances are kept apart.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MHistogram {
    pub counts: BTreeMap<usize, usize>,
    pub undetected: usize,
}

impl MHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.undetected
    }

    /// Most frequent detected m; ties go to the smaller m.
    pub fn modal(&self) -> Option<usize> {
        self.counts
            .iter()
            .fold(None, |best: Option<(usize, usize)>, (&m, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((m, c)),
            })
            .map(|(m, _)| m)
    }

    pub fn share_of(&self, m: usize) -> f64 {
        self.counts.get(&m).copied().unwrap_or(0) as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub instances: usize,
    pub seeds: Vec<u64>,
    pub histogram: MHistogram,
    pub modal_m: Option<usize>,
    /// Per-rank fraction statistics over instances that settled with the
    /// modal m.
    pub fractions: Vec<Stat>,
    pub sum_sq: Option<Stat>,
    pub x: Option<Stat>,
    pub results: Vec<InstanceResult>,
}

impl AlphaSummary {
    /// Aggregates one α's results, in whatever order they arrive.
    pub fn from_results(alpha: f64, mut results: Vec<InstanceResult>) -> Self {
        results.sort_by_key(|r| r.instance_index);
        let mut histogram = MHistogram::default();
        for r in &results {
            match r.detected_m() {
                Some(m) => *histogram.counts.entry(m).or_default() += 1,
                None => histogram.undetected += 1,
            }
        }
        let modal_m = histogram.modal();
        let settled: Vec<&SteadyStateReport> = results
            .iter()
            .filter_map(|r| r.report.as_ref())
            .filter(|rep| Some(rep.m) == modal_m)
            .collect();
        let fractions = (0..modal_m.unwrap_or(0))
            .filter_map(|i| Stat::of(&settled.iter().map(|rep| rep.fractions[i]).collect::<Vec<_>>()))
            .collect();
        let sum_sq = Stat::of(
            &settled
                .iter()
                .map(|rep| rep.fractions.iter().map(|c| c * c).sum())
                .collect::<Vec<_>>(),
        );
        let x = Stat::of(&settled.iter().map(|rep| rep.x).collect::<Vec<_>>());
        Self {
            alpha,
            instances: results.len(),
            seeds: results.iter().map(|r| r.seed).collect(),
            histogram,
            modal_m,
            fractions,
            sum_sq,
            x,
            results,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: EnsembleConfig,
    pub per_alpha: Vec<AlphaSummary>,
}

impl EnsembleSummary {
    pub fn from_results(config: EnsembleConfig, results: Vec<InstanceResult>) -> Self {
        let mut grouped: Vec<Vec<InstanceResult>> = vec![Vec::new(); config.alphas.len()];
        for r in results {
            grouped[r.alpha_index].push(r);
        }
        let per_alpha = config
            .alphas
            .iter()
            .zip(grouped)
            .map(|(&a, rs)| AlphaSummary::from_results(a, rs))
            .collect();
        Self { config, per_alpha }
    }
}

/// Runs `instances` independent runs for every α and summarizes them.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> = (0..config.alphas.len())
        .flat_map(|a| (0..config.instances).map(move |i| (a, i)))
        .collect();
    let results = tasks
        .into_par_iter()
        .map(|(a, i)| run_instance(config, a, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleSummary::from_results(config.clone(), results))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircasePoint {
    pub alpha: f64,
    pub predicted_m: usize,
    pub modal_m: Option<usize>,
    /// Share of all instances whose detected m equals the prediction.
    pub agreement: f64,
    pub histogram: MHistogram,
}

pub fn staircase_from_summary(summary: &EnsembleSummary) -> Result<Vec<StaircasePoint>> {
    summary
        .per_alpha
        .iter()
        .map(|s| {
            let predicted_m = predict_m(s.alpha)?;
            Ok(StaircasePoint {
                alpha: s.alpha,
                predicted_m,
                modal_m: s.modal_m,
                agreement: s.histogram.share_of(predicted_m),
                histogram: s.histogram.clone(),
            })
        })
        .collect()
}

/// Modal detected m for every α on the grid.
pub fn staircase_scan(
    alpha_grid: &[f64],
    node_count: usize,
    instances: usize,
    base_seed: u64,
) -> Result<Vec<StaircasePoint>> {
    let config = EnsembleConfig::new(alpha_grid.to_vec(), node_count, instances, base_seed);
    staircase_from_summary(&run_ensemble(&config)?)
}

/// The side of a comparison being checked against theory: an ensemble mean
/// or another prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedRow {
    pub alpha: f64,
    pub m: Option<usize>,
    pub sum_sq: Option<f64>,
    pub x: Option<f64>,
    pub fractions: Vec<f64>,
}

impl ObservedRow {
    pub fn from_summary(s: &AlphaSummary) -> Self {
        Self {
            alpha: s.alpha,
            m: s.modal_m,
            sum_sq: s.sum_sq.map(|st| st.mean),
            x: s.x.map(|st| st.mean),
            fractions: s.fractions.iter().map(|st| st.mean).collect(),
        }
    }

    /// A prediction read as an observation: `Σ C²` is the level bound `α_m`.
    pub fn from_prediction(p: &TheoryPrediction) -> Self {
        Self {
            alpha: p.alpha,
            m: Some(p.m),
            sum_sq: Some(p.alpha_m),
            x: Some(p.x_m),
            fractions: p.fractions.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub observed: f64,
    pub theory: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

impl ErrorPair {
    pub fn new(observed: f64, theory: f64) -> Self {
        let abs_error = (observed - theory).abs();
        Self {
            observed,
            theory,
            abs_error,
            rel_error: if theory != 0.0 { abs_error / theory.abs() } else { abs_error },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    pub observed_m: Option<usize>,
    pub theory_m: usize,
    pub sum_sq: Option<ErrorPair>,
    pub x: Option<ErrorPair>,
    /// Observed fraction means, rank by rank.
    pub observed_fractions: Vec<f64>,
    /// Per-rank errors where theory has a fraction for that rank.
    pub fractions: Vec<ErrorPair>,
}

fn same_alpha(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

/// Pairs observed rows with predictions at the same α.
pub fn compare_rows(observed: &[ObservedRow], predictions: &[TheoryPrediction]) -> Result<Vec<ComparisonRow>> {
    if observed.len() != predictions.len() {
        return Err(BfwError::MismatchedAlphas(format!(
            "{} observed rows against {} predictions",
            observed.len(),
            predictions.len()
        )));
    }
    observed
        .iter()
        .map(|o| {
            let p = predictions
                .iter()
                .find(|p| same_alpha(p.alpha, o.alpha))
                .ok_or_else(|| BfwError::MismatchedAlphas(format!("no prediction for alpha {}", o.alpha)))?;
            Ok(ComparisonRow {
                alpha: o.alpha,
                observed_m: o.m,
                theory_m: p.m,
                sum_sq: o.sum_sq.map(|v| ErrorPair::new(v, p.alpha_m)),
                x: o.x.map(|v| ErrorPair::new(v, p.x_m)),
                observed_fractions: o.fractions.clone(),
                fractions: o
                    .fractions
                    .iter()
                    .zip(&p.fractions)
                    .map(|(&c, &t)| ErrorPair::new(c, t))
                    .collect(),
            })
        })
        .collect()
}

/// Simulated against theoretical `Σ C²`, `x_m` and fractions, α by α.
pub fn compare_with_theory(summary: &EnsembleSummary, predictions: &[TheoryPrediction]) -> Result<Vec<ComparisonRow>> {
    let observed: Vec<ObservedRow> = summary.per_alpha.iter().map(ObservedRow::from_summary).collect();
    compare_rows(&observed, predictions)
}
