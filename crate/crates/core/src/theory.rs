//! Steady-state theory: the number of giants for a given α, the total giant
//! fraction, and the component-size recursion.
//!
//! The size system at level `m` is
//!
//! ```text
//! Σ C_i²  = α_m
//! Σ C_i   = x_m
//! 1 − x_m = exp(−2 x_m / α)
//! ```
//!
//! together with the shift rule `C_{i+1}^m = C_i^{m+1}`: the `m+1` state keeps
//! all but the largest giant of the `m` state and splits the remaining mass
//! into two new smallest components. Each level therefore has two unknowns,
//! fixed by the sum and sum-of-squares constraints.

use serde::{Deserialize, Serialize};

use crate::error::{BfwError, Result};

/// Measured upper bound of the two-giant interval.
pub const EMPIRICAL_ALPHA2: f64 = 0.52;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Negative discriminants smaller than this are rounding noise.
const DISCRIMINANT_SLACK: f64 = 1e-14;

/// Which α enters the exponential when solving for `x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XEvaluation {
    /// At the upper bound `α_m` of each level's interval.
    #[default]
    IntervalUpper,
    /// At the caller's α on every level.
    SuppliedAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryOptions {
    pub empirical_alpha2: bool,
    pub x_evaluation: XEvaluation,
    pub tol: f64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self {
            empirical_alpha2: false,
            x_evaluation: XEvaluation::IntervalUpper,
            tol: DEFAULT_TOL,
        }
    }
}

/// Absolute residuals of a level's constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|Σ C_i − x_m|`
    pub sum: f64,
    /// `|Σ C_i² − α_m|`; absent at `m = 1`, where the single fraction is set
    /// by the sum constraint alone.
    pub sum_sq: Option<f64>,
    /// `|1 − x_m − exp(−2 x_m / α)|` at the α used for `x_m`.
    pub giant_fraction: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.sum
            .max(self.sum_sq.unwrap_or(0.0))
            .max(self.giant_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    /// α the prediction was requested for.
    pub alpha: f64,
    pub m: usize,
    pub alpha_m: f64,
    pub x_m: f64,
    /// `C_1 ≥ … ≥ C_m`; empty when the size recursion broke down.
    pub fractions: Vec<f64>,
    pub residuals: Option<Residuals>,
    /// Level at which the size recursion had no real solution.
    pub infeasible_level: Option<usize>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(BfwError::InvalidConfig(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

/// The `m` with `1/(m+1) < α ≤ 1/m`.
pub fn predict_m(alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    let mut m = (1.0 / alpha).floor().max(1.0) as usize;
    while alpha > 1.0 / m as f64 {
        m -= 1;
    }
    while alpha <= 1.0 / (m + 1) as f64 {
        m += 1;
    }
    Ok(m)
}

/// Upper end of the `m`-giant interval: `1/m`, or the measured 0.52 for
/// `m = 2` when `empirical` is set.
pub fn alpha_upper(m: usize, empirical: bool) -> f64 {
    if empirical && m == 2 {
        EMPIRICAL_ALPHA2
    } else {
        1.0 / m as f64
    }
}

fn giant_residual(x: f64, alpha: f64) -> f64 {
    1.0 - x - (-2.0 * x / alpha).exp()
}

/// Root in `(0, 1)` of `1 − x = exp(−2x/α)`.
///
/// Bisection down to a narrow bracket, then Newton steps that are only kept
/// while they stay inside the bracket.
pub fn solve_giant_fraction(alpha: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(BfwError::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    let h = |x: f64| giant_residual(x, alpha);
    let mut lo = 1e-9;
    let mut hi = 1.0;
    if h(lo) <= 0.0 {
        return Err(BfwError::NoBracket(alpha));
    }
    // exp(−2/α) underflows: the root is 1 to double precision.
    if h(hi) >= 0.0 {
        return Ok(1.0);
    }
    for _ in 0..200 {
        if hi - lo < 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let hx = h(x);
        if hx == 0.0 {
            return Ok(x);
        }
        if hx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = -1.0 + (2.0 / alpha) * (-2.0 * x / alpha).exp();
        let newton = x - hx / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 2.0 * f64::EPSILON * x || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if h(x).abs() > tol {
        return Err(BfwError::NoBracket(alpha));
    }
    Ok(x)
}

/// Two numbers `a ≥ b` with `a + b = sum` and `a² + b² = sum_sq`.
pub fn split_pair(sum: f64, sum_sq: f64, level: usize) -> Result<(f64, f64)> {
    let disc = 2.0 * sum_sq - sum * sum;
    if disc < -DISCRIMINANT_SLACK {
        return Err(BfwError::Infeasible {
            level,
            discriminant: disc,
        });
    }
    let root = disc.max(0.0).sqrt();
    let (a, b) = (0.5 * (sum + root), 0.5 * (sum - root));
    if b <= 0.0 {
        return Err(BfwError::Infeasible {
            level,
            discriminant: disc,
        });
    }
    Ok((a, b))
}

/// One level of the recursion: `known` are the fractions inherited from the
/// level below; the two new ones absorb what is left of `x_m` and `α_m`.
/// The result is ranked largest first.
pub fn solve_level(known: &[f64], x_m: f64, alpha_m: f64, level: usize) -> Result<Vec<f64>> {
    let sum = x_m - known.iter().sum::<f64>();
    let sum_sq = alpha_m - known.iter().map(|c| c * c).sum::<f64>();
    let (a, b) = split_pair(sum, sum_sq, level)?;
    let mut out = Vec::with_capacity(known.len() + 2);
    out.extend_from_slice(known);
    out.push(a);
    out.push(b);
    out.sort_by(|p, q| q.total_cmp(p));
    Ok(out)
}

fn level_x(level: usize, alpha: f64, opts: &TheoryOptions) -> Result<(f64, f64)> {
    let alpha_m = alpha_upper(level, opts.empirical_alpha2);
    let x_alpha = match opts.x_evaluation {
        XEvaluation::IntervalUpper => alpha_m,
        XEvaluation::SuppliedAlpha => alpha,
    };
    Ok((alpha_m, solve_giant_fraction(x_alpha, opts.tol)?))
}

/// Component fractions of the `m_target`-giant state.
///
/// Fails with [`BfwError::Infeasible`] naming the first level whose pair of
/// new fractions has no positive real solution.
pub fn solve_sizes(m_target: usize, alpha: f64, opts: &TheoryOptions) -> Result<TheoryPrediction> {
    check_alpha(alpha)?;
    if m_target == 0 {
        return Err(BfwError::InvalidConfig("m must be at least 1".into()));
    }
    let (alpha_1, x_1) = level_x(1, alpha, opts)?;
    let mut fractions = vec![x_1];
    let (mut alpha_m, mut x_m) = (alpha_1, x_1);
    for level in 2..=m_target {
        (alpha_m, x_m) = level_x(level, alpha, opts)?;
        let known = if level == 2 { &[][..] } else { &fractions[1..] };
        fractions = solve_level(known, x_m, alpha_m, level)?;
    }
    let x_alpha = match opts.x_evaluation {
        XEvaluation::IntervalUpper => alpha_m,
        XEvaluation::SuppliedAlpha => alpha,
    };
    let residuals = Residuals {
        sum: (fractions.iter().sum::<f64>() - x_m).abs(),
        sum_sq: (m_target > 1)
            .then(|| (fractions.iter().map(|c| c * c).sum::<f64>() - alpha_m).abs()),
        giant_fraction: giant_residual(x_m, x_alpha).abs(),
    };
    Ok(TheoryPrediction {
        alpha,
        m: m_target,
        alpha_m,
        x_m,
        fractions,
        residuals: Some(residuals),
        infeasible_level: None,
    })
}

/// Prediction for `alpha` at `m = predict_m(alpha)`. When the size recursion
/// fails, `α_m` and `x_m` are still filled in and the failing level recorded.
pub fn predict(alpha: f64, opts: &TheoryOptions) -> Result<TheoryPrediction> {
    predict_with_m(predict_m(alpha)?, alpha, opts)
}

pub fn predict_with_m(m: usize, alpha: f64, opts: &TheoryOptions) -> Result<TheoryPrediction> {
    match solve_sizes(m, alpha, opts) {
        Ok(p) => Ok(p),
        Err(BfwError::Infeasible { level, .. }) => {
            let (alpha_m, x_m) = level_x(m, alpha, opts)?;
            Ok(TheoryPrediction {
                alpha,
                m,
                alpha_m,
                x_m,
                fractions: Vec::new(),
                residuals: None,
                infeasible_level: Some(level),
            })
        }
        Err(e) => Err(e),
    }
}
