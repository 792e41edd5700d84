//! Empirical uniform-integrability and increasing-convex-order diagnostics.
//!
//! Everything here is computed from order statistics, so the monotonicity of
//! tail functionals and the convexity of integrated survivor curves hold for
//! every input rather than only in expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, MeanEstimate, CLT_Z};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub value: f64,
    pub half_width: f64,
}

/// Estimates of `E[|X_n|^r · 1(|X_n|^r > A)]` over an A-grid, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFunctionalCurve {
    pub r: f64,
    pub a_grid: Vec<f64>,
    /// `values[k][j]` is the estimate for sample `k` at `a_grid[j]`.
    pub values: Vec<Vec<TailPoint>>,
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(format!("{what} must not be empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) || !stats::strictly_increasing(grid) {
        return Err(Error::config(format!(
            "{what} must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Tail functional of a single sample along the A-grid.
fn tail_row(sample: &[f64], r: f64, a_grid: &[f64]) -> Vec<TailPoint> {
    let m = sample.len() as f64;
    let mut powers: Vec<f64> = sample.iter().map(|x| x.abs().powf(r)).collect();
    powers.sort_by(|a, b| b.total_cmp(a));
    // prefix sums over the descending powers: adding non-negative terms never
    // decreases a rounded sum, so the curve is monotone in A exactly
    let mut sum = Vec::with_capacity(powers.len() + 1);
    let mut sum_sq = Vec::with_capacity(powers.len() + 1);
    let (mut s, mut s2) = (0.0, 0.0);
    sum.push(0.0);
    sum_sq.push(0.0);
    for &p in &powers {
        s += p;
        s2 += p * p;
        sum.push(s);
        sum_sq.push(s2);
    }
    a_grid
        .iter()
        .map(|&a| {
            let k = powers.partition_point(|&p| p > a);
            let mean = sum[k] / m;
            let var = (sum_sq[k] / m - mean * mean).max(0.0);
            let half_width = if sample.len() > 1 {
                CLT_Z * (var * m / (m - 1.0) / m).sqrt()
            } else {
                0.0
            };
            TailPoint {
                value: mean,
                half_width,
            }
        })
        .collect()
}

pub fn tail_functional<S: AsRef<[f64]>>(
    samples: &[S],
    r: f64,
    a_grid: &[f64],
) -> Result<TailFunctionalCurve> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::config("r must be positive"));
    }
    check_grid(a_grid, "a_grid")?;
    if samples.iter().any(|s| s.as_ref().is_empty()) {
        return Err(Error::config("tail functional needs non-empty samples"));
    }
    Ok(TailFunctionalCurve {
        r,
        a_grid: a_grid.to_vec(),
        values: samples
            .iter()
            .map(|s| tail_row(s.as_ref(), r, a_grid))
            .collect(),
    })
}

/// Per-sample estimates of `E|X_n|^(1+delta)` and the capped-supremum flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiSufficiencyReport {
    pub delta: f64,
    pub cap: f64,
    pub estimates: Vec<TailPoint>,
    pub max_estimate: f64,
    /// Largest `estimate + half_width`.
    pub max_upper: f64,
    pub pass: bool,
}

pub fn check_ui_sufficient<S: AsRef<[f64]>>(
    samples: &[S],
    delta: f64,
    cap: f64,
) -> Result<UiSufficiencyReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::config("delta must be positive"));
    }
    if samples.is_empty() || samples.iter().any(|s| s.as_ref().is_empty()) {
        return Err(Error::config("UI check needs non-empty samples"));
    }
    let p = 1.0 + delta;
    let estimates: Vec<TailPoint> = samples
        .iter()
        .map(|s| {
            let MeanEstimate { mean, half_width } =
                stats::mean_estimate_by(s.as_ref(), |x| x.abs().powf(p));
            TailPoint {
                value: mean,
                half_width,
            }
        })
        .collect();
    let max_estimate = estimates
        .iter()
        .map(|e| e.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_upper = estimates
        .iter()
        .map(|e| e.value + e.half_width)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(UiSufficiencyReport {
        delta,
        cap,
        estimates,
        max_estimate,
        max_upper,
        pass: max_upper <= cap,
    })
}

/// Empirical integrated survivor function `H(t) = ∫_t^∞ (1 - F(u)) du`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivorCurve {
    pub t_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    /// CLT half-widths of `H(t) = E(X - t)_+`.
    pub half_widths: Vec<f64>,
}

/// Sorted sample with suffix sums, evaluating `H(t) = (1/M) sum (x_i - t)_+`.
struct SurvivorTable {
    xs: Vec<f64>,
    suffix: Vec<f64>,
    suffix_sq: Vec<f64>,
}

impl SurvivorTable {
    fn new(sample: &[f64]) -> Self {
        let xs = stats::sorted(sample);
        let n = xs.len();
        let mut suffix = vec![0.0; n + 1];
        let mut suffix_sq = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + xs[i];
            suffix_sq[i] = suffix_sq[i + 1] + xs[i] * xs[i];
        }
        SurvivorTable {
            xs,
            suffix,
            suffix_sq,
        }
    }

    /// `(H(t), half_width)`
    fn eval(&self, t: f64) -> (f64, f64) {
        let m = self.xs.len() as f64;
        let start = self.xs.partition_point(|&x| x <= t);
        let k = (self.xs.len() - start) as f64;
        if k == 0.0 {
            return (0.0, 0.0);
        }
        let h = (self.suffix[start] - k * t) / m;
        // sum (x - t)^2 over the k exceedances
        let s2 = self.suffix_sq[start] - 2.0 * t * self.suffix[start] + k * t * t;
        let var = (s2.max(0.0) / m - h * h).max(0.0);
        let hw = if self.xs.len() > 1 {
            CLT_Z * (var / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        (h.max(0.0), hw)
    }
}

pub fn integrated_survivor(sample: &[f64], t_grid: &[f64]) -> Result<SurvivorCurve> {
    if sample.is_empty() {
        return Err(Error::config(
            "integrated survivor needs a non-empty sample",
        ));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::config("t_grid must be non-negative"));
    }
    check_grid(t_grid, "t_grid")?;
    let table = SurvivorTable::new(sample);
    let (h_values, half_widths) = t_grid.iter().map(|&t| table.eval(t)).unzip();
    Ok(SurvivorCurve {
        t_grid: t_grid.to_vec(),
        h_values,
        half_widths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcVerdict {
    LeqIc,
    GeqIc,
    Crossing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcMargin {
    pub t: f64,
    pub h1: f64,
    pub h2: f64,
    /// Combined CLT half-width of `h1 - h2`.
    pub slack: f64,
}

impl IcMargin {
    /// `h2 - h1`; positive where sample 1 is smaller.
    pub fn margin(&self) -> f64 {
        self.h2 - self.h1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcComparison {
    pub verdict: IcVerdict,
    pub margins: Vec<IcMargin>,
}

/// Compare two non-negative samples in the increasing convex order through
/// their empirical integrated survivor functions.
///
/// * `crossing`: `H1 > H2 + slack` somewhere and `H2 > H1 + slack` elsewhere.
/// * `leq_ic`: `H1 <= H2 + slack` everywhere, and either `H2 > H1 + slack`
///   somewhere or `H1 <= H2` at every grid point (this covers identical samples).
/// * `geq_ic`: the mirror image.
/// * `inconclusive`: all differences within slack without an exact ordering.
pub fn ic_compare(sample1: &[f64], sample2: &[f64], t_grid: &[f64]) -> Result<IcComparison> {
    for s in [sample1, sample2] {
        if s.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::config(
                "ic comparison needs non-negative samples (apply |.| upstream)",
            ));
        }
    }
    let c1 = integrated_survivor(sample1, t_grid)?;
    let c2 = integrated_survivor(sample2, t_grid)?;
    let margins: Vec<IcMargin> = (0..t_grid.len())
        .map(|i| IcMargin {
            t: t_grid[i],
            h1: c1.h_values[i],
            h2: c2.h_values[i],
            slack: (c1.half_widths[i].powi(2) + c2.half_widths[i].powi(2)).sqrt(),
        })
        .collect();
    let above = margins.iter().any(|m| m.h1 > m.h2 + m.slack);
    let below = margins.iter().any(|m| m.h2 > m.h1 + m.slack);
    let verdict = match (above, below) {
        (true, true) => IcVerdict::Crossing,
        (false, true) => IcVerdict::LeqIc,
        (true, false) => IcVerdict::GeqIc,
        (false, false) => {
            if margins.iter().all(|m| m.h1 <= m.h2) {
                IcVerdict::LeqIc
            } else if margins.iter().all(|m| m.h2 <= m.h1) {
                IcVerdict::GeqIc
            } else {
                IcVerdict::Inconclusive
            }
        }
    };
    Ok(IcComparison { verdict, margins })
}

/// Geometric grid of `points` values from `lo` to `hi` (both > 0).
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::config(
            "geometric grid needs 0 < lo < hi and at least 2 points",
        ));
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| lo * (ratio * i as f64).exp()).collect();
    g[points - 1] = hi;
    Ok(g)
}

/// Default grid: geometric from the 1% quantile of `|x|` (floored at 1e-6)
/// to twice the largest `|x|`.
pub fn default_grid(sample: &[f64], points: usize) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::config("default grid needs a non-empty sample"));
    }
    let abs: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
    let s = stats::sorted(&abs);
    let lo = s[s.len() / 100].max(1e-6);
    let hi = (2.0 * s[s.len() - 1]).max(lo * 10.0);
    geometric_grid(lo, hi, points)
}
