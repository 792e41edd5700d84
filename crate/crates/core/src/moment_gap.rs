//! Monte Carlo estimates of the four moment-gap quantities between coupled
//! samples `(X_n, Y_n)`, and elementwise / empirical-measure checks of the
//! inequalities that connect them.
//!
//! All means use pairwise summation with split points fixed by the length, so
//! reports are bit-identical regardless of how the samples were produced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, MeanEstimate};

/// Absolute tolerance for the exact inequalities; scaled up by the magnitude
/// of the right-hand side when that exceeds 1.
pub const INEQUALITY_TOL: f64 = 1e-12;

fn tolerance(rhs: f64) -> f64 {
    INEQUALITY_TOL * rhs.abs().max(1.0)
}

/// One coupled `(x, y)` array pair labelled by its sequence index.
#[derive(Debug, Clone, Copy)]
pub struct CoupledArrays<'a> {
    pub n: u64,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl<'a> CoupledArrays<'a> {
    pub fn new(n: u64, x: &'a [f64], y: &'a [f64]) -> Self {
        CoupledArrays { n, x, y }
    }
}

impl<'a> From<&'a crate::ar1_processes::ProcessPairSample> for CoupledArrays<'a> {
    fn from(s: &'a crate::ar1_processes::ProcessPairSample) -> Self {
        CoupledArrays {
            n: s.n as u64,
            x: &s.x,
            y: &s.y,
        }
    }
}

/// Gap quantities for one coupled sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    /// `Ê|X - Y|^r`
    pub gap_lr: f64,
    /// `|Ê|X|^r - Ê|Y|^r|`
    pub gap_abs_moment: f64,
    /// `|Ê X - Ê Y|`; only computed for `r = 1`.
    pub gap_mean: Option<f64>,
    /// `|(Ê|X|^r)^(1/r) - (Ê|Y|^r)^(1/r)|`
    pub gap_norm: f64,
    /// `(Ê|X - Y|^r)^(1/r)`, the empirical L_r distance.
    pub diff_norm: f64,
    pub hw_lr: f64,
    pub hw_abs_x: f64,
    pub hw_abs_y: f64,
    pub hw_mean: Option<f64>,
    pub m: usize,
}

/// Gap quantities for a single coupled sample; the building block of both the
/// sequence and the field reports.
pub fn gap_row(x: &[f64], y: &[f64], r: f64) -> Result<GapRow> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::config("r must be positive"));
    }
    if x.len() != y.len() {
        return Err(Error::shape(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::shape("coupled sample is empty"));
    }
    let idx: Vec<usize> = (0..x.len()).collect();
    let pw = |v: f64| v.abs().powf(r);
    let lr = stats::mean_estimate_by(&idx, |&i| pw(x[i] - y[i]));
    let ax = stats::mean_estimate_by(x, |&v| pw(v));
    let ay = stats::mean_estimate_by(y, |&v| pw(v));
    let (gap_mean, hw_mean) = if r == 1.0 {
        let mx = stats::pairwise_sum(x) / x.len() as f64;
        let my = stats::pairwise_sum(y) / y.len() as f64;
        let d = stats::mean_estimate_by(&idx, |&i| x[i] - y[i]);
        (Some((mx - my).abs()), Some(d.half_width))
    } else {
        (None, None)
    };
    Ok(GapRow {
        gap_lr: lr.mean,
        gap_abs_moment: (ax.mean - ay.mean).abs(),
        gap_mean,
        gap_norm: (ax.mean.powf(1.0 / r) - ay.mean.powf(1.0 / r)).abs(),
        diff_norm: lr.mean.powf(1.0 / r),
        hw_lr: lr.half_width,
        hw_abs_x: ax.half_width,
        hw_abs_y: ay.half_width,
        hw_mean,
        m: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReportRow {
    pub n: u64,
    #[serde(flatten)]
    pub gap: GapRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentGapReport {
    pub r: f64,
    pub rows: Vec<GapReportRow>,
}

impl MomentGapReport {
    pub fn n_grid(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn gap_lr(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap.gap_lr).collect()
    }

    /// `true` when `gap_lr` strictly decreases along the n-grid.
    pub fn gap_lr_strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].gap.gap_lr < w[0].gap.gap_lr)
    }
}

pub fn gap_report(pairs: &[CoupledArrays<'_>], r: f64) -> Result<MomentGapReport> {
    if pairs.is_empty() {
        return Err(Error::config("n_grid is empty"));
    }
    let ns: Vec<u64> = pairs.iter().map(|p| p.n).collect();
    if !stats::strictly_increasing(&ns) {
        return Err(Error::config("n_grid must be strictly increasing"));
    }
    let rows = pairs
        .iter()
        .map(|p| {
            Ok(GapReportRow {
                n: p.n,
                gap: gap_row(p.x, p.y, r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentGapReport { r, rows })
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::shape(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Count of indices violating `||x|^r - |y|^r| <= |x - y|^r`, `0 < r <= 1`.
pub fn verify_pointwise_inequalities(x: &[f64], y: &[f64], r: f64) -> Result<usize> {
    check_lengths(x, y)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::config("pointwise inequality requires 0 < r <= 1"));
    }
    Ok(x.iter()
        .zip(y)
        .filter(|(&a, &b)| {
            let lhs = (a.abs().powf(r) - b.abs().powf(r)).abs();
            let rhs = (a - b).abs().powf(r);
            lhs > rhs + tolerance(rhs)
        })
        .count())
}

/// Count of indices violating `|x - y|^r <= 2^r (|x|^r + |y|^r)`.
pub fn verify_cr_inequality(x: &[f64], y: &[f64], r: f64) -> Result<usize> {
    check_lengths(x, y)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::config("r must be positive"));
    }
    let c = 2f64.powf(r);
    Ok(x.iter()
        .zip(y)
        .filter(|(&a, &b)| {
            let lhs = (a - b).abs().powf(r);
            let rhs = c * (a.abs().powf(r) + b.abs().powf(r));
            lhs > rhs + tolerance(rhs)
        })
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiCheck {
    /// `|‖x‖_r - ‖y‖_r|` under the empirical measure.
    pub lhs: f64,
    /// `‖x - y‖_r` under the empirical measure.
    pub rhs: f64,
    pub holds: bool,
}

pub fn verify_minkowski_gap(x: &[f64], y: &[f64], r: f64) -> Result<MinkowskiCheck> {
    check_lengths(x, y)?;
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::config("Minkowski gap bound requires r >= 1"));
    }
    if x.is_empty() {
        return Err(Error::shape("empty sample"));
    }
    let m = x.len() as f64;
    let norm = |f: &dyn Fn(usize) -> f64| {
        let idx: Vec<usize> = (0..x.len()).collect();
        (stats::pairwise_sum_by(&idx, &|&i| f(i).abs().powf(r)) / m).powf(1.0 / r)
    };
    let nx = norm(&|i| x[i]);
    let ny = norm(&|i| y[i]);
    let lhs = (nx - ny).abs();
    let rhs = norm(&|i| x[i] - y[i]);
    Ok(MinkowskiCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + tolerance(rhs.max(nx).max(ny)),
    })
}

/// Mean estimate re-exported for report consumers that want raw moments.
pub fn abs_moment(x: &[f64], r: f64) -> MeanEstimate {
    stats::mean_estimate_by(x, |v| v.abs().powf(r))
}
