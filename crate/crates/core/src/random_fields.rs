//! Lambda-indexed random fields of coupled pairs built from causal functionals
//! of one shared i.i.d. input path, with sup-over-lambda gap reports and a
//! marginal stationarity check.
//!
//! For each replication a single path `xi_t`, `t = min(Λ) - W + 1 ..= max(Λ)`,
//! is drawn. Both `Psi_n` and `Phi_n` see the same window
//! `(xi_λ, xi_{λ-1}, ..., xi_{λ-W+1})` at every λ.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment_gap::{self, GapRow};
use crate::sampling::{make_stream, InnovationSpec, StreamKey, LANE_FIELD};
use crate::stats;

/// Sequence index of a field, `(n_1, ..., n_q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Smallest component; `n -> ∞` in the multi-index sense iff this grows.
    pub fn min_component(&self) -> usize {
        self.0.iter().copied().min().unwrap_or(0)
    }

    /// Componentwise `self <= other`.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(";"))
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// Registry of causal functionals. Windows are passed newest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Functional {
    /// `c`, independent of the inputs.
    Constant { c: f64 },
    /// `mu + sum_{j<W} rho^j xi_{λ-j}`: the AR(1) filter cut at the window.
    Ar1Window {
        rho: f64,
        #[serde(default)]
        mu: f64,
    },
    /// `mu + sum_{j<=q} rho^j xi_{λ-j}` with `q = ceil(c · log2 min(n))`.
    Ar1Truncated {
        rho: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default = "default_truncation_c")]
        c: f64,
    },
    /// `clamp(sum_k a_k xi_λ^k, -clip, clip)`.
    ClippedPoly { coefficients: Vec<f64>, clip: f64 },
    /// Returns λ itself. Not λ-invariant; used to exercise the stationarity check.
    LambdaProbe,
}

fn default_truncation_c() -> f64 {
    2.0
}

/// Catalog entry describing a registry functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub description: &'static str,
    pub support: &'static str,
    pub tail_error: &'static str,
    pub lipschitz: &'static str,
    pub lambda_invariant: bool,
}

pub fn functional_catalog() -> Vec<FunctionalInfo> {
    let mut v = vec![
        FunctionalInfo {
            name: "ar1_truncated",
            params: "rho in (-1,1), mu (default 0), c >= 0 (default 2)",
            description: "AR(1) filter truncated at q(n) = ceil(c log2 min(n)) taps",
            support: "q(n) + 1",
            tail_error: "0 once W >= q(n) + 1 (the discarded taps are the point)",
            lipschitz: "(1 - |rho|^(q+1)) / (1 - |rho|) in the sup norm of the window",
            lambda_invariant: true,
        },
        FunctionalInfo {
            name: "ar1_window",
            params: "rho in (-1,1), mu (default 0)",
            description: "AR(1) filter mu + sum_{j<W} rho^j xi_{λ-j}",
            support: "1",
            tail_error: "|rho|^W sigma / sqrt(1 - rho^2)",
            lipschitz: "1 / (1 - |rho|) in the sup norm of the window",
            lambda_invariant: true,
        },
        FunctionalInfo {
            name: "clipped_poly",
            params: "coefficients a_0..a_d, clip > 0",
            description: "clamp(sum a_k xi_λ^k, -clip, clip)",
            support: "1",
            tail_error: "0",
            lipschitz: "|a_1| for d <= 1, otherwise none globally",
            lambda_invariant: true,
        },
        FunctionalInfo {
            name: "constant",
            params: "c",
            description: "constant c",
            support: "1",
            tail_error: "0",
            lipschitz: "0",
            lambda_invariant: true,
        },
        FunctionalInfo {
            name: "lambda_probe",
            params: "none",
            description: "returns λ; deliberately violates marginal stationarity",
            support: "1",
            tail_error: "0",
            lipschitz: "0",
            lambda_invariant: false,
        },
    ];
    v.sort_by_key(|f| f.name);
    v
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::Constant { .. } => "constant",
            Functional::Ar1Window { .. } => "ar1_window",
            Functional::Ar1Truncated { .. } => "ar1_truncated",
            Functional::ClippedPoly { .. } => "clipped_poly",
            Functional::LambdaProbe => "lambda_probe",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Functional::Constant { c } if !c.is_finite() => {
                Err(Error::config("constant c must be finite"))
            }
            Functional::Ar1Window { rho, mu } | Functional::Ar1Truncated { rho, mu, .. }
                if !(rho.abs() < 1.0 && mu.is_finite()) =>
            {
                Err(Error::config("rho must lie in (-1,1)"))
            }
            Functional::Ar1Truncated { c, .. } if !(*c >= 0.0 && c.is_finite()) => {
                Err(Error::config("ar1_truncated c must be non-negative"))
            }
            Functional::ClippedPoly { coefficients, clip } => {
                if coefficients.is_empty() || coefficients.iter().any(|a| !a.is_finite()) {
                    Err(Error::config("clipped_poly needs finite coefficients"))
                } else if !(*clip > 0.0) {
                    Err(Error::config("clipped_poly clip must be positive"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn truncation_lag(c: f64, n: &MultiIndex) -> usize {
        let m = n.min_component().max(1) as f64;
        (c * m.log2()).ceil().max(0.0) as usize
    }

    /// Minimum window length the functional reads at index `n`.
    pub fn support(&self, n: &MultiIndex) -> usize {
        match self {
            Functional::Ar1Truncated { c, .. } => Self::truncation_lag(*c, n) + 1,
            _ => 1,
        }
    }

    /// Declared L2 error from cutting the infinite past at `window` inputs.
    pub fn tail_error(&self, window: usize, xi_sd: f64) -> f64 {
        match self {
            Functional::Ar1Window { rho, .. } => {
                rho.abs().powi(window as i32) * xi_sd / (1.0 - rho * rho).sqrt()
            }
            _ => 0.0,
        }
    }

    /// Lipschitz constant in the sup norm of the window, when one exists.
    pub fn lipschitz(&self, n: &MultiIndex) -> Option<f64> {
        match self {
            Functional::Constant { .. } | Functional::LambdaProbe => Some(0.0),
            Functional::Ar1Window { rho, .. } => Some(1.0 / (1.0 - rho.abs())),
            Functional::Ar1Truncated { rho, c, .. } => {
                let q = Self::truncation_lag(*c, n);
                Some((1.0 - rho.abs().powi(q as i32 + 1)) / (1.0 - rho.abs()))
            }
            Functional::ClippedPoly { coefficients, .. } => match coefficients.len() {
                1 => Some(0.0),
                2 => Some(coefficients[1].abs()),
                _ => None,
            },
        }
    }

    pub fn lambda_invariant(&self) -> bool {
        !matches!(self, Functional::LambdaProbe)
    }

    /// Evaluate on a window `(xi_λ, xi_{λ-1}, ...)`.
    pub fn eval(&self, window: &[f64], lambda: i64, n: &MultiIndex) -> f64 {
        let filter = |rho: f64, mu: f64, taps: &[f64]| {
            let mut s = 0.0;
            for &v in taps.iter().rev() {
                s = rho * s + v;
            }
            mu + s
        };
        match self {
            Functional::Constant { c } => *c,
            Functional::Ar1Window { rho, mu } => filter(*rho, *mu, window),
            Functional::Ar1Truncated { rho, mu, c } => {
                let q = Self::truncation_lag(*c, n);
                filter(*rho, *mu, &window[..(q + 1).min(window.len())])
            }
            Functional::ClippedPoly { coefficients, clip } => {
                let x = window[0];
                let mut s = 0.0;
                for &a in coefficients.iter().rev() {
                    s = s * x + a;
                }
                s.clamp(-clip, *clip)
            }
            Functional::LambdaProbe => lambda as f64,
        }
    }
}

fn default_tail_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub lambda_grid: Vec<i64>,
    pub field_dim: usize,
    pub n_grid: Vec<MultiIndex>,
    pub psi: Functional,
    pub phi: Functional,
    pub window: usize,
    #[serde(default)]
    pub xi: InnovationSpec,
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() || !stats::strictly_increasing(&self.lambda_grid) {
            return Err(Error::config(
                "lambda_grid must be non-empty and strictly increasing",
            ));
        }
        if !(self.field_dim == 1 || self.field_dim == 2) {
            return Err(Error::config("field_dim must be 1 or 2"));
        }
        if self.window == 0 {
            return Err(Error::config("window must be at least 1"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid must not be empty"));
        }
        for n in &self.n_grid {
            self.check_index(n)?;
        }
        for w in self.n_grid.windows(2) {
            if !(w[0].le_componentwise(&w[1]) && w[0] != w[1]) {
                return Err(Error::config(format!(
                    "n_grid must increase componentwise ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        self.psi.validate()?;
        self.phi.validate()?;
        self.xi.validate()?;
        let sd = self.xi.std_dev();
        for f in [&self.psi, &self.phi] {
            let err = f.tail_error(self.window, sd);
            if !(err < self.tail_tolerance) {
                return Err(Error::config(format!(
                    "window {} leaves tail error {err:e} for `{}`, above tolerance {:e}",
                    self.window,
                    f.name(),
                    self.tail_tolerance
                )));
            }
        }
        Ok(())
    }

    pub fn check_index(&self, n: &MultiIndex) -> Result<()> {
        if n.dim() != self.field_dim || n.0.contains(&0) {
            return Err(Error::config(format!(
                "multi-index {n} must have {} components, each >= 1",
                self.field_dim
            )));
        }
        for f in [&self.psi, &self.phi] {
            if f.support(n) > self.window {
                return Err(Error::config(format!(
                    "window {} is shorter than the support {} of `{}` at n = {n}",
                    self.window,
                    f.support(n),
                    f.name()
                )));
            }
        }
        Ok(())
    }

    /// Window length needed to keep `Ar1Window` tail error below `tol`.
    pub fn window_for(rho: f64, xi_sd: f64, tol: f64) -> usize {
        let f = Functional::Ar1Window { rho, mu: 0.0 };
        (1..100_000)
            .find(|&w| f.tail_error(w, xi_sd) < tol)
            .unwrap_or(100_000)
    }
}

/// `M` replications of `(X_n(λ), Y_n(λ))` over the λ-grid, row-major `M × |Λ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub spec: FieldSpec,
    pub n: MultiIndex,
    pub m: usize,
    pub x_field: Vec<f64>,
    pub y_field: Vec<f64>,
}

impl FieldSample {
    pub fn lambdas(&self) -> &[i64] {
        &self.spec.lambda_grid
    }

    fn width(&self) -> usize {
        self.spec.lambda_grid.len()
    }

    pub fn lambda_position(&self, lambda: i64) -> Result<usize> {
        self.spec
            .lambda_grid
            .binary_search(&lambda)
            .map_err(|_| Error::config(format!("λ = {lambda} is not in the grid")))
    }

    pub fn x_column(&self, pos: usize) -> Vec<f64> {
        self.x_field
            .iter()
            .skip(pos)
            .step_by(self.width())
            .copied()
            .collect()
    }

    pub fn y_column(&self, pos: usize) -> Vec<f64> {
        self.y_field
            .iter()
            .skip(pos)
            .step_by(self.width())
            .copied()
            .collect()
    }
}

pub fn simulate_field(
    spec: &FieldSpec,
    n: &MultiIndex,
    m: usize,
    key: StreamKey,
) -> Result<FieldSample> {
    spec.validate()?;
    spec.check_index(n)?;
    if m == 0 {
        return Err(Error::config("M must be at least 1"));
    }
    let sampler = spec.xi.sampler()?;
    let lo = spec.lambda_grid[0];
    let hi = *spec.lambda_grid.last().unwrap();
    let w = spec.window;
    let path_len = (hi - lo) as usize + w;
    let key = key.with_lane(LANE_FIELD);
    let base = key.replication_id;

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = make_stream(key.with_replication(base + i));
            // rev[k] = xi_{hi - k}, so the window at λ is rev[hi - λ ..][..w]
            let mut rev = vec![0.0; path_len];
            sampler.fill(&mut stream, &mut rev);
            let mut xs = Vec::with_capacity(spec.lambda_grid.len());
            let mut ys = Vec::with_capacity(spec.lambda_grid.len());
            for &lambda in &spec.lambda_grid {
                let start = (hi - lambda) as usize;
                let window = &rev[start..start + w];
                xs.push(spec.psi.eval(window, lambda, n));
                ys.push(spec.phi.eval(window, lambda, n));
            }
            (xs, ys)
        })
        .collect();

    let mut x_field = Vec::with_capacity(m * spec.lambda_grid.len());
    let mut y_field = Vec::with_capacity(m * spec.lambda_grid.len());
    for (xs, ys) in rows {
        x_field.extend(xs);
        y_field.extend(ys);
    }
    Ok(FieldSample {
        spec: spec.clone(),
        n: n.clone(),
        m,
        x_field,
        y_field,
    })
}

/// Per replication, `max_λ |X_n(λ) - Y_n(λ)|`.
pub fn sup_gap(sample: &FieldSample) -> Vec<f64> {
    let w = sample.width();
    sample
        .x_field
        .chunks(w)
        .zip(sample.y_field.chunks(w))
        .map(|(xs, ys)| {
            xs.iter()
                .zip(ys)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGapRow {
    pub n: MultiIndex,
    pub sup_gap_lr: f64,
    pub argmax_lr: i64,
    pub sup_gap_abs_moment: f64,
    pub argmax_abs_moment: i64,
    pub sup_gap_mean: Option<f64>,
    pub argmax_mean: Option<i64>,
    pub sup_gap_norm: f64,
    pub argmax_norm: i64,
    /// Gap quantities at every λ, in grid order.
    pub per_lambda: Vec<GapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGapReport {
    pub r: f64,
    pub lambda_grid: Vec<i64>,
    pub rows: Vec<FieldGapRow>,
}

fn argmax(lambdas: &[i64], values: impl Iterator<Item = f64>) -> (f64, i64) {
    let mut best = (f64::NEG_INFINITY, lambdas[0]);
    for (v, &l) in values.zip(lambdas) {
        if v > best.0 {
            best = (v, l);
        }
    }
    best
}

pub fn field_gap_report(samples: &[FieldSample], r: f64) -> Result<FieldGapReport> {
    let Some(first) = samples.first() else {
        return Err(Error::config("no field samples"));
    };
    if samples.iter().any(|s| s.spec != first.spec) {
        return Err(Error::config("field samples come from different specs"));
    }
    let lambdas = first.lambdas().to_vec();
    let rows = samples
        .iter()
        .map(|s| {
            let per_lambda = (0..lambdas.len())
                .map(|pos| moment_gap::gap_row(&s.x_column(pos), &s.y_column(pos), r))
                .collect::<Result<Vec<GapRow>>>()?;
            let (sup_gap_lr, argmax_lr) = argmax(&lambdas, per_lambda.iter().map(|g| g.gap_lr));
            let (sup_gap_abs_moment, argmax_abs_moment) =
                argmax(&lambdas, per_lambda.iter().map(|g| g.gap_abs_moment));
            let (sup_gap_norm, argmax_norm) =
                argmax(&lambdas, per_lambda.iter().map(|g| g.gap_norm));
            let (sup_gap_mean, argmax_mean) = if per_lambda[0].gap_mean.is_some() {
                let (v, l) = argmax(
                    &lambdas,
                    per_lambda.iter().map(|g| g.gap_mean.unwrap_or(f64::NAN)),
                );
                (Some(v), Some(l))
            } else {
                (None, None)
            };
            Ok(FieldGapRow {
                n: s.n.clone(),
                sup_gap_lr,
                argmax_lr,
                sup_gap_abs_moment,
                argmax_abs_moment,
                sup_gap_mean,
                argmax_mean,
                sup_gap_norm,
                argmax_norm,
                per_lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldGapReport {
        r,
        lambda_grid: lambdas,
        rows,
    })
}

/// Family-wise level of the stationarity flag. Each of the three projections
/// is tested at a third of it.
pub const STATIONARITY_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityCheck {
    pub lambda: i64,
    pub lambda_prime: i64,
    pub ks_x: f64,
    pub ks_y: f64,
    pub ks_diff: f64,
    pub critical_value: f64,
    pub consistent: bool,
}

pub fn check_marginal_stationarity(
    sample: &FieldSample,
    lambda_pairs: &[(i64, i64)],
) -> Result<Vec<StationarityCheck>> {
    let crit = stats::ks_critical_value(sample.m, sample.m, STATIONARITY_LEVEL / 3.0);
    lambda_pairs
        .iter()
        .map(|&(a, b)| {
            let pa = sample.lambda_position(a)?;
            let pb = sample.lambda_position(b)?;
            let (xa, ya) = (sample.x_column(pa), sample.y_column(pa));
            let (xb, yb) = (sample.x_column(pb), sample.y_column(pb));
            let da: Vec<f64> = xa.iter().zip(&ya).map(|(x, y)| x - y).collect();
            let db: Vec<f64> = xb.iter().zip(&yb).map(|(x, y)| x - y).collect();
            let ks_x = stats::ks_statistic(&xa, &xb);
            let ks_y = stats::ks_statistic(&ya, &yb);
            let ks_diff = stats::ks_statistic(&da, &db);
            Ok(StationarityCheck {
                lambda: a,
                lambda_prime: b,
                ks_x,
                ks_y,
                ks_diff,
                critical_value: crit,
                consistent: ks_x < crit && ks_y < crit && ks_diff < crit,
            })
        })
        .collect()
}

/// All unordered pairs `(λ, λ')`, `λ < λ'`, of the grid.
pub fn all_lambda_pairs(grid: &[i64]) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for (i, &a) in grid.iter().enumerate() {
        for &b in &grid[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(psi: Functional, phi: Functional) -> FieldSpec {
        FieldSpec {
            lambda_grid: (0..5).collect(),
            field_dim: 1,
            n_grid: vec![MultiIndex(vec![4]), MultiIndex(vec![16])],
            psi,
            phi,
            window: 40,
            xi: InnovationSpec::default(),
            tail_tolerance: 1e-10,
        }
    }

    fn ar1() -> Functional {
        Functional::Ar1Window { rho: 0.5, mu: 0.0 }
    }

    #[test]
    fn equal_functionals_give_equal_fields() {
        let s = spec(ar1(), ar1());
        let f = simulate_field(&s, &MultiIndex(vec![4]), 50, StreamKey::new(1, 0, 0)).unwrap();
        assert_eq!(f.x_field, f.y_field);
        assert!(sup_gap(&f).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn constant_functional_ignores_inputs() {
        let s = spec(Functional::Constant { c: 2.5 }, ar1());
        let f = simulate_field(&s, &MultiIndex(vec![4]), 20, StreamKey::new(1, 0, 0)).unwrap();
        assert!(f.x_field.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn window_filter_hand_value() {
        let f = Functional::Ar1Window { rho: 0.5, mu: 1.0 };
        // 1 + 1 + 0.5·2 + 0.25·4
        assert_eq!(f.eval(&[1.0, 2.0, 4.0], 0, &MultiIndex(vec![1])), 4.0);
        let t = Functional::Ar1Truncated {
            rho: 0.5,
            mu: 0.0,
            c: 1.0,
        };
        // n = 2 -> q = 1 -> two taps
        assert_eq!(t.eval(&[1.0, 2.0, 4.0], 0, &MultiIndex(vec![2])), 2.0);
        let p = Functional::ClippedPoly {
            coefficients: vec![1.0, 0.0, 1.0],
            clip: 5.0,
        };
        assert_eq!(p.eval(&[3.0], 0, &MultiIndex(vec![1])), 5.0);
        assert_eq!(p.eval(&[1.0], 0, &MultiIndex(vec![1])), 2.0);
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(ar1(), ar1());
        s.window = 5;
        assert!(s.validate().is_err(), "tail error too large");
        let mut s = spec(
            ar1(),
            Functional::Ar1Truncated {
                rho: 0.5,
                mu: 0.0,
                c: 20.0,
            },
        );
        s.window = 40;
        assert!(s.validate().is_err(), "support exceeds window at n = 16");
        let mut s = spec(ar1(), ar1());
        s.n_grid = vec![MultiIndex(vec![4]), MultiIndex(vec![2])];
        assert!(s.validate().is_err());
        let mut s = spec(ar1(), ar1());
        s.n_grid = vec![MultiIndex(vec![4, 4])];
        assert!(s.validate().is_err());
    }

    #[test]
    fn stationarity_same_lambda_is_zero_and_unknown_lambda_errors() {
        let s = spec(
            ar1(),
            Functional::Ar1Truncated {
                rho: 0.5,
                mu: 0.0,
                c: 2.0,
            },
        );
        let f = simulate_field(&s, &MultiIndex(vec![4]), 200, StreamKey::new(3, 0, 0)).unwrap();
        let c = check_marginal_stationarity(&f, &[(2, 2)]).unwrap();
        assert_eq!((c[0].ks_x, c[0].ks_y, c[0].ks_diff), (0.0, 0.0, 0.0));
        assert!(c[0].consistent);
        assert!(check_marginal_stationarity(&f, &[(2, 99)]).is_err());
    }

    #[test]
    fn lambda_probe_is_flagged() {
        let s = spec(Functional::LambdaProbe, ar1());
        let f = simulate_field(&s, &MultiIndex(vec![4]), 100, StreamKey::new(3, 0, 0)).unwrap();
        let checks = check_marginal_stationarity(&f, &all_lambda_pairs(&[0, 1, 2, 3, 4])).unwrap();
        assert!(checks.iter().all(|c| !c.consistent && c.ks_x == 1.0));
    }

    #[test]
    fn heterogeneous_specs_rejected() {
        let a = simulate_field(
            &spec(ar1(), ar1()),
            &MultiIndex(vec![4]),
            5,
            StreamKey::new(1, 0, 0),
        )
        .unwrap();
        let b = simulate_field(
            &spec(ar1(), Functional::Constant { c: 0.0 }),
            &MultiIndex(vec![16]),
            5,
            StreamKey::new(1, 0, 0),
        )
        .unwrap();
        assert!(field_gap_report(&[a, b], 1.0).is_err());
    }

    #[test]
    fn catalog_is_sorted_and_complete() {
        let names: Vec<&str> = functional_catalog().iter().map(|f| f.name).collect();
        for required in ["constant", "ar1_window", "clipped_poly", "lambda_probe"] {
            assert!(names.contains(&required));
        }
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
