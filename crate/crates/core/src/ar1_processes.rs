//! Coupled AR(1) linear filter and its truncated plug-in-mean surrogate.
//!
//! The true process is `X_i = mu + sum_{j>=0} rho^j eps_{i-j}`, observed with a
//! deterministic offset `e_i`. The surrogate replaces `mu` by the average of
//! the observed path and keeps only the first `q_n + 1` filter taps. Both are
//! built from the same innovation path per replication.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{make_stream, InnovationSpec, StreamKey, LANE_INNOVATIONS};

/// Deterministic observation offsets `e_i`, `i >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintyRule {
    Zero,
    /// `e_i = 1 / i`
    InverseIndex,
    /// `e_i = values[i - 1]`
    Custom {
        values: Vec<f64>,
    },
}

impl UncertaintyRule {
    /// Offset `e_i` for a 1-based index.
    pub fn offset(&self, i: usize) -> Result<f64> {
        match self {
            UncertaintyRule::Zero => Ok(0.0),
            UncertaintyRule::InverseIndex => Ok(1.0 / i as f64),
            UncertaintyRule::Custom { values } => values.get(i - 1).copied().ok_or_else(|| {
                Error::config(format!(
                    "custom uncertainty sequence has {} values, index {i} requested",
                    values.len()
                ))
            }),
        }
    }

    /// Cesàro mean `(1/n) sum_{i<=n} e_i`.
    pub fn cesaro_mean(&self, n: usize) -> Result<f64> {
        match self {
            UncertaintyRule::Zero => Ok(0.0),
            _ => {
                let mut s = 0.0;
                for i in 1..=n {
                    s += self.offset(i)?;
                }
                Ok(s / n as f64)
            }
        }
    }

    /// Numerical Cesàro check over an n-grid: the magnitude of the mean offset
    /// at the largest n must not exceed the one at the smallest n, and must be
    /// below `tol` at the largest n.
    pub fn check_cesaro(&self, n_grid: &[usize], tol: f64) -> Result<()> {
        let (Some(&first), Some(&last)) = (n_grid.first(), n_grid.last()) else {
            return Ok(());
        };
        let a = self.cesaro_mean(first)?.abs();
        let b = self.cesaro_mean(last)?.abs();
        if b > a || b > tol {
            return Err(Error::config(format!(
                "uncertainty sequence fails the Cesàro check: |mean e| = {a} at n = {first}, {b} at n = {last}"
            )));
        }
        Ok(())
    }
}

/// Surrogate truncation lag `q_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruncationRule {
    /// `q_n = ceil(c · log2 n)`
    CeilLog2 {
        c: f64,
    },
    Fixed {
        q: usize,
    },
}

impl Default for TruncationRule {
    fn default() -> Self {
        TruncationRule::CeilLog2 { c: 2.0 }
    }
}

impl TruncationRule {
    pub fn lag(&self, n: usize) -> usize {
        match *self {
            TruncationRule::CeilLog2 { c } => (c * (n as f64).log2()).ceil().max(0.0) as usize,
            TruncationRule::Fixed { q } => q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ar1Config {
    pub rho: f64,
    pub mu: f64,
    pub innovation: InnovationSpec,
    pub uncertainty: UncertaintyRule,
    pub truncation: TruncationRule,
    /// L2 error allowed from cutting the infinite filter.
    pub series_tolerance: f64,
    /// Upper bound on the simulated innovation path length per replication.
    pub max_path_len: usize,
}

fn default_uncertainty() -> UncertaintyRule {
    UncertaintyRule::InverseIndex
}

fn default_series_tolerance() -> f64 {
    1e-12
}

fn default_max_path_len() -> usize {
    50_000_000
}

impl Default for Ar1Config {
    fn default() -> Self {
        Ar1Config {
            rho: 0.5,
            mu: 1.0,
            innovation: InnovationSpec::default(),
            uncertainty: default_uncertainty(),
            truncation: TruncationRule::default(),
            series_tolerance: default_series_tolerance(),
            max_path_len: default_max_path_len(),
        }
    }
}

impl Ar1Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho.abs() < 1.0) {
            return Err(Error::config("rho must lie in (-1,1)"));
        }
        if !self.mu.is_finite() {
            return Err(Error::config("mu must be finite"));
        }
        if !(self.series_tolerance > 0.0 && self.series_tolerance.is_finite()) {
            return Err(Error::config("series_tolerance must be positive"));
        }
        if let TruncationRule::CeilLog2 { c } = self.truncation {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::config("truncation c must be non-negative"));
            }
        }
        self.innovation.validate()
    }

    /// Smallest `J` with `|rho|^(J+1) sigma / sqrt(1 - rho^2) < tol`: the
    /// filter taps `0..=J` are simulated, the rest has L2 norm below `tol`.
    pub fn filter_length(&self) -> Result<usize> {
        self.validate()?;
        let a = self.rho.abs();
        let sd = self.innovation.std_dev();
        let scale = sd / (1.0 - self.rho * self.rho).sqrt();
        let tol = self.series_tolerance;
        if a == 0.0 || scale == 0.0 {
            return Ok(0);
        }
        // closed-form guess, then fix up rounding by stepping
        let guess = ((tol / scale).ln() / a.ln() - 1.0).floor().max(0.0);
        if guess > self.max_path_len as f64 {
            return Err(Error::Resource(format!(
                "filter truncation for rho = {} needs about {guess} taps, cap is {}",
                self.rho, self.max_path_len
            )));
        }
        let mut j = guess as usize;
        let tail = |j: usize| a.powi(j as i32 + 1) * scale;
        while j > 0 && tail(j - 1) < tol {
            j -= 1;
        }
        while tail(j) >= tol {
            j += 1;
        }
        Ok(j)
    }
}

/// Records that `x` and `y` were produced from one innovation stream per replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingTag {
    pub master_seed: u64,
    pub lane_id: u32,
}

/// `M` coupled replications of `(X_n, Y_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPairSample {
    pub n: usize,
    pub q: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Per-replication mean of the observed path `X_{i,obs}`, `i = 1..n`.
    pub x_obs_mean: Vec<f64>,
    /// Per-replication discarded filter tail `sum_{j>q} rho^j eps_{n-j}`,
    /// evaluated directly from the innovation path.
    pub filter_tail: Vec<f64>,
    pub coupling: CouplingTag,
}

impl ProcessPairSample {
    pub fn replications(&self) -> usize {
        self.x.len()
    }
}

struct Replication {
    x: f64,
    y: f64,
    x_obs_mean: f64,
    tail: f64,
}

fn simulate_one(
    cfg: &Ar1Config,
    sampler: &crate::sampling::InnovationSampler,
    offsets_mean: f64,
    n: usize,
    burn: usize,
    q: usize,
    key: StreamKey,
) -> Replication {
    let mut stream = make_stream(key);
    let len = n + burn;
    // eps[k] is eps_{k + 1 - burn}; eps[len - 1] is eps_n
    let mut eps = vec![0.0; len];
    sampler.fill(&mut stream, &mut eps);

    let rho = cfg.rho;
    let mut z = 0.0;
    for &e in &eps[..burn] {
        z = rho * z + e;
    }
    let mut path_sum = 0.0;
    for &e in &eps[burn..] {
        z = rho * z + e;
        path_sum += z;
    }
    let x = cfg.mu + z;
    let x_bar = cfg.mu + path_sum / n as f64;
    let x_obs_mean = x_bar + offsets_mean;

    let mut head = 0.0;
    let mut tail = 0.0;
    let mut w = 1.0;
    for (j, &e) in eps.iter().rev().enumerate() {
        if j <= q {
            head += w * e;
        } else {
            tail += w * e;
        }
        w *= rho;
        if w == 0.0 {
            break;
        }
    }
    Replication {
        x,
        y: x_obs_mean + head,
        x_obs_mean,
        tail,
    }
}

/// Simulate `m` coupled replications of `(X_n, Y_n)`. Replication `i` uses
/// stream `key.with_replication(key.replication_id + i)` on the innovation lane.
pub fn simulate_pair(
    config: &Ar1Config,
    n: usize,
    m: usize,
    key: StreamKey,
) -> Result<ProcessPairSample> {
    if n == 0 || m == 0 {
        return Err(Error::config("n and M must be at least 1"));
    }
    let filter_len = config.filter_length()?;
    // taps 0..=J need J extra innovations before time 1
    let burn = filter_len;
    if n.saturating_add(burn) > config.max_path_len {
        return Err(Error::Resource(format!(
            "path length {} exceeds cap {}",
            n.saturating_add(burn),
            config.max_path_len
        )));
    }
    let offsets_mean = config.uncertainty.cesaro_mean(n)?;
    let sampler = config.innovation.sampler()?;
    let q = config.truncation.lag(n);
    let key = key.with_lane(LANE_INNOVATIONS);
    let base = key.replication_id;

    let reps: Vec<Replication> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            simulate_one(
                config,
                &sampler,
                offsets_mean,
                n,
                burn,
                q,
                key.with_replication(base + i),
            )
        })
        .collect();

    let mut out = ProcessPairSample {
        n,
        q,
        x: Vec::with_capacity(m),
        y: Vec::with_capacity(m),
        x_obs_mean: Vec::with_capacity(m),
        filter_tail: Vec::with_capacity(m),
        coupling: CouplingTag {
            master_seed: key.master_seed,
            lane_id: key.lane_id,
        },
    };
    for r in reps {
        out.x.push(r.x);
        out.y.push(r.y);
        out.x_obs_mean.push(r.x_obs_mean);
        out.filter_tail.push(r.tail);
    }
    Ok(out)
}

/// `(sigma^2 / eps^2) · rho^(2(q+1)) / (1 - rho^2)`: Chebyshev bound on
/// `P(|sum_{j>q} rho^j eps_{n-j}| > eps)`.
pub fn tail_sum_probability_bound(rho: f64, sigma2: f64, q: usize, eps: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::config("rho must lie in (-1,1)"));
    }
    if !(eps > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::config("eps and sigma2 must be positive"));
    }
    let r2 = rho * rho;
    Ok(sigma2 / (eps * eps) * r2.powi(q as i32 + 1) / (1.0 - r2))
}

/// L2 norm of the discarded filter tail, `sqrt(rho^(2(q+1)) sigma^2 / (1 - rho^2))`.
pub fn tail_l2_norm(rho: f64, sigma2: f64, q: usize) -> f64 {
    let r2 = rho * rho;
    (r2.powi(q as i32 + 1) * sigma2 / (1.0 - r2)).sqrt()
}

/// The three addends bounding `|X_n - Y_n|` for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionTerms {
    pub gap: f64,
    /// `|(1/n) sum e_i|`
    pub offset_mean: f64,
    /// `|X̄_n - mu|`
    pub mean_error: f64,
    /// `|sum_{j>q_n} rho^j eps_{n-j}|`
    pub tail: f64,
    pub holds: bool,
}

pub fn decomposition_bound(
    config: &Ar1Config,
    n: usize,
    sample: &ProcessPairSample,
) -> Result<Vec<DecompositionTerms>> {
    config.validate()?;
    if sample.n != n || sample.q != config.truncation.lag(n) {
        return Err(Error::config(format!(
            "sample (n = {}, q = {}) was not produced by this config at n = {n}",
            sample.n, sample.q
        )));
    }
    let m = sample.x.len();
    if [
        sample.y.len(),
        sample.x_obs_mean.len(),
        sample.filter_tail.len(),
    ]
    .iter()
    .any(|&l| l != m)
    {
        return Err(Error::shape("sample arrays have unequal lengths"));
    }
    let offset = config.uncertainty.cesaro_mean(n)?;
    let slack = config.series_tolerance;
    Ok((0..m)
        .map(|i| {
            let gap = (sample.x[i] - sample.y[i]).abs();
            let mean_error = (sample.x_obs_mean[i] - offset - config.mu).abs();
            let tail = sample.filter_tail[i].abs();
            let offset_mean = offset.abs();
            let bound = offset_mean + mean_error + tail;
            DecompositionTerms {
                gap,
                offset_mean,
                mean_error,
                tail,
                holds: gap <= bound + slack + 1e-12 * bound.max(1.0),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Ar1Config {
        Ar1Config::default()
    }

    #[test]
    fn tail_bound_examples() {
        let b = tail_sum_probability_bound(0.5, 1.0, 10, 0.1).unwrap();
        assert!((b - 0.25f64.powi(11) / 0.75 * 100.0).abs() < 1e-18);
        assert!((b - 3.1789e-5).abs() < 1e-9);
        assert_eq!(tail_sum_probability_bound(0.0, 1.0, 0, 1.0).unwrap(), 0.0);
        let c = tail_sum_probability_bound(0.9, 2.0, 50, 0.5).unwrap();
        // independent evaluation of the geometric series sum_{j>50} 0.81^j
        let series: f64 = (51..2000).map(|j| 0.81f64.powi(j)).sum();
        assert!((c - 8.0 * series).abs() < 1e-12 * c);
        assert!(tail_sum_probability_bound(1.0, 1.0, 0, 1.0).is_err());
    }

    #[test]
    fn filter_length_is_minimal() {
        let c = cfg();
        let j = c.filter_length().unwrap();
        let scale = 1.0 / (1.0f64 - 0.25).sqrt();
        assert!(0.5f64.powi(j as i32 + 1) * scale < 1e-12);
        assert!(0.5f64.powi(j as i32) * scale >= 1e-12);
        let zero = Ar1Config { rho: 0.0, ..cfg() };
        assert_eq!(zero.filter_length().unwrap(), 0);
    }

    #[test]
    fn near_unit_root_hits_resource_cap() {
        let c = Ar1Config {
            rho: 1.0 - 1e-12,
            max_path_len: 1_000_000,
            ..cfg()
        };
        assert!(matches!(
            simulate_pair(&c, 10, 2, StreamKey::new(1, 0, 0)),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn invalid_inputs_rejected() {
        let bad = Ar1Config { rho: 1.5, ..cfg() };
        assert!(bad.validate().is_err());
        assert!(simulate_pair(&cfg(), 0, 5, StreamKey::new(1, 0, 0)).is_err());
        assert!(simulate_pair(&cfg(), 5, 0, StreamKey::new(1, 0, 0)).is_err());
    }

    #[test]
    fn truncation_lags() {
        let t = TruncationRule::default();
        assert_eq!(t.lag(1), 0);
        assert_eq!(t.lag(100), 14);
        assert_eq!(t.lag(10_000), 27);
        assert_eq!(TruncationRule::Fixed { q: 3 }.lag(10_000), 3);
    }

    #[test]
    fn cesaro_means() {
        let r = UncertaintyRule::InverseIndex;
        assert!((r.cesaro_mean(4).unwrap() - (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-15);
        assert!(r.check_cesaro(&[10, 100, 1000], 0.1).is_ok());
        let constant = UncertaintyRule::Custom {
            values: vec![0.5; 1000],
        };
        assert!(constant.check_cesaro(&[10, 1000], 0.1).is_err());
        let short = UncertaintyRule::Custom {
            values: vec![0.0; 3],
        };
        assert!(short.cesaro_mean(4).is_err());
    }

    #[test]
    fn rho_zero_collapses_filter() {
        let c = Ar1Config {
            rho: 0.0,
            mu: 1.0,
            uncertainty: UncertaintyRule::Zero,
            ..cfg()
        };
        let s = simulate_pair(&c, 50, 200, StreamKey::new(5, 0, 0)).unwrap();
        for i in 0..200 {
            let eps_n = s.x[i] - 1.0;
            assert!((s.y[i] - (s.x_obs_mean[i] + eps_n)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_truncation_gap_is_mean_error_only() {
        let mut c = Ar1Config {
            mu: 0.0,
            uncertainty: UncertaintyRule::Zero,
            ..cfg()
        };
        let j = c.filter_length().unwrap();
        c.truncation = TruncationRule::Fixed { q: j + 200 };
        let s = simulate_pair(&c, 100, 500, StreamKey::new(9, 0, 0)).unwrap();
        for i in 0..500 {
            assert!((s.x[i] - s.y[i] + s.x_obs_mean[i]).abs() < c.series_tolerance);
        }
        let terms = decomposition_bound(&c, 100, &s).unwrap();
        assert!(terms
            .iter()
            .all(|t| t.holds && t.offset_mean == 0.0 && t.tail == 0.0));
    }

    #[test]
    fn decomposition_rejects_mismatched_sample() {
        let c = cfg();
        let s = simulate_pair(&c, 100, 10, StreamKey::new(1, 0, 0)).unwrap();
        assert!(decomposition_bound(&c, 1000, &s).is_err());
    }
}
