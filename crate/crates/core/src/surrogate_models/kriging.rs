//! Universal kriging with a squared-exponential correlation and a polynomial
//! trend basis.
//!
//! With `R` the design correlation matrix (plus nugget on the diagonal) and
//! `F` the basis evaluated at the design:
//!
//! * `beta = (Fᵀ R⁻¹ F)⁻¹ Fᵀ R⁻¹ y`
//! * `mean(x) = f(x)ᵀ beta + r(x)ᵀ R⁻¹ (y - F beta)`
//! * `var(x) = s² (1 - r(x)ᵀ R⁻¹ r(x) + uᵀ (Fᵀ R⁻¹ F)⁻¹ u)`, `u = Fᵀ R⁻¹ r(x) - f(x)`
//!
//! where `s² = (y - F beta)ᵀ R⁻¹ (y - F beta) / n`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::sampling::{
    make_stream, standard_normal, StreamKey, LANE_DESIGN, LANE_INPUTS, LANE_NOISE,
};

pub const DEFAULT_NUGGET: f64 = 1e-10;

/// `R(x - x') = exp(-sum_k ((x_k - x'_k) / l_k)^2)`
pub fn correlation(x: &[f64], y: &[f64], lengthscales: &[f64]) -> f64 {
    let s: f64 = x
        .iter()
        .zip(y)
        .zip(lengthscales)
        .map(|((a, b), l)| {
            let t = (a - b) / l;
            t * t
        })
        .sum();
    (-s).exp()
}

/// Monomials of total degree `<= degree` in `dim` variables, graded by degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyBasis {
    pub dim: usize,
    pub degree: usize,
    exponents: Vec<Vec<usize>>,
}

impl PolyBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            let mut cur = vec![0; dim];
            Self::compositions(total, 0, &mut cur, &mut exponents);
        }
        PolyBasis {
            dim,
            degree,
            exponents,
        }
    }

    fn compositions(left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == cur.len() {
            cur[k] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[k] = e;
            Self::compositions(left - e, k + 1, cur, out);
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<usize>] {
        &self.exponents
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.exponents.iter().map(|e| {
                e.iter()
                    .zip(x)
                    .map(|(&p, &v)| v.powi(p as i32))
                    .product::<f64>()
            }),
        )
    }
}

/// Functions the kriging experiments try to recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrueFunction {
    /// `sum_j c_j m_j(x)` over the monomials of [`PolyBasis::new(dim, degree)`].
    Polynomial {
        degree: usize,
        coefficients: Vec<f64>,
    },
    /// `sum_k sin(2 pi x_k)`
    #[serde(rename = "sin2pi")]
    Sin2Pi,
}

impl TrueFunction {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let TrueFunction::Polynomial {
            degree,
            coefficients,
        } = self
        {
            let p = PolyBasis::new(dim, *degree).len();
            if coefficients.len() != p {
                return Err(Error::shape(format!(
                    "polynomial of degree {degree} in {dim} variables needs {p} coefficients, got {}",
                    coefficients.len()
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TrueFunction::Polynomial {
                degree,
                coefficients,
            } => PolyBasis::new(x.len(), *degree)
                .eval(x)
                .iter()
                .zip(coefficients)
                .map(|(a, b)| a * b)
                .sum(),
            TrueFunction::Sin2Pi => x
                .iter()
                .map(|v| (2.0 * std::f64::consts::PI * v).sin())
                .sum(),
        }
    }
}

/// Serializable description of a kriging model; fitting is deterministic, so
/// the factorizations are rebuilt on import.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigingRecord {
    pub design: Vec<Vec<f64>>,
    pub responses: Vec<f64>,
    pub degree: usize,
    pub lengthscales: Vec<f64>,
    pub nugget: f64,
    /// Fitted trend coefficients, informational on import.
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub process_variance: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "KrigingRecord", into = "KrigingRecord")]
pub struct KrigingModel {
    design: Vec<Vec<f64>>,
    responses: Vec<f64>,
    basis: PolyBasis,
    lengthscales: Vec<f64>,
    nugget: f64,
    beta: DVector<f64>,
    process_variance: f64,
    chol_r: Cholesky<f64, Dyn>,
    /// `R⁻¹ (y - F beta)`
    alpha: DVector<f64>,
    f_design: DMatrix<f64>,
    chol_gls: Cholesky<f64, Dyn>,
}

impl std::fmt::Debug for KrigingModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KrigingModel")
            .field("n", &self.design.len())
            .field("degree", &self.basis.degree)
            .field("lengthscales", &self.lengthscales)
            .field("nugget", &self.nugget)
            .field("beta", &self.beta.as_slice())
            .field("process_variance", &self.process_variance)
            .finish()
    }
}

impl TryFrom<KrigingRecord> for KrigingModel {
    type Error = Error;

    fn try_from(rec: KrigingRecord) -> Result<Self> {
        kriging_fit(
            &rec.design,
            &rec.responses,
            &rec.lengthscales,
            rec.degree,
            rec.nugget,
        )
    }
}

impl From<KrigingModel> for KrigingRecord {
    fn from(m: KrigingModel) -> Self {
        KrigingRecord {
            beta: m.beta.iter().copied().collect(),
            process_variance: m.process_variance,
            design: m.design,
            responses: m.responses,
            degree: m.basis.degree,
            lengthscales: m.lengthscales,
            nugget: m.nugget,
        }
    }
}

impl KrigingModel {
    pub fn beta(&self) -> &[f64] {
        self.beta.as_slice()
    }

    pub fn process_variance(&self) -> f64 {
        self.process_variance
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.design
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Design correlation matrix without nugget.
    pub fn correlation_matrix(&self) -> DMatrix<f64> {
        correlation_matrix(&self.design, &self.lengthscales)
    }
}

fn correlation_matrix(design: &[Vec<f64>], lengthscales: &[f64]) -> DMatrix<f64> {
    let n = design.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            correlation(&design[i], &design[j], lengthscales)
        }
    })
}

/// Smallest acceptable ratio of Cholesky pivots in `Fᵀ R⁻¹ F`.
const GLS_PIVOT_RATIO: f64 = 1e-7;

pub fn kriging_fit(
    design: &[Vec<f64>],
    responses: &[f64],
    lengthscales: &[f64],
    degree: usize,
    nugget: f64,
) -> Result<KrigingModel> {
    let n = design.len();
    if n == 0 {
        return Err(Error::Fit("empty design".into()));
    }
    let d = design[0].len();
    if d == 0 || design.iter().any(|x| x.len() != d) {
        return Err(Error::shape("design points must share a nonzero dimension"));
    }
    if responses.len() != n {
        return Err(Error::shape(format!(
            "{n} design points but {} responses",
            responses.len()
        )));
    }
    if lengthscales.len() != d || lengthscales.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::config(format!(
            "need {d} positive length scales, got {lengthscales:?}"
        )));
    }
    if !(nugget >= 0.0 && nugget.is_finite()) {
        return Err(Error::config("nugget must be non-negative"));
    }
    for i in 0..n {
        for j in 0..i {
            if design[i] == design[j] {
                return Err(Error::Fit(format!("duplicate design points {j} and {i}")));
            }
        }
    }
    let basis = PolyBasis::new(d, degree);
    let p = basis.len();
    if n < p {
        return Err(Error::Fit(format!(
            "{n} design points cannot identify {p} trend coefficients"
        )));
    }

    let mut r = correlation_matrix(design, lengthscales);
    for i in 0..n {
        r[(i, i)] += nugget;
    }
    let chol_r = Cholesky::new(r).ok_or_else(|| {
        Error::Fit("correlation matrix is not positive definite; raise the nugget".into())
    })?;
    let f_design = DMatrix::from_fn(n, p, |i, j| {
        let e = &basis.exponents()[j];
        e.iter()
            .zip(&design[i])
            .map(|(&k, &v)| v.powi(k as i32))
            .product()
    });
    let y = DVector::from_column_slice(responses);
    let rinv_f = chol_r.solve(&f_design);
    let rinv_y = chol_r.solve(&y);
    let gls = f_design.transpose() * &rinv_f;
    let chol_gls = Cholesky::new(gls.clone())
        .ok_or_else(|| Error::Fit("trend basis is rank-deficient at the design".into()))?;
    let diag = chol_gls.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    if !(lo > GLS_PIVOT_RATIO * hi) {
        return Err(Error::Fit(
            "trend basis is rank-deficient at the design".into(),
        ));
    }
    let beta = chol_gls.solve(&(f_design.transpose() * &rinv_y));
    let resid = &y - &f_design * &beta;
    let alpha = chol_r.solve(&resid);
    let process_variance = (resid.dot(&alpha) / n as f64).max(0.0);
    Ok(KrigingModel {
        design: design.to_vec(),
        responses: responses.to_vec(),
        basis,
        lengthscales: lengthscales.to_vec(),
        nugget,
        beta,
        process_variance,
        chol_r,
        alpha,
        f_design,
        chol_gls,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrigingPrediction {
    pub mean: f64,
    pub variance: f64,
}

pub fn kriging_predict(model: &KrigingModel, x: &[f64]) -> Result<KrigingPrediction> {
    if x.len() != model.lengthscales.len() {
        return Err(Error::shape(format!(
            "point has {} coordinates, model has {}",
            x.len(),
            model.lengthscales.len()
        )));
    }
    let r = DVector::from_iterator(
        model.design.len(),
        model
            .design
            .iter()
            .map(|xi| correlation(x, xi, &model.lengthscales)),
    );
    let f = model.basis.eval(x);
    let mean = f.dot(&model.beta) + r.dot(&model.alpha);
    let rinv_r = model.chol_r.solve(&r);
    let u = model.f_design.transpose() * &rinv_r - &f;
    let ainv_u = model.chol_gls.solve(&u);
    let variance = (model.process_variance * (1.0 - r.dot(&rinv_r) + u.dot(&ainv_u))).max(0.0);
    Ok(KrigingPrediction { mean, variance })
}

/// Coupled surrogate experiment: refit on designs of growing size and compare
/// `X_n = g(t) + sd_n(t) Z` with `Y_n = mean_n(t) + sd_n(t) Z` at test points `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigingExperiment {
    pub true_fn: TrueFunction,
    pub domain: BoxDomain,
    pub design_sizes: Vec<usize>,
    pub lengthscales: Vec<f64>,
    #[serde(default)]
    pub degree: usize,
    #[serde(default = "default_nugget")]
    pub nugget: f64,
    /// Fixed test points used cyclically; uniform draws on the domain when absent.
    #[serde(default)]
    pub test_points: Option<Vec<Vec<f64>>>,
}

fn default_nugget() -> f64 {
    DEFAULT_NUGGET
}

impl KrigingExperiment {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.true_fn.validate(self.domain.dim())?;
        if self.design_sizes.is_empty() || self.design_sizes.contains(&0) {
            return Err(Error::config("design_sizes must be non-empty and positive"));
        }
        if self.lengthscales.len() != self.domain.dim() {
            return Err(Error::shape(
                "one length scale per domain coordinate is required",
            ));
        }
        if let Some(tp) = &self.test_points {
            if tp.is_empty() || tp.iter().any(|t| t.len() != self.domain.dim()) {
                return Err(Error::shape("test points must match the domain dimension"));
            }
        }
        Ok(())
    }

    /// Equispaced grid for one-dimensional domains, uniform random otherwise.
    pub fn design(&self, size: usize, key: StreamKey) -> Vec<Vec<f64>> {
        let (lo, hi) = (&self.domain.lower, &self.domain.upper);
        if self.domain.dim() == 1 {
            if size == 1 {
                return vec![self.domain.center()];
            }
            return (0..size)
                .map(|i| vec![lo[0] + (hi[0] - lo[0]) * i as f64 / (size - 1) as f64])
                .collect();
        }
        let mut s = make_stream(key.with_lane(LANE_DESIGN).with_replication(size as u64));
        (0..size)
            .map(|_| self.domain.sample_uniform(&mut s))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KrigingPairSample {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub model: KrigingModel,
}

pub fn kriging_surrogate_pair(
    exp: &KrigingExperiment,
    m: usize,
    key: StreamKey,
) -> Result<Vec<KrigingPairSample>> {
    exp.validate()?;
    if m == 0 {
        return Err(Error::config("M must be at least 1"));
    }
    if let Some(tp) = &exp.test_points {
        if let Some(t) = tp.iter().find(|t| !exp.domain.contains(t)) {
            log::warn!("test point {t:?} lies outside the kriging domain");
        }
    }
    let base = key.replication_id;
    let tests: Vec<(Vec<f64>, f64)> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let t = match &exp.test_points {
                Some(tp) => tp[i as usize % tp.len()].clone(),
                None => exp.domain.sample_uniform(&mut make_stream(
                    key.with_lane(LANE_INPUTS).with_replication(base + i),
                )),
            };
            let z = standard_normal(&mut make_stream(
                key.with_lane(LANE_NOISE).with_replication(base + i),
            ));
            (t, z)
        })
        .collect();
    exp.design_sizes
        .iter()
        .map(|&size| {
            let design = exp.design(size, key);
            let responses: Vec<f64> = design.iter().map(|x| exp.true_fn.eval(x)).collect();
            let model = kriging_fit(
                &design,
                &responses,
                &exp.lengthscales,
                exp.degree,
                exp.nugget,
            )?;
            let pairs: Vec<(f64, f64)> = tests
                .par_iter()
                .map(|(t, z)| {
                    let pred = kriging_predict(&model, t)?;
                    let noise = pred.variance.sqrt() * z;
                    Ok((exp.true_fn.eval(t) + noise, pred.mean + noise))
                })
                .collect::<Result<_>>()?;
            let (x, y) = pairs.into_iter().unzip();
            Ok(KrigingPairSample {
                n: size,
                x,
                y,
                model,
            })
        })
        .collect()
}
