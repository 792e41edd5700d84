//! Feedforward networks `f(x) = f_H(W_H ... f_1(W_1 x + b_1) ... + b_H)` with
//! Lipschitz bounds in the input and in the last-layer weights.
//!
//! The parameter vector is split as `(eta, zeta)` with `zeta = vec(W_H)`
//! (columns stacked) and `eta` everything else. Since the output layer is
//! affine in `W_H` before a 1-Lipschitz activation,
//! `|f(x; zeta_1) - f(x; zeta_2)| <= |h(x)| · ‖zeta_1 - zeta_2‖` where `h` is
//! the sub-network feeding the last layer.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{BoxDomain, InputLaw};
use crate::error::{Error, Result};
use crate::sampling::{make_stream, standard_normal, StreamKey, LANE_INPUTS, LANE_NOISE};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn lipschitz(self) -> f64 {
        1.0
    }

    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>, activation: Activation) -> Self {
        Layer {
            weights,
            bias,
            activation,
        }
    }

    fn apply(&self, input: &DVector<f64>) -> DVector<f64> {
        let mut z = &self.weights * input + &self.bias;
        z.apply(|v| *v = self.activation.apply(*v));
        z
    }
}

/// Text record of one layer; weights are listed row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetRecord {
    pub layers: Vec<LayerRecord>,
    pub domain: BoxDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRecord", into = "NetRecord")]
pub struct NetModel {
    layers: Vec<Layer>,
    domain: BoxDomain,
}

impl TryFrom<NetRecord> for NetModel {
    type Error = Error;

    fn try_from(rec: NetRecord) -> Result<Self> {
        let layers = rec
            .layers
            .into_iter()
            .enumerate()
            .map(|(l, lr)| {
                let rows = lr.weights.len();
                let cols = lr.weights.first().map_or(0, Vec::len);
                if rows == 0 || cols == 0 || lr.weights.iter().any(|r| r.len() != cols) {
                    return Err(Error::shape(format!(
                        "layer {l}: ragged or empty weight matrix"
                    )));
                }
                let flat: Vec<f64> = lr.weights.into_iter().flatten().collect();
                Ok(Layer::new(
                    DMatrix::from_row_slice(rows, cols, &flat),
                    DVector::from_vec(lr.bias),
                    lr.activation,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        NetModel::new(layers, rec.domain)
    }
}

impl From<NetModel> for NetRecord {
    fn from(net: NetModel) -> Self {
        NetRecord {
            layers: net
                .layers
                .into_iter()
                .map(|l| LayerRecord {
                    weights: l
                        .weights
                        .row_iter()
                        .map(|r| r.iter().copied().collect())
                        .collect(),
                    bias: l.bias.iter().copied().collect(),
                    activation: l.activation,
                })
                .collect(),
            domain: net.domain,
        }
    }
}

impl NetModel {
    pub fn new(layers: Vec<Layer>, domain: BoxDomain) -> Result<Self> {
        domain.validate()?;
        if layers.is_empty() {
            return Err(Error::shape("network needs at least one layer"));
        }
        let mut width = domain.dim();
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.ncols() != width {
                return Err(Error::shape(format!(
                    "layer {l} expects {} inputs, previous width is {width}",
                    layer.weights.ncols()
                )));
            }
            if layer.bias.len() != layer.weights.nrows() {
                return Err(Error::shape(format!(
                    "layer {l} bias has {} entries for {} outputs",
                    layer.bias.len(),
                    layer.weights.nrows()
                )));
            }
            width = layer.weights.nrows();
        }
        Ok(NetModel { layers, domain })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn input_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    fn last(&self) -> &Layer {
        self.layers.last().unwrap()
    }

    /// `zeta = vec(W_H)`, columns stacked.
    pub fn zeta(&self) -> Vec<f64> {
        self.last().weights.as_slice().to_vec()
    }

    /// Same network with `W_H` replaced by the column-stacked `zeta`.
    pub fn with_zeta(&self, zeta: &[f64]) -> Result<NetModel> {
        let w = &self.last().weights;
        if zeta.len() != w.len() {
            return Err(Error::shape(format!(
                "zeta has {} entries, last layer has {}",
                zeta.len(),
                w.len()
            )));
        }
        let mut net = self.clone();
        let last = net.layers.last_mut().unwrap();
        last.weights = DMatrix::from_column_slice(w.nrows(), w.ncols(), zeta);
        Ok(net)
    }

    fn check_input(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        if !self.domain.contains(x) {
            log::warn!("network input {x:?} lies outside the input box");
        }
        Ok(DVector::from_column_slice(x))
    }

    /// Output of layers `1..H-1` (the input itself for a single-layer net).
    pub fn hidden(&self, x: &[f64]) -> Result<DVector<f64>> {
        let mut v = self.check_input(x)?;
        for layer in &self.layers[..self.layers.len() - 1] {
            v = layer.apply(&v);
        }
        Ok(v)
    }

    /// Apply the last layer to a hidden representation.
    pub fn output_from_hidden(&self, h: &DVector<f64>) -> DVector<f64> {
        self.last().apply(h)
    }
}

pub fn net_forward(net: &NetModel, x: &[f64]) -> Result<Vec<f64>> {
    let mut v = net.check_input(x)?;
    for layer in &net.layers {
        v = layer.apply(&v);
    }
    Ok(v.iter().copied().collect())
}

/// Largest singular value by power iteration on `WᵀW`, stopping once the
/// relative change of the estimate drops below `rel_tol`.
pub fn spectral_norm(w: &DMatrix<f64>, rel_tol: f64, max_iter: usize) -> f64 {
    if w.is_empty() || w.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    // column norms as a start vector: positive, and never orthogonal to every
    // nonzero column
    let mut v = DVector::from_iterator(w.ncols(), w.column_iter().map(|c| c.norm() + 1e-3));
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let u = w * &v;
        let next_sigma = u.norm();
        let g = w.transpose() * u;
        let gn = g.norm();
        if gn == 0.0 {
            return next_sigma;
        }
        v = g / gn;
        if (next_sigma - sigma).abs() <= rel_tol * next_sigma {
            // one more Rayleigh step on the converged vector
            return (w * &v).norm().max(next_sigma);
        }
        sigma = next_sigma;
    }
    sigma
}

pub const SPECTRAL_TOL: f64 = 1e-10;
const SPECTRAL_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    /// `L = prod_l ‖W_l‖_2 · Lip(f_l)`
    pub input_lipschitz: f64,
    /// `L_zeta = L_h · radius + |h(center)|`, bounding `sup_x |h(x)|`.
    pub parameter_lipschitz: f64,
    /// Lipschitz constant of the sub-network `h` below the last layer.
    pub hidden_lipschitz: f64,
    pub hidden_at_center: f64,
    pub box_radius: f64,
    pub layer_norms: Vec<f64>,
}

pub fn net_lipschitz(net: &NetModel) -> LipschitzBound {
    let layer_norms: Vec<f64> = net
        .layers
        .iter()
        .map(|l| spectral_norm(&l.weights, SPECTRAL_TOL, SPECTRAL_MAX_ITER))
        .collect();
    let consts: Vec<f64> = net
        .layers
        .iter()
        .zip(&layer_norms)
        .map(|(l, s)| s * l.activation.lipschitz())
        .collect();
    let input_lipschitz = consts.iter().product();
    let hidden_lipschitz: f64 = consts[..consts.len() - 1].iter().product();
    let center = net.domain.center();
    let hidden_at_center = net
        .hidden(&center)
        .expect("center has the input dimension")
        .norm();
    let box_radius = net.domain.radius();
    LipschitzBound {
        input_lipschitz,
        parameter_lipschitz: hidden_lipschitz * box_radius + hidden_at_center,
        hidden_lipschitz,
        hidden_at_center,
        box_radius,
        layer_norms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCRow {
    pub n: u64,
    /// `‖zeta_hat_n - zeta‖`
    pub perturbation_norm: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    pub mean_gap_hw: f64,
    /// `L_zeta · ‖zeta_hat_n - zeta‖`
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCReport {
    pub lipschitz: LipschitzBound,
    pub m: usize,
    pub rows: Vec<TheoremCRow>,
}

pub const GAP_BOUND_TOL: f64 = 1e-9;

fn draw_inputs(net: &NetModel, law: &InputLaw, m: usize, key: StreamKey) -> Result<Vec<Vec<f64>>> {
    law.validate(net.domain())?;
    let key = key.with_lane(LANE_INPUTS);
    let base = key.replication_id;
    (0..m as u64)
        .into_par_iter()
        .map(|i| {
            law.draw(
                net.domain(),
                &mut make_stream(key.with_replication(base + i)),
            )
        })
        .collect()
}

/// Output gaps between the network at `zeta_true` and at each estimate, on one
/// shared set of `m` simulated inputs.
pub fn theorem_c_gap(
    net: &NetModel,
    zeta_true: &[f64],
    zeta_estimates: &[(u64, Vec<f64>)],
    input_law: &InputLaw,
    m: usize,
    key: StreamKey,
) -> Result<TheoremCReport> {
    if m == 0 {
        return Err(Error::config("M must be at least 1"));
    }
    let truth = net.with_zeta(zeta_true)?;
    let estimated = zeta_estimates
        .iter()
        .map(|(_, z)| net.with_zeta(z))
        .collect::<Result<Vec<_>>>()?;
    let lipschitz = net_lipschitz(&truth);
    let inputs = draw_inputs(net, input_law, m, key)?;
    let hidden: Vec<DVector<f64>> = inputs
        .par_iter()
        .map(|x| truth.hidden(x))
        .collect::<Result<_>>()?;
    let true_out: Vec<DVector<f64>> = hidden
        .par_iter()
        .map(|h| truth.output_from_hidden(h))
        .collect();

    let rows = zeta_estimates
        .iter()
        .zip(&estimated)
        .map(|((n, z), est)| {
            let gaps: Vec<f64> = hidden
                .par_iter()
                .zip(&true_out)
                .map(|(h, y)| (est.output_from_hidden(h) - y).norm())
                .collect();
            let perturbation_norm = z
                .iter()
                .zip(zeta_true)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let max_gap = gaps.iter().copied().fold(0.0, f64::max);
            let mean = stats::mean_estimate(&gaps);
            let bound = lipschitz.parameter_lipschitz * perturbation_norm;
            TheoremCRow {
                n: *n,
                perturbation_norm,
                max_gap,
                mean_gap: mean.mean,
                mean_gap_hw: mean.half_width,
                bound,
                holds: max_gap <= bound + GAP_BOUND_TOL,
            }
        })
        .collect();
    Ok(TheoremCReport { lipschitz, m, rows })
}

/// How consistent estimates `zeta_hat_n` are generated from `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZetaSchedule {
    /// `zeta + direction / n`, with `direction` normalized to unit length
    /// (all-ones when omitted).
    InverseN {
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// `zeta + Z / sqrt(n)` with `Z` standard Gaussian, drawn per n.
    GaussianSqrtN,
}

pub fn zeta_schedule(
    zeta: &[f64],
    schedule: &ZetaSchedule,
    n_grid: &[u64],
    key: StreamKey,
) -> Result<Vec<(u64, Vec<f64>)>> {
    if n_grid.contains(&0) {
        return Err(Error::config("n_grid entries must be at least 1"));
    }
    match schedule {
        ZetaSchedule::InverseN { direction } => {
            let dir = direction.clone().unwrap_or_else(|| vec![1.0; zeta.len()]);
            if dir.len() != zeta.len() {
                return Err(Error::shape("perturbation direction has the wrong length"));
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::config("perturbation direction must be nonzero"));
            }
            Ok(n_grid
                .iter()
                .map(|&n| {
                    let z = zeta
                        .iter()
                        .zip(&dir)
                        .map(|(a, d)| a + d / norm / n as f64)
                        .collect();
                    (n, z)
                })
                .collect())
        }
        ZetaSchedule::GaussianSqrtN => Ok(n_grid
            .iter()
            .map(|&n| {
                let mut s = make_stream(key.with_lane(LANE_NOISE).with_replication(n));
                let scale = 1.0 / (n as f64).sqrt();
                let z = zeta
                    .iter()
                    .map(|a| a + scale * standard_normal(&mut s))
                    .collect();
                (n, z)
            })
            .collect()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetMomentCheck {
    pub delta: f64,
    /// `Ê|f(X)|^(1+delta)`
    pub empirical_moment: f64,
    pub empirical_hw: f64,
    pub lipschitz: f64,
    /// `Ê|X - x0|^(1+delta)`
    pub input_moment: Option<f64>,
    /// `L^(1+delta) · Ê|X - x0|^(1+delta)`
    pub bound: Option<f64>,
    pub holds: Option<bool>,
    /// `L · Ê|X - x0|^(1+delta)`, the bound with the Lipschitz constant to the first power.
    pub literal_bound: Option<f64>,
    pub literal_holds: Option<bool>,
    /// `L^(1+delta) (‖X‖_(1+delta) + |x0|)^(1+delta)`; dominates `bound`.
    pub chain_bound: Option<f64>,
    pub chain_dominates: Option<bool>,
}

pub const ROOT_TOL: f64 = 1e-9;

/// Compare `Ê|f(X)|^(1+delta)` with the Lipschitz bound around a root `x0`
/// of the network. Without `x0` only the moment is reported.
pub fn net_moment_bound_check(
    net: &NetModel,
    input_law: &InputLaw,
    delta: f64,
    x0: Option<&[f64]>,
    m: usize,
    key: StreamKey,
) -> Result<NetMomentCheck> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::config("delta must be positive"));
    }
    if m == 0 {
        return Err(Error::config("M must be at least 1"));
    }
    let p = 1.0 + delta;
    if let Some(x0) = x0 {
        let f0 = net_forward(net, x0)?;
        let norm = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm < ROOT_TOL) {
            return Err(Error::config(format!(
                "|f(x0)| = {norm:e} is not below {ROOT_TOL:e}; x0 is not a root"
            )));
        }
    }
    let lip = net_lipschitz(net).input_lipschitz;
    let inputs = draw_inputs(net, input_law, m, key)?;
    let out_pow: Vec<f64> = inputs
        .par_iter()
        .map(|x| net_forward(net, x).map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p)))
        .collect::<Result<_>>()?;
    let emp = stats::mean_estimate(&out_pow);
    let mut check = NetMomentCheck {
        delta,
        empirical_moment: emp.mean,
        empirical_hw: emp.half_width,
        lipschitz: lip,
        input_moment: None,
        bound: None,
        holds: None,
        literal_bound: None,
        literal_holds: None,
        chain_bound: None,
        chain_dominates: None,
    };
    let Some(x0) = x0 else {
        return Ok(check);
    };
    let dist = |x: &[f64], c: &[f64]| -> f64 {
        x.iter()
            .zip(c)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let in_pow: Vec<f64> = inputs.iter().map(|x| dist(x, x0).powf(p)).collect();
    let input_moment = stats::pairwise_sum(&in_pow) / m as f64;
    let lp = lip.powf(p);
    // the bound dominates pointwise, so only rounding and the sampling error of
    // the difference separate the two means
    let diff = stats::mean_estimate_by(&(0..m).collect::<Vec<_>>(), |&i| {
        lp * in_pow[i] - out_pow[i]
    });
    let bound = lp * input_moment;
    let slack = diff.half_width + 1e-12 * bound.max(1.0);
    let literal = lip * input_moment;
    let x_norm = (stats::pairwise_sum_by(&inputs, &|x| {
        x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p)
    }) / m as f64)
        .powf(1.0 / p);
    let x0_norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let chain = lp * (x_norm + x0_norm).powf(p);
    check.input_moment = Some(input_moment);
    check.bound = Some(bound);
    check.holds = Some(emp.mean <= bound + slack);
    check.literal_bound = Some(literal);
    check.literal_holds = Some(emp.mean <= literal + slack);
    check.chain_bound = Some(chain);
    check.chain_dominates = Some(bound <= chain * (1.0 + 1e-12));
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled_identity(k: f64, d: usize, act: Activation) -> Layer {
        Layer::new(DMatrix::identity(d, d) * k, DVector::zeros(d), act)
    }

    fn relu_6() -> NetModel {
        NetModel::new(
            vec![
                scaled_identity(2.0, 2, Activation::Relu),
                scaled_identity(3.0, 2, Activation::Relu),
            ],
            BoxDomain::symmetric(2, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn forward_examples() {
        let zero = NetModel::new(
            vec![Layer::new(
                DMatrix::zeros(3, 2),
                DVector::zeros(3),
                Activation::Relu,
            )],
            BoxDomain::unit(2),
        )
        .unwrap();
        assert_eq!(net_forward(&zero, &[0.3, 0.4]).unwrap(), vec![0.0; 3]);
        let lin = NetModel::new(
            vec![scaled_identity(2.0, 2, Activation::Identity)],
            BoxDomain::unit(2),
        )
        .unwrap();
        assert_eq!(net_forward(&lin, &[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(
            net_forward(&relu_6(), &[1.0, -1.0]).unwrap(),
            vec![6.0, 0.0]
        );
        assert!(net_forward(&lin, &[1.0]).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let id = NetModel::new(
            vec![scaled_identity(1.0, 3, Activation::Identity)],
            BoxDomain::unit(3),
        )
        .unwrap();
        assert!((net_lipschitz(&id).input_lipschitz - 1.0).abs() < 1e-12);
        assert!((net_lipschitz(&relu_6()).input_lipschitz - 6.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_norm_of_rank_one_and_zero() {
        // u vᵀ has norm |u||v|
        let w = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 2.0, 2.0, 4.0, 4.0]);
        assert!((spectral_norm(&w, 1e-12, 1000) - 5f64.sqrt() * 3.0).abs() < 1e-10);
        assert_eq!(spectral_norm(&DMatrix::zeros(2, 2), 1e-12, 10), 0.0);
    }

    #[test]
    fn shape_errors() {
        let bad = NetModel::new(
            vec![scaled_identity(1.0, 3, Activation::Relu)],
            BoxDomain::unit(2),
        );
        assert!(bad.is_err());
        assert!(relu_6().with_zeta(&[1.0]).is_err());
    }

    #[test]
    fn zeta_round_trip_is_column_stacked() {
        let net = NetModel::new(
            vec![Layer::new(
                DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
                DVector::zeros(2),
                Activation::Identity,
            )],
            BoxDomain::unit(2),
        )
        .unwrap();
        assert_eq!(net.zeta(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(net.with_zeta(&net.zeta()).unwrap(), net);
    }

    #[test]
    fn moment_check_rejects_non_root() {
        let net = NetModel::new(
            vec![Layer::new(
                DMatrix::identity(1, 1),
                DVector::from_element(1, 1.0),
                Activation::Identity,
            )],
            BoxDomain::unit(1),
        )
        .unwrap();
        let r = net_moment_bound_check(
            &net,
            &InputLaw::UniformBox,
            1.0,
            Some(&[0.0]),
            10,
            StreamKey::new(1, 0, 0),
        );
        assert!(matches!(r, Err(Error::Config(_))));
        let skip = net_moment_bound_check(
            &net,
            &InputLaw::UniformBox,
            1.0,
            None,
            10,
            StreamKey::new(1, 0, 0),
        )
        .unwrap();
        assert!(skip.bound.is_none() && skip.empirical_moment > 0.0);
    }
}
