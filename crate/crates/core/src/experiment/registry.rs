//! Named building blocks that configs can refer to, with their metadata.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::random_fields::functional_catalog;
use crate::sampling::{make_stream, standard_normal, StreamKey, LANE_INPUTS};
use crate::surrogate_models::{net_lipschitz, Activation, BoxDomain, Layer, NetModel};

/// Seed for the fixed random weights of the registry MLPs.
const REGISTRY_SEED: u64 = 0x5_eed0_fae7;

pub const NET_NAMES: [&str; 5] = [
    "identity_2",
    "relu_mlp",
    "relu_scaled",
    "relu_scaled_linear_out",
    "tanh_mlp",
];

fn diag(d: usize, v: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal_element(d, d, v)
}

fn random_layer(seed_layer: u64, rows: usize, cols: usize, activation: Activation) -> Layer {
    let mut s = make_stream(StreamKey::new(REGISTRY_SEED, seed_layer, LANE_INPUTS));
    let scale = 1.0 / (cols as f64).sqrt();
    let w = DMatrix::from_fn(rows, cols, |_, _| scale * standard_normal(&mut s));
    let b = DVector::from_fn(rows, |_, _| 0.1 * standard_normal(&mut s));
    Layer::new(w, b, activation)
}

/// Look up a registry network by name.
pub fn registry_net(name: &str) -> Result<NetModel> {
    let d2 = || DVector::zeros(2);
    match name {
        "identity_2" => NetModel::new(
            vec![Layer::new(diag(2, 1.0), d2(), Activation::Identity)],
            BoxDomain::symmetric(2, 1.0),
        ),
        "relu_scaled" => NetModel::new(
            vec![
                Layer::new(diag(2, 2.0), d2(), Activation::Relu),
                Layer::new(diag(2, 3.0), d2(), Activation::Relu),
            ],
            BoxDomain::symmetric(2, 1.0),
        ),
        "relu_scaled_linear_out" => NetModel::new(
            vec![
                Layer::new(diag(2, 2.0), d2(), Activation::Relu),
                Layer::new(diag(2, 3.0), d2(), Activation::Identity),
            ],
            BoxDomain::symmetric(2, 1.0),
        ),
        "tanh_mlp" => NetModel::new(
            vec![
                random_layer(1, 8, 3, Activation::Tanh),
                random_layer(2, 8, 8, Activation::Tanh),
                random_layer(3, 2, 8, Activation::Identity),
            ],
            BoxDomain::symmetric(3, 1.0),
        ),
        "relu_mlp" => NetModel::new(
            vec![
                random_layer(11, 16, 2, Activation::Relu),
                random_layer(12, 16, 16, Activation::Relu),
                random_layer(13, 1, 16, Activation::Identity),
            ],
            BoxDomain::symmetric(2, 1.0),
        ),
        other => Err(Error::Unknown {
            kind: "registry net",
            name: other.to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistryEntry {
    pub category: &'static str,
    pub name: String,
    pub description: String,
    pub metadata: Value,
}

fn entry(category: &'static str, name: &str, description: &str, metadata: Value) -> RegistryEntry {
    RegistryEntry {
        category,
        name: name.to_string(),
        description: description.to_string(),
        metadata,
    }
}

fn net_entries() -> Vec<RegistryEntry> {
    let descriptions = [
        "identity map on [-1,1]^2",
        "2 -> 16 -> 16 -> 1 ReLU MLP with fixed Gaussian weights",
        "ReLU(3 ReLU(2x)) on [-1,1]^2",
        "3 ReLU(2x) on [-1,1]^2; linear in its last-layer weights",
        "3 -> 8 -> 8 -> 2 tanh MLP with fixed Gaussian weights",
    ];
    NET_NAMES
        .iter()
        .zip(descriptions)
        .map(|(name, desc)| {
            let net = registry_net(name).expect("registry nets are valid");
            let lip = net_lipschitz(&net);
            entry(
                "net",
                name,
                desc,
                json!({
                    "input_dim": net.input_dim(),
                    "output_dim": net.output_dim(),
                    "layers": net.layers().len(),
                    "activations": net.layers().iter().map(|l| l.activation).collect::<Vec<_>>(),
                    "input_lipschitz": lip.input_lipschitz,
                    "parameter_lipschitz": lip.parameter_lipschitz,
                    "domain": net.domain(),
                }),
            )
        })
        .collect()
}

/// The whole catalog, sorted by category and name.
pub fn list_registry() -> Vec<RegistryEntry> {
    let mut out = Vec::new();
    for f in functional_catalog() {
        out.push(entry(
            "functional",
            f.name,
            f.description,
            json!({
                "params": f.params,
                "support": f.support,
                "tail_error": f.tail_error,
                "lipschitz": f.lipschitz,
                "lambda_invariant": f.lambda_invariant,
            }),
        ));
    }
    let distributions = [
        (
            "centered_exponential",
            "Exp(rate) - 1/rate",
            "rate > 0",
            "1/rate^2",
            "9/rate^4",
        ),
        (
            "gaussian",
            "N(0, variance)",
            "variance >= 0",
            "variance",
            "3 variance^2",
        ),
        (
            "scaled_uniform",
            "U[-half_width, half_width]",
            "half_width >= 0",
            "half_width^2/3",
            "half_width^4/5",
        ),
        (
            "student_t",
            "t_dof rescaled to the given variance",
            "dof > 4, variance >= 0",
            "variance",
            "3 variance^2 (dof-2)/(dof-4)",
        ),
    ];
    for (name, desc, params, var, m4) in distributions {
        out.push(entry(
            "distribution",
            name,
            desc,
            json!({ "params": params, "mean": "0", "variance": var, "fourth_moment": m4 }),
        ));
    }
    out.extend(net_entries());
    out.push(entry(
        "true_function",
        "polynomial",
        "sum_j c_j m_j(x) over graded monomials",
        json!({ "params": "degree, coefficients (one per monomial)" }),
    ));
    out.push(entry(
        "true_function",
        "sin2pi",
        "sum_k sin(2 pi x_k)",
        json!({ "params": "none" }),
    ));
    for (name, desc) in [
        ("gaussian", "N(mean, sd^2) per coordinate, ignoring the box"),
        (
            "truncated_gaussian",
            "N(mean, sd^2) per coordinate, conditioned on the box",
        ),
        ("uniform_box", "uniform on the network domain"),
    ] {
        out.push(entry("input_law", name, desc, json!({})));
    }
    for name in super::config::KINDS {
        out.push(entry("experiment_kind", name, "experiment kind", json!({})));
    }
    out.sort_by(|a, b| (a.category, &a.name).cmp(&(b.category, &b.name)));
    out
}
