use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ar1_processes::Ar1Config;
use crate::error::{Error, Result};
use crate::random_fields::{FieldSpec, MultiIndex};
use crate::sampling::InnovationSpec;
use crate::surrogate_models::{InputLaw, KrigingExperiment, NetModel, NetRecord, ZetaSchedule};

use super::registry;

pub const SCHEMA_VERSION: u64 = 1;

pub const KINDS: [&str; 9] = [
    "ar1_gap",
    "field_gap",
    "ic_compare",
    "inequality_suite",
    "kriging_gap",
    "net_moment_bound",
    "net_theorem_c",
    "stationarity_check",
    "ui_diagnostic",
];

fn default_r_list() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1GapParams {
    #[serde(default)]
    pub process: Ar1Config,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_r_list")]
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UiFamily {
    /// `X_n = n · 1(U < 1/n)`: bounded in L1 but not uniformly integrable.
    Spike,
    /// i.i.d. draws from an innovation law, the same for every n.
    Iid { innovation: InnovationSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UiParams {
    pub family: UiFamily,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub a_grid: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default = "default_tail_threshold")]
    pub tail_threshold: f64,
}

fn one() -> f64 {
    1.0
}

fn default_cap() -> f64 {
    10.0
}

fn default_tail_threshold() -> f64 {
    0.05
}

/// Non-negative laws for increasing-convex-order comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonnegLaw {
    Exponential {
        rate: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// `|eps|` for an innovation law.
    AbsInnovation {
        innovation: InnovationSpec,
    },
}

impl NonnegLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            NonnegLaw::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                Err(Error::config("exponential rate must be positive"))
            }
            NonnegLaw::Uniform { low, high }
                if !(*low >= 0.0 && high > low && high.is_finite()) =>
            {
                Err(Error::config("uniform law needs 0 <= low < high"))
            }
            NonnegLaw::AbsInnovation { innovation } => innovation.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcParams {
    pub sample1: NonnegLaw,
    pub sample2: NonnegLaw,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGapParams {
    pub field: FieldSpec,
    #[serde(default = "default_r_list")]
    pub r: Vec<f64>,
    /// Level `c` in the reported exceedance frequency `P(sup_λ |X - Y| > c)`.
    #[serde(default = "default_exceed")]
    pub exceed_threshold: f64,
}

fn default_exceed() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarityParams {
    pub field: FieldSpec,
    /// Multi-index to check; the last entry of the field's n-grid when absent.
    #[serde(default)]
    pub n: Option<MultiIndex>,
    /// Pairs to compare; all pairs of the λ-grid when absent.
    #[serde(default)]
    pub lambda_pairs: Option<Vec<(i64, i64)>>,
}

/// A network given inline or by registry name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetSource {
    Registry { registry: String },
    Inline(NetRecord),
}

impl NetSource {
    pub fn resolve(&self) -> Result<NetModel> {
        match self {
            NetSource::Registry { registry: name } => registry::registry_net(name),
            NetSource::Inline(rec) => NetModel::try_from(rec.clone()),
        }
    }
}

fn default_schedule() -> ZetaSchedule {
    ZetaSchedule::InverseN { direction: None }
}

fn default_law() -> InputLaw {
    InputLaw::UniformBox
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetTheoremCParams {
    pub net: NetSource,
    pub n_grid: Vec<u64>,
    #[serde(default = "default_schedule")]
    pub schedule: ZetaSchedule,
    #[serde(default = "default_law")]
    pub input_law: InputLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetMomentParams {
    pub net: NetSource,
    pub delta: f64,
    #[serde(default = "default_law")]
    pub input_law: InputLaw,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrigingGapParams {
    pub experiment: KrigingExperiment,
    #[serde(default = "default_r_list")]
    pub r: Vec<f64>,
}

/// Data sources for the inequality suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFamily {
    Gaussian,
    StudentT5,
    CenteredExponential,
    ScaledUniform,
    /// Coupled `(X_n, Y_n)` from the default AR(1) experiment at n = 100.
    Ar1Coupled,
}

impl PairFamily {
    pub const ALL: [PairFamily; 5] = [
        PairFamily::Gaussian,
        PairFamily::StudentT5,
        PairFamily::CenteredExponential,
        PairFamily::ScaledUniform,
        PairFamily::Ar1Coupled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairFamily::Gaussian => "gaussian",
            PairFamily::StudentT5 => "student_t5",
            PairFamily::CenteredExponential => "centered_exponential",
            PairFamily::ScaledUniform => "scaled_uniform",
            PairFamily::Ar1Coupled => "ar1_coupled",
        }
    }

    pub fn innovation(self) -> Option<InnovationSpec> {
        match self {
            PairFamily::Gaussian => Some(InnovationSpec::Gaussian { variance: 1.0 }),
            PairFamily::StudentT5 => Some(InnovationSpec::StudentT {
                dof: 5.0,
                variance: 1.0,
            }),
            PairFamily::CenteredExponential => {
                Some(InnovationSpec::CenteredExponential { rate: 1.0 })
            }
            PairFamily::ScaledUniform => Some(InnovationSpec::ScaledUniform {
                half_width: 3f64.sqrt(),
            }),
            PairFamily::Ar1Coupled => None,
        }
    }
}

fn all_families() -> Vec<PairFamily> {
    PairFamily::ALL.to_vec()
}

fn default_r_pointwise() -> Vec<f64> {
    vec![0.5, 0.7, 1.0]
}

fn default_r_cr() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_r_minkowski() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityParams {
    #[serde(default = "all_families")]
    pub families: Vec<PairFamily>,
    #[serde(default = "default_r_pointwise")]
    pub r_pointwise: Vec<f64>,
    #[serde(default = "default_r_cr")]
    pub r_cr: Vec<f64>,
    #[serde(default = "default_r_minkowski")]
    pub r_minkowski: Vec<f64>,
}

impl Default for InequalityParams {
    fn default() -> Self {
        InequalityParams {
            families: all_families(),
            r_pointwise: default_r_pointwise(),
            r_cr: default_r_cr(),
            r_minkowski: default_r_minkowski(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Experiment {
    Ar1Gap(Ar1GapParams),
    UiDiagnostic(UiParams),
    IcCompare(IcParams),
    FieldGap(FieldGapParams),
    StationarityCheck(StationarityParams),
    NetTheoremC(NetTheoremCParams),
    NetMomentBound(NetMomentParams),
    KrigingGap(KrigingGapParams),
    InequalitySuite(InequalityParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Ar1Gap(_) => "ar1_gap",
            Experiment::UiDiagnostic(_) => "ui_diagnostic",
            Experiment::IcCompare(_) => "ic_compare",
            Experiment::FieldGap(_) => "field_gap",
            Experiment::StationarityCheck(_) => "stationarity_check",
            Experiment::NetTheoremC(_) => "net_theorem_c",
            Experiment::NetMomentBound(_) => "net_moment_bound",
            Experiment::KrigingGap(_) => "kriging_gap",
            Experiment::InequalitySuite(_) => "inequality_suite",
        }
    }

    pub fn from_parts(kind: &str, params: Value) -> Result<Self> {
        use serde_json::from_value as de;
        Ok(match kind {
            "ar1_gap" => Experiment::Ar1Gap(de(params)?),
            "ui_diagnostic" => Experiment::UiDiagnostic(de(params)?),
            "ic_compare" => Experiment::IcCompare(de(params)?),
            "field_gap" => Experiment::FieldGap(de(params)?),
            "stationarity_check" => Experiment::StationarityCheck(de(params)?),
            "net_theorem_c" => Experiment::NetTheoremC(de(params)?),
            "net_moment_bound" => Experiment::NetMomentBound(de(params)?),
            "kriging_gap" => Experiment::KrigingGap(de(params)?),
            "inequality_suite" => Experiment::InequalitySuite(de(params)?),
            other => {
                return Err(Error::Unknown {
                    kind: "experiment kind",
                    name: other.to_string(),
                })
            }
        })
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub replications: usize,
    pub workers: Option<usize>,
    pub output_dir: Option<String>,
    pub plots: bool,
    pub experiment: Experiment,
    /// The source document, used for the config digest.
    pub document: Value,
}

impl ExperimentConfig {
    /// Digest of the document without the fields that cannot affect data
    /// (`workers`, `output_dir`, `plots`).
    pub fn digest(&self) -> String {
        let mut doc = self.document.clone();
        if let Some(obj) = doc.as_object_mut() {
            obj.remove("workers");
            obj.remove("output_dir");
            obj.remove("plots");
        }
        super::output::sha256_hex(serde_json::to_string(&doc).unwrap_or_default().as_bytes())
    }

    /// Override the master seed, keeping the document in sync.
    pub fn set_seed(&mut self, seed: u64) {
        self.master_seed = seed;
        if let Some(obj) = self.document.as_object_mut() {
            obj.insert("master_seed".into(), Value::from(seed));
        }
    }

    pub fn set_workers(&mut self, workers: usize) {
        self.workers = Some(workers);
        if let Some(obj) = self.document.as_object_mut() {
            obj.insert("workers".into(), Value::from(workers));
        }
    }
}
