//! Surrogate models whose gap to the "true" model is controlled by a parameter
//! perturbation: feedforward networks perturbed in their last-layer weights,
//! and universal kriging predictors refitted on growing designs.

mod domain;
pub mod kriging;
pub mod network;

pub use domain::{BoxDomain, InputLaw};
pub use kriging::{
    correlation, kriging_fit, kriging_predict, kriging_surrogate_pair, KrigingExperiment,
    KrigingModel, KrigingPairSample, KrigingPrediction, KrigingRecord, PolyBasis, TrueFunction,
};
pub use network::{
    net_forward, net_lipschitz, net_moment_bound_check, spectral_norm, theorem_c_gap,
    zeta_schedule, Activation, Layer, LayerRecord, LipschitzBound, NetModel, NetMomentCheck,
    NetRecord, TheoremCReport, TheoremCRow, ZetaSchedule,
};
