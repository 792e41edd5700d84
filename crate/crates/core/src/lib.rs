//! Simulation and diagnostics for moment convergence of approximating
//! (surrogate) processes.
//!
//! The crate generates coupled `(X_n, Y_n)` samples from a true model and a
//! surrogate sharing the same randomness, then measures how close their
//! moments are:
//!
//! * [`sampling`]: splittable deterministic streams and innovation laws.
//! * [`ar1_processes`]: AR(1) filter vs truncated, plug-in-mean surrogate.
//! * [`ui_diagnostics`]: tail functionals, the `(1+δ)`-moment criterion,
//!   integrated survivor functions and increasing-convex-order comparisons.
//! * [`moment_gap`]: the four moment-gap quantities and exact inequality checks.
//! * [`random_fields`]: λ-indexed fields from causal functionals, sup-over-λ gaps,
//!   marginal stationarity checks.
//! * [`surrogate_models`]: feedforward nets with Lipschitz bounds and kriging.
//! * [`experiment`]: JSON-configured experiment runner behind the CLI.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar1_processes;
pub mod error;
pub mod experiment;
pub mod moment_gap;
pub mod random_fields;
pub mod sampling;
pub mod stats;
pub mod surrogate_models;
pub mod ui_diagnostics;

pub use ar1_processes::{Ar1Config, ProcessPairSample, TruncationRule, UncertaintyRule};
pub use error::{Error, Result};
pub use moment_gap::{CoupledArrays, GapRow, MomentGapReport};
pub use random_fields::{FieldSample, FieldSpec, Functional, MultiIndex};
pub use sampling::{make_stream, InnovationSpec, RandomStream, StreamKey};
pub use surrogate_models::{BoxDomain, InputLaw, KrigingModel, NetModel};
