//! Config-driven experiment runner: validation, execution, CSV/JSON/SVG
//! outputs and a checksummed manifest.

mod config;
mod output;
mod plot;
mod registry;
mod run;
mod validate;

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

pub use config::{
    Ar1GapParams, Experiment, ExperimentConfig, FieldGapParams, IcParams, InequalityParams,
    KrigingGapParams, NetMomentParams, NetSource, NetTheoremCParams, NonnegLaw, PairFamily,
    StationarityParams, UiFamily, UiParams, KINDS, SCHEMA_VERSION,
};
pub use output::{fmt_f64, sha256_hex, FileEntry, OutputFile, RunManifest, Table, MANIFEST_NAME};
pub use plot::{LinePlot, Series};
pub use registry::{list_registry, registry_net, RegistryEntry, NET_NAMES};
pub use run::{draw_iid, RunOutput};
pub use validate::{parse_document, validate_document, Violation};

pub const SUMMARY_NAME: &str = "summary.json";

fn read_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Schema violations of the config at `path`; empty when it is valid.
/// Unreadable files and malformed JSON are errors rather than violations.
pub fn validate_config(path: &Path) -> Result<Vec<Violation>> {
    Ok(validate_document(&read_document(path)?))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&read_document(path)?)
}

pub fn parse_config(doc: &Value) -> Result<ExperimentConfig> {
    parse_document(doc).map_err(Error::Invalid)
}

fn worker_count(cfg: &ExperimentConfig) -> usize {
    cfg.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Execute in a dedicated pool of `workers` threads, keeping all results in memory.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cfg))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run::execute(cfg))
}

/// Run and write all outputs to `out_dir`, manifest last. Nothing is left
/// behind when the run fails.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let out = run_in_memory(cfg)?;
    let workers = worker_count(cfg);
    output::write_bundle(out_dir, &out.files, |files| RunManifest {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: cfg.experiment.kind().to_string(),
        master_seed: cfg.master_seed,
        replications: cfg.replications,
        workers,
        config_digest: cfg.digest(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        files,
    })
}
