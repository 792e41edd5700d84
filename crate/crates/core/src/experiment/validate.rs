//! Schema validation of config documents. Every violation is reported with a
//! JSON pointer into the document.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// JSON pointer, `""` for the document root.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path = if self.path.is_empty() {
            "/"
        } else {
            &self.path
        };
        write!(f, "{path}: {}", self.message)
    }
}

const TOP_LEVEL: [&str; 9] = [
    "kind",
    "master_seed",
    "output_dir",
    "params",
    "plots",
    "replications",
    "schema_version",
    "workers",
    "$comment",
];

#[derive(Default)]
struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Violation {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn missing(&mut self, path: &str, field: &str) {
        self.push(path, format!("required field `{field}` is missing"));
    }

    /// Record a module error, without its category prefix.
    fn error(&mut self, path: &str, e: Error) {
        let msg = match e {
            Error::Config(m) | Error::Shape(m) | Error::Resource(m) | Error::Fit(m) => m,
            other => other.to_string(),
        };
        self.push(path, msg);
    }

    fn len(&self) -> usize {
        self.0.len()
    }
}

fn number(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn check_positive_int(
    c: &mut Collector,
    obj: &Map<String, Value>,
    field: &str,
    path: &str,
    required: bool,
) {
    let p = format!("{path}/{field}");
    match obj.get(field) {
        None if required => c.missing(path, field),
        None => {}
        Some(v) => match v.as_u64() {
            Some(k) if k >= 1 => {}
            _ => c.push(&p, format!("`{field}` must be a positive integer")),
        },
    }
}

/// Array of numbers satisfying `ok`, strictly increasing when asked.
#[allow(clippy::too_many_arguments)]
fn check_number_list(
    c: &mut Collector,
    obj: &Map<String, Value>,
    field: &str,
    path: &str,
    required: bool,
    increasing: bool,
    ok: impl Fn(f64) -> bool,
    what: &str,
) {
    let p = format!("{path}/{field}");
    let Some(v) = obj.get(field) else {
        if required {
            c.missing(path, field);
        }
        return;
    };
    if v.is_null() && !required {
        return;
    }
    let Some(items) = v.as_array() else {
        c.push(&p, format!("`{field}` must be an array"));
        return;
    };
    if items.is_empty() {
        c.push(&p, format!("`{field}` must not be empty"));
        return;
    }
    let mut prev: Option<f64> = None;
    for (i, item) in items.iter().enumerate() {
        match number(item) {
            Some(x) if ok(x) => {
                if increasing && prev.is_some_and(|q| x <= q) {
                    c.push(
                        &format!("{p}/{i}"),
                        format!("`{field}` must be strictly increasing"),
                    );
                }
                prev = Some(x);
            }
            _ => c.push(&format!("{p}/{i}"), format!("each entry must be {what}")),
        }
    }
}

fn is_positive_int(x: f64) -> bool {
    x >= 1.0 && x.fract() == 0.0 && x <= 9.0e15
}

fn check_n_grid(c: &mut Collector, obj: &Map<String, Value>, path: &str) {
    check_number_list(
        c,
        obj,
        "n_grid",
        path,
        true,
        true,
        is_positive_int,
        "a positive integer",
    );
}

fn check_r_list(c: &mut Collector, obj: &Map<String, Value>, path: &str) {
    check_number_list(
        c,
        obj,
        "r",
        path,
        false,
        false,
        |r| r > 0.0 && r.is_finite(),
        "a positive number",
    );
}

fn check_explicit(c: &mut Collector, kind: &str, params: &Map<String, Value>) {
    let path = "/params";
    match kind {
        "ar1_gap" => {
            if let Some(proc_) = params.get("process").and_then(Value::as_object) {
                if let Some(rho) = proc_.get("rho") {
                    match number(rho) {
                        Some(v) if v > -1.0 && v < 1.0 => {}
                        _ => c.push("/params/process/rho", "rho must lie in (-1,1)"),
                    }
                }
            }
            check_n_grid(c, params, path);
            check_r_list(c, params, path);
        }
        "ui_diagnostic" => {
            if !params.contains_key("family") {
                c.missing(path, "family");
            }
            check_n_grid(c, params, path);
            check_number_list(
                c,
                params,
                "a_grid",
                path,
                false,
                true,
                |a| a.is_finite() && a >= 0.0,
                "a non-negative number",
            );
        }
        "ic_compare" => {
            for f in ["sample1", "sample2"] {
                if !params.contains_key(f) {
                    c.missing(path, f);
                }
            }
            check_number_list(
                c,
                params,
                "t_grid",
                path,
                false,
                true,
                |t| t.is_finite() && t >= 0.0,
                "a non-negative number",
            );
        }
        "field_gap" | "stationarity_check" => {
            if !params.contains_key("field") {
                c.missing(path, "field");
            }
            if kind == "field_gap" {
                check_r_list(c, params, path);
            }
        }
        "net_theorem_c" => {
            if !params.contains_key("net") {
                c.missing(path, "net");
            }
            check_n_grid(c, params, path);
        }
        "net_moment_bound" => {
            if !params.contains_key("net") {
                c.missing(path, "net");
            }
            match params.get("delta").map(number) {
                None => c.missing(path, "delta"),
                Some(Some(d)) if d > 0.0 && d.is_finite() => {}
                Some(_) => c.push("/params/delta", "delta must be positive"),
            }
        }
        "kriging_gap" => {
            if !params.contains_key("experiment") {
                c.missing(path, "experiment");
            }
            check_r_list(c, params, path);
        }
        "inequality_suite" => {
            check_number_list(
                c,
                params,
                "r_pointwise",
                path,
                false,
                false,
                |r| r > 0.0 && r <= 1.0,
                "in (0,1]",
            );
            check_number_list(
                c,
                params,
                "r_cr",
                path,
                false,
                false,
                |r| r > 0.0 && r.is_finite(),
                "positive",
            );
            check_number_list(
                c,
                params,
                "r_minkowski",
                path,
                false,
                false,
                |r| r >= 1.0 && r.is_finite(),
                "at least 1",
            );
        }
        _ => {}
    }
}

fn check_semantics(c: &mut Collector, exp: &Experiment) {
    let mut at = |path: &str, r: Result<()>| {
        if let Err(e) = r {
            c.error(path, e);
        }
    };
    match exp {
        Experiment::Ar1Gap(p) => {
            at("/params/process", p.process.filter_length().map(|_| ()));
        }
        Experiment::UiDiagnostic(p) => {
            if let UiFamily::Iid { innovation } = &p.family {
                at("/params/family/innovation", innovation.validate());
            }
            if !(p.r > 0.0 && p.r.is_finite()) {
                at("/params/r", Err(Error::config("r must be positive")));
            }
            if !(p.delta > 0.0 && p.delta.is_finite()) {
                at(
                    "/params/delta",
                    Err(Error::config("delta must be positive")),
                );
            }
            if !(p.cap > 0.0) {
                at("/params/cap", Err(Error::config("cap must be positive")));
            }
            if !(p.tail_threshold >= 0.0) {
                at(
                    "/params/tail_threshold",
                    Err(Error::config("tail_threshold must be non-negative")),
                );
            }
        }
        Experiment::IcCompare(p) => {
            at("/params/sample1", p.sample1.validate());
            at("/params/sample2", p.sample2.validate());
        }
        Experiment::FieldGap(p) => {
            at("/params/field", p.field.validate());
            if !(p.exceed_threshold >= 0.0) {
                at(
                    "/params/exceed_threshold",
                    Err(Error::config("exceed_threshold must be non-negative")),
                );
            }
        }
        Experiment::StationarityCheck(p) => {
            let ok = p.field.validate();
            let valid = ok.is_ok();
            at("/params/field", ok);
            if valid {
                if let Some(n) = &p.n {
                    at("/params/n", p.field.check_index(n));
                }
                if let Some(pairs) = &p.lambda_pairs {
                    for (i, (a, b)) in pairs.iter().enumerate() {
                        if !p.field.lambda_grid.contains(a) || !p.field.lambda_grid.contains(b) {
                            at(
                                &format!("/params/lambda_pairs/{i}"),
                                Err(Error::config(format!(
                                    "pair ({a}, {b}) is not in lambda_grid"
                                ))),
                            );
                        }
                    }
                }
            }
        }
        Experiment::NetTheoremC(p) => match p.net.resolve() {
            Ok(net) => at("/params/input_law", p.input_law.validate(net.domain())),
            Err(e) => at("/params/net", Err(e)),
        },
        Experiment::NetMomentBound(p) => match p.net.resolve() {
            Ok(net) => {
                at("/params/input_law", p.input_law.validate(net.domain()));
                if let Some(x0) = &p.x0 {
                    if x0.len() != net.input_dim() {
                        at(
                            "/params/x0",
                            Err(Error::shape(format!(
                                "x0 has {} coordinates, the network takes {}",
                                x0.len(),
                                net.input_dim()
                            ))),
                        );
                    }
                }
            }
            Err(e) => at("/params/net", Err(e)),
        },
        Experiment::KrigingGap(p) => at("/params/experiment", p.experiment.validate()),
        Experiment::InequalitySuite(p) => {
            if p.families.is_empty() {
                at(
                    "/params/families",
                    Err(Error::config("families must not be empty")),
                );
            }
        }
    }
}

/// Check a parsed document. Returns the typed config, or every violation found.
pub fn parse_document(doc: &Value) -> std::result::Result<ExperimentConfig, Vec<Violation>> {
    let mut c = Collector::default();
    let Some(root) = doc.as_object() else {
        c.push("", "config must be a JSON object");
        return Err(c.0);
    };
    for key in root.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            c.push(&format!("/{key}"), format!("unknown field `{key}`"));
        }
    }
    match root.get("schema_version") {
        None => c.missing("", "schema_version"),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => c.push(
            "/schema_version",
            format!("unsupported schema_version {v}; expected {SCHEMA_VERSION}"),
        ),
    }
    let kind = match root.get("kind") {
        None => {
            c.missing("", "kind");
            None
        }
        Some(Value::String(k)) if KINDS.contains(&k.as_str()) => Some(k.clone()),
        Some(v) => {
            c.push(
                "/kind",
                format!(
                    "unknown experiment kind {v}; expected one of {}",
                    KINDS.join(", ")
                ),
            );
            None
        }
    };
    match root.get("master_seed") {
        None => c.missing("", "master_seed"),
        Some(v) if v.as_u64().is_some() => {}
        Some(_) => c.push(
            "/master_seed",
            "`master_seed` must be a non-negative integer",
        ),
    }
    check_positive_int(&mut c, root, "replications", "", true);
    check_positive_int(&mut c, root, "workers", "", false);
    if root.get("output_dir").is_some_and(|v| !v.is_string()) {
        c.push("/output_dir", "`output_dir` must be a string");
    }
    if root.get("plots").is_some_and(|v| !v.is_boolean()) {
        c.push("/plots", "`plots` must be a boolean");
    }
    let params = match root.get("params") {
        None => {
            c.missing("", "params");
            None
        }
        Some(Value::Object(p)) => Some(p),
        Some(_) => {
            c.push("/params", "`params` must be an object");
            None
        }
    };

    let mut experiment = None;
    if let (Some(kind), Some(params)) = (&kind, params) {
        let before = c.len();
        check_explicit(&mut c, kind, params);
        if c.len() == before {
            match Experiment::from_parts(kind, Value::Object(params.clone())) {
                Ok(exp) => {
                    check_semantics(&mut c, &exp);
                    experiment = Some(exp);
                }
                Err(e) => c.error("/params", e),
            }
        }
    }

    match experiment {
        Some(experiment) if c.0.is_empty() => Ok(ExperimentConfig {
            master_seed: root["master_seed"].as_u64().unwrap_or_default(),
            replications: root["replications"].as_u64().unwrap_or_default() as usize,
            workers: root
                .get("workers")
                .and_then(Value::as_u64)
                .map(|w| w as usize),
            output_dir: root
                .get("output_dir")
                .and_then(Value::as_str)
                .map(str::to_string),
            plots: root.get("plots").and_then(Value::as_bool).unwrap_or(true),
            experiment,
            document: doc.clone(),
        }),
        _ => Err(c.0),
    }
}

/// Violations of a document; empty when it is valid.
pub fn validate_document(doc: &Value) -> Vec<Violation> {
    parse_document(doc).err().unwrap_or_default()
}
