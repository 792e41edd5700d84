use std::path::{Path, PathBuf};

use momentgap_core::experiment::{
    list_registry, parse_config, run, run_in_memory, sha256_hex, validate_document, KINDS,
    MANIFEST_NAME, SUMMARY_NAME,
};
use serde_json::{json, Value};

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped(name: &str) -> Value {
    let text = std::fs::read_to_string(config_dir().join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// A shipped config cut down to `m` replications.
fn small(name: &str, m: u64) -> Value {
    let mut doc = shipped(name);
    doc["replications"] = json!(m);
    doc
}

fn minimal_ar1() -> Value {
    json!({
        "schema_version": 1,
        "kind": "ar1_gap",
        "master_seed": 3,
        "replications": 500,
        "params": {"n_grid": [10, 100]}
    })
}

fn checksums(doc: &Value, workers: usize) -> Vec<(String, String)> {
    let mut cfg = parse_config(doc).unwrap();
    cfg.set_workers(workers);
    run_in_memory(&cfg)
        .unwrap()
        .files
        .iter()
        .map(|f| (f.name.clone(), sha256_hex(&f.bytes)))
        .collect()
}

#[test]
fn every_shipped_config_validates() {
    let mut kinds = Vec::new();
    for entry in std::fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let v = validate_document(&doc);
        assert!(v.is_empty(), "{}: {v:?}", path.display());
        kinds.push(doc["kind"].as_str().unwrap().to_string());
    }
    for k in KINDS {
        assert!(kinds.iter().any(|x| x == k), "no shipped config for {k}");
    }
}

#[test]
fn minimal_config_is_valid() {
    assert!(validate_document(&minimal_ar1()).is_empty());
    let cfg = parse_config(&minimal_ar1()).unwrap();
    assert_eq!(cfg.master_seed, 3);
    assert_eq!(cfg.replications, 500);
}

#[test]
fn out_of_range_rho_is_reported_at_its_path() {
    let mut doc = minimal_ar1();
    doc["params"]["process"] = json!({"rho": 1.5});
    let v = validate_document(&doc);
    assert!(
        v.iter()
            .any(|x| x.path == "/params/process/rho" && x.message.contains("rho")),
        "{v:?}"
    );
}

#[test]
fn missing_seed_is_named() {
    let mut doc = minimal_ar1();
    doc.as_object_mut().unwrap().remove("master_seed");
    let v = validate_document(&doc);
    assert!(v.iter().any(|x| x.message.contains("master_seed")), "{v:?}");
}

#[test]
fn other_violations() {
    let cases = [
        ("/kind", json!("no_such_kind")),
        ("/schema_version", json!(2)),
        ("/replications", json!(0)),
        ("/unexpected", json!(true)),
    ];
    for (ptr, value) in cases {
        let mut doc = minimal_ar1();
        doc[&ptr[1..]] = value;
        let v = validate_document(&doc);
        assert!(v.iter().any(|x| x.path.starts_with(ptr)), "{ptr}: {v:?}");
    }
    let mut doc = minimal_ar1();
    doc["params"]["n_grid"] = json!([]);
    assert!(!validate_document(&doc).is_empty());
    assert!(!validate_document(&json!([1, 2])).is_empty());
}

#[test]
fn runs_are_deterministic_and_worker_invariant() {
    let docs = [
        small("ar1_gap.json", 400),
        small("ui_spike.json", 2000),
        small("ic_exponential.json", 2000),
        small("field_gap.json", 200),
        small("stationarity.json", 300),
        small("net_theorem_c.json", 500),
        small("net_moment_bound.json", 500),
        small("kriging_gap.json", 300),
        small("inequality_suite.json", 5000),
    ];
    for doc in &docs {
        let base = checksums(doc, 1);
        assert!(base.iter().any(|(n, _)| n == SUMMARY_NAME));
        assert_eq!(base, checksums(doc, 1), "{}", doc["kind"]);
        assert_eq!(base, checksums(doc, 3), "{}", doc["kind"]);
        let mut other = doc.clone();
        other["master_seed"] = json!(doc["master_seed"].as_u64().unwrap() + 1);
        assert_ne!(base, checksums(&other, 1), "{}", doc["kind"]);
    }
}

#[test]
fn manifest_lists_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&minimal_ar1()).unwrap();
    let manifest = run(&cfg, dir.path()).unwrap();
    assert_eq!(manifest.kind, "ar1_gap");
    assert_eq!(manifest.master_seed, 3);
    for f in &manifest.files {
        let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    let on_disk: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap())
            .unwrap();
    assert_eq!(on_disk["config_digest"], json!(cfg.digest()));

    // the digest ignores worker count
    let mut other = cfg.clone();
    other.set_workers(7);
    assert_eq!(other.digest(), cfg.digest());
    other.set_seed(4);
    assert_ne!(other.digest(), cfg.digest());
}

#[test]
fn failed_run_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    // a directory squatting on the summary file name makes the last write fail
    std::fs::create_dir(dir.path().join(SUMMARY_NAME)).unwrap();
    let cfg = parse_config(&minimal_ar1()).unwrap();
    assert!(run(&cfg, dir.path()).is_err());
    let left: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(left, vec![SUMMARY_NAME.to_string()]);

    // a run that fails during execution writes nothing either
    let mut doc = small("kriging_gap.json", 10);
    doc["params"]["experiment"]["design_sizes"] = json!([1]);
    doc["params"]["experiment"]["degree"] = json!(1);
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("never");
    if let Ok(cfg) = parse_config(&doc) {
        assert!(run(&cfg, &target).is_err());
    }
    assert!(!target.exists());
}

#[test]
fn csv_layout() {
    let cfg = parse_config(&minimal_ar1()).unwrap();
    let out = run_in_memory(&cfg).unwrap();
    let gap = out.files.iter().find(|f| f.name == "gap_r1.0.csv").unwrap();
    let text = std::str::from_utf8(&gap.bytes).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,r,gap_lr,gap_abs_moment,gap_mean,gap_norm,half_width,M"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 8);
        for c in &cells[2..7] {
            let v: f64 = c.parse().unwrap();
            // shortest round-trip formatting
            assert_eq!(format!("{v:?}"), *c);
        }
    }
    let summary: Value = serde_json::from_slice(
        &out.files
            .iter()
            .find(|f| f.name == SUMMARY_NAME)
            .unwrap()
            .bytes,
    )
    .unwrap();
    assert_eq!(summary["kind"], json!("ar1_gap"));
    assert_eq!(summary["M"], json!(500));
}

#[test]
fn registry_listing() {
    let a = list_registry();
    let b = list_registry();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let keys: Vec<_> = a.iter().map(|e| (e.category, e.name.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for f in ["ar1_truncated", "ar1_window", "clipped_poly", "constant"] {
        assert!(
            a.iter().any(|e| e.category == "functional" && e.name == f),
            "missing functional {f}"
        );
    }
    assert!(a
        .iter()
        .all(|e| !e.description.is_empty() && e.metadata.is_object()));
}
