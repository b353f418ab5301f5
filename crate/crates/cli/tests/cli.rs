use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wzw-mps"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(dir.join(name)).unwrap();
    r.deserialize().map(|x| x.unwrap()).collect()
}

#[test]
fn heisenberg_module_summary_lists_partition_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["module-build", "-M", "10", "-N", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(dir.path(), "module_build.json");
    let dims: Vec<u64> = serde_json::from_value(s["modules"][0]["graded_dims"].clone()).unwrap();
    assert_eq!(dims, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
}

#[test]
fn su2_ranks_match_character_and_cache_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["module-build", "--algebra", "su2", "--fields", "1/2,1/2", "-N", "2", "-M", "4", "--module-cache", cache.to_str().unwrap()];
    assert!(run(dir.path(), &args).status.success());
    let first = json(dir.path(), "module_build.json");
    assert!(run(dir.path(), &args).status.success());
    let second = json(dir.path(), "module_build.json");
    let vac = &first["modules"][0];
    assert_eq!(vac["weight"], "spin:0");
    assert_eq!(vac["graded_dims"], serde_json::json!([1, 3, 4, 7, 13]));
    assert_eq!(vac["matches_character"], true);
    for (a, b) in first["modules"].as_array().unwrap().iter().zip(second["modules"].as_array().unwrap()) {
        assert_eq!(a["cache_hit"], false);
        assert_eq!(b["cache_hit"], true);
        assert_eq!(a["content_hash"], b["content_hash"]);
    }
}

#[test]
fn free_boson_correlator_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["correlator", "-N", "12", "-M", "12", "--no-certify"]);
    assert!(out.status.success());
    let r = json(dir.path(), "correlator.json");
    let q = (-1f64).exp();
    let exact = (q - q * q).powi(-1);
    let v = r["value_re"].as_f64().unwrap();
    assert!(((v - exact) / exact).abs() < 1e-3);
    assert_eq!(r["bond_dim"], 272);
    assert!(r["meta"]["config_hash"].as_str().unwrap().len() == 64);
    assert_eq!(r["meta"]["seed"], 0);
}

#[test]
fn zero_truncation_reports_a_large_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["correlator", "-N", "0", "-M", "8", "--norm-ladder", "4,6,8"]);
    assert!(out.status.success());
    let r = json(dir.path(), "correlator.json");
    assert_eq!(r["bond_dim"], 1);
    let v = r["value_re"].as_f64().unwrap();
    let b = r["certified_bound"].as_f64().unwrap();
    assert!(b > v.abs());
}

#[test]
fn forbidden_fusion_is_a_structural_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["correlator", "--algebra", "su2", "--fields", "1/2,1/2", "--modules", "0,0,0", "-N", "2", "--no-certify"]);
    assert!(out.status.success());
    let r = json(dir.path(), "correlator.json");
    assert_eq!(r["value_re"], 0.0);
    assert_eq!(r["structural_zero"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // spin 1 is not integrable at level 1
    let out = run(dir.path(), &["correlator", "--algebra", "su2", "--fields", "1,1", "--modules", "0,1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["correlator", "-N", "4", "-M", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["correlator", "-N", "40", "-M", "80", "--memory-budget-mb", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the budget"));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"truncation": 3, "unknown_key": 1}"#).unwrap();
    let out = run(dir.path(), &["correlator", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"fields": ["1", "-1"], "truncation": 3, "cutoff": 6, "certify": false, "d": 2.0}"#).unwrap();
    let out = run(dir.path(), &["correlator", "--config", cfg.to_str().unwrap(), "-N", "5"]);
    assert!(out.status.success());
    let r = json(dir.path(), "correlator.json");
    assert_eq!(r["truncation"], 5);
    assert_eq!(r["cutoff"], 6);
    assert!((r["q"].as_f64().unwrap() - (-2f64).exp()).abs() < 1e-15);
}

#[test]
fn convergence_sweep_is_consistent_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["convergence", "--d-grid", "1", "--n-grid", "2,4,6,8", "-M", "16", "--samples", "20", "--norm-ladder", "8,10,12"];
    assert!(run(dir.path(), &args).status.success());
    let rows = csv_rows(dir.path(), "convergence.csv");
    assert_eq!(rows.len(), 4);
    let f = |r: &std::collections::HashMap<String, String>, k: &str| r[k].parse::<f64>().unwrap();
    for w in rows.windows(2) {
        assert!(f(&w[1], "measured_error") < f(&w[0], "measured_error"));
    }
    for r in &rows {
        assert!(f(r, "chain_bound") >= f(r, "measured_error"));
        assert_eq!(r["bond_dim"], r["cumulative_dim"]);
        assert_eq!(r["value_im"].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r["seed"], "0");
    }
    let repl = csv_rows(dir.path(), "replacement.csv");
    for r in &repl {
        assert!(f(r, "eq5_bound") >= f(r, "measured_error"));
    }
    let first = std::fs::read(dir.path().join("convergence.csv")).unwrap();
    let first_repl = std::fs::read(dir.path().join("replacement.csv")).unwrap();
    assert!(run(dir.path(), &args).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("convergence.csv")).unwrap());
    assert_eq!(first_repl, std::fs::read(dir.path().join("replacement.csv")).unwrap());
}

#[test]
fn bounds_tables_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bounds", "--mmax", "40", "--dmax", "3", "-M", "8", "--d-grid", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parts = csv_rows(dir.path(), "partitions.csv");
    assert_eq!(parts.len(), 41 * 3);
    assert!(parts.iter().all(|r| r["holds"] == "true"));
    let p10 = parts.iter().find(|r| r["m"] == "10" && r["d"] == "1").unwrap();
    assert_eq!(p10["count"], "42");
    let fits = json(dir.path(), "fits.json");
    let slope = fits["fits"]["1"]["fixed_n"][0]["truncation_slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() < 1.0);
    assert!(csv_rows(dir.path(), "bond_bounds.csv").len() == 3 * 6);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path(), "verify.json");
    assert_eq!(r["passed"], true);
}

#[test]
fn export_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mps.bin");
    let out = run(dir.path(), &["correlator", "-N", "3", "--no-certify", "--export", path.to_str().unwrap()]);
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    let hlen = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    let header: serde_json::Value = serde_json::from_slice(&bytes[8..8 + hlen]).unwrap();
    let cells: u64 = header["tensors"].as_array().unwrap().iter().map(|t| t["rows"].as_u64().unwrap() * t["cols"].as_u64().unwrap()).sum();
    assert_eq!(bytes.len() as u64, 8 + hlen as u64 + 8 * cells);
    assert_eq!(header["truncation"], 3);
}
