use normcircle::fixtures;
use normcircle::lattice::naive_count;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_normcircle"));
    for (k, _) in std::env::vars() {
        if k.starts_with("NORMCIRCLE_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let lines = data_lines(path);
    let idx = lines[0].split(',').position(|c| c == name).unwrap();
    lines[1..]
        .iter()
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timings.json")
        .map(|e| (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn count_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = run(&["count", "--jobs", "1", "--p", "12"], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let expected = data_lines(&golden("count_gaussian_p12.csv"));
    assert_eq!(data_lines(&out.join("count.csv")), expected);
    // the golden count is the naive five-fold loop
    let naive = naive_count(&fixtures::gaussian(), 12.0, 1 << 30).unwrap();
    assert_eq!(
        column(&golden("count_gaussian_p12.csv"), "count"),
        vec![naive.to_string()]
    );
}

#[test]
fn artifacts_carry_provenance_and_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        run(&["count", "--jobs", "1", "--p", "8,12"], &out).status.code(),
        Some(0)
    );
    let csv = std::fs::read_to_string(out.join("count.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let config = std::fs::read(out.join("config.json")).unwrap();
    let digest = normcircle_cli::artifact::sha256_hex(&config);
    assert!(csv.contains(&format!("# config_sha256: {digest}")));
    assert!(csv.contains("# points_used: "));
    assert!(csv.contains(&format!("# tool: normcircle {}", env!("CARGO_PKG_VERSION"))));
    let timings: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("timings.json")).unwrap()).unwrap();
    assert_eq!(timings["config_sha256"], digest.as_str());
    assert!(timings["started_unix"].as_f64().unwrap() > 0.0);
    assert_eq!(
        column(&out.join("count.csv"), "P"),
        vec!["8.0000000000000000e0", "1.2000000000000000e1"]
    );
}

#[test]
fn vanishing_series_ratio_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "instance": "vanishing-series", "prime_cutoff": 13, "integral_samples": 65536, "p_schedule": [10, 20] }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = run(&["predict", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let ratios = column(&out.join("predict.csv"), "ratio");
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| r.parse::<f64>().unwrap() == 0.0), "{ratios:?}");
}

#[test]
fn malformed_field_file_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{ "degree": 2, "mult_table": [[["1","0"]]], "signature": [0, 1] }"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("ext.json"),
        r#"{ "degree": 2, "rel_min_poly": [["1"], ["0"], ["1"]] }"#,
    )
    .unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "field": "bad.json", "extension": "ext.json", "a": [1], "b": [1],
             "targets": [0.6, 0.8, 0, 0, 1], "eta": 0.5 }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = run(&["count", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    std::fs::write(&cfg, r#"{ "instance": "gaussian", "colour": "blue" }"#).unwrap();
    assert_eq!(
        run(&["count", "--config", cfg.to_str().unwrap()], &out).status.code(),
        Some(2)
    );
    assert_eq!(run(&["count", "--instance", "nowhere"], &out).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn explicit_field_files_match_the_builtin_instance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("q.json"),
        r#"{ "degree": 1, "mult_table": [[["1"]]], "signature": [1, 0] }"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("qi.json"),
        r#"{ "degree": 2, "rel_min_poly": [["1"], ["0"], ["1"]] }"#,
    )
    .unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "field": "q.json", "extension": "qi.json", "a": [1], "b": [1], "modulus": [["3"]],
             "residues": { "x": [[1], [2]], "y": [[2], [4]], "z": [5] },
             "targets": [0.2, 0.4, 0.4, 0.8, 1], "eta": 0.3, "p_schedule": [20, 40] }"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        run(&["count", "--jobs", "1", "--config", cfg.to_str().unwrap()], &a)
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(
            &["count", "--jobs", "1", "--instance", "gaussian-wapprox", "--p", "20,40"],
            &b
        )
        .status
        .code(),
        Some(0)
    );
    assert_eq!(data_lines(&a.join("count.csv")), data_lines(&b.join("count.csv")));
}

#[test]
fn rerun_from_emitted_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        run(&["count", "--jobs", "1", "--p", "8,16", "--seed", "5"], &a)
            .status
            .code(),
        Some(0)
    );
    let cfg = a.join("config.json");
    assert_eq!(
        run(&["count", "--config", cfg.to_str().unwrap()], &b).status.code(),
        Some(0)
    );
    assert_eq!(artifacts(&a), artifacts(&b));
}

#[test]
fn selftest_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let r = run(&["selftest", "--jobs", "1", "--seed", "42"], d);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(artifacts(&a), artifacts(&b));
    assert!(column(&a.join("selftest.csv"), "passed").iter().all(|p| p == "true"));
}

#[test]
fn environment_overrides_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = bin()
        .args(["count", "--p", "8"])
        .env("NORMCIRCLE_SEED", "77")
        .env("NORMCIRCLE_JOBS", "1")
        .env("NORMCIRCLE_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["seed"], 77);
    assert_eq!(cfg["jobs"], 1);
    let r = bin()
        .args(["count", "--p", "8", "--seed", "3", "--out"])
        .arg(&out)
        .env("NORMCIRCLE_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["seed"], 3);
}

#[test]
fn budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = run(&["count", "--p", "50", "--budget-points", "100"], &out);
    assert_eq!(r.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn witness_certificate_verifies_and_tampering_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wa");
    let r = run(&["wapprox", "--instance", "gaussian-wapprox", "--jobs", "1"], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let cert = out.join("witness.json");
    let ver = dir.path().join("ver");
    assert_eq!(
        run(&["verify-cert", "--cert", cert.to_str().unwrap()], &ver)
            .status
            .code(),
        Some(0)
    );
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    let z = &mut doc["report"]["found"]["certificate"]["solution"]["z"][0];
    *z = serde_json::json!(z.as_i64().unwrap() + 3);
    let bad = out.join("tampered.json");
    std::fs::write(&bad, serde_json::to_vec(&doc).unwrap()).unwrap();
    let ver2 = dir.path().join("ver2");
    assert_eq!(
        run(&["verify-cert", "--cert", bad.to_str().unwrap()], &ver2)
            .status
            .code(),
        Some(5)
    );
    assert!(!ver2.exists());
}

#[test]
fn local_certificates_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("local");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "instance": "cube-root-two", "prime_cutoff": 13, "integral_samples": 65536 }"#,
    )
    .unwrap();
    let r = run(&["local", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("local.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["positive"], true);
    let ver = dir.path().join("ver");
    let r = run(
        &["verify-cert", "--cert", out.join("local.json").to_str().unwrap()],
        &ver,
    );
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn local_insolubility_is_reported_with_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("local");
    let r = run(&["local", "--instance", "vanishing-series"], &out);
    assert_eq!(r.status.code(), Some(4));
    assert_eq!(column(&out.join("local.csv"), "status")[0], "not_found");
    assert!(out.join("local.json").exists());
}

#[test]
fn off_surface_centre_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("q.json"),
        r#"{ "degree": 1, "min_poly": [0, 1], "signature": [1, 0] }"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("qi.json"),
        r#"{ "degree": 2, "rel_min_poly": [["1"], ["0"], ["1"]] }"#,
    )
    .unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "field": "q.json", "extension": "qi.json", "a": [1], "b": [1],
             "targets": [0.3, 0.8, 0, 0, 1], "eta": 0.5 }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = run(&["wapprox", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(4));
    assert!(out.join("infeasible.json").exists());
}

#[test]
fn arcs_table_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("arcs");
    let r = run(&["arcs", "--p", "64,128", "--jobs", "1"], &out);
    assert_eq!(r.status.code(), Some(0));
    let lines = data_lines(&out.join("arcs.csv"));
    assert_eq!(lines[0], "P,theta,alpha_coords,label,gamma,denom_norm,abs_S3");
    assert_eq!(lines.len(), 1 + 2 * 1000);
    let maxima = std::fs::read_to_string(out.join("arcs_maxima.csv")).unwrap();
    assert!(maxima.contains("# fitted exponent: "));
}

#[test]
fn help_and_usage_errors() {
    let r = bin().arg("--help").output().unwrap();
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8_lossy(&r.stdout);
    for flag in [
        "--config",
        "--jobs",
        "--seed",
        "--budget-points",
        "--out",
        "NORMCIRCLE_JOBS",
    ] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
}
