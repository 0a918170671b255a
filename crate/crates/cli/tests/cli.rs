use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mirrornoise"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn scan_reproduces_half_transmittance_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&[
        "scan", "--port", "a1", "--T", "0.5", "--k", "6.283185307", "--z-min", "0", "--z-max", "1",
        "--steps", "101", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out);
    assert_eq!(table[0].join(","), "z,total,traveling,standing,sql,sub_sql");
    assert_eq!(table.len(), 102);
    let data: Vec<(f64, f64)> = table[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    let min = data.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max = data.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    assert!((min - 0.5).abs() < 1e-12);
    assert!((max - 1.5).abs() < 1e-12);
    for (z, v) in &data {
        if (v - 0.5).abs() < 1e-12 {
            assert!([0.0, 0.5, 1.0].iter().any(|n| (z - n).abs() < 1e-12), "minimum at z={z}");
        }
    }
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("node positions: [0.000000, 0.500000, 1.000000]"));
    assert!(summary.contains("sub-SQL: yes"));
}

#[test]
fn full_transmission_is_flat_and_never_sub_sql() {
    let o = run(&["scan", "--port", "a1", "--T", "1.0", "--steps", "21"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let totals: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(totals.iter().all(|t| *t == totals[0]));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["scan", "--port", "a2", "--T", "0.3", "--steps", "57", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let mc = ["mc-validate", "--n", "10000", "--seed", "9"];
    assert_eq!(run(&mc).stdout, run(&mc).stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["scan", "--T", "0.5"])), 2);
    assert_eq!(code(&run(&["scan", "--port", "a3"])), 2);
    assert_eq!(code(&run(&["scan", "--port", "a1", "--bogus", "1"])), 2);
    assert_eq!(code(&run(&["mc-validate", "--n", "100"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn config_errors_exit_3() {
    assert_eq!(code(&run(&["scan", "--port", "a1", "--T", "1.5"])), 3);
    assert_eq!(code(&run(&["scan", "--port", "a1", "--v_b2", "-1"])), 3);
    assert_eq!(code(&run(&["feedback", "--eta", "0"])), 3);
    assert_eq!(code(&run(&["feedback", "--gains", "0,-2"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"T": 0.5, "colour": 1}"#).unwrap();
    assert_eq!(code(&run(&["scan", "--port", "a1", "--config", bad.to_str().unwrap()])), 3);
}

#[test]
fn explicit_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"T": 0.2, "v_b2": 3.0}"#).unwrap();
    let path = cfg.to_str().unwrap();
    let file_only = String::from_utf8(run(&["scan", "--port", "a1", "--steps", "2", "--config", path]).stdout).unwrap();
    // sql = ½(3 + 0.8 + 0.2) = 2, node total = T·sql
    assert!(file_only.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,4.0000000000000002e-1,"));
    let both = String::from_utf8(run(&["scan", "--port", "a1", "--steps", "2", "--config", path, "--T", "0.5"]).stdout).unwrap();
    // sql = ½(3 + 0.5 + 0.5) = 2
    assert!(both.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
}

#[test]
fn fock_validate_defaults_pass_and_guard_truncation() {
    let o = run(&["fock-validate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["fock-validate", "--alpha", "5"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dim"));
    assert_eq!(code(&run(&["fock-validate", "--dim", "3", "--alpha", "1"])), 4);
}

#[test]
fn mc_validate_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("mc.csv");
    let o = run(&["mc-validate", "--n", "10000", "--scan-out", scan.to_str().unwrap(), "--scan-steps", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("T,kz,mc_variance,stderr,analytic,z_score,pass\n"));
    assert_eq!(table.lines().count(), 17);
    assert_eq!(rows(&scan)[0].join(","), "z,mc_variance,stderr,analytic");
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scan.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 42);
    assert_eq!(side["n_samples"], 10000);

    let o = run(&["mc-validate", "--n", "10000", "--decorrelate-phases"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("modulation flat"));
}

#[test]
fn feedback_sweep_reaches_sub_sql_at_node() {
    let o = run(&["feedback", "--gains", "0,1,10,1e6", "--alpha_re", "10", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["out_a2_variance"], rows[0]["open_loop_a2_variance"]);
    assert!(rows[3]["out_a2_variance"].as_f64().unwrap() < 0.1);
    assert_eq!(rows[3]["sub_sql_out"], true);
}

#[test]
fn photocurrent_scan_contrasts_open_port() {
    let o = run(&["scan-photocurrent", "--T", "0.5", "--alpha_re", "2", "--steps", "5"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // node: total = T × open
    assert!((first[1] - 0.5 * first[4]).abs() < 1e-12);
}

#[test]
fn report_aggregates_all_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["report", "--n", "10000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    for key in ["scan", "monte_carlo", "fock", "feedback"] {
        assert_eq!(v[key]["passed"], true, "{key}");
    }
}
