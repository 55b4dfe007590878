//! End-to-end binary tests: exit codes, output formats, determinism, the
//! config/flag override rules, and the output-directory env override.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_swarm-escape"));
    // Keep the suite hermetic against an ambient override.
    c.env_remove("SWARM_ESCAPE_OUT_DIR");
    c
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).unwrap()
}

#[test]
fn bounds_defaults_print_the_reference_setup() {
    let out = bin().arg("bounds").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(v["t_0a"], 260);
    assert_eq!(v["t_e0"], 2008);
    assert!(v["log_p_e0"].as_f64().unwrap() < 0.0);
}

#[test]
fn bounds_degenerate_attractors_yield_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "degen.json", r#"{"pb": 4.0, "gb": 4.0}"#);
    let out = bin().args(["bounds", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert!(v["error"].as_str().unwrap().contains("degenerate"));
}

#[test]
fn bounds_below_unit_inertia_is_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "omega.json", r#"{"omega": 0.9}"#);
    let out = bin().args(["bounds", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert!(v["error"].as_str().unwrap().contains("bound not applicable"));
}

#[test]
fn kernel_check_defaults_stay_within_thresholds() {
    let out = bin().arg("kernel-check").output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<&str> = stdout(&out).lines().collect();
    assert_eq!(lines[0], "config_id,norm_error,ks_stat,corollary1_margin");
    assert_eq!(lines.len(), 21);
}

#[test]
fn kernel_check_rejects_an_invalid_inertia_weight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"omega": 1.5}"#);
    let out = bin().args(["kernel-check", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.json", r#"{"max_iter": 100}"#);
    let out = bin().args(["escape-curve", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chain_verify_is_green_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cv.json", r#"{"n_chains": 200, "seed": 9}"#);
    let a = bin().args(["chain-verify", "--config", &cfg]).output().unwrap();
    let b = bin().args(["chain-verify", "--config", &cfg]).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(stdout(&a)).unwrap();
    assert_eq!(v["total_infeasible"], 0);
    assert_eq!(v["legs"].as_array().unwrap().len(), 3);
}

#[test]
fn chain_verify_injected_faults_are_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cv.json", r#"{"n_chains": 150, "seed": 4}"#);
    let out =
        bin().args(["chain-verify", "--config", &cfg, "--inject-fault"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert!(v["total_infeasible"].as_u64().unwrap() > 0);
    for leg in v["legs"].as_array().unwrap() {
        assert!(leg["infeasible"].as_u64().unwrap() > 0, "leg {leg} undisturbed");
    }
}

#[test]
fn escape_curve_is_reproducible_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ec.json",
        r#"{"n_runs": 300, "max_iters": 200, "seed": 11}"#,
    );
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for (path, _) in [(&out_a, 0), (&out_b, 1)] {
        let out = bin()
            .args(["escape-curve", "--config", &cfg, "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(&out_a).unwrap();
    assert_eq!(a, fs::read(&out_b).unwrap());

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,prob,stderr"));
    let mut prev = -1.0;
    let mut rows = 0;
    for line in lines {
        let prob: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(prob >= prev, "curve decreased at {line}");
        prev = prob;
        rows += 1;
    }
    assert_eq!(rows, 201);
}

#[test]
fn seed_flag_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ec.json",
        r#"{"n_runs": 300, "max_iters": 200, "seed": 11}"#,
    );
    let base = dir.path().join("base.csv");
    let reseeded = dir.path().join("reseeded.csv");
    bin().args(["escape-curve", "--config", &cfg, "--out", base.to_str().unwrap()])
        .output()
        .unwrap();
    bin().args([
        "escape-curve",
        "--config",
        &cfg,
        "--seed",
        "12",
        "--out",
        reseeded.to_str().unwrap(),
    ])
    .output()
    .unwrap();
    assert_ne!(fs::read(&base).unwrap(), fs::read(&reseeded).unwrap());
}

#[test]
fn pe_table_sweeps_the_configured_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "pt.json",
        r#"{"omega": [0.9], "c": [2.4, 1.6], "ub": [20.0], "n_runs": 50, "iter_cap": 2000}"#,
    );
    let out = bin().args(["pe-table", "--config", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<&str> = stdout(&out).lines().collect();
    assert_eq!(lines[0], "omega,c,ub,pe_hat,stderr,n_runs,iter_cap");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.9,2.4,20,"));
    assert!(lines[1].ends_with(",50,2000"));
    assert!(lines[2].starts_with("0.9,1.6,20,"));
}

#[test]
fn distribution_writes_histogram_and_atom_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ds.json",
        r#"{"n_runs": 2000, "t_max": 8, "n_bins": 10, "seed": 5}"#,
    );
    let out_path = dir.path().join("fig8.csv");
    let out = bin()
        .args(["distribution", "--config", &cfg, "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let hist = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = hist.lines().collect();
    assert_eq!(lines[0], "t,bin_lo,bin_hi,mass");
    assert_eq!(lines.len(), 1 + 9 * 10);

    let atoms = fs::read_to_string(dir.path().join("fig8_atoms.csv")).unwrap();
    let alines: Vec<&str> = atoms.lines().collect();
    assert_eq!(alines[0], "t,atom_lb,atom_ub,goal_mass");
    assert_eq!(alines.len(), 10);
}

#[test]
fn distribution_requires_an_output_path() {
    let out = bin().arg("distribution").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_dir_env_redirects_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let redirected = dir.path().join("redirected");
    fs::create_dir(&redirected).unwrap();
    let cfg = write_config(dir.path(), "ec.json", r#"{"n_runs": 100, "max_iters": 50}"#);
    let out = bin()
        .args(["escape-curve", "--config", &cfg, "--out", "ignored-dir/curve.csv"])
        .env("SWARM_ESCAPE_OUT_DIR", &redirected)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(redirected.join("curve.csv").is_file());
}

#[test]
fn unwritable_output_exits_with_the_io_code() {
    let out = bin()
        .args(["escape-curve", "--out", "/nonexistent-dir/curve.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rastrigin_demo_emits_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("ras.csv");
    let out = bin()
        .args(["rastrigin-demo", "--seed", "3", "--out", trace.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert!(v["gbest_obj"].as_f64().unwrap().is_finite());
    assert_eq!(v["gbest"].as_array().unwrap().len(), 2);

    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,gbest_obj");
    assert_eq!(lines.len(), 202);
    // The gbest objective trace never worsens.
    let objs: Vec<f64> =
        lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(objs.windows(2).all(|w| w[1] <= w[0]));
}
