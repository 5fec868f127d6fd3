//! End-to-end runs of the compiled binary against the bundled graphs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_graphheat")
}

fn graphs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn heat_content_matches_the_interval_series() {
    let g = graphs().join("interval3.json");
    let out = run(&["heat-content", "-g", g.to_str().unwrap(), "-t", "0.1", "--tol", "1e-12"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("value "))
        .unwrap()
        .parse()
        .unwrap();
    // frozen from the eigenvalue series for ℓ = 3, one Dirichlet end
    assert!((value - 2.643_175_176_769_446).abs() < 1e-10);
    assert!(text.contains("method path_sum"));
}

#[test]
fn sweep_is_deterministic_and_decreasing() {
    let g = graphs().join("interval3.json");
    let dir = std::env::temp_dir();
    let out1 = dir.join("graphheat_sweep_1.csv");
    let out2 = dir.join("graphheat_sweep_2.csv");
    for out in [&out1, &out2] {
        let r = run(&[
            "sweep",
            "-g",
            g.to_str().unwrap(),
            "--t-min",
            "0.01",
            "--t-max",
            "1",
            "--steps",
            "9",
            "--log",
            "-o",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        assert!(r.status.success());
    }
    let text = std::fs::read_to_string(&out1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&out2).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,value,error_bound,method");
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 9);
    assert!(values.windows(2).all(|w| w[1] < w[0]));
    // the profile decreases from about the total length
    assert!((values[0] - 3.0).abs() < 0.2);
}

#[test]
fn verify_all_bundled_graphs() {
    for name in ["interval3", "star5", "lasso", "pumpkin", "figure_eight"] {
        let g = graphs().join(format!("{name}.json"));
        let r = run(&["verify", "-g", g.to_str().unwrap(), "--suite", "all"]);
        assert!(
            r.status.success(),
            "{name}: {}{}",
            stdout(&r),
            String::from_utf8_lossy(&r.stderr)
        );
        assert!(!stdout(&r).contains("FAIL"));
    }
}

#[test]
fn budget_exceeded_exits_3() {
    // 30 edges exceed the aggregation width, and the path-sum method is
    // not allowed to fall back
    let mut vertices = vec![serde_json::json!({"id": 0, "kind": "standard"})];
    let mut edges = Vec::new();
    for i in 0..30 {
        vertices.push(serde_json::json!({
            "id": i + 1,
            "kind": if i == 0 { "dirichlet" } else { "standard" }
        }));
        edges.push(serde_json::json!({"id": i, "u": 0, "v": i + 1, "length": 1.0}));
    }
    let doc = serde_json::json!({"vertices": vertices, "edges": edges});
    let path = std::env::temp_dir().join("graphheat_wide.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let r = run(&[
        "heat-content",
        "-g",
        path.to_str().unwrap(),
        "-t",
        "0.5",
        "--method",
        "path-sum",
    ]);
    assert_eq!(r.status.code(), Some(3));
    // auto mode falls back to the spectral solver instead
    let r = run(&["heat-content", "-g", path.to_str().unwrap(), "-t", "0.5", "--method", "auto"]);
    assert!(r.status.success());
    assert!(stdout(&r).contains("method spectral"));
}

#[test]
fn surgery_loop_cut_preserves_heat_content() {
    let lasso = graphs().join("lasso.json");
    let cut = std::env::temp_dir().join("graphheat_cut.json");
    let r = run(&[
        "surgery",
        "-g",
        lasso.to_str().unwrap(),
        "--op",
        "loop-cut",
        "--edge",
        "1",
        "-o",
        cut.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let value = |path: &Path| -> f64 {
        let out = run(&["heat-content", "-g", path.to_str().unwrap(), "-t", "0.5", "--tol", "1e-11"]);
        assert!(out.status.success());
        stdout(&out)
            .lines()
            .find_map(|l| l.strip_prefix("value "))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value(&lasso) - value(&cut)).abs() < 1e-9);
}

#[test]
fn invalid_graph_exits_2_and_verify_passes() {
    let bad = std::env::temp_dir().join("graphheat_bad.json");
    std::fs::write(
        &bad,
        r#"{"vertices":[{"id":0,"kind":"standard"},{"id":1,"kind":"standard"}],
            "edges":[{"id":0,"u":0,"v":1,"length":1.0}]}"#,
    )
    .unwrap();
    let r = run(&["heat-content", "-g", bad.to_str().unwrap(), "-t", "0.1"]);
    assert_eq!(r.status.code(), Some(2));

    let lasso = graphs().join("lasso.json");
    let r = run(&["verify", "-g", lasso.to_str().unwrap(), "--suite", "identities"]);
    assert!(r.status.success());
    assert!(stdout(&r).lines().filter(|l| l.starts_with("PASS")).count() >= 5);
}

#[test]
fn kernel_flux_and_derivative_commands() {
    let star = graphs().join("star3_long.json");
    let r = run(&[
        "flux",
        "-g",
        star.to_str().unwrap(),
        "--region",
        "1:1.0:2.0",
        "-t",
        "0.001",
        "--tol",
        "1e-12",
    ]);
    assert!(r.status.success());
    let scaled: f64 = stdout(&r)
        .lines()
        .find_map(|l| l.strip_prefix("scaled "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((scaled - 2.0).abs() < 1e-3);

    let lasso = graphs().join("lasso.json");
    let r = run(&["kernel", "-g", lasso.to_str().unwrap(), "--x", "0:0.4", "--y", "1:1.0", "-t", "0.2"]);
    assert!(r.status.success());
    let v: f64 = stdout(&r)
        .lines()
        .find_map(|l| l.strip_prefix("value "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(v > 0.0);

    let r = run(&["derivative", "-g", lasso.to_str().unwrap(), "--edge", "0", "-t", "0.001"]);
    assert!(r.status.success());
    let d: f64 = stdout(&r)
        .lines()
        .find_map(|l| l.strip_prefix("value "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((d - 1.0).abs() < 1e-6);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    // the lasso at t = 1 needs genuinely different truncation depths for
    // the two tolerances, so the certified bounds must differ
    let g = graphs().join("lasso.json");
    let cfg = std::env::temp_dir().join("graphheat_cfg.json");
    std::fs::write(&cfg, r#"{"tol": 1e-6, "method": "path-sum", "threads": 1}"#).unwrap();
    let loose = run(&[
        "heat-content",
        "-g",
        g.to_str().unwrap(),
        "-t",
        "1",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(loose.status.success());
    let err_loose: f64 = stdout(&loose)
        .lines()
        .find_map(|l| l.strip_prefix("error_bound "))
        .unwrap()
        .parse()
        .unwrap();
    let tight = run(&[
        "heat-content",
        "-g",
        g.to_str().unwrap(),
        "-t",
        "1",
        "--config",
        cfg.to_str().unwrap(),
        "--tol",
        "1e-12",
    ]);
    let err_tight: f64 = stdout(&tight)
        .lines()
        .find_map(|l| l.strip_prefix("error_bound "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err_tight < err_loose, "explicit flag must override the config file");
}
