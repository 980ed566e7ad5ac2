use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normrig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_file(cmd: &str, file: &str, extra: &[&str]) -> Output {
    let path = data(file);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_euclidean_triangle_is_isostatic() {
    let out = run_file("analyze", "triangle_l2.json", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["verdict"], "isostatic");
    assert_eq!(v["report"]["isostatic"], true);
    assert_eq!(v["config"]["tol"], 1e-9);
    assert_eq!(v["config"]["seed"], 0);
}

#[test]
fn analyze_l3_triangle_is_flexible() {
    let out = run_file("analyze", "triangle_l3.json", &["--json", "--strict"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["report"]["inf_rigid"], false);
    assert_eq!(v["report"]["flex_dim"], 3);
    assert_eq!(v["report"]["trivial_dim"], 2);
}

#[test]
fn loop_edge_is_a_validation_error() {
    let out = run_file("analyze", "loop.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("loop"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = std::env::temp_dir().join("normrig-cli-malformed");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.json");
    std::fs::write(&file, "{\n  \"space\": [,\n}").unwrap();
    let out = run(&["analyze", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn bad_tolerance_is_rejected() {
    let out = run_file("analyze", "triangle_l2.json", &["--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_exports_matrix() {
    let dir = std::env::temp_dir().join("normrig-cli-matrix");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("r.csv");
    let out = run_file(
        "analyze",
        "k4_l3.json",
        &["--matrix-out", csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("edge,a[0],a[1],"));
}

#[test]
fn trace_square_writes_path() {
    let dir = std::env::temp_dir().join("normrig-cli-trace");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("path.json");
    let out = run_file(
        "trace",
        "square_l2.json",
        &["--steps", "40", "--out", file.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["configs"].as_array().unwrap().len(), 41);
    assert_eq!(v["params"].as_array().unwrap().len(), 41);
    assert!(v["max_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn trace_exit_codes() {
    assert_eq!(
        run_file("trace", "triangle_l2.json", &[]).status.code(),
        Some(4)
    );
    assert_eq!(
        run_file("trace", "triangle_l3.json", &["--steps", "30"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run_file("trace", "triangle_l3.json", &["--direction-index", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lie_dimensions() {
    for (file, lin, iso) in [
        ("l2_d3.json", 3, 6),
        ("l3_d2.json", 0, 2),
        ("diamond.json", 0, 2),
    ] {
        let out = run_file("lie", file, &["--json"]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        let v = json_of(&out);
        assert_eq!(v["dims"]["lin_dim"], lin, "{file}");
        assert_eq!(v["dims"]["iso_dim"], iso, "{file}");
        assert_eq!(v["basis"].as_array().unwrap().len(), lin);
    }
    let out = run_file("lie", "k4_l3.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("iso_dim   2"));
}

#[test]
fn probe_reports_orbit_counts() {
    let v = json_of(&run_file(
        "probe",
        "k4_l3.json",
        &["--json", "--restarts", "10"],
    ));
    assert_eq!(v["probe"]["off_orbit"], 0);
    let v = json_of(&run_file(
        "probe",
        "square_l2.json",
        &["--json", "--restarts", "10"],
    ));
    assert!(v["probe"]["off_orbit"].as_u64().unwrap() > 0);
}

#[test]
fn audit_lists_every_record() {
    let out = run_file("audit", "k4_l3.json", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = json_of(&out)["audits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap().to_owned())
        .collect();
    for name in [
        "affine_span_bound",
        "independent_edge_count",
        "subgraph_edge_bound",
        "small_framework",
    ] {
        assert!(names.iter().any(|n| n == name), "{name}");
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    for (cmd, file) in [
        ("analyze", "k4_l3.json"),
        ("lie", "l3_d2.json"),
        ("probe", "triangle_l3.json"),
    ] {
        let a = run_file(cmd, file, &["--json", "--seed", "7"]);
        let b = run_file(cmd, file, &["--json", "--seed", "7"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn strict_mode_rejects_unknown_fields() {
    let dir = std::env::temp_dir().join("normrig-cli-strict");
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(data("triangle_l2.json")).unwrap();
    let file = dir.join("extra.json");
    std::fs::write(&file, text.replacen('{', "{\"comment\": \"x\",", 1)).unwrap();
    let path = file.to_str().unwrap();
    assert_eq!(run(&["analyze", path]).status.code(), Some(0));
    assert_eq!(run(&["analyze", path, "--strict"]).status.code(), Some(2));
}
