use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use unopt_cli::output::read_csv;
use unopt_core::circuit::from_qasm;
use unopt_core::zne::spearman;

const BELL: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nu3(pi/2,0,pi) q[0];\ncx q[0],q[1];\nmeasure q -> c;\n";

fn unopt(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unopt")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

#[test]
fn bell_circuit_with_zero_iterations_is_unchanged() {
    let tmp = TempDir::new().unwrap();
    write(&tmp, "bell.qasm", BELL);
    let o = unopt(&["unoptimize", "bell.qasm", "--iterations", "0", "--seed", "1", "--out", "u"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    let report = json(tmp.path().join("u/report.json"));
    assert_eq!(report["lambda"].as_f64(), Some(1.0));
    assert_eq!(report["seed"], 1);
    assert_eq!(json(tmp.path().join("u/manifest.json"))["complete"], true);
    let o = unopt(&["verify", "bell.qasm", "u/unoptimized.qasm"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn unoptimized_circuit_verifies_against_its_input() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&unopt(&["qv-gen", "--qubits", "4", "--seed", "8", "--out", "qv.qasm"], tmp.path())), 0);
    let before = fs::read(tmp.path().join("qv.qasm")).unwrap();
    for strategy in ["random", "concatenated"] {
        let out = format!("u-{strategy}");
        let o = unopt(&["unoptimize", "qv.qasm", "--iterations", "3", "--strategy", strategy, "--seed", "2", "--out", &out], tmp.path());
        assert_eq!(code(&o), 0, "{o:?}");
        let report = json(tmp.path().join(&out).join("report.json"));
        assert!(report["lambda"].as_f64().unwrap() >= 1.0);
        assert_eq!(report["provenance"]["steps"].as_array().unwrap().len(), 3);
        let text = fs::read_to_string(tmp.path().join(&out).join("unoptimized.qasm")).unwrap();
        assert!(text.contains(&format!("config_sha256={}", report["config_sha256"].as_str().unwrap())));
        let o = unopt(&["verify", "qv.qasm", &format!("{out}/unoptimized.qasm")], tmp.path());
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }
    assert_eq!(fs::read(tmp.path().join("qv.qasm")).unwrap(), before);
}

#[test]
fn unoptimize_errors_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    write(&tmp, "bad.qasm", "OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1]\n");
    write(&tmp, "bell.qasm", BELL);
    let o = unopt(&["unoptimize", "bad.qasm", "--seed", "1", "--out", "x"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    let o = unopt(&["unoptimize", "bell.qasm", "--iterations", "1", "--seed", "1", "--out", "y"], tmp.path());
    assert_eq!(code(&o), 2);
    let manifest = json(tmp.path().join("y/manifest.json"));
    assert_eq!(manifest["complete"], false);
    assert!(manifest["error"].as_str().unwrap().contains("CX"));
    assert_eq!(code(&unopt(&["unoptimize", "missing.qasm", "--seed", "1", "--out", "z"], tmp.path())), 1);
    assert_eq!(code(&unopt(&["unoptimize", "bell.qasm", "--out", "z"], tmp.path())), 1, "seed is mandatory");
    assert_eq!(code(&unopt(&["unoptimize", "bell.qasm", "--seed", "1", "--strategy", "greedy", "--out", "z"], tmp.path())), 1);
}

#[test]
fn unoptimize_refuses_to_overwrite_its_input() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("u")).unwrap();
    write(&tmp, "u/unoptimized.qasm", BELL);
    let o = unopt(&["unoptimize", "u/unoptimized.qasm", "--iterations", "0", "--seed", "1", "--out", "u"], tmp.path());
    assert_eq!(code(&o), 1);
    assert_eq!(fs::read_to_string(tmp.path().join("u/unoptimized.qasm")).unwrap(), BELL);
}

#[test]
fn verify_verdicts() {
    let tmp = TempDir::new().unwrap();
    write(&tmp, "bell.qasm", BELL);
    let o = unopt(&["verify", "bell.qasm", "bell.qasm"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("distance 0.0000000000000000e0\nPASS"));
    write(&tmp, "bell_x.qasm", &BELL.replace("measure", "u3(pi,0,pi) q[1];\nmeasure"));
    let o = unopt(&["verify", "bell.qasm", "bell_x.qasm"], tmp.path());
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("FAIL"));
    write(&tmp, "wide.qasm", "OPENQASM 2.0;\nqreg q[11];\nu3(0.1,0,0) q[10];\n");
    assert_eq!(code(&unopt(&["verify", "wide.qasm", "wide.qasm"], tmp.path())), 2);
}

#[test]
fn generators_are_deterministic_and_parse() {
    let tmp = TempDir::new().unwrap();
    let a = unopt(&["qv-gen", "--qubits", "5", "--seed", "3"], tmp.path());
    let b = unopt(&["qv-gen", "--qubits", "5", "--seed", "3"], tmp.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = from_qasm(&stdout(&a)).unwrap();
    assert_eq!(c.n_qubits, 5);
    assert!(c.measured);
    assert_eq!(code(&unopt(&["qv-gen", "--qubits", "1", "--seed", "3"], tmp.path())), 1);

    let o = unopt(&["qaoa-gen"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("edges=0-4 0-6 0-11 1-2"));
    assert_eq!(from_qasm(&text).unwrap().n_qubits, 12);
    let o = unopt(&["qaoa-gen", "--vertices", "6", "--seed", "1", "--gammas", "0.3", "--betas", "-0.2"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(code(&unopt(&["qaoa-gen", "--vertices", "5"], tmp.path())), 1);
    assert_eq!(code(&unopt(&["qaoa-gen", "--gammas", "0.1"], tmp.path())), 1);
}

const QV_CONFIG: &str = r#"{
  "schema_version": 1,
  "workload": {"kind": "qv", "n_qubits": 6},
  "seed": 21,
  "iterations": 10,
  "variants": 3,
  "shots": 20000,
  "fits": ["quadratic"],
  "output_dir": "zne-out"
}"#;

#[test]
fn zne_writes_complete_reproducible_results() {
    let tmp = TempDir::new().unwrap();
    write(&tmp, "qv.json", QV_CONFIG);
    let o = unopt(&["zne", "--config", "qv.json"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    let out = tmp.path().join("zne-out");
    for f in ["circuit.qasm", "dataset.csv", "fits.json", "plot_quadratic.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = json(out.join("manifest.json"));
    assert_eq!(manifest["complete"], true);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 4);
    let fits = json(out.join("fits.json"));
    assert_eq!(fits["seed"], 21);
    let q = &fits["fits"][0];
    assert_eq!(q["kind"], "quadratic");
    let per: Vec<f64> = q["variants"].as_array().unwrap().iter().map(|v| v["zero_noise_value"].as_f64().unwrap()).collect();
    assert_eq!(per.len(), 3);
    let mean = q["mean_zero_noise"].as_f64().unwrap();
    assert!((mean - per.iter().sum::<f64>() / 3.0).abs() < 1e-15);
    assert!(fits["ideal_value"].as_f64().unwrap() > 0.5);

    let (header, rows) = read_csv(&out.join("dataset.csv")).unwrap();
    assert_eq!(header, ["variant", "iteration", "lambda", "value", "variance"]);
    assert_eq!(rows.len(), 3 * 11);
    assert!(rows.iter().filter(|r| r[1] == "0").all(|r| r[2] == "1.0000000000000000e0"));
    let hash = fits["config_sha256"].as_str().unwrap();
    for f in ["circuit.qasm", "dataset.csv", "plot_quadratic.svg", "manifest.json"] {
        assert!(fs::read_to_string(out.join(f)).unwrap().contains(hash), "{f} lacks the config hash");
    }

    let o = unopt(&["zne", "--config", "qv.json", "--out", "again", "--threads", "2"], tmp.path());
    assert_eq!(code(&o), 0);
    for f in ["circuit.qasm", "dataset.csv", "fits.json", "plot_quadratic.svg", "manifest.json"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(tmp.path().join("again").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zne_overrides_and_failures() {
    let tmp = TempDir::new().unwrap();
    write(&tmp, "qv.json", QV_CONFIG);
    let o = unopt(
        &["zne", "--config", "qv.json", "--out", "o", "--seed", "4", "--strategy", "concatenated", "--iterations", "3", "--variants", "1", "--fit", "linear,quadratic"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{o:?}");
    let fits = json(tmp.path().join("o/fits.json"));
    assert_eq!(fits["seed"], 4);
    assert_eq!(fits["strategy"], "concatenated");
    assert_eq!(fits["fits"].as_array().unwrap().len(), 2);
    assert!(tmp.path().join("o/plot_linear.svg").exists());

    // one iteration cannot support a quadratic fit: data is flushed, manifest stays incomplete
    let o = unopt(&["zne", "--config", "qv.json", "--out", "p", "--iterations", "1"], tmp.path());
    assert_eq!(code(&o), 2);
    let manifest = json(tmp.path().join("p/manifest.json"));
    assert_eq!(manifest["complete"], false);
    assert!(manifest["error"].is_string());
    assert_eq!(read_csv(&tmp.path().join("p/dataset.csv")).unwrap().1.len(), 3 * 2);

    assert_eq!(code(&unopt(&["zne", "--config", "missing.json"], tmp.path())), 1);
    write(&tmp, "v2.json", &QV_CONFIG.replace("\"schema_version\": 1", "\"schema_version\": 2"));
    assert_eq!(code(&unopt(&["zne", "--config", "v2.json"], tmp.path())), 1);
    write(&tmp, "noseed.json", &QV_CONFIG.replace("\"seed\": 21,", ""));
    assert_eq!(code(&unopt(&["zne", "--config", "noseed.json"], tmp.path())), 1);
    assert_eq!(code(&unopt(&["zne", "--config", "qv.json", "--fit", "cubic"], tmp.path())), 1);
}

#[test]
fn qaoa_cut_decreases_with_noise_scale() {
    let tmp = TempDir::new().unwrap();
    write(
        &tmp,
        "qaoa.json",
        r#"{"schema_version": 1, "workload": {"kind": "qaoa"}, "seed": 5, "strategy": "concatenated",
            "iterations": 8, "shots": 20000, "fits": ["quadratic"], "output_dir": "q"}"#,
    );
    let o = unopt(&["zne", "--config", "qaoa.json"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    let (_, rows) = read_csv(&tmp.path().join("q/dataset.csv")).unwrap();
    let lambda: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let value: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(spearman(&lambda, &value).unwrap() < -0.8);
    let fits = json(tmp.path().join("q/fits.json"));
    assert_eq!(fits["observable"], "cut");
    let ideal = fits["ideal_value"].as_f64().unwrap();
    assert!((ideal - 13.317925376995476).abs() < 1e-9);
}

#[test]
fn benchmark_reports_every_cell() {
    let tmp = TempDir::new().unwrap();
    write(
        &tmp,
        "b.json",
        r#"{"schema_version": 1, "workload": {"kind": "qv", "n_qubits": 4}, "seed": 2, "iterations": 4,
            "variants": 2, "shots": 20000, "circuits": 1, "output_dir": "b"}"#,
    );
    let o = unopt(&["benchmark", "--config", "b.json"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    let summary = json(tmp.path().join("b/summary.json"));
    assert_eq!(summary["circuits"], 1);
    assert_eq!(summary["cells"].as_array().unwrap().len(), 8);
    assert_eq!(summary["comparisons"].as_array().unwrap().len(), 3);
    let (header, rows) = read_csv(&tmp.path().join("b/benchmark.csv")).unwrap();
    assert_eq!(header, ["circuit", "strategy", "fit", "mode", "estimate", "ideal", "unmitigated"]);
    assert_eq!(rows.len(), 8);
    assert_eq!(json(tmp.path().join("b/manifest.json"))["complete"], true);
}

#[test]
fn noiseless_benchmark_errors_are_sampling_sized() {
    let tmp = TempDir::new().unwrap();
    write(
        &tmp,
        "b.json",
        r#"{"schema_version": 1, "workload": {"kind": "qv", "n_qubits": 4}, "seed": 3, "iterations": 4,
            "variants": 2, "shots": 50000, "circuits": 3, "noise": {"p1": 0, "p2": 0},
            "strategy": "random", "output_dir": "b"}"#,
    );
    let o = unopt(&["benchmark", "--config", "b.json"], tmp.path());
    assert_eq!(code(&o), 0, "{o:?}");
    let summary = json(tmp.path().join("b/summary.json"));
    let sigma = (0.25f64 / 50_000.0).sqrt();
    assert!(summary["unmitigated_rmse"].as_f64().unwrap() < 5.0 * sigma);
    let cells = summary["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    for c in cells {
        // extrapolation to λ = 0 amplifies shot noise, but there is no bias to remove
        assert!(c["rmse"].as_f64().unwrap() < 0.05, "{c}");
    }
}

#[test]
fn clap_usage_errors_are_input_errors() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&unopt(&["frobnicate"], tmp.path())), 1);
    assert_eq!(code(&unopt(&["verify", "only-one.qasm"], tmp.path())), 1);
    assert_eq!(code(&unopt(&["--help"], tmp.path())), 0);
}
