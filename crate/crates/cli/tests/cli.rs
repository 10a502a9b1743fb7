use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use thermogas::lp::phi;
use thermogas::random::random_field;
use thermogas::{snapshot, Grid, RealField};
use thermogas_cli::config;

fn base() -> Value {
    json!({
        "grid": { "dim": 1, "n": 32, "length": 2.0 * PI },
        "params": {
            "kappa1": 1.2,
            "kappa2": 0.8,
            "kappa3_bar": 0.6,
            "kappa3_profile": { "kind": "tanh", "alpha": 0.3 }
        },
        "initial": { "preset": "zero" },
        "time": { "t_final": 0.2, "dt": 0.01, "scheme": "etdrk2", "stride": 5 }
    })
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn thermogas(task: &str, cfg: &Value, out: &Path, extra: &[&str]) -> Run {
    fs::create_dir_all(out).unwrap();
    let path = out.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_thermogas"))
        .arg(task)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn csv_rows(path: PathBuf) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn zero_preset_gives_zero_norms() {
    let dir = tempfile::tempdir().unwrap();
    let run = thermogas("simulate", &base(), dir.path(), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("trajectory.csv"));
    let rows = csv_rows(dir.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 5);
    for r in &rows {
        // h2, besov and linf of both components
        assert!(r[1..7].iter().all(|&v| v == 0.0), "{r:?}");
        assert_eq!((r[8], r[9]), (1.0, 1.0));
    }
    assert!(dir.path().join("energy.csv").exists());
    assert!(dir.path().join("snapshots/a_00000.thg").exists());
    assert!(dir.path().join("snapshots/theta_00004.thg").exists());
}

#[test]
fn negative_kappa1_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["params"]["kappa1"] = json!(-1.0);
    let run = thermogas("simulate", &cfg, dir.path(), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("params.kappa1") && run.stderr.contains("positive"), "{}", run.stderr);
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn unknown_and_missing_keys_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["params"]["kappa4"] = json!(1.0);
    let run = thermogas("simulate", &cfg, dir.path(), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("kappa4"), "{}", run.stderr);

    let mut cfg = base();
    cfg["params"].as_object_mut().unwrap().remove("kappa2");
    let run = thermogas("simulate", &cfg, dir.path(), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("`params.kappa2`"), "{}", run.stderr);
}

#[test]
fn tagged_variants_reject_extra_keys() {
    let mut cfg = base();
    cfg["initial"] = json!({ "preset": "zero", "amplitude": 1.0 });
    let err = config::parse(&cfg.to_string()).unwrap_err();
    assert!(err.key.starts_with("initial"), "{err}");

    let mut cfg = base();
    cfg["params"]["kappa3_profile"] = json!({ "kind": "tanh", "alpha": 0.1, "beta": 2.0 });
    let err = config::parse(&cfg.to_string()).unwrap_err();
    assert!(err.key.contains("kappa3_profile"), "{err}");
    assert!(err.message.contains("beta"));

    let mut cfg = base();
    cfg["params"]["kappa3_profile"] = json!({ "kind": "cubic" });
    assert!(config::parse(&cfg.to_string()).is_err());
}

#[test]
fn preconditions_surface_before_compute() {
    let cases: Vec<(&str, Box<dyn Fn(&mut Value)>, &str)> = vec![
        ("simulate", Box::new(|c| c["grid"]["n"] = json!(48)), "grid.n"),
        ("simulate", Box::new(|c| c["time"]["dt"] = json!(0.03)), "time.dt"),
        ("simulate", Box::new(|c| c["time"]["stride"] = json!(3)), "time.stride"),
        ("simulate", Box::new(|c| c["params"]["eps_a"] = json!(1.5)), "params.eps_a"),
        (
            "simulate",
            Box::new(|c| c["params"]["kappa3_profile"] = json!({ "kind": "tanh", "alpha": -1.0 })),
            "params.kappa3_profile.alpha",
        ),
        (
            "simulate",
            Box::new(|c| c["initial"] = json!({ "preset": "single_mode", "k": [1, 2], "amplitude": 0.1, "component": "first" })),
            "initial.k",
        ),
        (
            "simulate",
            Box::new(|c| c["initial"] = json!({ "preset": "single_mode", "k": [1], "amplitude": 2.0, "component": "first" })),
            "initial",
        ),
        ("scaling", Box::new(|c| c["scaling"] = json!({ "lambda": 1 })), "scaling.lambda"),
        ("scaling", Box::new(|_| {}), "scaling"),
        ("besov", Box::new(|c| c["besov"] = json!({ "s": 1.0, "p": 0.5, "r": 1 })), "besov"),
        (
            "fixedpoint",
            Box::new(|c| c["fixedpoint"] = json!({ "tol": 0.0 })),
            "fixedpoint.tol",
        ),
    ];
    for (task, edit, key) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = base();
        edit(&mut cfg);
        let run = thermogas(task, &cfg, dir.path(), &[]);
        assert_eq!(run.code, 2, "{task} {key}: {}", run.stderr);
        assert!(run.stderr.contains(&format!("`{key}")), "{key}: {}", run.stderr);
    }
}

#[test]
fn file_preset_round_trips_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let a = random_field(&grid, 5, 4, 0.05);
    let t = random_field(&grid, 6, 4, 0.05);
    snapshot::save(&a, 0.0, &dir.path().join("a.thg")).unwrap();
    snapshot::save(&t, 0.0, &dir.path().join("t.thg")).unwrap();
    let mut cfg = base();
    cfg["initial"] = json!({ "preset": "file", "first": dir.path().join("a.thg"), "second": dir.path().join("t.thg") });
    let out = dir.path().join("run");
    let run = thermogas("simulate", &cfg, &out, &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (a0, time) = snapshot::load(&out.join("snapshots/a_00000.thg")).unwrap();
    assert_eq!(time, 0.0);
    // the stored state went through a forward and inverse transform
    for (x, y) in a0.values().iter().zip(a.values()) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn damaged_snapshots_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let bytes = snapshot::encode(&RealField::zeros(&grid), 0.0);
    fs::write(dir.path().join("short.thg"), &bytes[..bytes.len() - 8]).unwrap();
    let mut bad = bytes.clone();
    bad[..8].copy_from_slice(b"NOTSNAP!");
    fs::write(dir.path().join("magic.thg"), &bad).unwrap();
    fs::write(dir.path().join("ok.thg"), &bytes).unwrap();

    let mut cfg = base();
    cfg["initial"] = json!({ "preset": "file", "first": dir.path().join("short.thg"), "second": dir.path().join("ok.thg") });
    let run = thermogas("simulate", &cfg, &dir.path().join("a"), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("initial.first") && run.stderr.contains("size"), "{}", run.stderr);

    cfg["initial"] = json!({ "preset": "file", "first": dir.path().join("ok.thg"), "second": dir.path().join("magic.thg") });
    let run = thermogas("simulate", &cfg, &dir.path().join("b"), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("initial.second") && run.stderr.contains("THGSNAP1"), "{}", run.stderr);
}

#[test]
fn breach_exits_with_one_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let theta = RealField::from_fn(&grid, |x| -0.95 * (4.0 * x[0]).cos().powi(8));
    let rho = RealField::from_fn(&grid, |x| 0.9 * (3.0 * x[0]).sin());
    snapshot::save(&rho, 0.0, &dir.path().join("rho.thg")).unwrap();
    snapshot::save(&theta, 0.0, &dir.path().join("theta.thg")).unwrap();
    let mut cfg = base();
    cfg["initial"] = json!({ "preset": "file", "first": dir.path().join("rho.thg"), "second": dir.path().join("theta.thg") });
    cfg["time"] = json!({ "t_final": 5.0, "dt": 0.5, "scheme": "etd1", "formulation": "primitive" });
    let out = dir.path().join("run");
    let run = thermogas("simulate", &cfg, &out, &[]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    assert!(run.stderr.contains("breach"));
    let rows = csv_rows(out.join("trajectory.csv"));
    assert!(!rows.is_empty() && rows.len() < 11);
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["grid"] = json!({ "dim": 2, "n": 16, "length": 2.0 * PI });
    cfg["initial"] = json!({ "preset": "random_band", "seed": 3, "band": 4, "amplitude": 0.05 });
    let read = |p: &Path| fs::read(p.join("trajectory.csv")).unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(thermogas("simulate", &cfg, &a, &["--seed", "11"]).code, 0);
    assert_eq!(thermogas("simulate", &cfg, &b, &["--seed", "11"]).code, 0);
    assert_eq!(thermogas("simulate", &cfg, &c, &["--seed", "12"]).code, 0);
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn besov_report_of_a_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["initial"] = json!({ "preset": "single_mode", "k": [1], "amplitude": 1.0, "component": "first" });
    cfg["besov"] = json!({ "s": 1.5, "p": 2, "r": 1 });
    let run = thermogas("besov", &cfg, dir.path(), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let text = fs::read_to_string(dir.path().join("besov.csv")).unwrap();
    assert!(text.starts_with("j,weighted,cumulative\n"));
    let rows = csv_rows(dir.path().join("besov.csv"));
    let total = rows.last().unwrap()[2];
    let expect = PI.sqrt() * (phi(1.0) + 1.5f64.exp2() * phi(0.5));
    assert!((total - expect).abs() < 1e-13, "{total} vs {expect}");
    for r in &rows {
        if r[0] != 0.0 && r[0] != 1.0 {
            assert!(r[1] < 1e-13, "{r:?}");
        }
    }
}

#[test]
fn fixedpoint_and_scaling_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["grid"] = json!({ "dim": 2, "n": 16, "length": 2.0 * PI });
    cfg["initial"] = json!({ "preset": "random_band", "seed": 1, "band": 2, "amplitude": 1e-4 });
    cfg["time"] = json!({ "t_final": 0.1, "dt": 0.01, "scheme": "etd1" });
    cfg["fixedpoint"] = json!({});
    let run = thermogas("fixedpoint", &cfg, &dir.path().join("fp"), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let summary = fs::read_to_string(dir.path().join("fp/summary.txt")).unwrap();
    assert!(summary.starts_with("status=converged") && summary.contains("smallness=satisfied"), "{summary}");
    let head = fs::read_to_string(dir.path().join("fp/fixedpoint.csv")).unwrap();
    assert!(head.starts_with("iteration,e_norm,difference,ratio\n"));

    cfg["scaling"] = json!({ "lambda": 2 });
    cfg["time"]["scheme"] = json!("etdrk2");
    cfg["grid"]["n"] = json!(32);
    let run = thermogas("scaling", &cfg, &dir.path().join("sc"), &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(dir.path().join("sc/scaling.csv"));
    assert_eq!(rows[0][0], 2.0);
    assert!(rows[0][1] <= 1e-6, "{rows:?}");

    // band 6 scaled by 2 leaves the resolved band of n = 32
    cfg["initial"]["band"] = json!(6);
    let run = thermogas("scaling", &cfg, &dir.path().join("sc2"), &[]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("scaling.lambda"));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, base().to_string()).unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_thermogas"))
        .env("THERMOGAS_THREADS", "zero")
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("THERMOGAS_THREADS"));

    let output = Command::new(env!("CARGO_BIN_EXE_thermogas"))
        .env("THERMOGAS_THREADS", "2")
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&output.stdout).contains("trajectory.csv"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.grid().unwrap();
        cfg.params().unwrap();
        seen += 1;
    }
    assert!(seen >= 1);
}
