//! The thirteen acceptance criteria on the shipped default configuration,
//! one PASS/FAIL line each, followed by a byte comparison of two `verify`
//! runs of the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use thermogas_cli::config;
use thermogas_cli::verify::{run_suite, SuiteConfig};

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn in_process() -> bool {
    let cfg = config::load(&default_config()).expect("default config");
    let mut suite = SuiteConfig::new(cfg.params().expect("params"), cfg.seed.unwrap_or(0));
    if let Some(fp) = &cfg.fixedpoint {
        suite.picard_c = fp.c;
        suite.picard_m = fp.m;
        suite.picard_tol = fp.tol;
        suite.picard_max_iter = fp.max_iter;
    }
    let report = run_suite(&suite);
    for line in report.lines() {
        println!("{line}");
    }
    report.outcomes.len() == 13 && report.passed()
}

fn verify_run(out: &Path) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_thermogas"))
        .args(["verify", "--seed", "5", "--config"])
        .arg(default_config())
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    let passes = stdout.lines().filter(|l| l.starts_with("PASS")).count();
    if output.status.code() == Some(0) && passes == 13 {
        Ok(())
    } else {
        Err(format!("exit {:?}, {passes} PASS lines\n{stdout}", output.status.code()))
    }
}

fn binary_reproducible() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    verify_run(&a)?;
    verify_run(&b)?;
    let mut names: Vec<_> = fs::read_dir(&a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    if !names.iter().any(|n| n == "verify.csv") {
        return Err("verify.csv missing".into());
    }
    for name in &names {
        if fs::read(a.join(name)).ok() != fs::read(b.join(name)).ok() {
            return Err(format!("{name:?} differs between runs"));
        }
    }
    println!("binary verify twice with --seed 5: {} files bit-identical", names.len());
    Ok(())
}

fn main() -> ExitCode {
    let mut ok = in_process();
    match binary_reproducible() {
        Ok(()) => {}
        Err(e) => {
            println!("FAIL binary reproducibility: {e}");
            ok = false;
        }
    }
    if ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failures above");
        ExitCode::FAILURE
    }
}
