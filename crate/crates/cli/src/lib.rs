//! Configuration-driven front end for the thermogas toolkit.

pub mod config;
pub mod verify;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thermogas::diagnostics::{energy_report, scaling_test};
use thermogas::fixedpoint::{picard_iterate, PicardStatus};
use thermogas::integrator::simulate;
use thermogas::lp::{besov_blocks, DyadicFamily};
use thermogas::model::{Formulation, State};
use thermogas::Error;

use crate::config::{Component, ConfigError, RunConfig};
use crate::verify::{run_suite, SuiteConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Simulate,
    Fixedpoint,
    Besov,
    Scaling,
    Verify,
}

/// Why a task did not succeed; each kind has its own exit status.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    /// An invariant broke during the run. Outputs up to that point are
    /// still written.
    Breach(String),
    Verify {
        failed: usize,
    },
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Breach(_) | Failure::Runtime(_) => 1,
            Failure::Verify { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Breach(m) => write!(f, "invariant breach: {m}"),
            Failure::Verify { failed } => write!(f, "{failed} acceptance criteria failed"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// One invocation: task, configuration file, output directory and optional
/// seed override.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub task: Task,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

/// What a successful task printed.
pub type Report = Vec<String>;

pub fn execute(inv: &Invocation) -> Result<Report, Failure> {
    let config = config::load(&inv.config)?;
    match inv.task {
        Task::Simulate => run_simulate(&config, &inv.out, inv.seed),
        Task::Fixedpoint => run_fixedpoint(&config, &inv.out, inv.seed),
        Task::Besov => run_besov(&config, &inv.out, inv.seed),
        Task::Scaling => run_scaling(&config, &inv.out, inv.seed),
        Task::Verify => run_verify(&config, &inv.out, inv.seed),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn prepare_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| {
        Failure::Config(ConfigError {
            key: "--out".into(),
            message: format!("cannot create {}: {e}", out.display()),
        })
    })
}

pub fn run_simulate(config: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Report, Failure> {
    let grid = config.grid()?;
    let params = config.params()?;
    let spec = config.run_spec()?;
    let field_stride = config.time()?.field_stride.unwrap_or(1);
    let initial = config.initial_state(&grid, &params, seed)?;
    prepare_out(out)?;

    let traj = simulate(&initial, &params, &spec)?;
    let mut w = create(&out.join("trajectory.csv"))?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    let mut lines = vec![format!("wrote {} snapshots to trajectory.csv", traj.len())];
    if params.require_unit_equilibrium().is_ok() && traj.len() >= 3 {
        let report = energy_report(&traj)?;
        let mut w = create(&out.join("energy.csv"))?;
        report.write_csv(&mut w)?;
        w.flush()?;
        lines.push("wrote energy.csv".into());
    }
    let files = traj.write_snapshots(&out.join("snapshots"), field_stride)?;
    lines.push(format!("wrote {files} field snapshots"));
    if let Some(b) = traj.breach() {
        return Err(Failure::Breach(format!(
            "step {} (t = {}): {}",
            b.step, b.time, b.message
        )));
    }
    Ok(lines)
}

pub fn run_fixedpoint(
    config: &RunConfig,
    out: &Path,
    seed: Option<u64>,
) -> Result<Report, Failure> {
    let grid = config.grid()?;
    let params = config.params()?;
    let picard = config.picard()?;
    let State::AForm(initial) = config.initial_state(&grid, &params, seed)? else {
        unreachable!("picard() requires the a-form");
    };
    prepare_out(out)?;

    let (traj, report) = picard_iterate(&initial.a, &initial.theta, &params, &picard)?;
    let mut w = create(&out.join("fixedpoint.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("trajectory.csv"))?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    let summary = report.summary();
    fs::write(out.join("summary.txt"), format!("{summary}\n"))?;
    match &report.status {
        PicardStatus::Diverged => Err(Failure::Breach(format!(
            "Picard iteration diverged: {summary}"
        ))),
        PicardStatus::Failed(m) => Err(Failure::Breach(format!(
            "Picard iterate left the admissible set: {m}"
        ))),
        _ => Ok(vec![summary]),
    }
}

pub fn run_besov(config: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Report, Failure> {
    let grid = config.grid()?;
    let (spec, component) = config.besov()?;
    let fields = config.initial_fields(&grid, seed)?;
    prepare_out(out)?;

    let family = DyadicFamily::new(&grid);
    let selected: Vec<(&str, usize)> = match component {
        Component::First => vec![("besov.csv", 0)],
        Component::Second => vec![("besov.csv", 1)],
        Component::Both => vec![("besov_first.csv", 0), ("besov_second.csv", 1)],
    };
    let mut lines = Vec::new();
    for (name, c) in selected {
        let rows = besov_blocks(&family, &fields[c].forward(), spec)?;
        let mut w = create(&out.join(name))?;
        writeln!(w, "j,weighted,cumulative")?;
        for r in &rows {
            writeln!(w, "{},{:e},{:e}", r.j, r.weighted, r.cumulative)?;
        }
        w.flush()?;
        let norm = rows.last().map_or(0.0, |r| r.cumulative);
        lines.push(format!("{name}: norm {norm:e} over {} blocks", rows.len()));
    }
    Ok(lines)
}

pub fn run_scaling(config: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Report, Failure> {
    let grid = config.grid()?;
    let params = config.params()?;
    let spec = config.run_spec()?;
    let lambda = config.lambda()?;
    if spec.formulation != Formulation::AForm {
        return Err(ConfigError {
            key: "time.formulation".into(),
            message: "the scaling test runs in the a-form".into(),
        }
        .into());
    }
    let State::AForm(initial) = config.initial_state(&grid, &params, seed)? else {
        unreachable!("a-form checked above");
    };
    prepare_out(out)?;

    let report = scaling_test(
        &initial,
        &params,
        lambda,
        spec.t_final,
        spec.dt,
        spec.scheme,
    )
    .map_err(|e| match e {
        Error::Unresolved(m) => Failure::Config(ConfigError {
            key: "scaling.lambda".into(),
            message: m,
        }),
        Error::InvalidParameter {
            name: "initial",
            reason,
        } => Failure::Breach(reason),
        other => other.into(),
    })?;
    let mut w = create(&out.join("scaling.csv"))?;
    writeln!(w, "lambda,discrepancy,critical_ratio")?;
    writeln!(
        w,
        "{},{:e},{:e}",
        report.lambda, report.discrepancy, report.critical_ratio
    )?;
    w.flush()?;
    Ok(vec![format!(
        "lambda={} discrepancy={:e} critical_ratio={:e}",
        report.lambda, report.discrepancy, report.critical_ratio
    )])
}

pub fn run_verify(config: &RunConfig, out: &Path, seed: Option<u64>) -> Result<Report, Failure> {
    let params = config.params()?;
    params.require_unit_equilibrium().map_err(|e| ConfigError {
        key: "params.rho_bar".into(),
        message: format!("verify needs the unit equilibrium: {e}"),
    })?;
    let mut suite = SuiteConfig::new(params, seed.or(config.seed).unwrap_or(0));
    if let Some(fp) = &config.fixedpoint {
        let picard = config.picard()?;
        suite.picard_c = picard.c_radius;
        suite.picard_m = picard.m_const;
        suite.picard_tol = fp.tol;
        suite.picard_max_iter = fp.max_iter;
    }
    prepare_out(out)?;

    let report = run_suite(&suite);
    report.write_to(out)?;
    let lines = report.lines();
    if report.passed() {
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        Err(Failure::Verify {
            failed: report.failures(),
        })
    }
}
