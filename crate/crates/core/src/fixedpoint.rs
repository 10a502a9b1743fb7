//! Picard iteration for the a-form system: the map `Φ` solves the linear
//! system with `(F, G)` frozen along the previous iterate.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::integrator::{
    linear_run, pde_residual, run, step_count, Dynamics, LinearPropagator, Scheme, Stepper,
    Trajectory,
};
use crate::lp::{besov_norm_spectral, BesovSpec, DyadicFamily};
use crate::model::{nonlinear_fg_spectral, Formulation, ModelParams};
use crate::norms::l2_from_spectrum;

pub const DEFAULT_RADIUS: f64 = 0.05;
pub const DEFAULT_M: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardConfig {
    pub t_final: f64,
    pub dt: f64,
    /// Stop once successive iterates are this close in `E(T)`.
    pub tol: f64,
    pub max_iter: usize,
    pub c_radius: f64,
    /// The constant in the data bound `‖a₀‖ + ‖θ̃₀‖ ≤ c/2M`.
    pub m_const: f64,
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        step_count(self.t_final, self.dt)?;
        let positive = [("tol", self.tol), ("c", self.c_radius), ("M", self.m_const)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallnessReport {
    /// `‖a₀‖_{Ḃ^{3/2}_{2,1}} + ‖θ̃₀‖_{Ḃ^{3/2}_{2,1}}`.
    pub data_norm: f64,
    pub c_radius: f64,
    pub m_const: f64,
    /// Whether `data_norm ≤ c/2M`.
    pub bound_satisfied: bool,
    /// `‖(a, θ̃)‖_{E(T)}` of a computed solution, once known.
    pub solution_norm: Option<f64>,
}

impl SmallnessReport {
    pub fn bound(&self) -> f64 {
        self.c_radius / (2.0 * self.m_const)
    }

    /// Whether the measured solution stays in the ball of radius `c`.
    pub fn contained(&self) -> Option<bool> {
        self.solution_norm.map(|e| e <= self.c_radius)
    }
}

pub fn check_smallness(a0: &RealField, theta0: &RealField, c_radius: f64, m_const: f64) -> Result<SmallnessReport> {
    a0.check_same_grid(theta0)?;
    let family = DyadicFamily::new(a0.grid());
    let critical = BesovSpec::critical();
    let data_norm = besov_norm_spectral(&family, &a0.forward(), critical)?
        + besov_norm_spectral(&family, &theta0.forward(), critical)?;
    Ok(SmallnessReport {
        data_norm,
        c_radius,
        m_const,
        bound_satisfied: data_norm <= c_radius / (2.0 * m_const),
        solution_norm: None,
    })
}

fn e_norm_series(family: &DyadicFamily, times: &[f64], state: impl Fn(usize) -> [SpectralField; 2]) -> Result<f64> {
    let critical = BesovSpec::critical();
    let mut sup = 0.0f64;
    let mut smoothing = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let u = state(i);
        let mut level = 0.0;
        let mut second = 0.0;
        for c in &u {
            level += besov_norm_spectral(family, c, critical)?;
            // ‖∇²u‖ and ‖Δu‖ agree blockwise in L²
            second += besov_norm_spectral(family, &c.laplacian(), critical)?;
        }
        sup = sup.max(level);
        smoothing.push(second);
    }
    let integral: f64 = times
        .windows(2)
        .zip(smoothing.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum();
    Ok(sup + integral)
}

/// `‖u‖_{L^∞_T Ḃ^{3/2}_{2,1}} + ‖∇²u‖_{L¹_T Ḃ^{3/2}_{2,1}}` summed over both
/// components, with the max over snapshots and trapezoidal quadrature.
pub fn e_norm(traj: &Trajectory) -> Result<f64> {
    e_norm_series(traj.family(), traj.times(), |i| traj.spectral(i).clone())
}

fn check_aligned(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() || a.times().iter().zip(b.times()).any(|(x, y)| x != y) {
        return Err(Error::InvalidTime("trajectories are sampled at different times".into()));
    }
    if !a.grid().same_as(b.grid()) {
        return Err(Error::InvalidGrid("trajectories live on different grids".into()));
    }
    Ok(())
}

/// `E(T)` norm of `a − b`.
pub fn e_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_aligned(a, b)?;
    e_norm_series(a.family(), a.times(), |i| {
        let (x, y) = (a.spectral(i), b.spectral(i));
        [x[0].sub(&y[0]).unwrap(), x[1].sub(&y[1]).unwrap()]
    })
}

/// `max_t (‖Δa‖_{L²} + ‖Δθ̃‖_{L²})`.
pub fn linf_l2_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_aligned(a, b)?;
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        let (x, y) = (a.spectral(i), b.spectral(i));
        let d = l2_from_spectrum(&x[0].sub(&y[0])?) + l2_from_spectrum(&x[1].sub(&y[1])?);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `Φ(b, τ)`: the linear system from `(a₀, θ̃₀)` driven by `F(b, τ)`,
/// `G(b, τ)` frozen at the start of each step. `input` must be an a-form
/// trajectory holding every step from `t = 0`.
pub fn phi_map(input: &Trajectory, a0: &RealField, theta0: &RealField, params: &ModelParams) -> Result<Trajectory> {
    if input.formulation() != Formulation::AForm {
        return Err(Error::InvalidParameter {
            name: "formulation",
            reason: "the map acts on a-form trajectories".into(),
        });
    }
    a0.check_same_grid(theta0)?;
    if !a0.grid().same_as(input.grid()) {
        return Err(Error::InvalidGrid("data grid differs from the trajectory grid".into()));
    }
    let times = input.times();
    if times.len() < 2 {
        return Err(Error::TooFewSnapshots {
            needed: 2,
            actual: times.len(),
        });
    }
    let dt = times[1] - times[0];
    for (i, &t) in times.iter().enumerate() {
        if (t - i as f64 * dt).abs() > 1e-9 * dt.max(t) {
            return Err(Error::InvalidTime(format!(
                "snapshot {i} at t = {t} is not on the uniform step grid of dt = {dt}"
            )));
        }
    }
    let forcing = (0..times.len() - 1)
        .map(|i| {
            let u = input.spectral(i);
            nonlinear_fg_spectral(&u[0], &u[1], params).map(|(f, g)| [f, g])
        })
        .collect::<Result<Vec<_>>>()?;
    let propagator = LinearPropagator::a_form(input.grid(), params, dt)?;
    linear_run(&propagator, [a0.forward(), theta0.forward()], &forcing, params)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PicardStatus {
    Converged,
    /// `max_iter` reached without meeting the tolerance.
    Exhausted,
    /// The difference grew on three consecutive iterations.
    Diverged,
    /// An iterate left the admissible set.
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    /// `E(T)` norm of iterates `0, 1, …`.
    pub e_norms: Vec<f64>,
    /// `E(T)` norm of `uₙ₊₁ − uₙ`; entry `n` pairs iterates `n` and `n + 1`.
    pub differences: Vec<f64>,
    /// `differences[n + 1] / differences[n]`, skipping zero denominators.
    pub contraction_ratios: Vec<f64>,
    pub status: PicardStatus,
    pub tolerance: f64,
    /// Largest a-form PDE residual of the last iterate.
    pub final_residual: Option<f64>,
    /// The same for the direct ETD1 simulation.
    pub direct_residual: Option<f64>,
    /// `E(T)` distance from the last iterate to the direct simulation.
    pub direct_e_distance: Option<f64>,
    /// `L^∞_T L²` distance from the last iterate to the direct simulation.
    pub direct_l2_distance: Option<f64>,
    pub smallness: SmallnessReport,
}

impl FixedPointReport {
    pub fn converged(&self) -> bool {
        self.status == PicardStatus::Converged
    }

    pub fn iterations(&self) -> usize {
        self.differences.len()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iteration,e_norm,difference,ratio")?;
        for (n, e) in self.e_norms.iter().enumerate() {
            let diff = match n {
                0 => String::new(),
                _ => format!("{:e}", self.differences[n - 1]),
            };
            let ratio = match n {
                0 | 1 => None,
                _ => {
                    let (prev, cur) = (self.differences[n - 2], self.differences[n - 1]);
                    (prev > 0.0).then(|| cur / prev)
                }
            };
            let ratio = ratio.map(|r| format!("{r:e}")).unwrap_or_default();
            writeln!(w, "{n},{e:e},{diff},{ratio}")?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let status = match &self.status {
            PicardStatus::Converged => "converged".to_string(),
            PicardStatus::Exhausted => "exhausted".to_string(),
            PicardStatus::Diverged => "diverged".to_string(),
            PicardStatus::Failed(m) => format!("failed ({m})"),
        };
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "n/a".into());
        let s = &self.smallness;
        format!(
            "status={status} iterations={} final_residual={} direct_e_distance={} data_norm={:e} bound={:e} smallness={} solution_norm={} contained={}",
            self.iterations(),
            opt(self.final_residual),
            opt(self.direct_e_distance),
            s.data_norm,
            s.bound(),
            if s.bound_satisfied { "satisfied" } else { "violated" },
            opt(s.solution_norm),
            s.contained().map(|c| c.to_string()).unwrap_or_else(|| "n/a".into()),
        )
    }
}

/// Picard iteration from the free linear evolution of the data. Returns the
/// last iterate; failures during iteration are reported in the status.
pub fn picard_iterate(
    a0: &RealField,
    theta0: &RealField,
    params: &ModelParams,
    config: &PicardConfig,
) -> Result<(Trajectory, FixedPointReport)> {
    config.validate()?;
    params.require_unit_equilibrium()?;
    let smallness = check_smallness(a0, theta0, config.c_radius, config.m_const)?;
    let steps = step_count(config.t_final, config.dt)?;
    let grid = a0.grid();
    let zero = vec![[SpectralField::zeros(grid), SpectralField::zeros(grid)]; steps];
    let propagator = LinearPropagator::a_form(grid, params, config.dt)?;
    let mut current = linear_run(&propagator, [a0.forward(), theta0.forward()], &zero, params)?;

    let mut report = FixedPointReport {
        e_norms: vec![e_norm(&current)?],
        differences: Vec::new(),
        contraction_ratios: Vec::new(),
        status: PicardStatus::Exhausted,
        tolerance: config.tol,
        final_residual: None,
        direct_residual: None,
        direct_e_distance: None,
        direct_l2_distance: None,
        smallness,
    };
    let mut growths = 0;
    for _ in 0..config.max_iter {
        let next = match phi_map(&current, a0, theta0, params) {
            Ok(t) => t,
            Err(e) => {
                report.status = PicardStatus::Failed(e.to_string());
                break;
            }
        };
        let diff = e_distance(&next, &current)?;
        if let Some(&prev) = report.differences.last() {
            if prev > 0.0 {
                report.contraction_ratios.push(diff / prev);
            }
            growths = if diff > prev { growths + 1 } else { 0 };
        }
        report.differences.push(diff);
        report.e_norms.push(e_norm(&next)?);
        current = next;
        if diff <= config.tol {
            report.status = PicardStatus::Converged;
            break;
        }
        if growths >= 3 {
            report.status = PicardStatus::Diverged;
            break;
        }
    }

    report.smallness.solution_norm = report.e_norms.last().copied();
    if let Ok(r) = pde_residual(&current, Formulation::AForm) {
        report.final_residual = Some(r.max());
    }
    let direct = Stepper::new(grid, Dynamics::new(params, Formulation::AForm)?, Scheme::Etd1, config.dt)
        .and_then(|s| run(&s, [a0.forward(), theta0.forward()], config.t_final, 1));
    if let Ok(direct) = direct {
        if direct.breach().is_none() {
            report.direct_e_distance = e_distance(&current, &direct).ok();
            report.direct_l2_distance = linf_l2_distance(&current, &direct).ok();
            report.direct_residual = pde_residual(&direct, Formulation::AForm).ok().map(|r| r.max());
        }
    }
    Ok((current, report))
}
