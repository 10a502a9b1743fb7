//! Time evolution: the exact linear propagator, ETD stepping, trajectories
//! and a-posteriori residuals.

pub mod propagator;
pub mod stepper;
pub mod trajectory;

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::model::{
    change_variables, rhs_a_form, rhs_primitive, rhs_tilde, Formulation, ModelParams, State,
};
use crate::norms::{l2_from_spectrum, lp_norm};

pub use propagator::{matrix_functions, phi1, phi2, LinearPropagator, MatrixFunctions};
pub use stepper::{Dynamics, Scheme, Source, Stepper};
pub use trajectory::{Breach, NormRecord, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSpec {
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between stored snapshots.
    pub stride: usize,
    pub formulation: Formulation,
}

/// `0.5/(κ_max·k_max²)`.
pub fn default_dt(grid: &Grid, params: &ModelParams) -> f64 {
    0.5 / (params.kappa_max() * grid.k_max().powi(2))
}

/// Number of steps of size `dt` covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidTime(format!("final time must be positive, got {t_final}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
    }
    let steps = (t_final / dt).round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::InvalidTime(format!(
            "dt = {dt} does not divide the final time {t_final}"
        )));
    }
    Ok(steps as usize)
}

/// The stepping variables of `state`: `(a, θ̃)` for the a-form and the
/// deviations `(ρ − ρ̄, θ − θ̄)` otherwise.
pub fn stepping_variables(state: &State, formulation: Formulation, params: &ModelParams) -> Result<[SpectralField; 2]> {
    Ok(match change_variables(state, formulation, params)? {
        State::AForm(a) => [a.a.forward(), a.theta.forward()],
        State::Tilde(t) => [t.rho.forward(), t.theta.forward()],
        State::Primitive(p) => [
            p.rho.map(|r| r - params.rho_bar).forward(),
            p.theta.map(|t| t - params.theta_bar).forward(),
        ],
    })
}

/// Evolves `initial` over `[0, t_final]`. An invariant breach ends the run
/// early; the trajectory up to the breach is returned with the breach
/// recorded.
pub fn simulate(initial: &State, params: &ModelParams, spec: &RunSpec) -> Result<Trajectory> {
    let dynamics = Dynamics::new(params, spec.formulation)?;
    let u0 = stepping_variables(initial, spec.formulation, params)?;
    let stepper = Stepper::new(u0[0].grid(), dynamics, spec.scheme, spec.dt)?;
    run(&stepper, u0, spec.t_final, spec.stride)
}

/// Steps `u0` with a prepared stepper, storing every `stride`-th state.
pub fn run(stepper: &Stepper, u0: [SpectralField; 2], t_final: f64, stride: usize) -> Result<Trajectory> {
    let dt = stepper.dt();
    let steps = step_count(t_final, dt)?;
    if stride == 0 || steps % stride != 0 {
        return Err(Error::InvalidTime(format!(
            "snapshot stride {stride} must be positive and divide the {steps} steps"
        )));
    }
    let dynamics = stepper.dynamics();
    dynamics.check(&u0)?;
    let mut traj = Trajectory::new(u0[0].grid(), dynamics.params(), dynamics.formulation());
    traj.push(0.0, u0.clone())?;
    let mut u = u0;
    for n in 0..steps {
        let t = n as f64 * dt;
        match stepper.step(&u, t) {
            Ok(next) => u = next,
            Err(e) => {
                traj.flag(Breach {
                    step: n + 1,
                    time: t + dt,
                    message: e.to_string(),
                });
                return Ok(traj);
            }
        }
        if (n + 1) % stride == 0 {
            traj.push((n + 1) as f64 * dt, u.clone())?;
        }
    }
    Ok(traj)
}

/// The linearized a-form system with prescribed forcing, one `(F, G)` pair
/// per step held constant over that step. Every step is stored.
pub fn solve_linearized(
    a0: &RealField,
    theta0: &RealField,
    forcing: &[[SpectralField; 2]],
    params: &ModelParams,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    a0.check_same_grid(theta0)?;
    let steps = step_count(t_final, dt)?;
    if forcing.len() != steps {
        return Err(Error::ForcingMismatch {
            expected: steps,
            actual: forcing.len(),
        });
    }
    let propagator = LinearPropagator::a_form(a0.grid(), params, dt)?;
    linear_run(&propagator, [a0.forward(), theta0.forward()], forcing, params)
}

pub(crate) fn linear_run(
    propagator: &LinearPropagator,
    u0: [SpectralField; 2],
    forcing: &[[SpectralField; 2]],
    params: &ModelParams,
) -> Result<Trajectory> {
    use propagator::Weight;
    let grid = propagator.grid();
    let dt = propagator.dt();
    let mut traj = Trajectory::new(grid, params, Formulation::AForm);
    traj.push(0.0, u0.clone())?;
    let mut u = u0;
    for (n, [f, g]) in forcing.iter().enumerate() {
        if !f.grid().same_as(grid) || !g.grid().same_as(grid) {
            return Err(Error::InvalidGrid("forcing grid differs from data grid".into()));
        }
        let rhs = [f.clone(), g.scaled(1.0 / params.kappa2)];
        u = propagator.combine(&u, &[(Weight::Exp, &u), (Weight::W1, &rhs)]);
        traj.push((n + 1) as f64 * dt, u.clone())?;
    }
    Ok(traj)
}

/// `L²` norm of the central-difference time derivative minus the
/// right-hand side, per interior snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub times: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// Largest snapshot spacing; the expected size is `O(spacing²)` plus
    /// spectral truncation.
    pub spacing: f64,
}

impl Residual {
    pub fn max(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .copied()
            .fold(0.0, f64::max)
    }
}

fn require_snapshots(traj: &Trajectory) -> Result<()> {
    if traj.len() < 3 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            actual: traj.len(),
        });
    }
    Ok(())
}

fn spacing(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Residual of the full equations in `formulation`'s variables.
pub fn pde_residual(traj: &Trajectory, formulation: Formulation) -> Result<Residual> {
    require_snapshots(traj)?;
    let params = traj.params();
    if formulation == traj.formulation() {
        return pde_residual_with(traj, &Dynamics::new(params, formulation)?);
    }
    let times = traj.times();
    let fields = (0..traj.len())
        .map(|i| match change_variables(&traj.state(i), formulation, params)? {
            State::AForm(a) => Ok([a.a, a.theta]),
            State::Tilde(t) => Ok([t.rho, t.theta]),
            State::Primitive(p) => Ok([p.rho, p.theta]),
        })
        .collect::<Result<Vec<[RealField; 2]>>>()?;
    let mut out = Residual {
        times: Vec::new(),
        first: Vec::new(),
        second: Vec::new(),
        spacing: spacing(times),
    };
    for i in 1..traj.len() - 1 {
        let tendency = match change_variables(&traj.state(i), formulation, params)? {
            State::AForm(a) => rhs_a_form(&a, params)?,
            State::Tilde(t) => rhs_tilde(&t, params)?,
            State::Primitive(p) => rhs_primitive(&p, params)?,
        };
        let h = times[i + 1] - times[i - 1];
        let rhs = [&tendency.first, &tendency.second];
        let mut norms = [0.0; 2];
        for c in 0..2 {
            let defect = fields[i + 1][c]
                .zip_map(&fields[i - 1][c], |p, m| (p - m) / h)?
                .zip_map(rhs[c], |d, r| d - r)?;
            norms[c] = lp_norm(&defect, 2.0)?;
        }
        out.times.push(times[i]);
        out.first.push(norms[0]);
        out.second.push(norms[1]);
    }
    Ok(out)
}

/// Residual against a given right-hand side in the trajectory's own
/// stepping variables, e.g. one carrying a manufactured source.
pub fn pde_residual_with(traj: &Trajectory, dynamics: &Dynamics) -> Result<Residual> {
    require_snapshots(traj)?;
    if dynamics.formulation() != traj.formulation() {
        return Err(Error::InvalidParameter {
            name: "formulation",
            reason: "dynamics and trajectory use different variables".into(),
        });
    }
    let times = traj.times();
    let mut out = Residual {
        times: Vec::new(),
        first: Vec::new(),
        second: Vec::new(),
        spacing: spacing(times),
    };
    for i in 1..traj.len() - 1 {
        let h = times[i + 1] - times[i - 1];
        let rhs = dynamics.tendency(traj.spectral(i), times[i])?;
        let (next, prev) = (traj.spectral(i + 1), traj.spectral(i - 1));
        let mut norms = [0.0; 2];
        for c in 0..2 {
            let defect = next[c].sub(&prev[c])?.scaled(1.0 / h).sub(&rhs[c])?;
            norms[c] = l2_from_spectrum(&defect);
        }
        out.times.push(times[i]);
        out.first.push(norms[0]);
        out.second.push(norms[1]);
    }
    Ok(out)
}
