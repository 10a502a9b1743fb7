//! Measured quantities along trajectories: mass, positivity, the energy
//! functional `X(t)`, the `L²` energy identities and the parabolic scaling
//! test.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::integrator::{simulate, RunSpec, Scheme, Trajectory};
use crate::lp::{besov_norm, BesovSpec, DyadicFamily};
use crate::model::{darcy_and_production, AState, Formulation, ModelParams, PrimitiveState, State};
use crate::pseudo::Jet;

/// `∫ρ` by the rectangle rule.
pub fn total_mass(state: &PrimitiveState) -> f64 {
    state.rho.integral()
}

/// `(min ρ, min θ)` over grid points.
pub fn positivity_minima(state: &PrimitiveState) -> (f64, f64) {
    (state.rho.min_with_index().1, state.theta.min_with_index().1)
}

/// Smallest value of the entropy production field.
pub fn min_entropy_production(state: &PrimitiveState, params: &ModelParams) -> Result<f64> {
    Ok(darcy_and_production(state, params)?.production.min_with_index().1)
}

/// Uniform snapshot spacing of a trajectory with at least three snapshots.
fn uniform_spacing(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            actual: traj.len(),
        });
    }
    let t = traj.times();
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for w in t.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::InvalidTime("snapshots must be equally spaced".into()));
        }
    }
    Ok(h)
}

/// Second-order time derivative of a uniformly sampled sequence: central in
/// the interior, three-point one-sided at the ends.
fn time_derivative<T>(values: &[T], h: f64, combine: impl Fn(&[(f64, &T)]) -> T) -> Vec<T> {
    let n = values.len();
    let s = 1.0 / (2.0 * h);
    (0..n)
        .map(|i| {
            if i == 0 {
                combine(&[(-3.0 * s, &values[0]), (4.0 * s, &values[1]), (-s, &values[2])])
            } else if i == n - 1 {
                combine(&[(3.0 * s, &values[n - 1]), (-4.0 * s, &values[n - 2]), (s, &values[n - 3])])
            } else {
                combine(&[(s, &values[i + 1]), (-s, &values[i - 1])])
            }
        })
        .collect()
}

fn scalar_derivative(values: &[f64], h: f64) -> Vec<f64> {
    time_derivative(values, h, |terms| terms.iter().map(|(w, v)| w * **v).sum())
}

fn spectral_derivative(values: &[SpectralField], h: f64) -> Vec<SpectralField> {
    time_derivative(values, h, |terms| {
        let mut acc = SpectralField::zeros(terms[0].1.grid());
        for (w, v) in terms {
            for (a, b) in acc.coeffs_mut().iter_mut().zip(v.coeffs()) {
                *a += *w * b;
            }
        }
        acc
    })
}

/// `vol·Σ w(|k|²)|f̂(k)|²`.
fn weighted_energy(f: &SpectralField, w: impl Fn(f64) -> f64) -> f64 {
    let k2 = f.grid().k_squared();
    f.coeffs().iter().zip(k2).map(|(c, &k2)| w(k2) * c.norm_sqr()).sum::<f64>() * f.grid().volume()
}

/// Tilde spectra `(ρ̃, θ̃)` of every snapshot.
fn tilde_spectra(traj: &Trajectory) -> Result<Vec<[SpectralField; 2]>> {
    (0..traj.len())
        .map(|i| {
            if traj.formulation() == Formulation::Tilde {
                return Ok(traj.spectral(i).clone());
            }
            let t = traj.tilde(i)?;
            Ok([t.rho.forward(), t.theta.forward()])
        })
        .collect()
}

/// `X(t)` at every snapshot: running sup of `‖ρ̃‖²_{H²} + ‖θ̃‖²_{H²}` plus
/// the trapezoidal integral of `‖∇ρ̃‖²_{H²} + ‖∇θ̃‖²_{H²} + ‖∂ₜθ̃‖²_{H¹}`.
pub fn energy_functional_x(traj: &Trajectory) -> Result<Vec<f64>> {
    let h = uniform_spacing(traj)?;
    let tilde = tilde_spectra(traj)?;
    Ok(x_series(&tilde, h))
}

fn x_series(tilde: &[[SpectralField; 2]], h: f64) -> Vec<f64> {
    let thetas: Vec<SpectralField> = tilde.iter().map(|u| u[1].clone()).collect();
    let theta_t = spectral_derivative(&thetas, h);
    let mut sup = 0.0f64;
    let mut integral = 0.0;
    let mut prev_rate = 0.0;
    tilde
        .iter()
        .zip(&theta_t)
        .enumerate()
        .map(|(i, (u, dt))| {
            let level = weighted_energy(&u[0], |k2| 1.0 + k2 * k2) + weighted_energy(&u[1], |k2| 1.0 + k2 * k2);
            let rate = weighted_energy(&u[0], |k2| k2 * (1.0 + k2 * k2))
                + weighted_energy(&u[1], |k2| k2 * (1.0 + k2 * k2))
                + weighted_energy(dt, |k2| 1.0 + k2);
            sup = sup.max(level);
            if i > 0 {
                integral += 0.5 * h * (prev_rate + rate);
            }
            prev_rate = rate;
            sup + integral
        })
        .collect()
}

/// The integrals `I₁ … I₈` of the tilde `L²` identities at one snapshot.
///
/// ```text
/// ½ d/dt‖ρ̃‖² + κ₁‖∇ρ̃‖² = I₁ + I₂
/// ½κ₂ d/dt‖θ̃‖² + (κ₁² + κ̄₃)‖∇θ̃‖² = I₃ + … + I₈
/// ```
///
/// with `I₇ = −κ₂∫ρ̃ θ̃ ∂ₜθ̃` and `I₈ = κ₁²∫θ̃²Δ(ρθ)`.
pub fn identity_terms(rho: &RealField, theta: &RealField, theta_t: &RealField, params: &ModelParams) -> Result<[f64; 8]> {
    rho.check_same_grid(theta)?;
    rho.check_same_grid(theta_t)?;
    let grid = rho.grid();
    let (k1, k2) = (params.kappa1, params.kappa2);
    let cell = grid.cell_volume();
    let (r, t) = (rho.values(), theta.values());
    let jr = Jet::from_field(rho);
    let jt = Jet::from_field(theta);
    let rt = RealField::new(grid, r.iter().zip(t).map(|(a, b)| a * b).collect())?;
    let jrt = Jet::from_field(&rt);
    let full = RealField::new(grid, r.iter().zip(t).map(|(a, b)| (1.0 + a) * (1.0 + b)).collect())?;
    let lap_full = full.forward().laplacian().inverse();
    let integral = |f: &dyn Fn(usize) -> f64| (0..grid.len()).map(f).sum::<f64>() * cell;

    let tr = integral(&|i| jt.grad_dot(&jr, i));
    let profile = params.kappa3_var;
    Ok([
        -k1 * tr,
        -k1 * integral(&|i| jrt.grad_dot(&jr, i)),
        -k1 * k1 * tr,
        -k1 * k1 * integral(&|i| jrt.grad_dot(&jt, i)),
        k1 * (k1 + k2) * integral(&|i| (jr.grad_dot(&jt, i) + jt.grad_sq(i) + jt.grad_dot(&jrt, i)) * t[i]),
        -integral(&|i| profile.value(t[i]) * jt.grad_sq(i)),
        -k2 * integral(&|i| r[i] * t[i] * theta_t.values()[i]),
        k1 * k1 * integral(&|i| t[i] * t[i] * lap_full.values()[i]),
    ])
}

/// Defects of the two `L²` identities at one snapshot.
fn identity_defects(u: &[SpectralField; 2], norm_rates: [f64; 2], terms: &[f64; 8], params: &ModelParams) -> [f64; 2] {
    let (k1, k2) = (params.kappa1, params.kappa2);
    let grad_r = weighted_energy(&u[0], |k2| k2);
    let grad_t = weighted_energy(&u[1], |k2| k2);
    let first = 0.5 * norm_rates[0] + k1 * grad_r - terms[0] - terms[1];
    let second = 0.5 * k2 * norm_rates[1] + (k1 * k1 + params.kappa3_bar) * grad_t - terms[2..].iter().sum::<f64>();
    [first.abs(), second.abs()]
}

/// Defects of the `L²` identities at every snapshot, with `d/dt` and
/// `∂ₜθ̃` from second-order differences.
pub fn l2_energy_identity(traj: &Trajectory) -> Result<Vec<[f64; 2]>> {
    Ok(energy_report(traj)?.identity_residuals)
}

#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub x_series: Vec<f64>,
    pub mass_series: Vec<f64>,
    pub identity_residuals: Vec<[f64; 2]>,
    /// `(min ρ, min θ)` per snapshot.
    pub positivity_minima: Vec<(f64, f64)>,
    /// `I₁ … I₈` per snapshot.
    pub i_terms: Vec<[f64; 8]>,
    /// Smallest entropy production per snapshot.
    pub min_production: Vec<f64>,
}

impl EnergyReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "time,X,mass,min_rho,min_theta,identity_residual_1,identity_residual_2")?;
        for k in 1..=8 {
            write!(w, ",I{k}")?;
        }
        writeln!(w, ",min_production")?;
        for i in 0..self.times.len() {
            let (mr, mt) = self.positivity_minima[i];
            let [r1, r2] = self.identity_residuals[i];
            write!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                self.times[i], self.x_series[i], self.mass_series[i], mr, mt, r1, r2
            )?;
            for v in &self.i_terms[i] {
                write!(w, ",{v:e}")?;
            }
            writeln!(w, ",{:e}", self.min_production[i])?;
        }
        Ok(())
    }

    /// Largest defect of each identity.
    pub fn max_identity_residual(&self) -> [f64; 2] {
        self.identity_residuals.iter().fold([0.0, 0.0], |acc, r| {
            [acc[0].max(r[0]), acc[1].max(r[1])]
        })
    }
}

pub fn energy_report(traj: &Trajectory) -> Result<EnergyReport> {
    let h = uniform_spacing(traj)?;
    let params = traj.params();
    params.require_unit_equilibrium()?;
    let tilde = tilde_spectra(traj)?;
    let thetas: Vec<SpectralField> = tilde.iter().map(|u| u[1].clone()).collect();
    let theta_t = spectral_derivative(&thetas, h);
    let norms_r: Vec<f64> = tilde.iter().map(|u| weighted_energy(&u[0], |_| 1.0)).collect();
    let norms_t: Vec<f64> = tilde.iter().map(|u| weighted_energy(&u[1], |_| 1.0)).collect();
    let rate_r = scalar_derivative(&norms_r, h);
    let rate_t = scalar_derivative(&norms_t, h);

    let mut report = EnergyReport {
        times: traj.times().to_vec(),
        x_series: x_series(&tilde, h),
        mass_series: Vec::new(),
        identity_residuals: Vec::new(),
        positivity_minima: Vec::new(),
        i_terms: Vec::new(),
        min_production: Vec::new(),
    };
    for (i, u) in tilde.iter().enumerate() {
        let primitive = traj.primitive(i)?;
        report.mass_series.push(total_mass(&primitive));
        report.positivity_minima.push(positivity_minima(&primitive));
        report.min_production.push(min_entropy_production(&primitive, params)?);
        let terms = identity_terms(&u[0].inverse(), &u[1].inverse(), &theta_t[i].inverse(), params)?;
        report
            .identity_residuals
            .push(identity_defects(u, [rate_r[i], rate_t[i]], &terms, params));
        report.i_terms.push(terms);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingReport {
    pub lambda: usize,
    /// `‖u_λ(T, ·) − u(λ²T, λ·)‖_{L²} / ‖u(λ²T, ·)‖_{L²}`.
    pub discrepancy: f64,
    /// `‖U(λ·)‖ / ‖U‖` in `Ḃ^{d/2}_{2,1}`, the scaled copy measured on its
    /// own period box `[0, L/λ)^d`.
    pub critical_ratio: f64,
}

/// `U(λx)` sampled on the grid of `U`.
pub fn compose_scaled(u: &RealField, lambda: usize) -> RealField {
    let grid = u.grid();
    let n = grid.n();
    let values = (0..grid.len())
        .map(|flat| {
            let idx = grid.unflatten(flat);
            let src = (0..grid.dim()).fold(0, |acc, axis| acc * n + (lambda * idx[axis]) % n);
            u.values()[src]
        })
        .collect();
    RealField::new(grid, values).expect("same grid")
}

fn highest_mode(f: &SpectralField) -> i64 {
    let grid = f.grid();
    let scale = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 1e-14 * scale)
        .map(|(flat, _)| grid.mode_vector(flat).iter().map(|m| m.abs()).max().unwrap())
        .max()
        .unwrap_or(0)
}

/// `Ḃ^{d/2}_{2,1}` norm of `U(λ·)` on `[0, L/λ)^d` over that of `U` on
/// `[0, L)^d`, summed over the given components.
pub fn critical_norm_ratio(components: &[&RealField], lambda: usize) -> Result<f64> {
    let Some(first) = components.first() else {
        return Ok(1.0);
    };
    let grid = first.grid();
    let spec = BesovSpec::new(grid.dim() as f64 / 2.0, 2.0, 1.0)?;
    // On its period box, U(λ·) sampled at n points has exactly U's samples.
    let small = Grid::new(grid.dim(), grid.n(), grid.length() / lambda as f64)?;
    let (family, small_family) = (DyadicFamily::new(grid), DyadicFamily::new(&small));
    let (mut base, mut scaled) = (0.0, 0.0);
    for u in components {
        base += besov_norm(&family, u, spec)?;
        scaled += besov_norm(&small_family, &RealField::new(&small, u.values().to_vec())?, spec)?;
    }
    Ok(if base == 0.0 { 1.0 } else { scaled / base })
}

/// Runs `U` to `λ²T` with step `dt` and `U(λ·)` to `T` with step `dt/λ²`
/// and compares `u_λ(T, x)` with `u(λ²T, λx)`.
pub fn scaling_test(
    initial: &AState,
    params: &ModelParams,
    lambda: usize,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<ScalingReport> {
    if lambda < 2 {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be an integer of at least 2, got {lambda}"),
        });
    }
    let grid = initial.grid();
    let band = highest_mode(&initial.a.forward()).max(highest_mode(&initial.theta.forward()));
    if 3 * band * lambda as i64 > grid.n() as i64 {
        return Err(Error::Unresolved(format!(
            "data reaches mode {band}; scaled by {lambda} it leaves the dealiasing band of n = {}",
            grid.n()
        )));
    }
    let l2 = (lambda * lambda) as f64;
    let base = RunSpec {
        t_final: l2 * t_final,
        dt,
        scheme,
        stride: 1,
        formulation: Formulation::AForm,
    };
    let steps = crate::integrator::step_count(base.t_final, dt)?;
    let base = RunSpec { stride: steps, ..base };
    let scaled = RunSpec {
        t_final,
        dt: dt / l2,
        ..base
    };
    let u = simulate(&State::AForm(initial.clone()), params, &base)?;
    let scaled_state = AState::new(
        compose_scaled(&initial.a, lambda),
        compose_scaled(&initial.theta, lambda),
        params,
    )?;
    let v = simulate(&State::AForm(scaled_state), params, &scaled)?;
    for traj in [&u, &v] {
        if let Some(b) = traj.breach() {
            return Err(Error::InvalidParameter {
                name: "initial",
                reason: format!("run breached at t = {}: {}", b.time, b.message),
            });
        }
    }
    let (ul, vl) = (u.last_spectral().unwrap(), v.last_spectral().unwrap());
    let mut diff = 0.0;
    let mut reference = 0.0;
    for c in 0..2 {
        let target = compose_scaled(&ul[c].inverse(), lambda);
        let got = vl[c].inverse();
        diff += got
            .values()
            .iter()
            .zip(target.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
        reference += ul[c].inverse().values().iter().map(|a| a * a).sum::<f64>();
    }
    let discrepancy = if reference == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / reference).sqrt()
    };
    Ok(ScalingReport {
        lambda,
        discrepancy,
        critical_ratio: critical_norm_ratio(&[&initial.a, &initial.theta], lambda)?,
    })
}
