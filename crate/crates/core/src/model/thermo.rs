//! Thermodynamic state functions of the ideal gas and the derived fluxes.
//!
//! Free energy `ψ = κ₁θρ ln ρ − κ₂ρθ ln θ`, entropy `η = −∂_θψ`, internal
//! energy `e = ψ + ηθ = κ₂ρθ`, pressure `p = κ₁ρθ`.

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::model::params::ModelParams;
use crate::model::state::PrimitiveState;
use crate::pseudo::Jet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateFunctions {
    pub psi: f64,
    pub eta: f64,
    pub e: f64,
    pub p: f64,
    pub eta_theta: f64,
}

pub fn state_functions(rho: f64, theta: f64, params: &ModelParams) -> Result<StateFunctions> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Positivity {
            quantity: "density",
            index: 0,
            value: rho,
        });
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Positivity {
            quantity: "temperature",
            index: 0,
            value: theta,
        });
    }
    let (k1, k2) = (params.kappa1, params.kappa2);
    let (ln_rho, ln_theta) = (rho.ln(), theta.ln());
    let psi = k1 * theta * rho * ln_rho - k2 * rho * theta * ln_theta;
    let eta = -k1 * rho * ln_rho + k2 * rho * (ln_theta + 1.0);
    Ok(StateFunctions {
        psi,
        eta,
        e: psi + eta * theta,
        p: k1 * rho * theta,
        eta_theta: k2 * rho / theta,
    })
}

/// `∂ψ/∂ρ = κ₁θ(ln ρ + 1) − κ₂θ ln θ`, which equals `e₁ρ`.
fn psi_rho(rho: f64, theta: f64, params: &ModelParams) -> f64 {
    params.kappa1 * theta * (rho.ln() + 1.0) - params.kappa2 * theta * theta.ln()
}

/// Darcy velocity, entropy production and work flux of a state.
#[derive(Clone, Debug)]
pub struct DarcyProduction {
    /// `u = −∇p/ρ`, one field per axis.
    pub velocity: Vec<RealField>,
    /// `Δ = (ρ|u|² + κ₃|∇θ|²/θ)/θ`.
    pub production: RealField,
    /// `W = −(e₁ρ ρ + e₁η η) u`, one field per axis.
    pub work_flux: Vec<RealField>,
}

pub fn darcy_and_production(state: &PrimitiveState, params: &ModelParams) -> Result<DarcyProduction> {
    state.validate()?;
    let grid = state.rho.grid();
    let rho = state.rho.values();
    let theta = state.theta.values();

    let (mut min_index, mut min_k3) = (0, f64::INFINITY);
    for (i, &t) in theta.iter().enumerate() {
        let k3 = params.kappa3(t);
        if k3 < min_k3 {
            min_k3 = k3;
            min_index = i;
        }
    }
    if min_k3 < 0.0 {
        return Err(Error::NegativeConductivity {
            index: min_index,
            min: min_k3,
        });
    }

    let pressure: Vec<f64> = rho
        .iter()
        .zip(theta)
        .map(|(&r, &t)| params.kappa1 * r * t)
        .collect();
    let grad_p = RealField::new(grid, pressure)?.forward().gradient();
    let velocity: Vec<Vec<f64>> = grad_p
        .iter()
        .map(|g| {
            g.inverse()
                .values()
                .iter()
                .zip(rho)
                .map(|(&gp, &r)| -gp / r)
                .collect()
        })
        .collect();

    let theta_jet = Jet::from_field(&state.theta);
    let production: Vec<f64> = (0..grid.len())
        .map(|i| {
            let u2: f64 = velocity.iter().map(|u| u[i] * u[i]).sum();
            let t = theta[i];
            (rho[i] * u2 + params.kappa3(t) * theta_jet.grad_sq(i) / t) / t
        })
        .collect();

    let coefficient: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (r, t) = (rho[i], theta[i]);
            let eta = -params.kappa1 * r * r.ln() + params.kappa2 * r * (t.ln() + 1.0);
            -(psi_rho(r, t, params) * r + t * eta)
        })
        .collect();
    let work_flux = velocity
        .iter()
        .map(|u| {
            RealField::new(grid, u.iter().zip(&coefficient).map(|(u, c)| c * u).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DarcyProduction {
        velocity: velocity
            .into_iter()
            .map(|u| RealField::new(grid, u))
            .collect::<Result<Vec<_>>>()?,
        production: RealField::new(grid, production)?,
        work_flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::params::Kappa3Profile;
    use crate::random::random_field;
    use std::f64::consts::{E, PI};

    fn params(k1: f64, k2: f64) -> ModelParams {
        ModelParams::new(k1, k2, 1.0, Kappa3Profile::Zero).unwrap()
    }

    #[test]
    fn equilibrium_values() {
        let s = state_functions(1.0, 1.0, &params(0.7, 2.5)).unwrap();
        assert_eq!(s.psi, 0.0);
        assert!((s.p - 0.7).abs() < 1e-15);
        assert!((s.e - 2.5).abs() < 1e-15);
    }

    #[test]
    fn psi_at_rho_e() {
        let s = state_functions(E, 1.0, &params(1.0, 1.0)).unwrap();
        assert!((s.psi - 2.718281828).abs() < 1e-9);
    }

    #[test]
    fn eta_theta_value_and_finite_difference() {
        let p = params(1.0, 3.0);
        let s = state_functions(2.0, 4.0, &p).unwrap();
        assert!((s.eta_theta - 1.5).abs() < 1e-15);
        let h = 1e-5;
        let up = state_functions(2.0, 4.0 + h, &p).unwrap().eta;
        let dn = state_functions(2.0, 4.0 - h, &p).unwrap().eta;
        assert!(((up - dn) / (2.0 * h) - 1.5).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(state_functions(0.0, 1.0, &params(1.0, 1.0)).is_err());
        assert!(state_functions(1.0, -1.0, &params(1.0, 1.0)).is_err());
    }

    #[test]
    fn constant_state_has_no_flux() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let p = params(1.0, 1.0);
        let d = darcy_and_production(&PrimitiveState::equilibrium(&g, &p), &p).unwrap();
        assert!(d.velocity.iter().all(|u| u.max_abs() < 1e-15));
        assert!(d.production.max_abs() < 1e-15);
    }

    #[test]
    fn velocity_of_temperature_ripple() {
        // ρ ≡ 1, θ = 1 + 0.1cos x: p = 1 + 0.1cos x, u = −∂ₓp = 0.1 sin x
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let p = params(1.0, 1.0);
        let state = PrimitiveState::new(
            RealField::constant(&g, 1.0),
            RealField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos()),
        )
        .unwrap();
        let d = darcy_and_production(&state, &p).unwrap();
        for i in 0..g.len() {
            let x = g.coordinates(i)[0];
            assert!((d.velocity[0].values()[i] - 0.1 * x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn production_is_non_negative_on_random_states() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let p = params(1.3, 0.8);
        for seed in 0..10 {
            let rho = random_field(&g, 2 * seed, 6, 0.5).map(|v| 1.0 + v);
            let theta = random_field(&g, 2 * seed + 1, 6, 0.5).map(|v| 1.0 + v);
            let d = darcy_and_production(&PrimitiveState::new(rho, theta).unwrap(), &p).unwrap();
            assert!(d.production.min_with_index().1 >= -1e-14);
        }
    }

    #[test]
    fn negative_conductivity_is_reported() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let p = ModelParams::new(1.0, 1.0, 0.1, Kappa3Profile::Tanh { alpha: 1.0 }).unwrap();
        let state = PrimitiveState::new(
            RealField::constant(&g, 1.0),
            RealField::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos()),
        )
        .unwrap();
        let err = darcy_and_production(&state, &p).unwrap_err();
        assert!(matches!(err, Error::NegativeConductivity { min, .. } if min < 0.0));
    }
}
