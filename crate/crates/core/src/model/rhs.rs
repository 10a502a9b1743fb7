//! Right-hand sides of the three formulations.
//!
//! Every nonlinear product is evaluated pointwise on the grid and the
//! finished tendency is passed through the two-thirds filter once.

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::model::nonlinear::{fg_from_jets, FG};
use crate::model::params::ModelParams;
use crate::model::state::{check_floor, AState, PrimitiveState, TildeState};
use crate::pseudo::{divergence, project, Jet};

/// Pair of tendencies `(∂ₜu₁, ∂ₜu₂)` in the variables of the formulation.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub first: RealField,
    pub second: RealField,
}

/// Coefficients `B` of the linear part `∂ₜû = −|k|² B û`.
///
/// For the a-form this is the constant-coefficient operator of the
/// linearized system in `(a, θ̃)`. For the tilde variables it is the
/// linearization of the primitive system about `(ρ̄, θ̄)`.
pub fn linear_coefficients(params: &ModelParams, a_form: bool) -> [[f64; 2]; 2] {
    let (k1, k2, k3) = (params.kappa1, params.kappa2, params.kappa3_bar);
    if a_form {
        [[k1, -k1], [-k1 * k1 / k2, (k1 * k1 + k3) / k2]]
    } else {
        let (r, t) = (params.rho_bar, params.theta_bar);
        [
            [k1 * t, k1 * r],
            [k1 * k1 * t * t / (k2 * r), (k1 * k1 * t * r + k3) / (k2 * r)],
        ]
    }
}

/// `−|k|² B û` for a spectral pair.
pub(crate) fn apply_linear(b: &[[f64; 2]; 2], u: &[SpectralField; 2]) -> [SpectralField; 2] {
    let grid = u[0].grid();
    let k2 = grid.k_squared();
    let (u0, u1) = (u[0].coeffs(), u[1].coeffs());
    let mut out0 = Vec::with_capacity(grid.len());
    let mut out1 = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        out0.push(-k2[i] * (b[0][0] * u0[i] + b[0][1] * u1[i]));
        out1.push(-k2[i] * (b[1][0] * u0[i] + b[1][1] * u1[i]));
    }
    [
        SpectralField::new(grid, out0).expect("sized to grid"),
        SpectralField::new(grid, out1).expect("sized to grid"),
    ]
}

fn check_positive_values(quantity: &'static str, values: &[f64], offset: f64) -> Result<()> {
    for (index, &v) in values.iter().enumerate() {
        let v = v + offset;
        if !(v > 0.0) {
            return Err(Error::Positivity {
                quantity,
                index,
                value: v,
            });
        }
    }
    Ok(())
}

/// Primitive tendencies from jets of `ρ` and `θ`.
pub(crate) fn primitive_from_jets(
    grid: &Grid,
    rho: &Jet,
    theta: &Jet,
    params: &ModelParams,
) -> Result<[SpectralField; 2]> {
    check_positive_values("density", &rho.value, 0.0)?;
    check_positive_values("temperature", &theta.value, 0.0)?;
    let (k1, k2) = (params.kappa1, params.kappa2);
    let len = grid.len();

    let q: Vec<f64> = rho.value.iter().zip(&theta.value).map(|(r, t)| r * t).collect();
    let q_hat = project(grid, q);
    let rho_t = q_hat.laplacian().scaled(k1);
    let rho_t_values = rho_t.inverse().into_values();

    let grad_q: Vec<Vec<f64>> = q_hat
        .gradient()
        .iter()
        .map(|g| g.inverse().into_values())
        .collect();
    let advective = divergence(
        grid,
        grad_q
            .iter()
            .map(|g| (0..len).map(|i| theta.value[i] * g[i]).collect())
            .collect(),
    )
    .inverse()
    .into_values();
    let conductive = divergence(
        grid,
        theta
            .grad
            .iter()
            .map(|g| {
                (0..len)
                    .map(|i| params.kappa3(theta.value[i]) * g[i])
                    .collect()
            })
            .collect(),
    )
    .inverse()
    .into_values();

    let theta_t: Vec<f64> = (0..len)
        .map(|i| {
            let numer = k1 * (k1 + k2) * advective[i] + conductive[i]
                - k2 * theta.value[i] * rho_t_values[i];
            numer / (k2 * rho.value[i])
        })
        .collect();
    Ok([rho_t, project(grid, theta_t)])
}

/// Tilde tendencies (expansion about the unit state) from jets of `ρ̃`, `θ̃`.
pub(crate) fn tilde_from_jets(
    grid: &Grid,
    r: &Jet,
    t: &Jet,
    params: &ModelParams,
) -> Result<[SpectralField; 2]> {
    params.require_unit_equilibrium()?;
    check_positive_values("density", &r.value, 1.0)?;
    check_positive_values("temperature", &t.value, 1.0)?;
    let (k1, k2, k3) = (params.kappa1, params.kappa2, params.kappa3_bar);
    let len = grid.len();

    let prod = Jet::from_spectrum(&project(
        grid,
        r.value.iter().zip(&t.value).map(|(a, b)| a * b).collect(),
    ));
    // Δ(ρθ) = Δρ̃ + Δθ̃ + Δ(ρ̃θ̃)
    let lap_q: Vec<f64> = (0..len).map(|i| r.lap[i] + t.lap[i] + prod.lap[i]).collect();
    let rho_t: Vec<f64> = lap_q.iter().map(|v| k1 * v).collect();

    let conductive = divergence(
        grid,
        t.grad
            .iter()
            .map(|g| {
                (0..len)
                    .map(|i| params.kappa3_var.value(t.value[i]) * g[i])
                    .collect()
            })
            .collect(),
    )
    .inverse()
    .into_values();

    let theta_t: Vec<f64> = (0..len)
        .map(|i| {
            let th = t.value[i];
            let transport = t.grad_dot(r, i) + t.grad_sq(i) + t.grad_dot(&prod, i);
            let rest = (k1 * k1 + k3) * t.lap[i]
                + k1 * k1 * r.lap[i]
                + k1 * (k1 + k2) * transport
                + k1 * k1 * prod.lap[i]
                + k1 * k1 * th * lap_q[i]
                + conductive[i];
            rest / (k2 * (1.0 + r.value[i]))
        })
        .collect();
    Ok([project(grid, rho_t), project(grid, theta_t)])
}

/// a-form tendencies: linear part plus `(F, G/κ₂)`.
pub(crate) fn a_form_from_jets(
    a_hat: &SpectralField,
    theta_hat: &SpectralField,
    a: &Jet,
    t: &Jet,
    params: &ModelParams,
) -> Result<[SpectralField; 2]> {
    params.require_unit_equilibrium()?;
    let FG { f, g } = fg_from_jets(a_hat.grid(), a, t, params)?;
    let lin = apply_linear(
        &linear_coefficients(params, true),
        &[a_hat.clone(), theta_hat.clone()],
    );
    let [l0, l1] = lin;
    Ok([
        l0.add(&f).expect("same grid"),
        l1.add(&g.scaled(1.0 / params.kappa2)).expect("same grid"),
    ])
}

fn to_tendency(pair: [SpectralField; 2]) -> Tendency {
    let [a, b] = pair;
    Tendency {
        first: a.inverse(),
        second: b.inverse(),
    }
}

/// `(∂ₜρ, ∂ₜθ)` of the primitive system.
pub fn rhs_primitive(state: &PrimitiveState, params: &ModelParams) -> Result<Tendency> {
    state.rho.check_same_grid(&state.theta)?;
    let grid = state.rho.grid();
    primitive_from_jets(
        grid,
        &Jet::from_field(&state.rho),
        &Jet::from_field(&state.theta),
        params,
    )
    .map(to_tendency)
}

/// `(∂ₜρ̃, ∂ₜθ̃)` of the tilde system about the unit state.
pub fn rhs_tilde(state: &TildeState, params: &ModelParams) -> Result<Tendency> {
    state.rho.check_same_grid(&state.theta)?;
    let grid = state.rho.grid();
    tilde_from_jets(
        grid,
        &Jet::from_field(&state.rho),
        &Jet::from_field(&state.theta),
        params,
    )
    .map(to_tendency)
}

/// `(∂ₜa, ∂ₜθ̃)` of the a-form system.
pub fn rhs_a_form(state: &AState, params: &ModelParams) -> Result<Tendency> {
    state.a.check_same_grid(&state.theta)?;
    check_floor(state.a.values(), params.eps_a)?;
    let (a_hat, t_hat) = (state.a.forward(), state.theta.forward());
    a_form_from_jets(
        &a_hat,
        &t_hat,
        &Jet::from_field(&state.a),
        &Jet::from_field(&state.theta),
        params,
    )
    .map(to_tendency)
}
