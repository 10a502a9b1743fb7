//! Exponential time differencing for `∂ₜu = Lu + N(u) + S(t)`.
//!
//! `L` is the constant-coefficient linear operator, applied exactly per mode;
//! `N` is the dealiased remainder of the chosen formulation and `S` an
//! optional prescribed source.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::integrator::propagator::{LinearPropagator, Weight};
use crate::model::nonlinear::fg_from_jets;
use crate::model::rhs::{apply_linear, primitive_from_jets, tilde_from_jets};
use crate::model::state::check_floor;
use crate::model::{linear_coefficients, Formulation, ModelParams};
use crate::pseudo::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `u⁺ = e^{Lh}u + hφ₁(Lh)N(u)`
    Etd1,
    /// Cox–Matthews: ETD1 predictor `a`, then `u⁺ = a + hφ₂(Lh)(N(a) − N(u))`.
    Etdrk2,
}

/// Additional tendency in the stepping variables.
pub trait Source: Send + Sync {
    fn eval(&self, t: f64) -> [SpectralField; 2];
}

/// The right-hand side in stepping variables: `(a, θ̃)` for the a-form,
/// `(ρ − ρ̄, θ − θ̄)` otherwise.
#[derive(Clone)]
pub struct Dynamics {
    params: ModelParams,
    formulation: Formulation,
    coefficients: [[f64; 2]; 2],
    nonlinear: bool,
    source: Option<Arc<dyn Source>>,
}

impl std::fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dynamics")
            .field("formulation", &self.formulation)
            .field("nonlinear", &self.nonlinear)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl Dynamics {
    pub fn new(params: &ModelParams, formulation: Formulation) -> Result<Self> {
        params.validate()?;
        if formulation != Formulation::Primitive {
            params.require_unit_equilibrium()?;
        }
        Ok(Self {
            params: *params,
            formulation,
            coefficients: linear_coefficients(params, formulation == Formulation::AForm),
            nonlinear: true,
            source: None,
        })
    }

    /// Drops `N`, leaving the linear system (plus any source).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_source(mut self, source: Arc<dyn Source>) -> Self {
        self.source = Some(source);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn coefficients(&self) -> [[f64; 2]; 2] {
        self.coefficients
    }

    /// `N(u) + S(t)`.
    pub fn remainder(&self, u: &[SpectralField; 2], t: f64) -> Result<[SpectralField; 2]> {
        let grid = u[0].grid();
        let mut out = if self.nonlinear {
            self.nonlinear_part(grid, u)?
        } else {
            [SpectralField::zeros(grid), SpectralField::zeros(grid)]
        };
        if let Some(source) = &self.source {
            let s = source.eval(t);
            for (o, s) in out.iter_mut().zip(&s) {
                *o = o.add(s)?;
            }
        }
        Ok(out)
    }

    /// `Lu + N(u) + S(t)`.
    pub fn tendency(&self, u: &[SpectralField; 2], t: f64) -> Result<[SpectralField; 2]> {
        let [l0, l1] = apply_linear(&self.coefficients, u);
        let [n0, n1] = self.remainder(u, t)?;
        Ok([l0.add(&n0)?, l1.add(&n1)?])
    }

    fn nonlinear_part(&self, grid: &Grid, u: &[SpectralField; 2]) -> Result<[SpectralField; 2]> {
        let p = &self.params;
        let mut j0 = Jet::from_spectrum(&u[0]);
        let mut j1 = Jet::from_spectrum(&u[1]);
        if self.formulation == Formulation::AForm {
            let fg = fg_from_jets(grid, &j0, &j1, p)?;
            return Ok([fg.f, fg.g.scaled(1.0 / p.kappa2)]);
        }
        let full = if self.formulation == Formulation::Primitive {
            j0.value.iter_mut().for_each(|v| *v += p.rho_bar);
            j1.value.iter_mut().for_each(|v| *v += p.theta_bar);
            primitive_from_jets(grid, &j0, &j1, p)?
        } else {
            tilde_from_jets(grid, &j0, &j1, p)?
        };
        let lin = apply_linear(&self.coefficients, u);
        let mut out = [full[0].sub(&lin[0])?, full[1].sub(&lin[1])?];
        out.iter_mut().for_each(SpectralField::dealias_in_place);
        Ok(out)
    }

    /// Pointwise admissibility of a stepping state.
    pub fn check(&self, u: &[SpectralField; 2]) -> Result<()> {
        let first = u[0].inverse();
        let second = u[1].inverse();
        first.check_finite()?;
        second.check_finite()?;
        if self.formulation == Formulation::AForm {
            return check_floor(first.values(), self.params.eps_a);
        }
        let (rho_off, theta_off) = match self.formulation {
            Formulation::Primitive => (self.params.rho_bar, self.params.theta_bar),
            _ => (1.0, 1.0),
        };
        for (quantity, field, off) in [("density", &first, rho_off), ("temperature", &second, theta_off)] {
            let (index, value) = field.min_with_index();
            if !(value + off > 0.0) {
                return Err(Error::Positivity {
                    quantity,
                    index,
                    value: value + off,
                });
            }
        }
        Ok(())
    }
}

/// One integrator: dynamics, scheme and the propagator for a fixed step.
#[derive(Clone, Debug)]
pub struct Stepper {
    dynamics: Dynamics,
    scheme: Scheme,
    propagator: LinearPropagator,
}

impl Stepper {
    pub fn new(grid: &Grid, dynamics: Dynamics, scheme: Scheme, dt: f64) -> Result<Self> {
        let propagator = LinearPropagator::new(grid, dynamics.coefficients, dt)?;
        Ok(Self {
            dynamics,
            scheme,
            propagator,
        })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn propagator(&self) -> &LinearPropagator {
        &self.propagator
    }

    pub fn dt(&self) -> f64 {
        self.propagator.dt()
    }

    /// Advances `u` from `t` to `t + dt`; fails on the first inadmissible
    /// intermediate or final state.
    pub fn step(&self, u: &[SpectralField; 2], t: f64) -> Result<[SpectralField; 2]> {
        let n0 = self.dynamics.remainder(u, t)?;
        let predictor = self.propagator.combine(u, &[(Weight::Exp, u), (Weight::W1, &n0)]);
        let next = match self.scheme {
            Scheme::Etd1 => predictor,
            Scheme::Etdrk2 => {
                let n1 = self.dynamics.remainder(&predictor, t + self.dt())?;
                let diff = [n1[0].sub(&n0[0])?, n1[1].sub(&n0[1])?];
                let correction = self.propagator.combine(u, &[(Weight::W2, &diff)]);
                [predictor[0].add(&correction[0])?, predictor[1].add(&correction[1])?]
            }
        };
        self.dynamics.check(&next)?;
        Ok(next)
    }

    /// `e^{Lh}u + hφ₁(Lh)·forcing`, the step of the linear system with a
    /// frozen forcing.
    pub fn forced_linear_step(&self, u: &[SpectralField; 2], forcing: &[SpectralField; 2]) -> [SpectralField; 2] {
        self.propagator.combine(u, &[(Weight::Exp, u), (Weight::W1, forcing)])
    }
}
