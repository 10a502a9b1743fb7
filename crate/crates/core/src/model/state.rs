//! The three formulations of a solution: primitive `(ρ, θ)`, tilde
//! `(ρ - ρ̄, θ - θ̄)` and a-form `(1/ρ - 1, θ - 1)`.

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::model::params::ModelParams;

#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveState {
    pub rho: RealField,
    pub theta: RealField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TildeState {
    pub rho: RealField,
    pub theta: RealField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AState {
    pub a: RealField,
    pub theta: RealField,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Primitive,
    Tilde,
    AForm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Primitive(PrimitiveState),
    Tilde(TildeState),
    AForm(AState),
}

pub(crate) fn check_positive(quantity: &'static str, f: &RealField) -> Result<()> {
    f.check_finite()?;
    let (index, value) = f.min_with_index();
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Positivity {
            quantity,
            index,
            value,
        })
    }
}

/// `1 + a >= floor` everywhere.
pub(crate) fn check_floor(values: &[f64], floor: f64) -> Result<()> {
    for (index, &a) in values.iter().enumerate() {
        let v = 1.0 + a;
        if !(v >= floor) {
            return Err(Error::DenominatorFloor {
                index,
                value: v,
                floor,
            });
        }
    }
    Ok(())
}

impl PrimitiveState {
    /// Checks `ρ > 0` and `θ > 0` pointwise.
    pub fn new(rho: RealField, theta: RealField) -> Result<Self> {
        rho.check_same_grid(&theta)?;
        check_positive("density", &rho)?;
        check_positive("temperature", &theta)?;
        Ok(Self { rho, theta })
    }

    pub fn equilibrium(grid: &crate::grid::Grid, params: &ModelParams) -> Self {
        Self {
            rho: RealField::constant(grid, params.rho_bar),
            theta: RealField::constant(grid, params.theta_bar),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("density", &self.rho)?;
        check_positive("temperature", &self.theta)
    }

    pub fn to_tilde(&self, params: &ModelParams) -> TildeState {
        TildeState {
            rho: self.rho.map(|r| r - params.rho_bar),
            theta: self.theta.map(|t| t - params.theta_bar),
        }
    }

    /// `a = 1/ρ - 1`, `θ̃ = θ - 1`; requires `ρ > ε_a`.
    pub fn to_a_form(&self, params: &ModelParams) -> Result<AState> {
        params.require_unit_equilibrium()?;
        let (index, value) = self.rho.min_with_index();
        if !(value > params.eps_a) {
            return Err(Error::Positivity {
                quantity: "density above the a-form floor",
                index,
                value,
            });
        }
        let state = AState {
            a: self.rho.map(|r| 1.0 / r - 1.0),
            theta: self.theta.map(|t| t - 1.0),
        };
        check_floor(state.a.values(), params.eps_a)?;
        Ok(state)
    }
}

impl TildeState {
    pub fn to_primitive(&self, params: &ModelParams) -> Result<PrimitiveState> {
        PrimitiveState::new(
            self.rho.map(|r| r + params.rho_bar),
            self.theta.map(|t| t + params.theta_bar),
        )
    }
}

impl AState {
    /// Checks `1 + a >= ε_a` pointwise.
    pub fn new(a: RealField, theta: RealField, params: &ModelParams) -> Result<Self> {
        a.check_same_grid(&theta)?;
        a.check_finite()?;
        theta.check_finite()?;
        check_floor(a.values(), params.eps_a)?;
        Ok(Self { a, theta })
    }

    pub fn zeros(grid: &crate::grid::Grid) -> Self {
        Self {
            a: RealField::zeros(grid),
            theta: RealField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &crate::grid::Grid {
        self.a.grid()
    }

    /// `ρ = 1/(1 + a)`, `θ = 1 + θ̃`.
    pub fn to_primitive(&self, params: &ModelParams) -> Result<PrimitiveState> {
        params.require_unit_equilibrium()?;
        check_floor(self.a.values(), params.eps_a)?;
        PrimitiveState::new(
            self.a.map(|a| 1.0 / (1.0 + a)),
            self.theta.map(|t| t + 1.0),
        )
    }

    pub fn to_tilde(&self, params: &ModelParams) -> Result<TildeState> {
        Ok(self.to_primitive(params)?.to_tilde(params))
    }
}

impl State {
    pub fn formulation(&self) -> Formulation {
        match self {
            Self::Primitive(_) => Formulation::Primitive,
            Self::Tilde(_) => Formulation::Tilde,
            Self::AForm(_) => Formulation::AForm,
        }
    }

    pub fn to_primitive(&self, params: &ModelParams) -> Result<PrimitiveState> {
        match self {
            Self::Primitive(p) => {
                p.validate()?;
                Ok(p.clone())
            }
            Self::Tilde(t) => t.to_primitive(params),
            Self::AForm(a) => a.to_primitive(params),
        }
    }
}

/// Exact pointwise change of variables between formulations.
pub fn change_variables(state: &State, target: Formulation, params: &ModelParams) -> Result<State> {
    let primitive = state.to_primitive(params)?;
    Ok(match target {
        Formulation::Primitive => State::Primitive(primitive),
        Formulation::Tilde => State::Tilde(primitive.to_tilde(params)),
        Formulation::AForm => State::AForm(primitive.to_a_form(params)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::params::Kappa3Profile;
    use crate::random::random_field;

    fn params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, Kappa3Profile::Zero).unwrap()
    }

    #[test]
    fn equilibrium_maps_to_zero_a() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let p = PrimitiveState::equilibrium(&g, &params());
        let a = p.to_a_form(&params()).unwrap();
        assert!(a.a.values().iter().all(|&v| v == 0.0));
        assert!(a.theta.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn density_two_gives_minus_half() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let p = PrimitiveState::new(RealField::constant(&g, 2.0), RealField::constant(&g, 1.0)).unwrap();
        let a = p.to_a_form(&params()).unwrap();
        assert!(a.a.values().iter().all(|&v| v == -0.5));
    }

    #[test]
    fn round_trip_primitive_a_form() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let rho = random_field(&g, 1, 8, 0.8).map(|v| 1.0 + v);
        let theta = random_field(&g, 2, 8, 0.5).map(|v| 1.0 + v);
        let p = PrimitiveState::new(rho, theta).unwrap();
        let back = State::AForm(p.to_a_form(&params()).unwrap())
            .to_primitive(&params())
            .unwrap();
        for (x, y) in p.rho.values().iter().zip(back.rho.values()) {
            assert!((x - y).abs() <= 1e-14);
        }
        for (x, y) in p.theta.values().iter().zip(back.theta.values()) {
            assert!((x - y).abs() <= 1e-14);
        }
        let tilde = change_variables(&State::Primitive(p.clone()), Formulation::Tilde, &params()).unwrap();
        let again = change_variables(&tilde, Formulation::Primitive, &params()).unwrap();
        assert_eq!(again.formulation(), Formulation::Primitive);
    }

    #[test]
    fn positivity_violations_are_reported() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut v = vec![1.0; 8];
        v[3] = -0.2;
        let rho = RealField::new(&g, v).unwrap();
        let err = PrimitiveState::new(rho, RealField::constant(&g, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Positivity { index: 3, .. }));

        let a = RealField::constant(&g, -0.95);
        let err = AState::new(a, RealField::zeros(&g), &params()).unwrap_err();
        assert!(matches!(err, Error::DenominatorFloor { index: 0, .. }));

        let low = PrimitiveState::new(RealField::constant(&g, 0.05), RealField::constant(&g, 1.0)).unwrap();
        assert!(low.to_a_form(&params()).is_err());
    }

    #[test]
    fn a_form_needs_unit_equilibrium() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let p = params().with_equilibrium(2.0, 1.0).unwrap();
        let s = PrimitiveState::equilibrium(&g, &p);
        assert!(matches!(s.to_a_form(&p), Err(Error::NonUnitEquilibrium { .. })));
    }
}
