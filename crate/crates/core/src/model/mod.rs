//! Model physics: parameters, state functions, the three formulations and
//! their right-hand sides.

pub mod nonlinear;
pub mod params;
pub mod rhs;
pub mod state;
pub mod thermo;

pub use nonlinear::{difference_fg, nonlinear_fg, nonlinear_fg_spectral, DifferenceFG};
pub use params::{Kappa3Profile, ModelParams, DEFAULT_EPS_A};
pub use rhs::{linear_coefficients, rhs_a_form, rhs_primitive, rhs_tilde, Tendency};
pub use state::{change_variables, AState, Formulation, PrimitiveState, State, TildeState};
pub use thermo::{darcy_and_production, state_functions, DarcyProduction, StateFunctions};
