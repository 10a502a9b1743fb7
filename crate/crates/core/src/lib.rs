//! Pseudo-spectral simulation and verification toolkit for the
//! non-isothermal ideal gas system
//!
//! ```text
//! ∂ₜρ = κ₁Δ(ρθ)
//! κ₂∂ₜ(ρθ) − κ₁(κ₁+κ₂)∇·(θ∇(ρθ)) = ∇·(κ₃(θ)∇θ)
//! ```
//!
//! on the periodic box `[0, L)^d`.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fixedpoint;
pub mod grid;
pub mod integrator;
pub mod lp;
pub mod model;
pub mod norms;
pub mod random;
pub mod snapshot;

mod pseudo;

pub use error::{Error, Result};
pub use field::{RealField, SpectralField};
pub use grid::Grid;
pub use norms::{field_norm, NormKind};
