//! Helpers for pseudo-spectral evaluation: derivatives come from the
//! spectrum, products are formed pointwise, results are projected back.

use crate::field::{RealField, SpectralField};
use crate::grid::Grid;

/// A field together with its gradient and Laplacian, all in physical space.
pub(crate) struct Jet {
    pub value: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub lap: Vec<f64>,
}

impl Jet {
    pub fn from_spectrum(s: &SpectralField) -> Self {
        Self::with_value(s, s.inverse().into_values())
    }

    /// Keeps the caller's exact samples as the value.
    pub fn from_field(f: &RealField) -> Self {
        Self::with_value(&f.forward(), f.values().to_vec())
    }

    fn with_value(s: &SpectralField, value: Vec<f64>) -> Self {
        Self {
            value,
            grad: s
                .gradient()
                .iter()
                .map(|g| g.inverse().into_values())
                .collect(),
            lap: s.laplacian().inverse().into_values(),
        }
    }

    pub fn grad_dot(&self, other: &Jet, i: usize) -> f64 {
        self.grad.iter().zip(&other.grad).map(|(a, b)| a[i] * b[i]).sum()
    }

    pub fn grad_sq(&self, i: usize) -> f64 {
        self.grad.iter().map(|a| a[i] * a[i]).sum()
    }
}

/// Forward transform of pointwise values followed by the two-thirds filter.
pub(crate) fn project(grid: &Grid, values: Vec<f64>) -> SpectralField {
    let mut s = RealField::new(grid, values)
        .expect("values sized to grid")
        .forward();
    s.dealias_in_place();
    s
}

/// Spectral divergence of a vector field given by physical components; each
/// component is projected before differentiation.
pub(crate) fn divergence(grid: &Grid, components: Vec<Vec<f64>>) -> SpectralField {
    let mut acc = SpectralField::zeros(grid);
    for (axis, comp) in components.into_iter().enumerate() {
        let d = project(grid, comp).derivative(axis);
        for (a, b) in acc.coeffs_mut().iter_mut().zip(d.coeffs()) {
            *a += b;
        }
    }
    acc
}
