//! Exact per-mode propagator of `∂ₜû = −|k|² B û` and its Duhamel weights.

use std::collections::HashMap;

use nalgebra::{Matrix2, Matrix6};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::model::{linear_coefficients, ModelParams};

/// Relative eigenvalue gap below which the closed form is abandoned.
pub const GAP_THRESHOLD: f64 = 1e-8;

/// `φ₁(z) = (e^z − 1)/z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1.0 {
        taylor_phi(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// `φ₂(z) = (e^z − 1 − z)/z²`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 1.0 {
        taylor_phi(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `Σ_m z^m/(m + order)!`
fn taylor_phi(z: f64, order: u32) -> f64 {
    let mut term = 1.0 / (1..=order).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..30 {
        term *= z / f64::from(m + order);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(e^{Mh}, hφ₁(Mh), hφ₂(Mh))` of a real 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixFunctions {
    pub exp: Matrix2<f64>,
    pub w1: Matrix2<f64>,
    pub w2: Matrix2<f64>,
}

/// Real eigenvalues ordered `λ₁ >= λ₂`, or `None` when complex.
pub fn eigenvalues(m: &Matrix2<f64>) -> Option<(f64, f64)> {
    let tr = m.trace();
    let det = m.determinant();
    let disc = (m[(0, 0)] - m[(1, 1)]).powi(2) + 4.0 * m[(0, 1)] * m[(1, 0)];
    if disc < 0.0 {
        return None;
    }
    let gap = disc.sqrt();
    // the root with no cancellation first, the other from the product
    if tr <= 0.0 {
        let l2 = 0.5 * (tr - gap);
        let l1 = if l2 != 0.0 { det / l2 } else { 0.5 * (tr + gap) };
        Some((l1, l2))
    } else {
        let l1 = 0.5 * (tr + gap);
        Some((l1, det / l1))
    }
}

pub fn matrix_functions(m: &Matrix2<f64>, h: f64) -> MatrixFunctions {
    if m.iter().all(|&v| v == 0.0) {
        let id = Matrix2::identity();
        return MatrixFunctions {
            exp: id,
            w1: id * h,
            w2: id * (0.5 * h),
        };
    }
    match eigenvalues(m) {
        Some((l1, l2)) if (l1 - l2) > GAP_THRESHOLD * l1.abs().max(l2.abs()) => {
            let shifted = m - Matrix2::identity() * l2;
            let d = l1 - l2;
            let combine = |f2: f64, dd: f64| Matrix2::identity() * f2 + shifted * dd;
            // (e^{λ₁h} − e^{λ₂h})/(λ₁ − λ₂) = h e^{λ₁h} φ₁(−(λ₁ − λ₂)h)
            let dd = h * (l1 * h).exp() * phi1(-d * h);
            MatrixFunctions {
                exp: combine((l2 * h).exp(), dd),
                w1: combine(h * phi1(l2 * h), h * (phi1(l1 * h) - phi1(l2 * h)) / d),
                w2: combine(h * phi2(l2 * h), h * (phi2(l1 * h) - phi2(l2 * h)) / d),
            }
        }
        _ => augmented(m, h),
    }
}

/// Top block row of `exp([[Mh, I, 0], [0, 0, I], [0, 0, 0]])`.
fn augmented(m: &Matrix2<f64>, h: f64) -> MatrixFunctions {
    let mut a = Matrix6::<f64>::zeros();
    a.fixed_view_mut::<2, 2>(0, 0).copy_from(&(m * h));
    a.fixed_view_mut::<2, 2>(0, 2).copy_from(&Matrix2::identity());
    a.fixed_view_mut::<2, 2>(2, 4).copy_from(&Matrix2::identity());
    let e = a.exp();
    MatrixFunctions {
        exp: e.fixed_view::<2, 2>(0, 0).into_owned(),
        w1: e.fixed_view::<2, 2>(0, 2).into_owned() * h,
        w2: e.fixed_view::<2, 2>(0, 4).into_owned() * h,
    }
}

/// Per-mode `e^{M(k)Δt}`, `∫₀^{Δt} e^{M(k)s} ds` and the second ETD weight,
/// for `M(k) = −|k|² B`.
#[derive(Clone, Debug)]
pub struct LinearPropagator {
    grid: Grid,
    dt: f64,
    coefficients: [[f64; 2]; 2],
    /// Modes with equal `|k|²` share one entry.
    index: Vec<u32>,
    table: Vec<MatrixFunctions>,
}

impl LinearPropagator {
    pub fn new(grid: &Grid, coefficients: [[f64; 2]; 2], dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidTime(format!("dt must be positive, got {dt}")));
        }
        let b = Matrix2::new(
            coefficients[0][0],
            coefficients[0][1],
            coefficients[1][0],
            coefficients[1][1],
        );
        let mut seen: HashMap<u64, u32> = HashMap::new();
        let mut table = Vec::new();
        let index = grid
            .k_squared()
            .iter()
            .map(|&k2| {
                *seen.entry(k2.to_bits()).or_insert_with(|| {
                    table.push(matrix_functions(&(b * -k2), dt));
                    (table.len() - 1) as u32
                })
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            dt,
            coefficients,
            index,
            table,
        })
    }

    /// Propagator of the linearized a-form system.
    pub fn a_form(grid: &Grid, params: &ModelParams, dt: f64) -> Result<Self> {
        Self::new(grid, linear_coefficients(params, true), dt)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `M(k)` at a flat index.
    pub fn mode_matrix(&self, flat: usize) -> Matrix2<f64> {
        let c = &self.coefficients;
        Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1]) * -self.grid.k_squared()[flat]
    }

    pub fn functions(&self, flat: usize) -> &MatrixFunctions {
        &self.table[self.index[flat] as usize]
    }

    /// `e^{MΔt} u`.
    pub fn apply(&self, u: &[SpectralField; 2]) -> [SpectralField; 2] {
        self.combine(u, &[(Weight::Exp, u)])
    }

    /// `Σ W·v` over the given weight/operand pairs, per mode.
    pub(crate) fn combine(&self, like: &[SpectralField; 2], terms: &[(Weight, &[SpectralField; 2])]) -> [SpectralField; 2] {
        let len = self.grid.len();
        let mut out0 = vec![Complex64::new(0.0, 0.0); len];
        let mut out1 = vec![Complex64::new(0.0, 0.0); len];
        for (weight, v) in terms {
            let (v0, v1) = (v[0].coeffs(), v[1].coeffs());
            for i in 0..len {
                let f = self.functions(i);
                let w = match weight {
                    Weight::Exp => &f.exp,
                    Weight::W1 => &f.w1,
                    Weight::W2 => &f.w2,
                };
                out0[i] += w[(0, 0)] * v0[i] + w[(0, 1)] * v1[i];
                out1[i] += w[(1, 0)] * v0[i] + w[(1, 1)] * v1[i];
            }
        }
        let grid = like[0].grid();
        [
            SpectralField::new(grid, out0).expect("sized to grid"),
            SpectralField::new(grid, out1).expect("sized to grid"),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Weight {
    Exp,
    W1,
    W2,
}
