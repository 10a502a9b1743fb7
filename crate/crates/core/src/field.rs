//! Scalar fields in physical and Fourier representation.
//!
//! Forward transform normalisation: the coefficient of mode `k` is
//! `(1/n^d) Σ_x f(x) e^{-ik·x}`, so a constant field maps to an amplitude-1
//! coefficient at `k = 0`. The inverse transform is the plain sum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Real scalar field sampled on the grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

/// Complex Fourier coefficients, one per lattice wavenumber.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every grid point (unused coordinates are zero).
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coordinates(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// First non-finite value, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Box integral by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `(index, value)` of the smallest entry.
    pub fn min_with_index(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn forward(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform_in_place(&self.grid, &mut coeffs, false);
        let norm = 1.0 / self.grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of the integer mode vector `m`.
    pub fn coefficient(&self, m: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.flat_index_of_mode(m)]
    }

    /// Inverse transform; the imaginary roundoff is discarded.
    pub fn inverse(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        transform_in_place(&self.grid, &mut buf, true);
        RealField {
            grid: self.grid.clone(),
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Multiplies every coefficient by a real multiplier given per flat index.
    pub fn apply_multiplier(&self, mult: impl Fn(usize) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * mult(i))
                .collect(),
        }
    }

    /// Multiplier `ik_j` along `axis`. The Nyquist mode is zeroed so the
    /// derivative of a real field stays real.
    pub fn derivative(&self, axis: usize) -> Self {
        let grid = &self.grid;
        let n = grid.n();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, &c)| {
                let i = grid.unflatten(flat)[axis];
                if i == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, grid.wavenumber(i))
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Gradient components, one per axis.
    pub fn gradient(&self) -> Vec<SpectralField> {
        (0..self.grid.dim()).map(|axis| self.derivative(axis)).collect()
    }

    /// Multiplier `-|k|²`.
    pub fn laplacian(&self) -> Self {
        let k2 = self.grid.k_squared();
        self.apply_multiplier(|i| -k2[i])
    }

    /// Two-thirds rule: zeroes every mode with some `|m_j| > n/3`.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        for (c, &keep) in self.coeffs.iter_mut().zip(self.grid.dealias_mask()) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.apply_multiplier(|_| s)
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &SpectralField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Spectral interpolation onto another resolution of the same box.
    /// Modes with `|m_j| < n/2` on both grids are copied, the rest are zero.
    pub fn resample(&self, target: &Grid) -> Result<Self> {
        if target.dim() != self.grid.dim() || target.length() != self.grid.length() {
            return Err(Error::GridMismatch);
        }
        let limit = (self.grid.n().min(target.n()) / 2) as i64;
        let mut out = Self::zeros(target);
        for (flat, c) in self.coeffs.iter().enumerate() {
            let m = self.grid.mode_vector(flat);
            if m.iter().all(|mi| mi.abs() < limit) {
                out.coeffs[target.flat_index_of_mode(m)] = *c;
            }
        }
        Ok(out)
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = &self.grid;
        (0..grid.len())
            .map(|flat| {
                let m = grid.mode_vector(flat);
                let mirror = grid.flat_index_of_mode([-m[0], -m[1], -m[2]]);
                (self.coeffs[flat] - self.coeffs[mirror].conj()).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Unnormalised n-dimensional transform, one axis at a time.
pub(crate) fn transform_in_place(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let dim = grid.dim();
    let total = data.len();
    let plan = if inverse {
        grid.inverse_plan()
    } else {
        grid.forward_plan()
    };
    let parallel = total >= PARALLEL_THRESHOLD;
    // each task handles at least this many contiguous lines
    let chunk = n * (total / n / rayon::current_num_threads().max(1)).max(1);

    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            if parallel {
                data.par_chunks_mut(chunk).for_each(|c| plan.process(c));
            } else {
                plan.process(data);
            }
            continue;
        }
        let block = n * stride;
        let mut lines = vec![Complex64::new(0.0, 0.0); total];
        for (b, src) in data.chunks(block).enumerate() {
            let dst = &mut lines[b * block..(b + 1) * block];
            for t in 0..n {
                for i in 0..stride {
                    dst[i * n + t] = src[t * stride + i];
                }
            }
        }
        if parallel {
            lines.par_chunks_mut(chunk).for_each(|c| plan.process(c));
        } else {
            plan.process(&mut lines);
        }
        for (b, dst) in data.chunks_mut(block).enumerate() {
            let src = &lines[b * block..(b + 1) * block];
            for t in 0..n {
                for i in 0..stride {
                    dst[t * stride + i] = src[i * n + t];
                }
            }
        }
    }
}
