//! Periodic box `[0, L)^d` and its Fourier lattice.
//!
//! Values are stored row-major with axis 0 varying slowest. Along each axis
//! the storage index `i` maps to the integer mode `m = i` for `i < n/2` and
//! `m = i - n` otherwise, so `m` ranges over `{-n/2, ..., n/2 - 1}` and the
//! physical wavenumber is `k = (2π/L)·m`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Cheap-to-clone handle to a periodic grid with cached FFT plans and
/// wavenumber tables.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    modes: Vec<i64>,
    wavenumbers: Vec<f64>,
    k_squared: Vec<f64>,
    dealias_mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    /// Builds a grid with `n` points per axis in `dim` dimensions on a box of
    /// edge `length`.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }

        let modes: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let dk = 2.0 * PI / length;
        let wavenumbers: Vec<f64> = modes.iter().map(|&m| dk * m as f64).collect();

        let total = n.pow(dim as u32);
        let mut k_squared = Vec::with_capacity(total);
        let mut dealias_mask = Vec::with_capacity(total);
        let mut idx = [0usize; 3];
        for flat in 0..total {
            unflatten(flat, n, dim, &mut idx);
            let mut k2 = 0.0;
            let mut keep = true;
            for &i in &idx[..dim] {
                k2 += wavenumbers[i] * wavenumbers[i];
                // two-thirds rule: keep 3|m| <= n
                keep &= 3 * modes[i].unsigned_abs() as usize <= n;
            }
            k_squared.push(k2);
            dealias_mask.push(keep);
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                modes,
                wavenumbers,
                k_squared,
                dealias_mask,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Box edge length.
    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of grid points, `n^d`.
    pub fn len(&self) -> usize {
        self.inner.k_squared.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Physical cell spacing `L/n`.
    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Quadrature weight of one cell, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.inner.dim as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    /// Integer mode for a storage index along one axis.
    pub fn mode(&self, axis_index: usize) -> i64 {
        self.inner.modes[axis_index]
    }

    /// Wavenumber `(2π/L)·m` for a storage index along one axis.
    pub fn wavenumber(&self, axis_index: usize) -> f64 {
        self.inner.wavenumbers[axis_index]
    }

    /// `|k|²` per flat index.
    pub fn k_squared(&self) -> &[f64] {
        &self.inner.k_squared
    }

    /// Two-thirds dealiasing mask per flat index (`true` = retained).
    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.dealias_mask
    }

    /// Largest lattice wavenumber magnitude, `√d·π·n/L`.
    pub fn k_max(&self) -> f64 {
        (self.inner.dim as f64).sqrt() * PI * self.inner.n as f64 / self.inner.length
    }

    /// Splits a flat index into per-axis storage indices.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        unflatten(flat, self.inner.n, self.inner.dim, &mut idx);
        idx
    }

    /// Integer mode vector of a flat index (unused axes are zero).
    pub fn mode_vector(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0i64; 3];
        for axis in 0..self.inner.dim {
            m[axis] = self.inner.modes[idx[axis]];
        }
        m
    }

    /// Flat index of the lattice point with integer modes `m` (each reduced mod n).
    pub fn flat_index_of_mode(&self, m: [i64; 3]) -> usize {
        let n = self.inner.n as i64;
        let mut flat = 0usize;
        for &mi in &m[..self.inner.dim] {
            flat = flat * self.inner.n + mi.rem_euclid(n) as usize;
        }
        flat
    }

    /// Physical coordinates of a flat index.
    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let dx = self.dx();
        let mut x = [0.0; 3];
        for axis in 0..self.inner.dim {
            x[axis] = idx[axis] as f64 * dx;
        }
        x
    }

    /// Same grid (shared tables) or structurally identical.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.length == other.inner.length)
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.inverse
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

fn unflatten(mut flat: usize, n: usize, dim: usize, out: &mut [usize; 3]) {
    for axis in (0..dim).rev() {
        out[axis] = flat % n;
        flat /= n;
    }
}
