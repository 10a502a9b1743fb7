//! Counter-based random numbers for reproducible initial data.
//!
//! Draw `i` of stream `seed` is the SplitMix64 finaliser applied to
//! `seed + (i + 1)·0x9E3779B97F4A7C15` (wrapping), and the uniform variate is
//! the top 53 bits scaled by `2^-53`. Any implementation of those two lines
//! reproduces every random field in this crate bit for bit.

use num_complex::Complex64;

use crate::field::{RealField, SpectralField};
use crate::grid::Grid;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stateless generator: each draw is a pure function of `(seed, counter)`.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Derived stream, e.g. one per corpus member.
    pub fn substream(&self, index: u64) -> Self {
        Self::new(self.bits(index ^ 0xA5A5_A5A5_0000_0000))
    }

    pub fn bits(&self, counter: u64) -> u64 {
        let mut z = self
            .seed
            .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&self, counter: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform(counter)
    }
}

/// Zero-mean random field with modes `|m_j| <= band` on every axis, scaled so
/// that `max |f| = amplitude` (zero amplitude gives the zero field).
pub fn random_field(grid: &Grid, seed: u64, band: usize, amplitude: f64) -> RealField {
    let raw = random_spectrum(grid, seed, band).inverse();
    let peak = raw.max_abs();
    if peak == 0.0 || amplitude == 0.0 {
        return RealField::zeros(grid);
    }
    raw.map(|v| v * amplitude / peak)
}

/// Hermitian random spectrum on the band `|m_j| <= band`, zero at `k = 0`.
///
/// The coefficient of mode `m` is drawn from counters `2·key(c)` and
/// `2·key(c) + 1`, where `c` is the lexicographically larger of `m` and `-m`
/// and `key` packs `m_j + 2^20` into 21-bit fields (axis 0 highest). Draws
/// depend on the integer mode only, so a seed describes the same function
/// on every grid that resolves its band.
pub fn random_spectrum(grid: &Grid, seed: u64, band: usize) -> SpectralField {
    let rng = CounterRng::new(seed);
    let band = band as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for flat in 1..grid.len() {
        let m = grid.mode_vector(flat);
        if m.iter().any(|mi| mi.abs() > band) {
            continue;
        }
        let mirror = grid.flat_index_of_mode([-m[0], -m[1], -m[2]]);
        let mm = grid.mode_vector(mirror);
        let canonical = if m >= mm { m } else { mm };
        let base = 2 * mode_key(canonical);
        let re = rng.uniform_in(base, -1.0, 1.0);
        coeffs[flat] = if flat == mirror {
            Complex64::new(re, 0.0)
        } else {
            let im = rng.uniform_in(base + 1, -1.0, 1.0);
            if m == canonical {
                Complex64::new(re, im)
            } else {
                Complex64::new(re, -im)
            }
        };
    }
    SpectralField::new(grid, coeffs).expect("length matches grid")
}

fn mode_key(m: [i64; 3]) -> u64 {
    const OFFSET: i64 = 1 << 20;
    m.iter()
        .fold(0u64, |acc, &mi| (acc << 21) | (mi + OFFSET) as u64)
}
