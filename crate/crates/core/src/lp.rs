//! Littlewood–Paley blocks and homogeneous Besov norms on the periodic box.
//!
//! The cutoff is `φ₀(r) = 1` for `r <= 1`, `0` for `r >= 7/6`, and in between
//!
//! ```text
//! φ₀(r) = g(1 - s) / (g(1 - s) + g(s)),   s = 6(r - 1),   g(x) = exp(-1/x)
//! ```
//!
//! with `φ(r) = φ₀(r) - φ₀(2r)`. Block `Δ_j` multiplies mode `k` by
//! `φ(2^{-j}|k|)`, `S_j` by `φ₀(2^{-j}|k|)`. Since `Σ_j φ(2^{-j}r)`
//! telescopes, the blocks sum to `u - mean(u)`. The `k = 0` mode is in no
//! block.

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::norms::lp_norm_of_values;

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Radial cutoff `φ₀`.
pub fn phi0(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 7.0 / 6.0 {
        0.0
    } else {
        let s = 6.0 * (r - 1.0);
        let (a, b) = (bump(1.0 - s), bump(s));
        a / (a + b)
    }
}

/// Annulus profile `φ(r) = φ₀(r) - φ₀(2r)`, supported in `[1/2, 7/6]`.
pub fn phi(r: f64) -> f64 {
    phi0(r) - phi0(2.0 * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// `Δ_j`
    Delta,
    /// `S_j`, low frequencies up to `7/6·2^j` (mean included).
    Low,
}

/// Sampled dyadic multipliers for one grid.
#[derive(Clone, Debug)]
pub struct DyadicFamily {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    /// `multipliers[j - j_min][flat] = φ(2^{-j}|k|)`.
    multipliers: Vec<Vec<f64>>,
}

impl DyadicFamily {
    pub fn new(grid: &Grid) -> Self {
        let j_min = grid.dk().log2().floor() as i32 - 1;
        let j_max = grid.k_max().log2().ceil() as i32 + 1;
        let kabs: Vec<f64> = grid.k_squared().iter().map(|k2| k2.sqrt()).collect();
        let multipliers = (j_min..=j_max)
            .map(|j| {
                let scale = (-j as f64).exp2();
                kabs.iter()
                    .enumerate()
                    .map(|(flat, &k)| if flat == 0 { 0.0 } else { phi(scale * k) })
                    .collect()
            })
            .collect();
        Self {
            grid: grid.clone(),
            j_min,
            j_max,
            multipliers,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// `φ(2^{-j}|k|)` per flat index, `None` outside the range.
    pub fn multiplier(&self, j: i32) -> Option<&[f64]> {
        if j < self.j_min || j > self.j_max {
            None
        } else {
            Some(&self.multipliers[(j - self.j_min) as usize])
        }
    }

    /// `max_{k≠0} |Σ_j φ(2^{-j}|k|) - 1|`.
    pub fn partition_residual(&self) -> f64 {
        (1..self.grid.len())
            .map(|flat| {
                let total: f64 = self.multipliers.iter().map(|m| m[flat]).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|φ_j φ_j'|` over modes for `|j - j'| > 1`.
    pub fn max_far_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, ma) in self.multipliers.iter().enumerate() {
            for mb in self.multipliers.iter().skip(a + 2) {
                for (x, y) in ma.iter().zip(mb) {
                    worst = worst.max((x * y).abs());
                }
            }
        }
        worst
    }

    /// Block `Δ_j u` or `S_j u` of a spectrum.
    pub fn block(&self, u: &SpectralField, j: i32, kind: BlockKind) -> SpectralField {
        match kind {
            BlockKind::Delta => match self.multiplier(j) {
                Some(m) => u.apply_multiplier(|flat| m[flat]),
                None => SpectralField::zeros(u.grid()),
            },
            BlockKind::Low => {
                let scale = (-j as f64).exp2();
                let k2 = self.grid.k_squared();
                u.apply_multiplier(|flat| phi0(scale * k2[flat].sqrt()))
            }
        }
    }

    /// `(c₁, c₂)`: extreme values over nonzero lattice modes of
    /// `(Σ_j 2^{2js} φ²(2^{-j}|k|))^{1/2} / |k|^s`, which bound
    /// `‖u‖_{Ḃ^s_{2,2}} / ‖u‖_{Ḣ^s}`.
    pub fn sobolev_equivalence_bounds(&self, s: f64) -> (f64, f64) {
        let k2 = self.grid.k_squared();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for flat in 1..self.grid.len() {
            let sum: f64 = self
                .j_range()
                .zip(&self.multipliers)
                .map(|(j, m)| (2.0 * s * j as f64).exp2() * m[flat] * m[flat])
                .sum();
            let c = sum.sqrt() / k2[flat].powf(s / 2.0);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo, hi)
    }
}

/// `Δ_j u` or `S_j u` of a real field.
pub fn dyadic_block(family: &DyadicFamily, u: &RealField, j: i32, kind: BlockKind) -> Result<RealField> {
    check_grid(family, u.grid())?;
    Ok(family.block(&u.forward(), j, kind).inverse())
}

fn check_grid(family: &DyadicFamily, grid: &Grid) -> Result<()> {
    if family.grid.same_as(grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Regularity `s`, integrability `p` and summation exponent `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let spec = Self { s, p, r };
        spec.validate()?;
        Ok(spec)
    }

    /// The critical space `Ḃ^{3/2}_{2,1}`.
    pub fn critical() -> Self {
        Self {
            s: 1.5,
            p: 2.0,
            r: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidNorm(format!("Besov s must be finite, got {}", self.s)));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::InvalidNorm(format!("Besov p must be >= 1, got {}", self.p)));
        }
        if self.r.is_nan() || self.r < 1.0 {
            return Err(Error::InvalidNorm(format!("Besov r must be >= 1, got {}", self.r)));
        }
        Ok(())
    }
}

/// One row of a block report: `2^{js}‖Δ_j u‖_{L^p}` and the running norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockRow {
    pub j: i32,
    pub weighted: f64,
    pub cumulative: f64,
}

fn block_lp(family: &DyadicFamily, u: &SpectralField, j: i32, p: f64) -> Result<f64> {
    let m = family.multiplier(j).expect("j in range");
    if p == 2.0 {
        let sum: f64 = u
            .coeffs()
            .iter()
            .zip(m)
            .map(|(c, w)| w * w * c.norm_sqr())
            .sum();
        return Ok((sum * family.grid.volume()).sqrt());
    }
    let block = u.apply_multiplier(|flat| m[flat]).inverse();
    lp_norm_of_values(block.values(), family.grid.cell_volume(), p)
}

fn accumulate(acc: f64, term: f64, r: f64) -> f64 {
    if r.is_infinite() {
        acc.max(term)
    } else {
        acc + term.powf(r)
    }
}

fn finish(acc: f64, r: f64) -> f64 {
    if r.is_infinite() || r == 1.0 {
        acc
    } else {
        acc.powf(1.0 / r)
    }
}

/// Per-block contributions of `‖u‖_{Ḃ^s_{p,r}}`, lowest block first.
pub fn besov_blocks(family: &DyadicFamily, u: &SpectralField, spec: BesovSpec) -> Result<Vec<BlockRow>> {
    spec.validate()?;
    check_grid(family, u.grid())?;
    let mut acc = 0.0;
    family
        .j_range()
        .map(|j| {
            let weighted = (spec.s * j as f64).exp2() * block_lp(family, u, j, spec.p)?;
            acc = accumulate(acc, weighted, spec.r);
            Ok(BlockRow {
                j,
                weighted,
                cumulative: finish(acc, spec.r),
            })
        })
        .collect()
}

/// `‖u‖_{Ḃ^s_{p,r}}` from a spectrum.
pub fn besov_norm_spectral(family: &DyadicFamily, u: &SpectralField, spec: BesovSpec) -> Result<f64> {
    Ok(besov_blocks(family, u, spec)?
        .last()
        .map_or(0.0, |row| row.cumulative))
}

/// `‖u‖_{Ḃ^s_{p,r}}`.
pub fn besov_norm(family: &DyadicFamily, u: &RealField, spec: BesovSpec) -> Result<f64> {
    u.check_finite()?;
    besov_norm_spectral(family, &u.forward(), spec)
}

/// `(Σ_j ‖Δ_j u‖²_{L²}, ‖u - mean(u)‖²_{L²})`. Because `Σ_j φ_j² ∈ [1/2, 1]`
/// the first lies between half the second and the second.
pub fn almost_orthogonality(family: &DyadicFamily, u: &SpectralField) -> Result<(f64, f64)> {
    check_grid(family, u.grid())?;
    let blocks: f64 = family
        .j_range()
        .map(|j| block_lp(family, u, j, 2.0).map(|v| v * v))
        .sum::<Result<f64>>()?;
    let total: f64 = u.coeffs().iter().skip(1).map(|c| c.norm_sqr()).sum::<f64>() * family.grid.volume();
    Ok((blocks, total))
}

/// `‖∇Δ_j u‖_{L^p} / (2^j ‖Δ_j u‖_{L^p})` with the Euclidean gradient
/// magnitude inside the `L^p` norm. Blocks below `1e-12` of `‖u‖_{L^p}` count
/// as zero.
pub fn bernstein_check(family: &DyadicFamily, u: &RealField, j: i32, p: f64) -> Result<f64> {
    check_grid(family, u.grid())?;
    let block = family.block(&u.forward(), j, BlockKind::Delta);
    let values = block.inverse();
    let base = lp_norm_of_values(values.values(), family.grid.cell_volume(), p)?;
    let whole = lp_norm_of_values(u.values(), family.grid.cell_volume(), p)?;
    if !(base > 1e-12 * whole) {
        return Err(Error::Degenerate(format!("block {j} of the input is zero")));
    }
    let grads: Vec<RealField> = block.gradient().iter().map(|g| g.inverse()).collect();
    let magnitude: Vec<f64> = (0..family.grid.len())
        .map(|i| grads.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt())
        .collect();
    let top = lp_norm_of_values(&magnitude, family.grid.cell_volume(), p)?;
    Ok(top / ((j as f64).exp2() * base))
}

/// Product estimates, all with `p = 2` and a common `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProductLaw {
    /// `‖uv‖_{Ḃ^s} ≲ ‖u‖_{L^∞}‖v‖_{Ḃ^s} + ‖v‖_{L^∞}‖u‖_{Ḃ^s}`, `s > 0`.
    Linfty { s: f64 },
    /// `‖uv‖_{Ḃ^{s₁}} ≲ ‖u‖_{Ḃ^{s₁}}‖v‖_{Ḃ^{s₂}}`, `s₁ <= 3/2 < s₂`, `s₁ + s₂ > 0`.
    Mixed { s1: f64, s2: f64 },
    /// `‖uv‖_{Ḃ^{s₁+s₂-3/2}} ≲ ‖u‖_{Ḃ^{s₁}}‖v‖_{Ḃ^{s₂}}`, `s₁, s₂ < 3/2`
    /// (or `<=` when `r = 1`), `s₁ + s₂ > 0`.
    Sum { s1: f64, s2: f64 },
    /// `‖uv‖_{Ḃ^s} ≲ ‖u‖_{Ḃ^s}(‖v‖_{Ḃ^{3/2}} + ‖v‖_{L^∞})`, `|s| < 3/2`.
    Intersection { s: f64 },
    /// `‖uv‖_{Ḃ^{3/2}_{2,1}} ≲ ‖u‖_{Ḃ^{3/2}_{2,1}}‖v‖_{Ḃ^{3/2}_{2,1}}`.
    Algebra,
}

impl ProductLaw {
    fn validate(&self, r: f64) -> Result<()> {
        let ok = match *self {
            Self::Linfty { s } => s > 0.0,
            Self::Mixed { s1, s2 } => s1 <= 1.5 && s2 > 1.5 && s1 + s2 > 0.0,
            Self::Sum { s1, s2 } => {
                let cap = |x: f64| if r == 1.0 { x <= 1.5 } else { x < 1.5 };
                cap(s1) && cap(s2) && s1 + s2 > 0.0
            }
            Self::Intersection { s } => s.abs() < 1.5,
            Self::Algebra => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidNorm(format!("indices outside the range of {self:?} (r = {r})")))
        }
    }
}

/// Measured constant `‖uv‖ / (right-hand side)` for one law.
pub fn product_law_check(
    family: &DyadicFamily,
    u: &RealField,
    v: &RealField,
    law: ProductLaw,
    r: f64,
) -> Result<f64> {
    let r = if matches!(law, ProductLaw::Algebra) { 1.0 } else { r };
    law.validate(r)?;
    u.check_same_grid(v)?;
    let uv = u.zip_map(v, |a, b| a * b)?;
    let b = |f: &RealField, s: f64| besov_norm(family, f, BesovSpec::new(s, 2.0, r)?);
    let (lhs, rhs) = match law {
        ProductLaw::Linfty { s } => (
            b(&uv, s)?,
            u.max_abs() * b(v, s)? + v.max_abs() * b(u, s)?,
        ),
        ProductLaw::Mixed { s1, s2 } => (b(&uv, s1)?, b(u, s1)? * b(v, s2)?),
        ProductLaw::Sum { s1, s2 } => (b(&uv, s1 + s2 - 1.5)?, b(u, s1)? * b(v, s2)?),
        ProductLaw::Intersection { s } => (b(&uv, s)?, b(u, s)? * (b(v, 1.5)? + v.max_abs())),
        ProductLaw::Algebra => (b(&uv, 1.5)?, b(u, 1.5)? * b(v, 1.5)?),
    };
    if !(rhs > 0.0) {
        return Err(Error::Degenerate(format!("right-hand side of {law:?} vanishes")));
    }
    Ok(lhs / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use std::f64::consts::PI;

    #[test]
    fn profile_values() {
        assert_eq!(phi0(1.0), 1.0);
        assert_eq!(phi0(7.0 / 6.0), 0.0);
        assert!((phi0(1.0 + 1.0 / 12.0) - 0.5).abs() < 1e-15);
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(0.49), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = phi0(1.0 + i as f64 / 600.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn range_covers_lattice() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        assert!(fam.j_min() <= -1 && fam.j_max() >= 6);
        assert!(fam.partition_residual() <= 1e-12);
        assert_eq!(fam.max_far_overlap(), 0.0);
    }

    #[test]
    fn cosine_lives_in_block_zero() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        let u = RealField::from_fn(&g, |x| x[0].cos());
        for j in fam.j_range() {
            let b = dyadic_block(&fam, &u, j, BlockKind::Delta).unwrap();
            let expected = phi((-j as f64).exp2());
            for (bv, uv) in b.values().iter().zip(u.values()) {
                assert!((bv - expected * uv).abs() < 1e-14);
            }
        }
        for s in [0.0, 0.5, 1.5] {
            let n = besov_norm(&fam, &u, BesovSpec::new(s, 2.0, 1.0).unwrap()).unwrap();
            assert!((n - PI.sqrt() * (phi(1.0) + s.exp2() * phi(0.5))).abs() < 1e-13);
        }
    }

    #[test]
    fn low_block_keeps_mean() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        let u = RealField::from_fn(&g, |x| 2.0 + x[0].cos() + (4.0 * x[0]).cos());
        let s = dyadic_block(&fam, &u, 1, BlockKind::Low).unwrap();
        for i in 0..g.len() {
            let x = g.coordinates(i)[0];
            assert!((s.values()[i] - 2.0 - x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn blocks_sum_to_fluctuation() {
        let g = Grid::new(2, 32, 3.0).unwrap();
        let fam = DyadicFamily::new(&g);
        let u = random_field(&g, 8, 15, 1.0).map(|v| v + 0.7);
        let mut sum = vec![0.0; g.len()];
        for j in fam.j_range() {
            let b = dyadic_block(&fam, &u, j, BlockKind::Delta).unwrap();
            for (s, v) in sum.iter_mut().zip(b.values()) {
                *s += v;
            }
        }
        let mean = u.mean();
        for (s, v) in sum.iter().zip(u.values()) {
            assert!((s - (v - mean)).abs() < 1e-12);
        }
        assert!(dyadic_block(&fam, &u, fam.j_max() + 3, BlockKind::Delta)
            .unwrap()
            .max_abs()
            == 0.0);
    }

    #[test]
    fn almost_orthogonality_bounds_and_a_transition_mode() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        // |k| = 9 sits at 9/8 ∈ (1, 7/6) for j = 3: two blocks share it and
        // Σ_j φ_j² < 1, so the block sum falls strictly below ‖u‖².
        let u = RealField::from_fn(&g, |x| (9.0 * x[0]).cos()).forward();
        let (blocks, total) = almost_orthogonality(&fam, &u).unwrap();
        assert!(blocks < total * (1.0 - 1e-3));
        assert!(2.0 * blocks >= total);
        let u = random_field(&g, 3, 30, 1.0).forward();
        let (blocks, total) = almost_orthogonality(&fam, &u).unwrap();
        assert!(blocks <= total * (1.0 + 1e-12) && 2.0 * blocks >= total);
    }

    #[test]
    fn bernstein_single_mode() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        let u = RealField::from_fn(&g, |x| x[0].cos());
        let r2 = bernstein_check(&fam, &u, 0, 2.0).unwrap();
        let rinf = bernstein_check(&fam, &u, 0, f64::INFINITY).unwrap();
        assert!((r2 - 1.0).abs() < 1e-13);
        assert!((rinf - r2).abs() < 1e-12);
        assert!(matches!(bernstein_check(&fam, &u, 3, 2.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn degenerate_product() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let fam = DyadicFamily::new(&g);
        let u = RealField::from_fn(&g, |x| x[0].cos());
        let zero = RealField::zeros(&g);
        assert!(matches!(
            product_law_check(&fam, &u, &zero, ProductLaw::Algebra, 1.0),
            Err(Error::Degenerate(_))
        ));
        let c = product_law_check(&fam, &u, &u, ProductLaw::Algebra, 1.0).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert!(product_law_check(&fam, &u, &u, ProductLaw::Linfty { s: -1.0 }, 1.0).is_err());
    }
}
