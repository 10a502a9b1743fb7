//! The nonlinearities `F(b, τ)`, `G(b, τ)` of the a-form system and their
//! difference expansions.

use crate::error::Result;
use crate::field::{RealField, SpectralField};
use crate::grid::Grid;
use crate::model::params::ModelParams;
use crate::model::state::check_floor;
use crate::pseudo::{project, Jet};

/// Dealiased spectra of `F` and `G`.
#[derive(Clone, Debug)]
pub(crate) struct FG {
    pub f: SpectralField,
    pub g: SpectralField,
}

fn f_value(k1: f64, b: &Jet, t: &Jet, i: usize) -> f64 {
    let (bv, tv) = (b.value[i], t.value[i]);
    -2.0 * k1 * (tv + 1.0) / (1.0 + bv) * b.grad_sq(i) + 2.0 * k1 * b.grad_dot(t, i)
        - k1 * bv * t.lap[i]
        + k1 * tv * b.lap[i]
}

fn g_value(params: &ModelParams, b: &Jet, t: &Jet, i: usize) -> f64 {
    let (k1, k2, k3) = (params.kappa1, params.kappa2, params.kappa3_bar);
    let (bv, tv) = (b.value[i], t.value[i]);
    let inv = 1.0 / (1.0 + bv);
    let tp = tv + 1.0;
    let gb2 = b.grad_sq(i);
    let gt2 = t.grad_sq(i);
    let profile = params.kappa3_var;
    2.0 * k1 * k1 * tp * tp * inv * inv * gb2
        - (3.0 * k1 * k1 + k1 * k2) * tp * inv * b.grad_dot(t, i)
        - k1 * k1 * (tv * tv + 2.0 * tv) * inv * b.lap[i]
        + k1 * k1 * bv * inv * b.lap[i]
        + k3 * bv * t.lap[i]
        + k1 * k1 * tv * t.lap[i]
        + (1.0 + bv) * (profile.derivative(tv) * gt2 + profile.value(tv) * t.lap[i])
        + k1 * (k1 + k2) * gt2
}

pub(crate) fn fg_from_jets(grid: &Grid, b: &Jet, t: &Jet, params: &ModelParams) -> Result<FG> {
    check_floor(&b.value, params.eps_a)?;
    let len = grid.len();
    let f = (0..len).map(|i| f_value(params.kappa1, b, t, i)).collect();
    let g = (0..len).map(|i| g_value(params, b, t, i)).collect();
    Ok(FG {
        f: project(grid, f),
        g: project(grid, g),
    })
}

/// `(F(b, τ), G(b, τ))` on the grid.
pub fn nonlinear_fg(b: &RealField, tau: &RealField, params: &ModelParams) -> Result<(RealField, RealField)> {
    b.check_same_grid(tau)?;
    let FG { f, g } = fg_from_jets(b.grid(), &Jet::from_field(b), &Jet::from_field(tau), params)?;
    Ok((f.inverse(), g.inverse()))
}

/// Spectral variant of [`nonlinear_fg`] used by the steppers.
pub fn nonlinear_fg_spectral(
    b: &SpectralField,
    tau: &SpectralField,
    params: &ModelParams,
) -> Result<(SpectralField, SpectralField)> {
    let FG { f, g } = fg_from_jets(b.grid(), &Jet::from_spectrum(b), &Jet::from_spectrum(tau), params)?;
    Ok((f, g))
}

/// Expanded differences together with the direct ones.
#[derive(Clone, Debug)]
pub struct DifferenceFG {
    pub delta_f: RealField,
    pub delta_g: RealField,
    /// `J₁ … J₈`, in order.
    pub j: Vec<RealField>,
    /// `F(b₁, τ₁) − F(b₂, τ₂)`.
    pub direct_f: RealField,
    /// `G(b₁, τ₁) − G(b₂, τ₂)`.
    pub direct_g: RealField,
    /// `max(|F(b₁, τ₁)|, |F(b₂, τ₂)|)`, the natural size for comparing `δF`.
    pub scale_f: f64,
    pub scale_g: f64,
}

pub fn difference_fg(
    b1: &RealField,
    tau1: &RealField,
    b2: &RealField,
    tau2: &RealField,
    params: &ModelParams,
) -> Result<DifferenceFG> {
    b1.check_same_grid(tau1)?;
    b1.check_same_grid(b2)?;
    b1.check_same_grid(tau2)?;
    check_floor(b1.values(), params.eps_a)?;
    check_floor(b2.values(), params.eps_a)?;
    let grid = b1.grid();
    let len = grid.len();
    let (k1, k2, k3) = (params.kappa1, params.kappa2, params.kappa3_bar);
    let profile = params.kappa3_var;

    let jb1 = Jet::from_field(b1);
    let jt1 = Jet::from_field(tau1);
    let jb2 = Jet::from_field(b2);
    let jt2 = Jet::from_field(tau2);
    let db = Jet::from_field(&b1.zip_map(b2, |x, y| x - y)?);
    let dt = Jet::from_field(&tau1.zip_map(tau2, |x, y| x - y)?);

    let mut delta_f = vec![0.0; len];
    let mut js = vec![vec![0.0; len]; 8];
    for i in 0..len {
        let (b1v, b2v) = (jb1.value[i], jb2.value[i]);
        let (t1v, t2v) = (jt1.value[i], jt2.value[i]);
        let (dbv, dtv) = (db.value[i], dt.value[i]);
        let inv1 = 1.0 / (1.0 + b1v);
        let inv2 = 1.0 / (1.0 + b2v);
        // 1/(1+b₁) − 1/(1+b₂) = −δb / ((1+b₁)(1+b₂))
        let d = -dbv * inv1 * inv2;
        let gb2 = jb2.grad_sq(i);
        let gt2 = jt2.grad_sq(i);
        let gdb_gb1 = db.grad_dot(&jb1, i);
        let gdb_gb2 = db.grad_dot(&jb2, i);
        let gdt_gt1 = dt.grad_dot(&jt1, i);
        let gdt_gt2 = dt.grad_dot(&jt2, i);
        let gb2_gt2 = jb2.grad_dot(&jt2, i);

        delta_f[i] = -2.0 * k1 * d * gb2 * (t2v + 1.0)
            - 2.0 * k1 * inv1 * gdb_gb2 * (t2v + 1.0)
            - 2.0 * k1 * inv1 * gdb_gb1 * (t2v + 1.0)
            - 2.0 * k1 * inv1 * jb1.grad_sq(i) * dtv
            + 2.0 * k1 * db.grad_dot(&jt2, i)
            + 2.0 * k1 * jb1.grad_dot(&dt, i)
            - k1 * dbv * jt2.lap[i]
            - k1 * b1v * dt.lap[i]
            + k1 * dtv * jb2.lap[i]
            + k1 * t1v * db.lap[i];

        let tp1 = t1v + 1.0;
        let tp2 = t2v + 1.0;
        let tsum = t1v + t2v + 2.0;
        js[0][i] = d * (tp2 * tp2 * inv2 + tp2 * tp2 * inv1) * gb2
            + dtv * tsum * inv1 * inv1 * gb2
            + tp1 * tp1 * inv1 * inv1 * (gdb_gb1 + gdb_gb2);
        js[1][i] = d * tp2 * gb2_gt2
            + dtv * inv1 * gb2_gt2
            + tp1 * inv1 * db.grad_dot(&jt2, i)
            + tp1 * inv1 * jb1.grad_dot(&dt, i);
        js[2][i] = d * (t2v * t2v + 2.0 * t2v) * jb2.lap[i]
            + dtv * tsum * inv1 * jb2.lap[i]
            + (t1v * t1v + 2.0 * t1v) * inv1 * db.lap[i];
        js[3][i] = (b1v * inv1 - b2v * inv2) * jb2.lap[i] + b1v * inv1 * db.lap[i];
        js[4][i] = dbv * jt2.lap[i] + b1v * dt.lap[i];
        js[5][i] = dtv * jt2.lap[i] + t1v * dt.lap[i];
        js[6][i] = dbv * (profile.value(t2v) * jt2.lap[i] + profile.derivative(t2v) * gt2)
            + (1.0 + b1v) * (profile.value(t1v) - profile.value(t2v)) * jt2.lap[i]
            + (1.0 + b1v) * profile.value(t1v) * dt.lap[i]
            + (1.0 + b1v) * (profile.derivative(t1v) - profile.derivative(t2v)) * gt2
            + (1.0 + b1v) * profile.derivative(t1v) * (gdt_gt1 + gdt_gt2);
        js[7][i] = gdt_gt1 + gdt_gt2;
    }

    let weights = [
        2.0 * k1 * k1,
        -(3.0 * k1 * k1 + k1 * k2),
        -k1 * k1,
        k1 * k1,
        k3,
        k1 * k1,
        1.0,
        k1 * (k1 + k2),
    ];
    let delta_g: Vec<f64> = (0..len)
        .map(|i| weights.iter().zip(&js).map(|(w, j)| w * j[i]).sum())
        .collect();

    let FG { f: f1, g: g1 } = fg_from_jets(grid, &jb1, &jt1, params)?;
    let FG { f: f2, g: g2 } = fg_from_jets(grid, &jb2, &jt2, params)?;
    let (f1, g1, f2, g2) = (f1.inverse(), g1.inverse(), f2.inverse(), g2.inverse());

    let filtered = |v: Vec<f64>| project(grid, v).inverse();
    Ok(DifferenceFG {
        delta_f: filtered(delta_f),
        delta_g: filtered(delta_g),
        j: js.into_iter().map(filtered).collect(),
        direct_f: f1.zip_map(&f2, |x, y| x - y)?,
        direct_g: g1.zip_map(&g2, |x, y| x - y)?,
        scale_f: f1.max_abs().max(f2.max_abs()),
        scale_g: g1.max_abs().max(g2.max_abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::Kappa3Profile;
    use crate::random::random_field;
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams::new(1.1, 0.8, 0.6, Kappa3Profile::Tanh { alpha: 0.4 }).unwrap()
    }

    #[test]
    fn vanishes_on_constants() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        for c in [0.0, 0.3, -0.4] {
            let (f, gg) = nonlinear_fg(&RealField::constant(&g, c), &RealField::zeros(&g), &params()).unwrap();
            assert!(f.max_abs() < 1e-15 && gg.max_abs() < 1e-15);
        }
    }

    #[test]
    fn floor_is_enforced() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let b = RealField::constant(&g, -0.95);
        assert!(nonlinear_fg(&b, &RealField::zeros(&g), &params()).is_err());
    }

    #[test]
    fn identical_pairs_give_zero_differences() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let b = random_field(&g, 1, 4, 0.1);
        let t = random_field(&g, 2, 4, 0.1);
        let d = difference_fg(&b, &t, &b, &t, &params()).unwrap();
        assert_eq!(d.delta_f.max_abs(), 0.0);
        assert_eq!(d.delta_g.max_abs(), 0.0);
        assert!(d.j.iter().all(|j| j.max_abs() == 0.0));
    }

    #[test]
    fn expansions_match_direct_differences() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let p = params();
        let b1 = random_field(&g, 3, 5, 0.2);
        let t1 = random_field(&g, 4, 5, 0.2);
        let b2 = random_field(&g, 5, 5, 0.2);
        let t2 = random_field(&g, 6, 5, 0.2);
        let d = difference_fg(&b1, &t1, &b2, &t2, &p).unwrap();
        let err_f = d.delta_f.zip_map(&d.direct_f, |x, y| x - y).unwrap().max_abs();
        let err_g = d.delta_g.zip_map(&d.direct_g, |x, y| x - y).unwrap().max_abs();
        assert!(err_f <= 1e-12 * d.scale_f, "{err_f}");
        assert!(err_g <= 1e-12 * d.scale_g, "{err_g}");
    }
}
