//! `L^p`, `H^s` and `Ḣ^s` norms on the periodic box.
//!
//! `L^p` uses the rectangle rule with cell weight `(L/n)^d` (spectrally
//! accurate for smooth fields, approximate otherwise). The Sobolev norms use
//! Parseval: `‖f‖²_{Ḣ^s} = L^d Σ_{k≠0} |k|^{2s} |f̂(k)|²`, which makes
//! `‖f‖_{Ḣ^0}` agree with `‖f - mean‖_{L²}`.

use crate::error::{Error, Result};
use crate::field::{RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// `L^p`, `1 <= p <= ∞` (use `f64::INFINITY` for the max norm).
    Lp(f64),
    /// Inhomogeneous `H^s = (‖·‖²_{L²} + ‖·‖²_{Ḣ^s})^{1/2}`.
    Hs(f64),
    /// Homogeneous `Ḣ^s`, mean mode excluded.
    HomogeneousHs(f64),
}

pub fn field_norm(f: &RealField, kind: NormKind) -> Result<f64> {
    f.check_finite()?;
    match kind {
        NormKind::Lp(p) => lp_norm(f, p),
        NormKind::Hs(s) => {
            let l2 = lp_norm(f, 2.0)?;
            let h = homogeneous_sobolev(&f.forward(), s);
            Ok((l2 * l2 + h * h).sqrt())
        }
        NormKind::HomogeneousHs(s) => Ok(homogeneous_sobolev(&f.forward(), s)),
    }
}

pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    lp_norm_of_values(f.values(), f.grid().cell_volume(), p)
}

pub(crate) fn lp_norm_of_values(values: &[f64], cell: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidNorm(format!("L^p needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if p == 2.0 {
        return Ok((values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt());
    }
    if p == 1.0 {
        return Ok(values.iter().map(|v| v.abs()).sum::<f64>() * cell);
    }
    Ok((values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p))
}

/// `Ḣ^s` seminorm from the spectrum.
pub fn homogeneous_sobolev(g: &SpectralField, s: f64) -> f64 {
    let k2 = g.grid().k_squared();
    let sum: f64 = g
        .coeffs()
        .iter()
        .zip(k2)
        .skip(1)
        .map(|(c, &k2)| k2.powf(s) * c.norm_sqr())
        .sum();
    (sum * g.grid().volume()).sqrt()
}

/// `H^s` norm from the spectrum (Parseval for the `L²` part).
pub fn sobolev(g: &SpectralField, s: f64) -> f64 {
    let l2sq = g.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.grid().volume();
    let h = homogeneous_sobolev(g, s);
    (l2sq + h * h).sqrt()
}

/// `L²` norm from the spectrum.
pub fn l2_from_spectrum(g: &SpectralField) -> f64 {
    (g.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.grid().volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::random::random_field;
    use std::f64::consts::PI;

    #[test]
    fn constant_l2_on_2pi_box() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let one = RealField::constant(&g, 1.0);
        let l2 = field_norm(&one, NormKind::Lp(2.0)).unwrap();
        assert!((l2 - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cosine_sobolev_values() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let c = RealField::from_fn(&g, |x| x[0].cos());
        let h0 = field_norm(&c, NormKind::HomogeneousHs(0.0)).unwrap();
        let l2 = field_norm(&c, NormKind::Lp(2.0)).unwrap();
        let h1 = field_norm(&c, NormKind::HomogeneousHs(1.0)).unwrap();
        assert!((h0 - l2).abs() < 1e-14);
        assert!((h1 - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let z = RealField::zeros(&g);
        for kind in [
            NormKind::Lp(1.0),
            NormKind::Lp(3.5),
            NormKind::Lp(f64::INFINITY),
            NormKind::Hs(2.0),
            NormKind::HomogeneousHs(1.5),
        ] {
            assert_eq!(field_norm(&z, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = RealField::constant(&g, 1.0);
        assert!(field_norm(&f, NormKind::Lp(0.5)).is_err());
        let bad = RealField::new(&g, vec![f64::NAN; 8]).unwrap();
        assert!(matches!(
            field_norm(&bad, NormKind::Lp(2.0)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn parseval_on_random_fields() {
        for (d, n) in [(1, 64), (2, 32), (3, 16)] {
            let g = Grid::new(d, n, 3.7).unwrap();
            let f = random_field(&g, 11, n / 2, 2.0).map(|v| v + 0.25);
            let quad = lp_norm(&f, 2.0).unwrap();
            let spec = l2_from_spectrum(&f.forward());
            assert!((quad - spec).abs() <= 1e-10 * quad);
        }
    }

    #[test]
    fn sobolev_monotone_in_s() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = random_field(&g, 2, 8, 1.0);
        let norms: Vec<f64> = [0.0, 1.0, 2.0]
            .iter()
            .map(|&s| field_norm(&f, NormKind::Hs(s)).unwrap())
            .collect();
        let l2 = field_norm(&f, NormKind::Lp(2.0)).unwrap();
        assert!(norms[0] >= l2);
        assert!(norms.windows(2).all(|w| w[1] >= w[0]));
    }
}
