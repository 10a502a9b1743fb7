use crate::error::{Error, Result};

/// Variable part `κ̃₃` of the conductivity, `κ₃(θ) = κ̄₃ + κ̃₃(θ - θ̄)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kappa3Profile {
    Zero,
    /// `κ̃₃(x) = α·tanh(x)`.
    Tanh { alpha: f64 },
}

impl Kappa3Profile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Tanh { alpha } => alpha * x.tanh(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Tanh { alpha } => {
                let t = x.tanh();
                alpha * (1.0 - t * t)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Tanh { alpha } => {
                let t = x.tanh();
                -2.0 * alpha * t * (1.0 - t * t)
            }
        }
    }

    /// Suprema of `|κ̃₃'|` and `|κ̃₃''|` (the latter is `4α/(3√3)`).
    pub fn derivative_bounds(&self) -> (f64, f64) {
        match *self {
            Self::Zero => (0.0, 0.0),
            Self::Tanh { alpha } => (alpha, 4.0 * alpha / (3.0 * 3f64.sqrt())),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero) || matches!(self, Self::Tanh { alpha } if *alpha == 0.0)
    }
}

/// Model constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3_bar: f64,
    pub kappa3_var: Kappa3Profile,
    /// Equilibrium density `ρ̄`.
    pub rho_bar: f64,
    /// Equilibrium temperature `θ̄`.
    pub theta_bar: f64,
    /// Floor on `1 + a` (and on `ρ` when converting to the a-form).
    pub eps_a: f64,
}

pub const DEFAULT_EPS_A: f64 = 0.1;

impl ModelParams {
    pub fn new(kappa1: f64, kappa2: f64, kappa3_bar: f64, kappa3_var: Kappa3Profile) -> Result<Self> {
        let params = Self {
            kappa1,
            kappa2,
            kappa3_bar,
            kappa3_var,
            rho_bar: 1.0,
            theta_bar: 1.0,
            eps_a: DEFAULT_EPS_A,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_equilibrium(mut self, rho_bar: f64, theta_bar: f64) -> Result<Self> {
        self.rho_bar = rho_bar;
        self.theta_bar = theta_bar;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_a(mut self, eps_a: f64) -> Result<Self> {
        self.eps_a = eps_a;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("kappa1", self.kappa1)?;
        positive("kappa2", self.kappa2)?;
        positive("kappa3_bar", self.kappa3_bar)?;
        positive("rho_bar", self.rho_bar)?;
        positive("theta_bar", self.theta_bar)?;
        positive("eps_a", self.eps_a)?;
        if self.eps_a >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "eps_a",
                reason: format!("must be below 1, got {}", self.eps_a),
            });
        }
        if let Kappa3Profile::Tanh { alpha } = self.kappa3_var {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    reason: format!("must be non-negative and finite, got {alpha}"),
                });
            }
        }
        Ok(())
    }

    /// Full conductivity at absolute temperature `theta`.
    pub fn kappa3(&self, theta: f64) -> f64 {
        self.kappa3_bar + self.kappa3_var.value(theta - self.theta_bar)
    }

    /// Largest linear diffusion rate, `max(κ₁, (κ₁² + κ̄₃)/κ₂)`.
    pub fn kappa_max(&self) -> f64 {
        self.kappa1
            .max((self.kappa1 * self.kappa1 + self.kappa3_bar) / self.kappa2)
    }

    /// The tilde and a-form rewrites are expanded about `(ρ̄, θ̄) = (1, 1)`.
    pub fn require_unit_equilibrium(&self) -> Result<()> {
        if self.rho_bar == 1.0 && self.theta_bar == 1.0 {
            Ok(())
        } else {
            Err(Error::NonUnitEquilibrium {
                rho: self.rho_bar,
                theta: self.theta_bar,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_profile_vanishes_at_zero_with_bounded_derivatives() {
        let p = Kappa3Profile::Tanh { alpha: 0.5 };
        assert_eq!(p.value(0.0), 0.0);
        let (b1, b2) = p.derivative_bounds();
        assert!((b1 - 0.5).abs() < 1e-15);
        assert!((b2 - 0.7698003589195010 * 0.5).abs() < 1e-12);
        let sampled = (-4000..=4000)
            .map(|i| p.second_derivative(i as f64 * 1e-3).abs())
            .fold(0.0, f64::max);
        assert!(sampled <= b2 && sampled > 0.999 * b2);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = Kappa3Profile::Tanh { alpha: 1.3 };
        let h = 1e-5;
        for &x in &[-1.2, -0.1, 0.0, 0.4, 2.0] {
            let fd1 = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
            let fd2 = (p.derivative(x + h) - p.derivative(x - h)) / (2.0 * h);
            assert!((fd1 - p.derivative(x)).abs() < 1e-9);
            assert!((fd2 - p.second_derivative(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_positive_constants() {
        assert!(ModelParams::new(-1.0, 1.0, 1.0, Kappa3Profile::Zero).is_err());
        assert!(ModelParams::new(1.0, 0.0, 1.0, Kappa3Profile::Zero).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN, Kappa3Profile::Zero).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, Kappa3Profile::Tanh { alpha: -0.1 }).is_err());
        let err = ModelParams::new(-1.0, 1.0, 1.0, Kappa3Profile::Zero).unwrap_err();
        assert!(err.to_string().contains("kappa1"));
    }
}
