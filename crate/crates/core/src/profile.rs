//! The compactly supported density shape `f(eta)` of the self-similar
//! solutions.
//!
//! `f` solves `beta * eta + f f' = 0` with `f(0) = alpha`, where
//! `beta = xi / k3 > 0`, so `f(eta) = sqrt(alpha^2 - beta eta^2)` on
//! `|eta| <= alpha / sqrt(beta)` and is exactly zero outside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("amplitude alpha must be finite and non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("ratio beta = xi / k3 must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("stencil [{lo}, {hi}] leaves the open support (-{half_width}, {half_width})")]
    OutsideInterior { lo: f64, hi: f64, half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    alpha: f64,
    beta: f64,
    half_width: f64,
}

impl Profile {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ProfileError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(ProfileError::NegativeAlpha(alpha));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ProfileError::NonPositiveBeta(beta));
        }
        Ok(Self { alpha, beta, half_width: alpha / beta.sqrt() })
    }

    /// Profile for the coupling `k3` and forcing `xi`; only same-sign pairs
    /// give a real compactly supported shape.
    pub fn from_branch(k3: f64, xi: f64, alpha: f64) -> Result<Self, ProfileError> {
        let beta = xi / k3;
        if !beta.is_finite() {
            return Err(ProfileError::NonPositiveBeta(beta));
        }
        Self::new(alpha, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn eval(&self, eta: f64) -> f64 {
        if eta.abs() >= self.half_width {
            return 0.0;
        }
        // (w - |eta|)(w + |eta|) keeps precision near the edge
        let e = eta.abs();
        (self.beta * (self.half_width - e) * (self.half_width + e)).sqrt()
    }

    /// Exact derivative on the open support, zero outside.
    pub fn derivative(&self, eta: f64) -> f64 {
        let f = self.eval(eta);
        if f == 0.0 {
            0.0
        } else {
            -self.beta * eta / f
        }
    }

    /// `∫ f(eta) d(eta)`: the area of a semi-ellipse, `(pi / 2) alpha^2 / sqrt(beta)`.
    pub fn mass_eta(&self) -> f64 {
        0.5 * std::f64::consts::PI * self.alpha * self.half_width
    }

    /// `beta eta + f(eta) (f(eta + h) - f(eta - h)) / (2h)`.
    pub fn ode_residual(&self, eta: f64, h: f64) -> Result<f64, ProfileError> {
        let (lo, hi) = (eta - h, eta + h);
        if lo.abs() >= self.half_width || hi.abs() >= self.half_width {
            return Err(ProfileError::OutsideInterior { lo, hi, half_width: self.half_width });
        }
        Ok(self.beta * eta + self.eval(eta) * (self.eval(hi) - self.eval(lo)) / (2.0 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let p = Profile::new(2.0, 1.0).unwrap();
        assert_eq!(p.eval(0.0), 2.0);
        assert!((p.eval(1.0) - 3f64.sqrt()).abs() < 1e-15);
        let q = Profile::new(1.0, 4.0).unwrap();
        assert_eq!(q.half_width(), 0.5);
        assert_eq!(q.eval(0.5), 0.0);
        assert_eq!(q.eval(-0.5), 0.0);
        assert_eq!(q.eval(7.0), 0.0);
        assert!((q.eval(0.25) - 0.75f64.sqrt()).abs() < 1e-15);
        let r = Profile::new(2.0, 0.25).unwrap();
        assert_eq!(r.half_width(), 4.0);
    }

    #[test]
    fn both_branches_share_the_shape() {
        for (k3, xi) in [(2.0, 3.0), (-0.5, -0.75)] {
            let p = Profile::from_branch(k3, xi, 0.8).unwrap();
            assert_eq!(p.beta(), 1.5);
            for eta in [0.0, 0.3, -0.6] {
                let direct = (0.64f64 - 1.5 * eta * eta).sqrt();
                assert!((p.eval(eta) - direct).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn branch_sign_guard() {
        assert!(Profile::from_branch(1.0, 1.0, 1.0).is_ok());
        assert!(Profile::from_branch(-1.0, -1.0, 1.0).is_ok());
        assert_eq!(Profile::from_branch(1.0, -1.0, 1.0), Err(ProfileError::NonPositiveBeta(-1.0)));
        assert_eq!(Profile::from_branch(-1.0, 1.0, 1.0), Err(ProfileError::NonPositiveBeta(-1.0)));
        assert!(Profile::from_branch(0.0, 1.0, 1.0).is_err());
        assert!(Profile::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn mass_special_cases() {
        assert!((Profile::new(1.0, 1.0).unwrap().mass_eta() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((Profile::new(1.0, 4.0).unwrap().mass_eta() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((Profile::new(2.0, 0.25).unwrap().mass_eta() - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        let empty = Profile::new(0.0, 3.0).unwrap();
        assert_eq!(empty.mass_eta(), 0.0);
        assert_eq!(empty.eval(0.0), 0.0);
    }

    #[test]
    fn residual_examples() {
        let p = Profile::new(2.0, 1.0).unwrap();
        assert!(p.ode_residual(0.5, 1e-4).unwrap().abs() < 1e-7);
        assert!(p.ode_residual(0.0, 0.5).unwrap().abs() < 1e-15);
        assert!(matches!(p.ode_residual(1.9999, 1e-3), Err(ProfileError::OutsideInterior { .. })));
    }

    #[test]
    fn residual_is_second_order_off_unit_beta() {
        let p = Profile::new(1.3, 2.7).unwrap();
        let eta = 0.4 * p.half_width();
        let r1 = p.ode_residual(eta, 1e-2).unwrap().abs();
        let r2 = p.ode_residual(eta, 5e-3).unwrap().abs();
        let order = (r1 / r2).log2();
        assert!((1.9..2.1).contains(&order), "{order}");
    }

    proptest! {
        #[test]
        fn even_nonnegative_and_decaying(alpha in 0.0f64..5.0, beta in 0.01f64..10.0, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
            let p = Profile::new(alpha, beta).unwrap();
            let w = p.half_width();
            let (lo, hi) = if e1 < e2 { (e1 * w, e2 * w) } else { (e2 * w, e1 * w) };
            prop_assert_eq!(p.eval(lo), p.eval(-lo));
            prop_assert!(p.eval(hi) >= 0.0);
            prop_assert!(p.eval(hi) <= p.eval(lo));
        }

        #[test]
        fn satisfies_the_profile_ode(alpha in 0.1f64..5.0, beta in 0.1f64..10.0, frac in -0.95f64..0.95) {
            let p = Profile::new(alpha, beta).unwrap();
            let eta = frac * p.half_width();
            let r = beta * eta + p.eval(eta) * p.derivative(eta);
            prop_assert!(r.abs() < 1e-12 * (1.0 + beta * alpha * alpha));
        }
    }
}
