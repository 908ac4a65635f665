//! Coefficients of the equation family
//!
//!   u_t + (u + Γ) u_x = Λ⁻² ∂_x h(u) − Λ⁻² ∂_x (u² + u_x²/2) − λ u,
//!   h(u) = (α + Γ) u + (β/3) u³ + (γ/4) u⁴,   Λ⁻² = (1 − ∂_x²)⁻¹,
//!
//! together with the two shape constants the breaking certificate is built
//! from: the coefficient bound κ and the slope weight θ₀.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationParams {
    /// Dissipation rate λ ≥ 0 multiplying the momentum m = u − u_xx.
    pub lambda: f64,
    /// Linear transport coefficient α.
    pub alpha: f64,
    /// Cubic coefficient β.
    pub beta: f64,
    /// Quartic coefficient γ.
    pub gamma: f64,
    /// Third-derivative coefficient Γ (named `cap_gamma` in configs).
    pub cap_gamma: f64,
}

impl EquationParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64, gamma: f64, cap_gamma: f64) -> Self {
        Self { lambda, alpha, beta, gamma, cap_gamma }
    }

    /// All coefficients zero except the given λ: the plain dissipative
    /// Camassa-Holm limit.
    pub fn ch_limit(lambda: f64) -> Self {
        Self::new(lambda, 0.0, 0.0, 0.0, 0.0)
    }

    /// κ = max{|α|, |β|/3, |γ|/4, |Γ|}, the size of h's coefficient vector.
    pub fn kappa(&self) -> f64 {
        self.alpha
            .abs()
            .max(self.beta.abs() / 3.0)
            .max(self.gamma.abs() / 4.0)
            .max(self.cap_gamma.abs())
    }

    /// θ₀ = sqrt(2 / (1 + 12 κ)), the largest admissible slope weight.
    /// Always in (0, sqrt(2)].
    pub fn theta0(&self) -> f64 {
        (2.0 / (1.0 + 12.0 * self.kappa())).sqrt()
    }

    /// Whether the nonlocal source h vanishes identically: α + Γ = 0 and
    /// β = γ = 0. In this regime momentum transport is exactly conservative
    /// (up to the e^{−λt} factor).
    pub fn h_vanishes(&self) -> bool {
        self.alpha + self.cap_gamma == 0.0 && self.beta == 0.0 && self.gamma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("cap_gamma", self.cap_gamma),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Config(format!("params.{name} must be finite")));
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("params.lambda must be nonnegative".into()));
        }
        Ok(())
    }
}
