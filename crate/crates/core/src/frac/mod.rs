//! Deterministic fractional calculus on sampled functions: Weyl–Marchaud
//! derivatives, the generalised Lebesgue–Stieltjes integral, the norm family
//! used by the SDE estimates, and inequality audits.

pub mod audit;
pub mod gls;
pub mod kernel;
pub mod norms;
pub mod weyl;

pub use audit::{
    audit_integral_estimate, audit_sup_bound, nr_drift_ratio, nr_fbm_ratio, nr_sigma_ratio, SupBoundAudit,
};
pub use gls::{gls_integral, gls_integral_with, GlsOptions};
pub use norms::{alpha_norm_profile, norms, norms_with, NormReport};
pub use weyl::{weyl_left, weyl_right_of_shifted};

use crate::drivers::HurstParameter;
use crate::error::{Error, Result};

/// Exponent bundle `(α, H, β, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub alpha: f64,
    pub h: HurstParameter,
    pub beta: f64,
    pub mu: f64,
}

impl FracOrder {
    pub fn new(alpha: f64, h: HurstParameter, beta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Parameter(format!("mu must lie in (0, 1], got {mu}")));
        }
        Ok(Self { alpha, h, beta, mu })
    }

    /// Whether `1 - H < α < min(β, 1/2)`, the range in which the pathwise
    /// uniqueness argument works.
    pub fn is_sde_admissible(&self) -> bool {
        1.0 - self.h.value() < self.alpha && self.alpha < self.beta.min(0.5)
    }

    pub fn check_sde_admissible(&self) -> Result<()> {
        if self.is_sde_admissible() {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "need 1 - H < alpha < min(beta, 1/2); got H = {}, alpha = {}, beta = {}",
                self.h.value(),
                self.alpha,
                self.beta
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility() {
        let h = HurstParameter::new(0.75).unwrap();
        assert!(FracOrder::new(0.3, h, 1.0, 0.5).unwrap().is_sde_admissible());
        assert!(!FracOrder::new(0.2, h, 1.0, 0.5).unwrap().is_sde_admissible());
        assert!(!FracOrder::new(0.3, h, 0.25, 0.5).unwrap().is_sde_admissible());
        assert!(FracOrder::new(0.0, h, 1.0, 0.5).is_err());
    }
}
