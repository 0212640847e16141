use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::special::extension_constant;

/// Dimension and exponents of the weighted inequality, with the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub n: usize,
    pub s: f64,
    pub sigma: f64,
    /// 2*_σ = 2n/(n−2σ)
    pub two_star_sigma: f64,
    /// 2*_s = 2n/(n−2s)
    pub two_star_s: f64,
    /// C_s = 4^s Γ(1+s)/(2s Γ(1−s))
    pub c_s: f64,
    /// 𝔮 = σ(n−2s)/(n−2σ)
    pub q_frak: f64,
    /// 𝔶 = (n−2s)/2
    pub y_frak: f64,
}

impl FracParams {
    /// Parameters on ℝⁿ with n ≥ 2 and 0 < σ < s < 1.
    pub fn new(n: usize, s: f64, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(FracError::ParameterDomain(format!(
                "dimension n must be at least 2, got {n}"
            )));
        }
        Self::build(n, s, sigma)
    }

    /// Parameters for one-dimensional model domains (n = 1). The critical
    /// exponents stay finite only for s < 1/2, which is enforced here.
    pub fn on_line(s: f64, sigma: f64) -> Result<Self> {
        if !(s < 0.5) {
            return Err(FracError::ParameterDomain(format!(
                "on the line the order must satisfy s < 1/2, got {s}"
            )));
        }
        Self::build(1, s, sigma)
    }

    fn build(n: usize, s: f64, sigma: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::ParameterDomain(format!(
                "order s must lie in (0,1), got {s}"
            )));
        }
        if !(sigma > 0.0 && sigma < s) {
            return Err(FracError::ParameterDomain(format!(
                "sigma must lie in (0, s) = (0, {s}), got {sigma}"
            )));
        }
        let nf = n as f64;
        let two_star_sigma = 2.0 * nf / (nf - 2.0 * sigma);
        let two_star_s = 2.0 * nf / (nf - 2.0 * s);
        let q_frak = sigma * (nf - 2.0 * s) / (nf - 2.0 * sigma);
        Ok(Self {
            n,
            s,
            sigma,
            two_star_sigma,
            two_star_s,
            c_s: extension_constant(s),
            q_frak,
            y_frak: (nf - 2.0 * s) / 2.0,
        })
    }

    /// Exponent of the singular weight |x|^{(σ−s)·2*_σ}.
    pub fn weight_exponent(&self) -> f64 {
        (self.sigma - self.s) * self.two_star_sigma
    }

    /// Same parameters with the order replaced; σ is kept.
    pub fn with_order(&self, s: f64) -> Result<Self> {
        Self::build(self.n, s, self.sigma)
    }
}

/// Convenience wrapper matching the operation name used in reports.
pub fn make_params(n: usize, s: f64, sigma: f64) -> Result<FracParams> {
    FracParams::new(n, s, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_star_sigma_example() {
        let p = make_params(3, 0.75, 0.5).unwrap();
        assert!((p.two_star_sigma - 3.0).abs() < 1e-15);
        assert!((p.q_frak - 0.375).abs() < 1e-15);
    }

    #[test]
    fn c_s_at_one_half() {
        let p = make_params(2, 0.5, 0.25).unwrap();
        assert!((p.c_s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(make_params(1, 0.5, 0.25).is_err());
        assert!(make_params(3, 1.0, 0.5).is_err());
        assert!(make_params(3, 0.0, 0.0).is_err());
        assert!(make_params(3, 0.5, 0.5).is_err());
        assert!(make_params(3, 0.5, 0.0).is_err());
        assert!(make_params(3, 0.5, 0.7).is_err());
        assert!(FracParams::on_line(0.6, 0.2).is_err());
        assert!(FracParams::on_line(0.4, 0.2).is_ok());
    }

    proptest! {
        #[test]
        fn derived_invariants(n in 2usize..6, s in 0.01f64..0.99, frac in 0.01f64..0.99) {
            let sigma = s * frac;
            let p = make_params(n, s, sigma).unwrap();
            prop_assert!(p.two_star_sigma > 2.0);
            prop_assert!(p.two_star_sigma < p.two_star_s);
            prop_assert!(p.q_frak > 0.0 && p.q_frak < s);
            let alt = s - (s - sigma) * p.two_star_sigma / 2.0;
            prop_assert!((alt - p.q_frak).abs() < 1e-12);
            prop_assert_eq!(p, make_params(n, s, sigma).unwrap());
        }
    }
}
