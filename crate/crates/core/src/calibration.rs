//! Calibration functions `theta(x | beta)`, the link onto the copula
//! correlation, and the conditional Gaussian copula density they induce.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copula::{log_gaussian_copula_density_scores, Correlation, UnitPair};
use crate::error::{Error, Result};

/// Largest correlation fed to the density; `theta = 0` maps to `rho = 1`,
/// where the Gaussian copula density does not exist.
pub const RHO_CLAMP: f64 = 1.0 - 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// `theta = b1 + b2 x^2`
    Quadratic,
    /// `theta = b1 + b2 x + b3 exp(-b4 x^2)`
    ExpBump,
}

impl Calibration {
    pub fn dim(self) -> usize {
        match self {
            Calibration::Quadratic => 2,
            Calibration::ExpBump => 4,
        }
    }

    pub fn from_dim(dim: usize) -> Option<Self> {
        match dim {
            2 => Some(Calibration::Quadratic),
            4 => Some(Calibration::ExpBump),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Calibration::Quadratic => "quadratic",
            Calibration::ExpBump => "expbump",
        }
    }

    /// `theta(x | beta)` without a length check; `beta.len()` must equal `dim()`.
    #[inline]
    pub(crate) fn theta_unchecked(self, beta: &[f64], x: f64) -> f64 {
        match self {
            Calibration::Quadratic => beta[0] + beta[1] * x * x,
            Calibration::ExpBump => beta[0] + beta[1] * x + beta[2] * (-beta[3] * x * x).exp(),
        }
    }

    /// Clamped correlation `rho(x | beta)` used by the sampler hot loop.
    #[inline]
    pub(crate) fn rho_unchecked(self, beta: &[f64], x: f64) -> f64 {
        link_rho_value(self.theta_unchecked(beta, x)).min(RHO_CLAMP)
    }
}

impl fmt::Display for Calibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" => Ok(Calibration::Quadratic),
            "expbump" => Ok(Calibration::ExpBump),
            other => Err(Error::invalid(format!(
                "unknown calibration `{other}` (expected quadratic or expbump)"
            ))),
        }
    }
}

/// Coefficients of a calibration function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BetaVector(Vec<f64>);

impl BetaVector {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(BetaVector(coefficients))
    }

    /// Construct and check the length against `spec` in one step.
    pub fn for_spec(spec: Calibration, coefficients: Vec<f64>) -> Result<Self> {
        let beta = Self::new(coefficients)?;
        beta.conforms(spec)?;
        Ok(beta)
    }

    pub fn conforms(&self, spec: Calibration) -> Result<()> {
        if self.0.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: self.0.len(),
            });
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn eval_calibration(spec: Calibration, beta: &BetaVector, x: f64) -> Result<f64> {
    beta.conforms(spec)?;
    Ok(spec.theta_unchecked(beta.as_slice(), x))
}

#[inline]
fn link_rho_value(theta: f64) -> f64 {
    2.0 / (theta.abs() + 1.0) - 1.0
}

/// `rho = 2 / (|theta| + 1) - 1`: even in `theta`, equal to 1 at the origin
/// and tending to -1 as `|theta|` grows.
pub fn link_rho(theta: f64) -> Correlation {
    let rho = link_rho_value(theta);
    // for huge |theta| the expression rounds to exactly -1
    Correlation::new(rho.max(-1.0 + f64::EPSILON)).expect("link maps into (-1, 1]")
}

/// `c_{rho(x|beta)}(u, v)` with `rho` clamped to [`RHO_CLAMP`].
pub fn conditional_density(p: UnitPair, x: f64, beta: &BetaVector, spec: Calibration) -> Result<f64> {
    let (a, b) = p.normal_scores();
    Ok(log_conditional_density_scores(a, b, x, beta, spec)?.exp())
}

/// Log of [`conditional_density`] at precomputed normal scores.
pub fn log_conditional_density_scores(
    a: f64,
    b: f64,
    x: f64,
    beta: &BetaVector,
    spec: Calibration,
) -> Result<f64> {
    beta.conforms(spec)?;
    let rho = spec.rho_unchecked(beta.as_slice(), x);
    Ok(log_gaussian_copula_density_scores(a, b, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::gaussian_copula_density;
    use proptest::prelude::*;

    fn beta(v: &[f64]) -> BetaVector {
        BetaVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn calibration_values() {
        for x in [-2.0, 0.0, 0.7, 3.0] {
            assert_eq!(eval_calibration(Calibration::Quadratic, &beta(&[1.0, 0.0]), x).unwrap(), 1.0);
            assert_eq!(eval_calibration(Calibration::ExpBump, &beta(&[1.0, 0.0, 0.0, 3.0]), x).unwrap(), 1.0);
        }
        assert_eq!(eval_calibration(Calibration::Quadratic, &beta(&[0.0, 1.0]), 2.0).unwrap(), 4.0);
        let t = eval_calibration(Calibration::ExpBump, &beta(&[0.5, 0.2, 1.0, 1.0]), 0.0).unwrap();
        assert!((t - 1.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let err = eval_calibration(Calibration::ExpBump, &beta(&[1.0, 2.0]), 0.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, got: 2 }));
        assert!(BetaVector::for_spec(Calibration::Quadratic, vec![1.0]).is_err());
        assert!(BetaVector::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn family_names() {
        assert_eq!("quadratic".parse::<Calibration>().unwrap(), Calibration::Quadratic);
        assert_eq!("ExpBump".parse::<Calibration>().unwrap(), Calibration::ExpBump);
        assert!("cubic".parse::<Calibration>().is_err());
        assert_eq!(Calibration::from_dim(4), Some(Calibration::ExpBump));
    }

    #[test]
    fn link_values() {
        assert_eq!(link_rho(0.0).value(), 1.0);
        assert_eq!(link_rho(1.0).value(), 0.0);
        assert_eq!(link_rho(-1.0).value(), 0.0);
        assert!(link_rho(1e300).value() > -1.0);
    }

    #[test]
    fn independence_reductions() {
        let p = UnitPair::new(0.3, 0.7).unwrap();
        for x in [-2.0, -0.5, 0.0, 1.3] {
            let d = conditional_density(p, x, &beta(&[1.0, 0.0]), Calibration::Quadratic).unwrap();
            assert!((d - 1.0).abs() < 1e-15);
            let d = conditional_density(p, x, &beta(&[1.0, 0.0, 0.0, 1.0]), Calibration::ExpBump).unwrap();
            assert!((d - 1.0).abs() < 1e-15);
        }
        let d = conditional_density(p, 2.0, &beta(&[0.0, 0.25]), Calibration::Quadratic).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clamp_at_theta_zero() {
        let p = UnitPair::new(0.4, 0.41).unwrap();
        // rho is clamped just below one: off the diagonal the density
        // underflows to zero, on it the density is large but finite
        let d = conditional_density(p, 0.0, &beta(&[0.0, 1.0]), Calibration::Quadratic).unwrap();
        assert!(d.is_finite() && d >= 0.0);
        let on = UnitPair::new(0.4, 0.4).unwrap();
        let d = conditional_density(on, 0.0, &beta(&[0.0, 1.0]), Calibration::Quadratic).unwrap();
        assert!(d.is_finite() && d > 1e4);
    }

    proptest! {
        #[test]
        fn link_is_even_and_in_range(theta in -1e6f64..1e6) {
            let r = link_rho(theta).value();
            prop_assert!(r > -1.0 && r <= 1.0);
            prop_assert_eq!(r, link_rho(-theta).value());
        }

        #[test]
        fn link_decreasing_in_abs(a in 0.0f64..1e3, d in 1e-6f64..10.0) {
            prop_assert!(link_rho(a + d).value() < link_rho(a).value());
        }

        #[test]
        fn composition_identity(
            u in 0.001f64..0.999, v in 0.001f64..0.999, x in -2.0f64..2.0,
            b in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let p = UnitPair::new(u, v).unwrap();
            let bv = beta(&b);
            let theta = eval_calibration(Calibration::ExpBump, &bv, x).unwrap();
            let rho = link_rho(theta);
            prop_assume!(rho.value() < RHO_CLAMP);
            let direct = gaussian_copula_density(p, rho).unwrap();
            let composed = conditional_density(p, x, &bv, Calibration::ExpBump).unwrap();
            prop_assert!((direct - composed).abs() <= 1e-12 * direct.max(1.0));
        }

        #[test]
        fn constant_in_x_without_covariate_terms(
            u in 0.01f64..0.99, v in 0.01f64..0.99, x in -2.0f64..2.0, b1 in -4.0f64..4.0,
        ) {
            let p = UnitPair::new(u, v).unwrap();
            let bv = beta(&[b1, 0.0]);
            let at_x = conditional_density(p, x, &bv, Calibration::Quadratic).unwrap();
            let at_0 = conditional_density(p, 0.0, &bv, Calibration::Quadratic).unwrap();
            prop_assert_eq!(at_x, at_0);
        }
    }
}
