//! Synthetic conditional-copula datasets with a known calibration truth.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{link_rho, BetaVector, Calibration};
use crate::copula::{frank_theta_for_tau, gaussian_kendall_tau, sample_frank_copula, sample_gaussian_copula};
use crate::error::{Error, Result};
use crate::pseudo::PseudoDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Gaussian,
    /// Frank copula whose Kendall's tau matches the Gaussian target at each `x`.
    Frank,
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Frank => "frank",
        })
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(CopulaFamily::Gaussian),
            "frank" => Ok(CopulaFamily::Frank),
            other => Err(Error::invalid(format!("unknown copula family `{other}` (expected gaussian or frank)"))),
        }
    }
}

/// Default generating coefficients. These are not taken from any published
/// study; they give dependence that visibly changes over `[-2, 2]`.
pub fn default_truth(spec: Calibration) -> BetaVector {
    let coefs = match spec {
        Calibration::Quadratic => vec![0.5, 0.5],
        Calibration::ExpBump => vec![0.5, 0.2, 1.0, 1.0],
    };
    BetaVector::new(coefs).expect("finite defaults")
}

pub const MIN_SIMULATED_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub family: CopulaFamily,
    pub calibration: Calibration,
    pub truth_beta: BetaVector,
    pub n: usize,
    pub seed: u64,
    pub covariate_range: (f64, f64),
}

impl SimulationPlan {
    pub fn new(family: CopulaFamily, calibration: Calibration, n: usize, seed: u64) -> Self {
        SimulationPlan {
            family,
            calibration,
            truth_beta: default_truth(calibration),
            n,
            seed,
            covariate_range: (-2.0, 2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truth_beta.conforms(self.calibration)?;
        if self.n < MIN_SIMULATED_N {
            return Err(Error::invalid(format!("n must be at least {MIN_SIMULATED_N}, got {}", self.n)));
        }
        let (lo, hi) = self.covariate_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("covariate range [{lo}, {hi}] is empty")));
        }
        Ok(())
    }

    pub fn true_rho(&self, x: f64) -> f64 {
        link_rho(self.calibration.theta_unchecked(self.truth_beta.as_slice(), x)).value()
    }

    /// Generating Kendall's tau at `x` (shared by both families).
    pub fn true_tau(&self, x: f64) -> f64 {
        gaussian_kendall_tau(self.true_rho(x))
    }
}

pub fn simulate_dataset(plan: &SimulationPlan) -> Result<PseudoDataset> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let (lo, hi) = plan.covariate_range;
    let mut u = Vec::with_capacity(plan.n);
    let mut v = Vec::with_capacity(plan.n);
    let mut xs = Vec::with_capacity(plan.n);
    for _ in 0..plan.n {
        let x = lo + (hi - lo) * rng.random::<f64>();
        let rho = link_rho(plan.calibration.theta_unchecked(plan.truth_beta.as_slice(), x));
        let pair = match plan.family {
            CopulaFamily::Gaussian => sample_gaussian_copula(rho, &mut rng),
            CopulaFamily::Frank => {
                let tau = gaussian_kendall_tau(rho.value()).clamp(-0.999, 0.999);
                sample_frank_copula(frank_theta_for_tau(tau)?, &mut rng)
            }
        };
        u.push(pair.u);
        v.push(pair.v);
        xs.push(x);
    }
    PseudoDataset::new(u, v, xs)
}
