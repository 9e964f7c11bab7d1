//! Conditional copula estimation with a Dirichlet-process mixture of
//! Gaussian copulas whose correlation depends on a scalar covariate.
//!
//! The sampler works on the copula scale: raw data are turned into
//! pseudo-observations with [`pseudo::to_pseudo`], fitted with
//! [`sampler::run_chain`], and summarised with the functions in
//! [`posterior`].

pub mod calibration;
pub mod cli;
pub mod copula;
pub mod error;
pub mod io;
pub mod normal;
pub mod posterior;
pub mod pseudo;
pub mod sampler;
pub mod stats;
pub mod synth;

pub use calibration::{conditional_density, eval_calibration, link_rho, BetaVector, Calibration};
pub use copula::{gaussian_copula_cdf, gaussian_copula_density, Correlation, UnitPair};
pub use error::{Error, Result};
pub use posterior::{mixture_kendall_tau, predictive_sample, tau_curve, TauCurve};
pub use pseudo::{from_pseudo, to_pseudo, CovariateScaling, Dataset, PseudoDataset};
pub use sampler::{run_chain, ChainTrace, McmcConfig, MixtureState, PriorConfig, SliceSampler};
pub use synth::{simulate_dataset, CopulaFamily, SimulationPlan};
