//! Gaussian copula kernels and the Frank copula sampler used for synthetic data.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{bivariate_normal_cdf, std_normal_cdf, std_normal_quantile};

/// Copula correlation in `(-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(value: f64) -> Result<Self> {
        if value > -1.0 && value <= 1.0 {
            Ok(Correlation(value))
        } else {
            Err(Error::InvalidCorrelation(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_singular(self) -> bool {
        self.0 >= 1.0
    }
}

/// A point strictly inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitPair {
    pub u: f64,
    pub v: f64,
}

impl UnitPair {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        for c in [u, v] {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Domain(c));
            }
        }
        Ok(UnitPair { u, v })
    }

    /// Normal scores `(Phi^-1(u), Phi^-1(v))`.
    pub fn normal_scores(self) -> (f64, f64) {
        // invariant of the type guarantees both are in (0, 1)
        (
            std_normal_quantile(self.u).expect("u in (0,1)"),
            std_normal_quantile(self.v).expect("v in (0,1)"),
        )
    }
}

/// Maps a probability computed in floating point onto the open unit interval.
pub(crate) fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Log Gaussian copula density at normal scores `(a, b)`.
///
/// `-(1/2) log(1 - rho^2) - (rho^2 (a^2 + b^2) - 2 rho a b) / (2 (1 - rho^2))`,
/// which is the quadratic form `q' (Sigma^-1 - I) q` written out for the 2x2
/// case. Requires `|rho| < 1`.
#[inline]
pub fn log_gaussian_copula_density_scores(a: f64, b: f64, rho: f64) -> f64 {
    let one_minus = 1.0 - rho * rho;
    -0.5 * one_minus.ln() - (rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * one_minus)
}

pub fn gaussian_copula_density(p: UnitPair, rho: Correlation) -> Result<f64> {
    if rho.is_singular() {
        return Err(Error::SingularCorrelation(rho.value()));
    }
    let (a, b) = p.normal_scores();
    Ok(log_gaussian_copula_density_scores(a, b, rho.value()).exp())
}

pub fn gaussian_copula_cdf(p: UnitPair, rho: Correlation) -> Result<f64> {
    if rho.is_singular() {
        return Err(Error::SingularCorrelation(rho.value()));
    }
    let (a, b) = p.normal_scores();
    Ok(bivariate_normal_cdf(a, b, rho.value()))
}

/// Kendall's tau of the Gaussian copula, `(2/pi) asin(rho)`.
pub fn gaussian_kendall_tau(rho: f64) -> f64 {
    FRAC_2_PI * rho.asin()
}

/// Draws `(Phi(z1), Phi(z2))` with `(z1, z2)` standard bivariate normal.
pub fn sample_gaussian_copula<R: Rng + ?Sized>(rho: Correlation, rng: &mut R) -> UnitPair {
    let z1: f64 = StandardNormal.sample(rng);
    let u = open_unit(std_normal_cdf(z1));
    if rho.is_singular() {
        return UnitPair { u, v: u };
    }
    let r = rho.value();
    let e: f64 = StandardNormal.sample(rng);
    let z2 = r * z1 + (1.0 - r * r).sqrt() * e;
    UnitPair {
        u,
        v: open_unit(std_normal_cdf(z2)),
    }
}

/// Conditional-inversion sampler for the Frank copula with parameter `theta`.
///
/// `theta = 0` gives independence. Negative parameters are handled through
/// the reflection `(U, V) -> (U, 1 - V)`, which maps Frank(theta) onto
/// Frank(-theta) and keeps every exponential bounded.
pub fn sample_frank_copula<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> UnitPair {
    let u = open_unit(rng.random::<f64>());
    let w = open_unit(rng.random::<f64>());
    if theta == 0.0 {
        return UnitPair { u, v: w };
    }
    let t = theta.abs();
    // Solve dC/du (u, v) = w for v.
    let v = if t < 1.0 {
        let a = (-t * u).exp();
        let g = (-t).exp_m1();
        -(w * g / (a + w * (1.0 - a))).ln_1p() / t
    } else {
        // same root in log space; the form above cancels badly for large t
        let num = log_add(-t * u + (-w).ln_1p(), -t + w.ln());
        let den = log_add(-t * u, w.ln() + (-(-t * u).exp_m1()).ln());
        (den - num) / t
    };
    let v = if theta < 0.0 { 1.0 - v } else { v };
    UnitPair {
        u,
        v: open_unit(v),
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Kendall's tau of the Frank copula, `1 - 4/theta (1 - D1(theta))`.
pub fn frank_kendall_tau(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let t = theta.abs();
    let tau = 1.0 - 4.0 / t * (1.0 - debye1(t));
    tau.copysign(theta)
}

/// First Debye function `D1(x) = (1/x) * integral_0^x t / (e^t - 1) dt` for `x > 0`.
pub fn debye1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    // beyond this the remaining tail integral is below 1e-19
    const CUTOFF: f64 = 50.0;
    let integral = if x <= CUTOFF {
        gauss_legendre_panels(debye_integrand, 0.0, x, x.ceil() as usize)
    } else {
        PI * PI / 6.0 - gauss_legendre_panels(debye_integrand, x.min(2.0 * CUTOFF), 2.0 * CUTOFF, 50)
    };
    integral / x
}

fn debye_integrand(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t / t.exp_m1()
    }
}

fn gauss_legendre_panels(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_14,
    ];
    if hi <= lo {
        return 0.0;
    }
    let panels = panels.max(1);
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (&x, &w) in X.iter().zip(&W) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += s * half;
    }
    total
}

/// Frank parameter whose Kendall's tau equals `tau`, by bisection on
/// [`frank_kendall_tau`]. `tau` must lie in `(-1, 1)`.
pub fn frank_theta_for_tau(tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::invalid(format!("Kendall's tau {tau} outside (-1, 1)")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let target = tau.abs();
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while frank_kendall_tau(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if frank_kendall_tau(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).copysign(tau))
}
