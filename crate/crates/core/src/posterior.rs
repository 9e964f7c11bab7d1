//! Posterior summaries of a chain trace: conditional Kendall's tau curves,
//! predictive draws and mixture diagnostics.

use std::f64::consts::FRAC_2_PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{link_rho, Calibration};
use crate::copula::{sample_gaussian_copula, UnitPair};
use crate::error::{Error, Result};
use crate::sampler::{ChainTrace, IterationRecord};
use crate::stats::{quantile_sorted, Summary};

/// Kendall's tau of the Gaussian-copula mixture `sum_j w_j C_{rho_j}`:
/// `sum_j sum_k w_j w_k (2/pi) asin((rho_j + rho_k) / 2)`.
///
/// Weights are renormalised to sum to one before use.
pub fn mixture_kendall_tau(weights: &[f64], rhos: &[f64]) -> Result<f64> {
    if weights.len() != rhos.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: rhos.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::invalid("mixture weights must be nonnegative with a positive sum"));
    }
    let mut tau = 0.0;
    for (j, (&wj, &rj)) in weights.iter().zip(rhos).enumerate() {
        // diagonal once, off-diagonal pairs twice
        tau += wj * wj * (FRAC_2_PI * rj.asin());
        for (&wk, &rk) in weights[j + 1..].iter().zip(&rhos[j + 1..]) {
            tau += 2.0 * wj * wk * FRAC_2_PI * (0.5 * (rj + rk)).asin();
        }
    }
    Ok((tau / (total * total)).clamp(-1.0, 1.0))
}

/// Total weight below which the lightest components are left out of
/// [`record_tau`]; the pairwise sum is quadratic in the component count.
pub const TAU_TAIL_MASS: f64 = 1e-12;

/// `tau(x)` implied by a single kept iteration.
pub fn record_tau(record: &IterationRecord, spec: Calibration, x: f64) -> f64 {
    let keep = heavy_components(&record.weights);
    let weights: Vec<f64> = keep.iter().map(|&j| record.weights[j]).collect();
    let rhos: Vec<f64> = keep
        .iter()
        .map(|&j| link_rho(spec.theta_unchecked(record.atoms[j].as_slice(), x)).value())
        .collect();
    mixture_kendall_tau(&weights, &rhos).expect("record weights are positive")
}

/// Indices of all components except the lightest ones whose combined
/// weight stays below `TAU_TAIL_MASS`.
fn heavy_components(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
    let mut tail = 0.0;
    let mut cut = 0;
    for &j in &order {
        tail += weights[j];
        if tail >= TAU_TAIL_MASS {
            break;
        }
        cut += 1;
    }
    let mut keep = order.split_off(cut.min(order.len() - 1));
    keep.sort_unstable();
    keep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCurve {
    pub x_grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower95: Vec<f64>,
    pub upper95: Vec<f64>,
}

/// Pointwise posterior mean and equal-tailed 95% band of `tau(x)`.
///
/// If a heavily skewed posterior puts the mean outside the 2.5%–97.5%
/// quantile range, the band is widened to contain it.
pub fn tau_curve(trace: &ChainTrace, x_grid: &[f64]) -> Result<TauCurve> {
    if trace.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    let spec = trace.calibration;
    let mut curve = TauCurve {
        x_grid: x_grid.to_vec(),
        mean: Vec::with_capacity(x_grid.len()),
        lower95: Vec::with_capacity(x_grid.len()),
        upper95: Vec::with_capacity(x_grid.len()),
    };
    let mut draws = Vec::with_capacity(trace.len());
    for &x in x_grid {
        draws.clear();
        draws.extend(trace.records.iter().map(|r| record_tau(r, spec, x)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        draws.sort_by(f64::total_cmp);
        curve.mean.push(mean);
        curve.lower95.push(quantile_sorted(&draws, 0.025).min(mean));
        curve.upper95.push(quantile_sorted(&draws, 0.975).max(mean));
    }
    Ok(curve)
}

/// `m` equally spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    match m {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect(),
    }
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut t = rng.random::<f64>() * total;
    for (j, w) in weights.iter().enumerate() {
        t -= w;
        if t < 0.0 {
            return j;
        }
    }
    weights.len() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDraw {
    pub x: f64,
    pub pair: UnitPair,
}

/// One posterior-predictive pair per covariate value: a kept iteration is
/// picked uniformly, then a component with probability proportional to its
/// weight, then a pair from that component's copula at `x`.
pub fn predictive_sample<R: Rng + ?Sized>(trace: &ChainTrace, covariates: &[f64], rng: &mut R) -> Result<Vec<PredictiveDraw>> {
    if trace.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    let spec = trace.calibration;
    Ok(covariates
        .iter()
        .map(|&x| {
            let record = &trace.records[rng.random_range(0..trace.len())];
            let j = pick_weighted(&record.weights, rng);
            let rho = link_rho(spec.theta_unchecked(record.atoms[j].as_slice(), x));
            PredictiveDraw {
                x,
                pair: sample_gaussian_copula(rho, rng),
            }
        })
        .collect())
}

/// Occupied-component counts and the two largest weights of every kept iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub iters: Vec<usize>,
    pub d_star: Vec<usize>,
    pub stats: Summary,
    /// `(largest, second largest)` weight per iteration.
    pub top_weights: Vec<(f64, f64)>,
}

impl ComponentSummary {
    pub fn mean_top_weight(&self) -> f64 {
        self.top_weights.iter().map(|w| w.0).sum::<f64>() / self.top_weights.len() as f64
    }
}

pub fn component_summary(trace: &ChainTrace) -> Result<ComponentSummary> {
    if trace.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    let d_star: Vec<usize> = trace.records.iter().map(|r| r.d_star).collect();
    let as_f: Vec<f64> = d_star.iter().map(|&d| d as f64).collect();
    let top_weights = trace
        .records
        .iter()
        .map(|r| {
            let (mut first, mut second) = (0.0_f64, 0.0_f64);
            for &w in &r.weights {
                if w > first {
                    second = first;
                    first = w;
                } else if w > second {
                    second = w;
                }
            }
            (first, second)
        })
        .collect();
    Ok(ComponentSummary {
        iters: trace.records.iter().map(|r| r.iter).collect(),
        d_star,
        stats: Summary::of(&as_f)?,
        top_weights,
    })
}

/// Posterior mean weight and covariate-averaged `rho` of the occupied
/// components ranked by occupancy (rank 0 = most populated) in each iteration.
/// Entry `r` averages over the iterations that have at least `r + 1`
/// occupied components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedComponent {
    pub rank: usize,
    pub iterations: usize,
    pub mean_weight: f64,
    pub mean_rho: f64,
}

pub fn ranked_components(trace: &ChainTrace, covariates: &[f64], max_rank: usize) -> Result<Vec<RankedComponent>> {
    if trace.is_empty() || covariates.is_empty() {
        return Err(Error::invalid("empty trace or covariate grid"));
    }
    let spec = trace.calibration;
    let mut acc = vec![(0usize, 0.0, 0.0); max_rank];
    for r in &trace.records {
        let mut occupied: Vec<usize> = (0..r.occupancy.len()).filter(|&j| r.occupancy[j] > 0).collect();
        occupied.sort_by(|&a, &b| r.occupancy[b].cmp(&r.occupancy[a]).then(a.cmp(&b)));
        for (rank, &j) in occupied.iter().take(max_rank).enumerate() {
            let avg_rho = covariates
                .iter()
                .map(|&x| link_rho(spec.theta_unchecked(r.atoms[j].as_slice(), x)).value())
                .sum::<f64>()
                / covariates.len() as f64;
            acc[rank].0 += 1;
            acc[rank].1 += r.weights[j];
            acc[rank].2 += avg_rho;
        }
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .filter(|(_, a)| a.0 > 0)
        .map(|(rank, (n, w, rho))| RankedComponent {
            rank,
            iterations: n,
            mean_weight: w / n as f64,
            mean_rho: rho / n as f64,
        })
        .collect())
}
