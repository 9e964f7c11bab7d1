//! Rank transform to pseudo-observations and its empirical-quantile inverse.

use serde::{Deserialize, Serialize};

use crate::copula::UnitPair;
use crate::error::{Error, Result};

/// Raw bivariate responses with one covariate per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub x: Vec<f64>,
}

impl Dataset {
    pub fn new(y1: Vec<f64>, y2: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        check_columns(&[("y1", &y1), ("y2", &y2), ("x", &x)])?;
        Ok(Dataset { y1, y2, x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Observations on the copula scale, each coordinate strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDataset {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
}

impl PseudoDataset {
    pub fn new(u: Vec<f64>, v: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        check_columns(&[("u", &u), ("v", &v), ("x", &x)])?;
        for &c in u.iter().chain(&v) {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Domain(c));
            }
        }
        Ok(PseudoDataset { u, v, x })
    }

    /// Accepts externally supplied copula-scale columns. Values must lie in
    /// `[0, 1]`; they are clamped to `[1/(2n), 1 - 1/(2n)]` so that the
    /// normal scores stay finite.
    pub fn from_unit_columns(u: Vec<f64>, v: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        check_columns(&[("u", &u), ("v", &v), ("x", &x)])?;
        let n = u.len() as f64;
        let (lo, hi) = (0.5 / n, 1.0 - 0.5 / n);
        let clamp = |col: Vec<f64>, name: &str| -> Result<Vec<f64>> {
            col.into_iter()
                .map(|c| {
                    if (0.0..=1.0).contains(&c) {
                        Ok(c.clamp(lo, hi))
                    } else {
                        Err(Error::invalid(format!("column {name} has value {c} outside [0, 1]")))
                    }
                })
                .collect()
        };
        let u = clamp(u, "u")?;
        let v = clamp(v, "v")?;
        Self::new(u, v, x)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn pair(&self, i: usize) -> UnitPair {
        UnitPair {
            u: self.u[i],
            v: self.v[i],
        }
    }
}

fn check_columns(cols: &[(&str, &[f64])]) -> Result<()> {
    let n = cols[0].1.len();
    for (name, col) in cols {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: col.len(),
            });
        }
        if let Some(bad) = col.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("column {name} has non-finite value {bad}")));
        }
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 observations, got {n}")));
    }
    Ok(())
}

/// 1-based ranks; tied values share the average of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// `u_i = rank(y1_i) / (n + 1)`, `v_i = rank(y2_i) / (n + 1)`; `x` passes through.
pub fn to_pseudo(data: &Dataset) -> PseudoDataset {
    let m = data.len() as f64 + 1.0;
    let to_unit = |col: &[f64]| -> Vec<f64> { average_ranks(col).into_iter().map(|r| r / m).collect() };
    PseudoDataset {
        u: to_unit(&data.y1),
        v: to_unit(&data.y2),
        x: data.x.clone(),
    }
}

/// Empirical quantile of `reference` at level `u`, inverting the rank
/// transform: level `r/(n+1)` returns the `r`-th order statistic, with linear
/// interpolation in between and clamping outside `[1/(n+1), n/(n+1)]`.
pub fn from_pseudo(u: f64, reference: &[f64]) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(u));
    }
    if reference.is_empty() {
        return Err(Error::invalid("empty reference column"));
    }
    let mut sorted = reference.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_from_sorted(u, &sorted))
}

/// [`from_pseudo`] against an already sorted reference.
pub fn quantile_from_sorted(u: f64, sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut h = (u * (n as f64 + 1.0) - 1.0).clamp(0.0, (n - 1) as f64);
    // levels produced by to_pseudo land on order statistics up to rounding
    if (h - h.round()).abs() < 1e-9 {
        h = h.round();
    }
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Affine map of the covariate range onto `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariateScaling {
    pub min: f64,
    pub max: f64,
}

impl CovariateScaling {
    pub const TARGET_LO: f64 = -2.0;
    pub const TARGET_HI: f64 = 2.0;

    pub fn fit(x: &[f64]) -> Result<Self> {
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::invalid("covariate column is empty or non-finite"));
        }
        Ok(CovariateScaling { min, max })
    }

    pub fn identity() -> Self {
        CovariateScaling {
            min: Self::TARGET_LO,
            max: Self::TARGET_HI,
        }
    }

    /// Constant covariates map to the centre of the target range.
    pub fn forward(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span == 0.0 {
            return 0.5 * (Self::TARGET_LO + Self::TARGET_HI);
        }
        Self::TARGET_LO + (Self::TARGET_HI - Self::TARGET_LO) * (x - self.min) / span
    }

    pub fn inverse(&self, s: f64) -> f64 {
        self.min + (self.max - self.min) * (s - Self::TARGET_LO) / (Self::TARGET_HI - Self::TARGET_LO)
    }
}
