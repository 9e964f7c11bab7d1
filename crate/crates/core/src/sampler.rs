//! Slice-sampling Gibbs sampler for a Dirichlet-process mixture of
//! conditional Gaussian copulas.
//!
//! The infinite mixture `sum_j w_j c_{rho(x|beta_j)}(u, v)` is augmented with
//! a slice variable `z_i` and an allocation `d_i` per observation, so that
//! each sweep only touches the finitely many components with `w_j > z_i`.
//! One sweep runs, in order:
//!
//! 1. sticks `pi_j ~ Be(1 + #{d_i = j}, lambda + #{d_i > j})`,
//! 2. slices `z_i ~ U(0, w_{d_i})`,
//! 3. instantiate components until the unassigned stick mass drops below
//!    `min_i z_i` (the `N*` rule),
//! 4. allocations `P(d_i = j) ∝ 1(z_i < w_j) c_{rho(x_i|beta_j)}(u_i, v_i)`,
//! 5. one Gaussian random-walk Metropolis step per occupied atom; empty atoms
//!    are redrawn from the base measure.
//!
//! Allocations are stored 0-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibration::{BetaVector, Calibration};
use crate::copula::{open_unit, UnitPair};
use crate::error::{Error, Result};
use crate::pseudo::PseudoDataset;

/// Dirichlet-process prior: total mass `lambda` and base measure
/// `N(0, sigma2 I)` on the calibration coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub total_mass: f64,
    pub sigma2: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            total_mass: 1.0,
            sigma2: 100.0,
        }
    }
}

impl PriorConfig {
    pub fn new(total_mass: f64, sigma2: f64) -> Result<Self> {
        let prior = PriorConfig { total_mass, sigma2 };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_mass > 0.0 && self.total_mass.is_finite()) {
            return Err(Error::invalid(format!("total mass must be positive, got {}", self.total_mass)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        Ok(())
    }

    pub fn sample_atom<R: Rng + ?Sized>(&self, spec: Calibration, rng: &mut R) -> BetaVector {
        let sd = self.sigma2.sqrt();
        let coefs = (0..spec.dim())
            .map(|_| sd * { let z: f64 = StandardNormal.sample(rng); z })
            .collect();
        BetaVector::new(coefs).expect("finite normal draws")
    }

    /// Base-measure log density up to an additive constant.
    pub fn log_density(&self, beta: &[f64]) -> f64 {
        -beta.iter().map(|b| b * b).sum::<f64>() / (2.0 * self.sigma2)
    }

    fn stick<R: Rng + ?Sized>(&self, occupied: f64, above: f64, rng: &mut R) -> f64 {
        let beta = Beta::new(1.0 + occupied, self.total_mass + above).expect("positive Beta parameters");
        open_unit(beta.sample(rng))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    /// Initial random-walk scale; adapted during burn-in when `adapt` is set.
    pub rw_step: f64,
    pub seed: u64,
    pub thin: usize,
    pub adapt: bool,
    /// Replace every copula density by 1, leaving the prior as the target.
    pub prior_only: bool,
    /// Divide the random-walk scale of a component by the square root of
    /// its occupancy. Off means one scale for every component.
    #[serde(default = "enabled")]
    pub occupancy_scaled: bool,
    /// Metropolis label swaps between the stick and slice updates.
    #[serde(default = "enabled")]
    pub label_swaps: bool,
    /// Random-walk steps spent fitting the initial single atom to all
    /// observations before the first sweep.
    #[serde(default)]
    pub warm_start: usize,
}

fn enabled() -> bool {
    true
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            iterations: 4000,
            burn_in: 3500,
            rw_step: 0.25,
            seed: 1,
            thin: 1,
            adapt: true,
            prior_only: false,
            occupancy_scaled: true,
            label_swaps: true,
            warm_start: 500,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be positive"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::invalid(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be positive"));
        }
        if !(self.rw_step > 0.0 && self.rw_step.is_finite()) {
            return Err(Error::invalid(format!("rw_step must be positive, got {}", self.rw_step)));
        }
        Ok(())
    }

    /// Number of recorded iterations.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Normal scores and covariates of the observations, in the form the density
/// evaluations need: `s = a^2 + b^2` and `p = a b`.
#[derive(Debug, Clone)]
pub struct ObservationScores {
    sum_sq: Vec<f64>,
    cross: Vec<f64>,
    x: Vec<f64>,
}

impl ObservationScores {
    pub fn from_pseudo(pseudo: &PseudoDataset) -> Self {
        let pairs: Vec<UnitPair> = (0..pseudo.len()).map(|i| pseudo.pair(i)).collect();
        Self::from_pairs(&pairs, &pseudo.x).expect("pseudo dataset columns have equal length")
    }

    pub fn from_pairs(pairs: &[UnitPair], x: &[f64]) -> Result<Self> {
        if pairs.len() != x.len() {
            return Err(Error::LengthMismatch {
                left: pairs.len(),
                right: x.len(),
            });
        }
        let (mut sum_sq, mut cross) = (Vec::with_capacity(x.len()), Vec::with_capacity(x.len()));
        for p in pairs {
            let (a, b) = p.normal_scores();
            sum_sq.push(a * a + b * b);
            cross.push(a * b);
        }
        Ok(ObservationScores {
            sum_sq,
            cross,
            x: x.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `log c_{rho(x_i|beta)}(u_i, v_i)`.
    #[inline]
    pub fn log_density(&self, i: usize, beta: &[f64], spec: Calibration) -> f64 {
        let rho = spec.rho_unchecked(beta, self.x[i]);
        let one_minus = 1.0 - rho * rho;
        -0.5 * one_minus.ln() - (rho * rho * self.sum_sq[i] - 2.0 * rho * self.cross[i]) / (2.0 * one_minus)
    }
}

/// Unnormalised log full conditional of one atom: base-measure log density
/// plus the log copula densities of the observations allocated to it.
pub struct AtomTarget<'a> {
    pub data: &'a ObservationScores,
    pub members: &'a [usize],
    pub prior: &'a PriorConfig,
    pub spec: Calibration,
    pub with_likelihood: bool,
}

impl AtomTarget<'_> {
    pub fn log_density(&self, beta: &[f64]) -> f64 {
        let mut lp = self.prior.log_density(beta);
        if self.with_likelihood {
            for &i in self.members {
                lp += self.data.log_density(i, beta, self.spec);
            }
        }
        lp
    }
}

/// One symmetric Gaussian random-walk Metropolis step on `beta`.
///
/// `current_lp` is the target log density at `beta`; the returned value is
/// the log density at the (possibly unchanged) new point, with the
/// acceptance flag.
pub fn random_walk_step<R: Rng + ?Sized>(
    beta: &mut BetaVector,
    current_lp: f64,
    log_target: impl Fn(&[f64]) -> f64,
    step: f64,
    rng: &mut R,
) -> (f64, bool) {
    let proposal: Vec<f64> = beta
        .as_slice()
        .iter()
        .map(|b| b + step * { let z: f64 = StandardNormal.sample(rng); z })
        .collect();
    let proposed_lp = log_target(&proposal);
    let log_ratio = proposed_lp - current_lp;
    let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
    if accept && proposal.iter().all(|b| b.is_finite()) {
        beta.as_mut_slice().copy_from_slice(&proposal);
        (proposed_lp, true)
    } else {
        (current_lp, false)
    }
}

/// Full sampler state. Components are indexed from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    pub slices: Vec<f64>,
    pub allocations: Vec<usize>,
    pub atoms: Vec<BetaVector>,
}

impl MixtureState {
    pub fn n_components(&self) -> usize {
        self.atoms.len()
    }

    pub fn occupancy(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_components()];
        for &d in &self.allocations {
            counts[d] += 1;
        }
        counts
    }

    /// Number of distinct allocation values (occupied components).
    pub fn occupied(&self) -> usize {
        self.occupancy().iter().filter(|&&c| c > 0).count()
    }

    pub fn max_allocation(&self) -> usize {
        self.allocations.iter().copied().max().unwrap_or(0)
    }

    /// `prod_{l < j} (1 - pi_l)` for `j = 0..=K`.
    pub fn remaining_mass(&self) -> Vec<f64> {
        let mut rem = Vec::with_capacity(self.sticks.len() + 1);
        let mut r = 1.0;
        rem.push(r);
        for &pi in &self.sticks {
            r *= 1.0 - pi;
            rem.push(r);
        }
        rem
    }

    fn recompute_weights(&mut self) {
        self.weights.clear();
        let mut r = 1.0;
        for &pi in &self.sticks {
            self.weights.push(pi * r);
            r *= 1.0 - pi;
        }
    }

    /// Checks every structural invariant of a state between sweeps.
    pub fn check_invariants(&self, spec: Calibration) -> Result<()> {
        let k = self.n_components();
        if self.sticks.len() != k || self.weights.len() != k {
            return Err(Error::Consistency(format!(
                "{} sticks and {} weights for {k} atoms",
                self.sticks.len(),
                self.weights.len()
            )));
        }
        if self.slices.len() != self.allocations.len() {
            return Err(Error::Consistency("slice and allocation counts differ".into()));
        }
        let mut partial = 0.0;
        for (j, (&w, &pi)) in self.weights.iter().zip(&self.sticks).enumerate() {
            if !(pi > 0.0 && pi < 1.0) {
                return Err(Error::Consistency(format!("stick {j} = {pi} outside (0, 1)")));
            }
            if !(w > 0.0) {
                return Err(Error::Consistency(format!("weight {j} = {w} is not positive")));
            }
            partial += w;
        }
        if !(partial < 1.0) {
            return Err(Error::Consistency(format!("weights sum to {partial} >= 1")));
        }
        for (i, (&z, &d)) in self.slices.iter().zip(&self.allocations).enumerate() {
            if d >= k {
                return Err(Error::Consistency(format!("observation {i} allocated to missing component {d}")));
            }
            if !(z > 0.0 && z < self.weights[d]) {
                return Err(Error::Consistency(format!(
                    "slice {i}: z = {z} not in (0, w_{d} = {})",
                    self.weights[d]
                )));
            }
        }
        for (j, atom) in self.atoms.iter().enumerate() {
            atom.conforms(spec)
                .map_err(|e| Error::Consistency(format!("atom {j}: {e}")))?;
        }
        Ok(())
    }

    /// Log of `prod_i 1(z_i < w_{d_i}) c_{rho(x_i|beta_{d_i})}(u_i, v_i)`;
    /// negative infinity when an indicator fails.
    pub fn log_augmented_likelihood(&self, data: &ObservationScores, spec: Calibration) -> f64 {
        let mut total = 0.0;
        for (i, (&z, &d)) in self.slices.iter().zip(&self.allocations).enumerate() {
            if !(z < self.weights[d]) {
                return f64::NEG_INFINITY;
            }
            total += data.log_density(i, self.atoms[d].as_slice(), spec);
        }
        total
    }
}

/// What is kept from one post-burn-in iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based sweep number.
    pub iter: usize,
    pub d_star: usize,
    pub weights: Vec<f64>,
    pub occupancy: Vec<usize>,
    pub atoms: Vec<BetaVector>,
}

impl IterationRecord {
    fn from_state(iter: usize, state: &MixtureState) -> Self {
        let occupancy = state.occupancy();
        IterationRecord {
            iter,
            d_star: occupancy.iter().filter(|&&c| c > 0).count(),
            weights: state.weights.clone(),
            occupancy,
            atoms: state.atoms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub calibration: Calibration,
    pub records: Vec<IterationRecord>,
    /// Metropolis acceptances and proposals after burn-in.
    pub accepted: u64,
    pub proposed: u64,
    /// Random-walk scale in force after burn-in.
    pub rw_step: f64,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn d_star(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.d_star as f64).collect()
    }
}

const ADAPT_WINDOW: usize = 50;
const TARGET_ACCEPT: (f64, f64) = (0.25, 0.40);

pub struct SliceSampler {
    data: ObservationScores,
    prior: PriorConfig,
    spec: Calibration,
    config: McmcConfig,
    rng: ChaCha8Rng,
    state: MixtureState,
    rw_step: f64,
    sweeps: usize,
    accepted: u64,
    proposed: u64,
    window: (u64, u64),
}

impl SliceSampler {
    /// Builds the sampler and its initial state: every observation in one
    /// component whose atom is drawn from the base measure.
    pub fn new(pseudo: &PseudoDataset, prior: PriorConfig, spec: Calibration, config: McmcConfig) -> Result<Self> {
        prior.validate()?;
        config.validate()?;
        if pseudo.len() < 2 {
            return Err(Error::invalid("need at least 2 observations"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut state = init_state(pseudo.len(), &prior, spec, &mut rng);
        let data = ObservationScores::from_pseudo(pseudo);
        if !config.prior_only && config.warm_start > 0 {
            let members: Vec<usize> = (0..data.len()).collect();
            let target = AtomTarget {
                data: &data,
                members: &members,
                prior: &prior,
                spec,
                with_likelihood: true,
            };
            warm_start_atom(&mut state.atoms[0], &target, config.warm_start, config.rw_step, &mut rng);
        }
        Ok(SliceSampler {
            data,
            prior,
            spec,
            rw_step: config.rw_step,
            config,
            rng,
            state,
            sweeps: 0,
            accepted: 0,
            proposed: 0,
            window: (0, 0),
        })
    }

    pub fn state(&self) -> &MixtureState {
        &self.state
    }

    /// Replaces the state, e.g. to start a step from a hand-built configuration.
    pub fn set_state(&mut self, state: MixtureState) -> Result<()> {
        if state.allocations.len() != self.data.len() {
            return Err(Error::LengthMismatch {
                left: state.allocations.len(),
                right: self.data.len(),
            });
        }
        self.state = state;
        Ok(())
    }

    pub fn data(&self) -> &ObservationScores {
        &self.data
    }

    pub fn rw_step(&self) -> f64 {
        self.rw_step
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn acceptance_counts(&self) -> (u64, u64) {
        (self.accepted, self.proposed)
    }

    pub fn update_sticks(&mut self) {
        let k = self.state.n_components();
        let mut counts = vec![0usize; k];
        for &d in &self.state.allocations {
            counts[d] += 1;
        }
        let mut above = self.state.allocations.len();
        for (j, &c) in counts.iter().enumerate() {
            above -= c;
            self.state.sticks[j] = self.prior.stick(c as f64, above as f64, &mut self.rng);
        }
        self.state.recompute_weights();
    }

    /// Relabelling moves on `(weights, allocations, atoms)`: two distinct
    /// occupied components `a`, `b` exchange their members and atoms while
    /// the weights stay put, accepted with probability
    /// `min(1, (w_b / w_a)^(n_a - n_b))`. One proposal per occupied
    /// component. Must run while the slices are stale, i.e. between the
    /// stick and slice updates. Returns the accepted count.
    ///
    /// The pair is drawn from the occupied set only: the instantiated count
    /// depends on the previous sweep's slices, so proposing against it would
    /// not be symmetric.
    pub fn update_labels(&mut self) -> usize {
        let mut counts = self.state.occupancy();
        let occupied: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0).collect();
        let m = occupied.len();
        if m < 2 {
            return 0;
        }
        let mut swaps = 0;
        for _ in 0..m {
            let i = self.rng.random_range(0..m);
            let mut l = self.rng.random_range(0..m - 1);
            if l >= i {
                l += 1;
            }
            let (a, b) = (occupied[i], occupied[l]);
            let (na, nb) = (counts[a] as f64, counts[b] as f64);
            let log_ratio = (na - nb) * (self.state.weights[b].ln() - self.state.weights[a].ln());
            if !(self.rng.random::<f64>().ln() < log_ratio) {
                continue;
            }
            swaps += 1;
            self.state.atoms.swap(a, b);
            counts.swap(a, b);
            for d in self.state.allocations.iter_mut() {
                if *d == a {
                    *d = b;
                } else if *d == b {
                    *d = a;
                }
            }
        }
        swaps
    }

    pub fn update_slices(&mut self) {
        let state = &mut self.state;
        for (z, &d) in state.slices.iter_mut().zip(&state.allocations) {
            let w = state.weights[d];
            *z = (w * open_unit(self.rng.random::<f64>())).max(f64::MIN_POSITIVE).min(w * (1.0 - f64::EPSILON));
        }
    }

    /// Instantiates (or drops) components so that exactly `N*` exist, where
    /// `N*` is the smallest index whose unassigned stick mass is below every
    /// slice. Dropped components are always unallocated.
    pub fn extend_to_nstar(&mut self) -> Result<usize> {
        let z_min = self.state.slices.iter().copied().fold(f64::INFINITY, f64::min);
        let rem = self.state.remaining_mass();
        let nstar = match rem.iter().skip(1).position(|&r| r < z_min) {
            Some(pos) => pos + 1,
            None => {
                let mut r = rem[rem.len() - 1];
                while r >= z_min {
                    let pi = self.prior.stick(0.0, 0.0, &mut self.rng);
                    let atom = self.prior.sample_atom(self.spec, &mut self.rng);
                    self.state.weights.push(pi * r);
                    self.state.sticks.push(pi);
                    self.state.atoms.push(atom);
                    r *= 1.0 - pi;
                }
                self.state.atoms.len()
            }
        };
        if nstar <= self.state.max_allocation() {
            return Err(Error::Consistency(format!(
                "truncation level {nstar} below allocated component {}",
                self.state.max_allocation() + 1
            )));
        }
        self.state.sticks.truncate(nstar);
        self.state.weights.truncate(nstar);
        self.state.atoms.truncate(nstar);
        Ok(nstar)
    }

    pub fn update_allocations(&mut self) -> Result<()> {
        let k = self.state.n_components();
        let mut logp = Vec::with_capacity(k);
        let mut cand = Vec::with_capacity(k);
        for i in 0..self.data.len() {
            let z = self.state.slices[i];
            logp.clear();
            cand.clear();
            for j in 0..k {
                if z < self.state.weights[j] {
                    cand.push(j);
                    logp.push(if self.config.prior_only {
                        0.0
                    } else {
                        self.data.log_density(i, self.state.atoms[j].as_slice(), self.spec)
                    });
                }
            }
            if cand.is_empty() {
                return Err(Error::Consistency(format!("observation {i} has no candidate component")));
            }
            let j = cand[sample_log_categorical(&logp, &mut self.rng)];
            self.state.allocations[i] = j;
        }
        Ok(())
    }

    pub fn update_betas(&mut self) {
        let k = self.state.n_components();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &d) in self.state.allocations.iter().enumerate() {
            members[d].push(i);
        }
        let mut accepted = 0u64;
        let mut proposed = 0u64;
        for (j, m) in members.iter().enumerate() {
            if m.is_empty() {
                self.state.atoms[j] = self.prior.sample_atom(self.spec, &mut self.rng);
                continue;
            }
            let target = AtomTarget {
                data: &self.data,
                members: m,
                prior: &self.prior,
                spec: self.spec,
                with_likelihood: !self.config.prior_only,
            };
            let atom = &mut self.state.atoms[j];
            let lp = target.log_density(atom.as_slice());
            let step = if self.config.occupancy_scaled {
                self.rw_step / (m.len() as f64).sqrt()
            } else {
                self.rw_step
            };
            let (_, ok) = random_walk_step(atom, lp, |b| target.log_density(b), step, &mut self.rng);
            proposed += 1;
            accepted += ok as u64;
        }
        self.window.0 += accepted;
        self.window.1 += proposed;
        if self.sweeps >= self.config.burn_in {
            self.accepted += accepted;
            self.proposed += proposed;
        }
    }

    /// One full Gibbs sweep.
    pub fn sweep(&mut self) -> Result<()> {
        self.update_sticks();
        if self.config.label_swaps {
            self.update_labels();
        }
        self.update_slices();
        self.extend_to_nstar()?;
        self.update_allocations()?;
        self.update_betas();
        self.sweeps += 1;
        if self.config.adapt && self.sweeps <= self.config.burn_in && self.sweeps % ADAPT_WINDOW == 0 {
            self.adapt_step();
        }
        Ok(())
    }

    fn adapt_step(&mut self) {
        let (acc, prop) = std::mem::take(&mut self.window);
        if prop == 0 {
            return;
        }
        let rate = acc as f64 / prop as f64;
        if rate < TARGET_ACCEPT.0 {
            self.rw_step *= 0.75;
        } else if rate > TARGET_ACCEPT.1 {
            self.rw_step *= 1.3;
        }
    }

    /// Runs all configured sweeps, calling `observe` after each one.
    pub fn run_with<F>(mut self, mut observe: F) -> Result<ChainTrace>
    where
        F: FnMut(usize, &MixtureState) -> Result<()>,
    {
        let mut records = Vec::with_capacity(self.config.kept());
        for t in 1..=self.config.iterations {
            self.sweep()?;
            observe(t, &self.state)?;
            if t > self.config.burn_in && (t - self.config.burn_in) % self.config.thin == 0 {
                records.push(IterationRecord::from_state(t, &self.state));
            }
        }
        Ok(ChainTrace {
            calibration: self.spec,
            records,
            accepted: self.accepted,
            proposed: self.proposed,
            rw_step: self.rw_step,
        })
    }

    pub fn run(self) -> Result<ChainTrace> {
        self.run_with(|_, _| Ok(()))
    }
}

/// Initial state for `n` observations: one component, atom from the base
/// measure, `pi_1 ~ Be(1, lambda)`, slices uniform below `w_1`.
pub fn init_state<R: Rng + ?Sized>(n: usize, prior: &PriorConfig, spec: Calibration, rng: &mut R) -> MixtureState {
    let atom = prior.sample_atom(spec, rng);
    let pi = prior.stick(0.0, 0.0, rng);
    let slices = (0..n).map(|_| (pi * open_unit(rng.random::<f64>())).max(f64::MIN_POSITIVE)).collect();
    MixtureState {
        sticks: vec![pi],
        weights: vec![pi],
        slices,
        allocations: vec![0; n],
        atoms: vec![atom],
    }
}

/// Short adaptive random walk that moves the initial atom into the bulk of
/// its all-observations conditional. Only the starting point changes.
fn warm_start_atom<R: Rng + ?Sized>(atom: &mut BetaVector, target: &AtomTarget<'_>, steps: usize, step: f64, rng: &mut R) {
    let mut step = step;
    let mut lp = target.log_density(atom.as_slice());
    let mut accepted = 0;
    for t in 1..=steps {
        let (next, ok) = random_walk_step(atom, lp, |b| target.log_density(b), step, rng);
        lp = next;
        accepted += ok as usize;
        if t % ADAPT_WINDOW == 0 {
            let rate = accepted as f64 / ADAPT_WINDOW as f64;
            if rate < TARGET_ACCEPT.0 {
                step *= 0.5;
            } else if rate > TARGET_ACCEPT.1 {
                step *= 2.0;
            }
            accepted = 0;
        }
    }
}

/// Draws an index with probability proportional to `exp(logp)`.
pub fn sample_log_categorical<R: Rng + ?Sized>(logp: &[f64], rng: &mut R) -> usize {
    if logp.len() == 1 {
        return 0;
    }
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return rng.random_range(0..logp.len());
    }
    let total: f64 = logp.iter().map(|l| (l - max).exp()).sum();
    let mut target = rng.random::<f64>() * total;
    for (j, l) in logp.iter().enumerate() {
        target -= (l - max).exp();
        if target < 0.0 {
            return j;
        }
    }
    logp.len() - 1
}

/// Runs one chain from its configured seed.
pub fn run_chain(pseudo: &PseudoDataset, prior: PriorConfig, spec: Calibration, config: McmcConfig) -> Result<ChainTrace> {
    SliceSampler::new(pseudo, prior, spec, config)?.run()
}
