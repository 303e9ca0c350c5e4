//! Metropolis simulated annealing with restart statistics and grid tuning.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{estimate_success, nearest_rank, runs_to_target, SuccessEstimate};
use crate::constants::ENERGY_TOL;
use crate::problems::{IsingProblem, SpinConfig};
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("no tuning instances")]
    NoInstances,
    #[error("no grid point reached the target; best was {sweeps} sweeps, beta {beta_init}..{beta_final} with mean success {max_p}")]
    TuneFailed { sweeps: usize, beta_init: f64, beta_final: f64, max_p: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaInterpolation {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    #[default]
    Sequential,
    /// A fresh random permutation every sweep.
    Random,
}

/// Inverse-temperature ramp in units of the coupling scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub beta_init: f64,
    pub beta_final: f64,
    pub n_sweeps: usize,
    #[serde(default)]
    pub interpolation: BetaInterpolation,
    #[serde(default)]
    pub order: SweepOrder,
}

impl SaSchedule {
    pub fn linear(beta_init: f64, beta_final: f64, n_sweeps: usize) -> Self {
        Self {
            beta_init,
            beta_final,
            n_sweeps,
            interpolation: BetaInterpolation::Linear,
            order: SweepOrder::Sequential,
        }
    }

    pub fn validate(&self) -> Result<(), SaError> {
        let err = |m: &str| Err(SaError::Schedule(m.to_owned()));
        if !(self.beta_init.is_finite() && self.beta_final.is_finite()) {
            return err("beta must be finite");
        }
        if !(0.0 <= self.beta_init && self.beta_init <= self.beta_final) {
            return err("need 0 <= beta_init <= beta_final");
        }
        if self.n_sweeps == 0 {
            return err("need at least one sweep");
        }
        if self.interpolation == BetaInterpolation::Geometric && self.beta_init <= 0.0 {
            return err("geometric interpolation needs beta_init > 0");
        }
        Ok(())
    }

    /// β used during sweep `i` (0-based); the last sweep runs at `beta_final`.
    pub fn beta_at(&self, i: usize) -> f64 {
        if self.n_sweeps == 1 {
            return self.beta_final;
        }
        let x = i as f64 / (self.n_sweeps - 1) as f64;
        match self.interpolation {
            BetaInterpolation::Linear => self.beta_init + (self.beta_final - self.beta_init) * x,
            BetaInterpolation::Geometric => self.beta_init * (self.beta_final / self.beta_init).powf(x),
        }
    }
}

/// A configuration walker supporting incremental single-spin flips.
pub trait FlipWalker {
    fn num_vars(&self) -> usize;
    fn spins(&self) -> &[i8];
    fn energy(&self) -> f64;
    /// Energy change if spin `j` were flipped.
    fn flip_delta(&self, j: usize) -> f64;
    /// Flips spin `j`; `delta` is the value returned by `flip_delta(j)`.
    fn flip(&mut self, j: usize, delta: f64);
}

pub struct IsingWalker<'a> {
    problem: &'a IsingProblem,
    spins: Vec<i8>,
    energy: f64,
}

impl<'a> IsingWalker<'a> {
    pub fn new(problem: &'a IsingProblem, spins: Vec<i8>) -> Self {
        let energy = problem.energy_of(&spins);
        Self { problem, spins, energy }
    }

    pub fn random(problem: &'a IsingProblem, rng: &mut Rng) -> Self {
        let spins = random_spins(problem.num_vars(), rng);
        Self::new(problem, spins)
    }
}

pub fn random_spins(n: usize, rng: &mut Rng) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

impl FlipWalker for IsingWalker<'_> {
    fn num_vars(&self) -> usize {
        self.spins.len()
    }
    fn spins(&self) -> &[i8] {
        &self.spins
    }
    fn energy(&self) -> f64 {
        self.energy
    }
    fn flip_delta(&self, j: usize) -> f64 {
        self.problem.flip_delta(&self.spins, j)
    }
    fn flip(&mut self, j: usize, delta: f64) {
        self.spins[j] = -self.spins[j];
        self.energy += delta;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub best_spins: Vec<i8>,
    /// Running-sum energy of `best_spins`.
    pub best_energy: f64,
    pub accepted: u64,
    pub attempted: u64,
}

/// Runs the Metropolis schedule on `walker`, tracking the best configuration seen.
pub fn anneal<W: FlipWalker>(walker: &mut W, schedule: &SaSchedule, rng: &mut Rng) -> AnnealOutcome {
    let n = walker.num_vars();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_spins = walker.spins().to_vec();
    let mut best_energy = walker.energy();
    let (mut accepted, mut attempted) = (0u64, 0u64);
    for sweep in 0..schedule.n_sweeps {
        let beta = schedule.beta_at(sweep);
        if schedule.order == SweepOrder::Random {
            order.shuffle(rng);
        }
        for &j in &order {
            attempted += 1;
            let delta = walker.flip_delta(j);
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                walker.flip(j, delta);
                accepted += 1;
                if walker.energy() < best_energy - 0.5 * ENERGY_TOL {
                    best_energy = walker.energy();
                    best_spins.copy_from_slice(walker.spins());
                }
            }
        }
    }
    AnnealOutcome { best_spins, best_energy, accepted, attempted }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaResult {
    pub config: SpinConfig,
    pub energy: f64,
    pub acceptance_rate: f64,
}

/// One annealing run from a uniformly random start. Returns the best
/// configuration seen and its exactly re-evaluated energy.
pub fn sa_run(problem: &IsingProblem, schedule: &SaSchedule, seed: u64) -> Result<SaResult, SaError> {
    schedule.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut walker = IsingWalker::random(problem, &mut rng);
    let out = anneal(&mut walker, schedule, &mut rng);
    let energy = problem.energy_of(&out.best_spins);
    Ok(SaResult {
        config: SpinConfig::from_spins_unchecked(out.best_spins),
        energy,
        acceptance_rate: out.accepted as f64 / out.attempted.max(1) as f64,
    })
}

/// Fraction of `n_runs` independent runs reaching `target_energy` (within 1e-9).
pub fn sa_success_probability(
    problem: &IsingProblem,
    schedule: &SaSchedule,
    n_runs: usize,
    seed: u64,
    target_energy: f64,
) -> Result<SuccessEstimate, SaError> {
    schedule.validate()?;
    Ok(estimate_success(n_runs, seed, |run_seed| {
        sa_run(problem, schedule, run_seed)
            .map(|r| r.energy <= target_energy + ENERGY_TOL)
            .unwrap_or(false)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub sweeps: Vec<usize>,
    /// `(beta_init, beta_final)` pairs.
    pub betas: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub schedule: SaSchedule,
    /// Per-instance success estimates.
    pub success: Vec<f64>,
    /// Per-instance effort in spin updates, infinite when nothing succeeded.
    pub effort: Vec<f64>,
    pub quantile_effort: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub schedule: SaSchedule,
    pub quantile_effort: f64,
    pub points: Vec<GridPoint>,
}

/// Spin updates needed to reach the optimum with 99% probability:
/// `n_sweeps × N × ⌈ln 0.01 / ln(1 − p)⌉`.
pub fn sa_effort_updates(n_sweeps: usize, n: usize, p: f64) -> f64 {
    match runs_to_target(p) {
        Some(runs) => (n_sweeps * n) as f64 * runs as f64,
        None => f64::INFINITY,
    }
}

/// Grid search minimizing the `quantile` of per-instance effort.
///
/// `estimate(instance, schedule)` returns the success probability of one
/// instance; `sizes[i]` is its variable count. Ties prefer fewer sweeps.
pub fn tune_grid<F>(sizes: &[usize], grid: &TuneGrid, quantile: f64, estimate: F) -> Result<TuneResult, SaError>
where
    F: Fn(usize, &SaSchedule) -> f64,
{
    if sizes.is_empty() {
        return Err(SaError::NoInstances);
    }
    let mut points = Vec::new();
    for &n_sweeps in &grid.sweeps {
        for &(beta_init, beta_final) in &grid.betas {
            let schedule = SaSchedule::linear(beta_init, beta_final, n_sweeps);
            schedule.validate()?;
            let success: Vec<f64> = (0..sizes.len()).map(|i| estimate(i, &schedule)).collect();
            let effort: Vec<f64> = success
                .iter()
                .zip(sizes)
                .map(|(&p, &n)| sa_effort_updates(n_sweeps, n, p))
                .collect();
            let quantile_effort = nearest_rank(&effort, quantile);
            points.push(GridPoint { schedule, success, effort, quantile_effort });
        }
    }
    let best = points
        .iter()
        .filter(|p| p.quantile_effort.is_finite())
        .min_by(|a, b| {
            a.quantile_effort
                .total_cmp(&b.quantile_effort)
                .then(a.schedule.n_sweeps.cmp(&b.schedule.n_sweeps))
        });
    match best {
        Some(b) => Ok(TuneResult { schedule: b.schedule, quantile_effort: b.quantile_effort, points: points.clone() }),
        None => {
            let mean = |p: &GridPoint| p.success.iter().sum::<f64>() / p.success.len() as f64;
            let top = points.iter().max_by(|a, b| mean(a).total_cmp(&mean(b))).expect("nonempty grid");
            Err(SaError::TuneFailed {
                sweeps: top.schedule.n_sweeps,
                beta_init: top.schedule.beta_init,
                beta_final: top.schedule.beta_final,
                max_p: mean(top),
            })
        }
    }
}

/// Tunes SA over `grid` for `(problem, target energy)` instances.
pub fn sa_tune(
    instances: &[(IsingProblem, f64)],
    quantile: f64,
    grid: &TuneGrid,
    n_runs: usize,
    seed: u64,
) -> Result<TuneResult, SaError> {
    let sizes: Vec<usize> = instances.iter().map(|(p, _)| p.num_vars()).collect();
    tune_grid(&sizes, grid, quantile, |i, schedule| {
        let (problem, target) = &instances[i];
        sa_success_probability(problem, schedule, n_runs, derive_seed(seed, i as u64), *target)
            .map(|e| e.p)
            .unwrap_or(0.0)
    })
}
