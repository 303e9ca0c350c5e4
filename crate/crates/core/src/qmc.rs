//! Discrete imaginary-time path-integral Monte Carlo for 2-local
//! transverse-field Ising problems.
//!
//! The classical model has `M` replicas of every spin. Replica slices carry
//! the problem couplings scaled by `B(s)/M`, and neighbouring replicas of the
//! same spin are coupled ferromagnetically by `J⊥ = −(1/2β) ln tanh(Aβ/M)`.
//! `β` is an inverse linear frequency in 1/GHz.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{estimate_success, SuccessEstimate};
use crate::constants::ENERGY_TOL;
use crate::problems::{IsingProblem, ProblemError, SpinConfig, TwoLocal};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::schedule::AnnealSchedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmcError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("no grid point reached p = {target}; best was p = {max_p} at {n_sweeps} sweeps, beta {beta}")]
    TargetNotReached { target: f64, max_p: f64, n_sweeps: usize, beta: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// The first replica.
    #[default]
    Slice0,
    /// The lowest-energy replica.
    BestReplica,
}

/// Inter-replica coupling `J⊥ = −(1/2β) ln tanh(Aβ/M)` in GHz. Infinite when
/// `A = 0`, where worldlines are frozen.
pub fn replica_coupling(a: f64, beta: f64, m: usize) -> Result<f64, QmcError> {
    if !(a >= 0.0) || !(beta > 0.0) || m == 0 {
        return Err(QmcError::Invalid(format!("need A >= 0, beta > 0, M >= 1 (got {a}, {beta}, {m})")));
    }
    if a == 0.0 {
        return Ok(f64::INFINITY);
    }
    // −ln tanh x = ln(1 + e^{−2x}) − ln(1 − e^{−2x}) stays positive for large x
    let q = (-2.0 * a * beta / m as f64).exp();
    Ok((q.ln_1p() - (-q).ln_1p()) / (2.0 * beta))
}

/// Probability of binding two aligned neighbouring replicas into one cluster,
/// `1 − e^{−2βJ⊥} = 1 − tanh(Aβ/M)`.
fn bond_probability(a: f64, beta: f64, m: usize) -> f64 {
    1.0 - (a * beta / m as f64).tanh()
}

/// Replica spins `σ_j(τ)`, stored slice by slice.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldlineState {
    n: usize,
    m: usize,
    spins: Vec<i8>,
    pub boundary: Boundary,
    pub beta: f64,
}

impl WorldlineState {
    pub fn new(n: usize, m: usize, boundary: Boundary, beta: f64, spins: Vec<i8>) -> Result<Self, QmcError> {
        if m < 1 || spins.len() != n * m {
            return Err(QmcError::Invalid(format!("need {n}x{m} replica spins, got {}", spins.len())));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(QmcError::Invalid("replica spins must be +1 or -1".into()));
        }
        Ok(Self { n, m, spins, boundary, beta })
    }

    pub fn random(n: usize, m: usize, boundary: Boundary, beta: f64, rng: &mut Rng) -> Self {
        let spins = (0..n * m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self { n, m, spins, boundary, beta }
    }

    /// Every replica set to `config`.
    pub fn uniform(config: &SpinConfig, m: usize, boundary: Boundary, beta: f64) -> Self {
        let spins = (0..m).flat_map(|_| config.as_slice().iter().copied()).collect();
        Self { n: config.len(), m, spins, boundary, beta }
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn trotter(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, j: usize, tau: usize) -> i8 {
        self.spins[tau * self.n + j]
    }

    pub fn slice(&self, tau: usize) -> &[i8] {
        &self.spins[tau * self.n..(tau + 1) * self.n]
    }

    fn seam_links(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.m,
            Boundary::Open => self.m - 1,
        }
    }
}

/// `H_cl = −Σ_τ [ (B/M) Σ_terms J Π σ(τ) + J⊥ Σ_j σ_j(τ) σ_j(τ+1) ]`, with the
/// `τ = M` link dropped for open boundaries.
pub fn effective_classical_energy(
    problem: &IsingProblem,
    state: &WorldlineState,
    schedule: &AnnealSchedule,
    s: f64,
) -> Result<f64, QmcError> {
    problem.two_local()?;
    if state.n != problem.num_vars() {
        return Err(QmcError::Invalid("state and problem sizes differ".into()));
    }
    let (a, b) = schedule.at(s);
    let m = state.m;
    let j_perp = replica_coupling(a, state.beta, m)?;
    let spatial: f64 = (0..m).map(|tau| problem.energy_of(state.slice(tau))).sum();
    let mut links = 0i64;
    for tau in 0..state.seam_links() {
        let next = (tau + 1) % m;
        links += (0..state.n).map(|j| (state.get(j, tau) * state.get(j, next)) as i64).sum::<i64>();
    }
    let replica = if links == 0 { 0.0 } else { -j_perp * links as f64 };
    Ok(b / m as f64 * spatial + replica)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmcParams {
    /// Inverse temperature, 1/GHz.
    pub beta: f64,
    /// Number of replicas `M`.
    pub trotter: usize,
    pub n_sweeps: usize,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub readout: Readout,
}

impl QmcParams {
    pub fn new(beta: f64, trotter: usize, n_sweeps: usize) -> Self {
        Self { beta, trotter, n_sweeps, boundary: Boundary::Periodic, readout: Readout::Slice0 }
    }

    pub fn validate(&self) -> Result<(), QmcError> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(QmcError::Invalid(format!("beta = {} must be positive", self.beta)));
        }
        if self.trotter < 2 {
            return Err(QmcError::Invalid("need at least 2 replicas".into()));
        }
        if self.n_sweeps == 0 {
            return Err(QmcError::Invalid("need at least one sweep".into()));
        }
        Ok(())
    }
}

/// Worldline sampler at fixed schedule point.
pub struct WorldlineSampler<'a> {
    couplings: &'a TwoLocal,
    pub state: WorldlineState,
    /// Scratch list of cluster slices.
    cluster: Vec<usize>,
}

impl<'a> WorldlineSampler<'a> {
    pub fn new(couplings: &'a TwoLocal, state: WorldlineState) -> Self {
        Self { couplings, state, cluster: Vec::new() }
    }

    /// One cluster update of the worldline of spin `j`: grow an interval of
    /// aligned replicas from a random seed with bond probability `p_bond`,
    /// then accept the flip with the Metropolis rule on the slice energy
    /// change scaled by `b_over_m`. Returns whether the flip was accepted.
    pub fn update_worldline(&mut self, j: usize, p_bond: f64, b_over_m: f64, rng: &mut Rng) -> bool {
        let st = &mut self.state;
        let (n, m) = (st.n, st.m);
        let seed = rng.random_range(0..m);
        let sign = st.spins[seed * n + j];
        self.cluster.clear();
        self.cluster.push(seed);
        let periodic = st.boundary == Boundary::Periodic;
        // grow upward
        let mut hi = seed;
        let mut closed = false;
        loop {
            let next = if hi + 1 < m {
                hi + 1
            } else if periodic {
                0
            } else {
                break;
            };
            if next == seed {
                closed = true;
                break;
            }
            if st.spins[next * n + j] != sign || rng.random::<f64>() >= p_bond {
                break;
            }
            self.cluster.push(next);
            hi = next;
        }
        if !closed {
            let mut lo = seed;
            loop {
                let prev = if lo > 0 {
                    lo - 1
                } else if periodic {
                    m - 1
                } else {
                    break;
                };
                if prev == hi {
                    break;
                }
                if st.spins[prev * n + j] != sign || rng.random::<f64>() >= p_bond {
                    break;
                }
                self.cluster.push(prev);
                lo = prev;
            }
        }
        let mut delta = 0.0;
        for &tau in &self.cluster {
            let slice = &st.spins[tau * n..(tau + 1) * n];
            delta += 2.0 * sign as f64 * self.couplings.local_field(j, |k| slice[k]);
        }
        delta *= b_over_m;
        if delta <= 0.0 || rng.random::<f64>() < (-st.beta * delta).exp() {
            for &tau in &self.cluster {
                st.spins[tau * n + j] = -sign;
            }
            true
        } else {
            false
        }
    }

    /// Two worldline updates per spin at schedule amplitudes `(a, b)`.
    pub fn sweep(&mut self, a: f64, b: f64, rng: &mut Rng) {
        let m = self.state.m;
        let p_bond = bond_probability(a, self.state.beta, m);
        let b_over_m = b / m as f64;
        for j in 0..self.state.n {
            for _ in 0..2 {
                self.update_worldline(j, p_bond, b_over_m, rng);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmcResult {
    pub config: SpinConfig,
    pub energy: f64,
}

/// One annealing run from random replicas. Sweep `i = 1..=n_sweeps` runs at
/// `s = i / n_sweeps`.
pub fn qmc_anneal(problem: &IsingProblem, schedule: &AnnealSchedule, params: &QmcParams, seed: u64) -> Result<QmcResult, QmcError> {
    params.validate()?;
    let couplings = problem.two_local()?;
    let mut rng = rng_from_seed(seed);
    let state = WorldlineState::random(problem.num_vars(), params.trotter, params.boundary, params.beta, &mut rng);
    let mut sampler = WorldlineSampler::new(&couplings, state);
    for i in 1..=params.n_sweeps {
        let (a, b) = schedule.at(i as f64 / params.n_sweeps as f64);
        sampler.sweep(a, b, &mut rng);
    }
    let state = sampler.state;
    let tau = match params.readout {
        Readout::Slice0 => 0,
        Readout::BestReplica => (0..state.m)
            .map(|tau| (tau, problem.energy_of(state.slice(tau))))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(tau, _)| tau)
            .expect("at least one replica"),
    };
    let spins = state.slice(tau).to_vec();
    let energy = problem.energy_of(&spins);
    Ok(QmcResult { config: SpinConfig::from_spins_unchecked(spins), energy })
}

pub fn qmc_success_probability(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    params: &QmcParams,
    n_runs: usize,
    seed: u64,
    target_energy: f64,
) -> Result<SuccessEstimate, QmcError> {
    params.validate()?;
    problem.two_local()?;
    Ok(estimate_success(n_runs, seed, |run_seed| {
        qmc_anneal(problem, schedule, params, run_seed)
            .map(|r| r.energy <= target_energy + ENERGY_TOL)
            .unwrap_or(false)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairGrid {
    pub sweeps: Vec<usize>,
    pub betas: Vec<f64>,
    pub trotter: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPoint {
    pub n_sweeps: usize,
    pub beta: f64,
    pub success: SuccessEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saturation {
    pub n_sweeps: usize,
    /// Smallest β whose success is within two standard errors of the best at this sweep count.
    pub beta_sat: f64,
    pub p_sat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOptimum {
    pub n_sweeps: usize,
    pub beta: f64,
    pub p: f64,
    pub saturation: Vec<Saturation>,
    pub points: Vec<PairPoint>,
}

/// Saturation point of each sweep count.
pub fn saturation_points(points: &[PairPoint]) -> Vec<Saturation> {
    let mut sweeps: Vec<usize> = points.iter().map(|p| p.n_sweeps).collect();
    sweeps.sort_unstable();
    sweeps.dedup();
    sweeps
        .into_iter()
        .map(|ns| {
            let mut row: Vec<&PairPoint> = points.iter().filter(|p| p.n_sweeps == ns).collect();
            row.sort_by(|a, b| a.beta.total_cmp(&b.beta));
            let best = row.iter().map(|p| p.success.p).fold(0.0, f64::max);
            let sat = row
                .iter()
                .find(|p| p.success.p >= best - 2.0 * p.success.stderr.max(1e-12))
                .expect("nonempty row");
            Saturation { n_sweeps: ns, beta_sat: sat.beta, p_sat: best }
        })
        .collect()
}

/// Scans the grid and returns the point with success at least `target` that
/// minimizes `β · n_sweeps` (ties toward fewer sweeps).
pub fn optimize_pair_parameters(
    problem: &IsingProblem,
    schedule: &AnnealSchedule,
    target: f64,
    grid: &PairGrid,
    n_runs: usize,
    seed: u64,
    target_energy: f64,
) -> Result<PairOptimum, QmcError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(QmcError::Invalid(format!("target {target} outside (0, 1)")));
    }
    let mut points = Vec::new();
    for (si, &n_sweeps) in grid.sweeps.iter().enumerate() {
        for (bi, &beta) in grid.betas.iter().enumerate() {
            let params = QmcParams { beta, trotter: grid.trotter, n_sweeps, boundary: grid.boundary, readout: Readout::Slice0 };
            let stream = derive_seed(seed, (si * grid.betas.len() + bi) as u64);
            let success = qmc_success_probability(problem, schedule, &params, n_runs, stream, target_energy)?;
            points.push(PairPoint { n_sweeps, beta, success });
        }
    }
    select_pair_optimum(points, target)
}

/// Selection step of [`optimize_pair_parameters`] on measured points.
pub fn select_pair_optimum(points: Vec<PairPoint>, target: f64) -> Result<PairOptimum, QmcError> {
    if points.is_empty() {
        return Err(QmcError::Invalid("empty grid".into()));
    }
    let best = points
        .iter()
        .filter(|p| p.success.p >= target)
        .min_by(|a, b| {
            (a.beta * a.n_sweeps as f64)
                .total_cmp(&(b.beta * b.n_sweeps as f64))
                .then(a.n_sweeps.cmp(&b.n_sweeps))
        });
    match best {
        Some(b) => Ok(PairOptimum {
            n_sweeps: b.n_sweeps,
            beta: b.beta,
            p: b.success.p,
            saturation: saturation_points(&points),
            points: points.clone(),
        }),
        None => {
            let top = points.iter().max_by(|a, b| a.success.p.total_cmp(&b.success.p)).expect("nonempty");
            Err(QmcError::TargetNotReached { target, max_p: top.success.p, n_sweeps: top.n_sweeps, beta: top.beta })
        }
    }
}
