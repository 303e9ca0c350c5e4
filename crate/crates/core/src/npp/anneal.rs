use num_bigint::BigUint;

use super::{residue, NppError, NppInstance, Partition};
use crate::bench::{estimate_success, SuccessEstimate};
use crate::problems::SpinConfig;
use crate::rng::rng_from_seed;
use crate::sa::{anneal, random_spins, FlipWalker, SaSchedule};

/// Single-flip walker on `E = |Ω| · 2^{−b}` with an exact integer residue.
pub struct NppWalker {
    a: Vec<i128>,
    spins: Vec<i8>,
    omega: i128,
    scale: f64,
}

impl NppWalker {
    pub fn new(instance: &NppInstance, spins: Vec<i8>) -> Result<Self, NppError> {
        let a = instance.as_i128().ok_or_else(|| NppError::TooLarge {
            what: "annealing",
            n: instance.len(),
            detail: format!("{}-bit numbers overflow the 128-bit residue", instance.bits()),
        })?;
        if spins.len() != a.len() {
            return Err(NppError::Invalid(format!("{} spins for {} numbers", spins.len(), a.len())));
        }
        let omega = a.iter().zip(&spins).map(|(&x, &s)| x * s as i128).sum();
        Ok(Self { a, spins, omega, scale: (-(instance.bits() as f64)).exp2() })
    }

    pub fn omega(&self) -> i128 {
        self.omega
    }
}

impl FlipWalker for NppWalker {
    fn num_vars(&self) -> usize {
        self.a.len()
    }
    fn spins(&self) -> &[i8] {
        &self.spins
    }
    fn energy(&self) -> f64 {
        self.omega.unsigned_abs() as f64 * self.scale
    }
    fn flip_delta(&self, j: usize) -> f64 {
        let next = self.omega - 2 * self.a[j] * self.spins[j] as i128;
        (next.unsigned_abs() as f64 - self.omega.unsigned_abs() as f64) * self.scale
    }
    fn flip(&mut self, j: usize, _delta: f64) {
        self.omega -= 2 * self.a[j] * self.spins[j] as i128;
        self.spins[j] = -self.spins[j];
    }
}

/// One annealing run from a random configuration; β is in units of `2^b`.
pub fn npp_sa_run(instance: &NppInstance, schedule: &SaSchedule, seed: u64) -> Result<Partition, NppError> {
    schedule.validate().map_err(|e| NppError::Invalid(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let mut walker = NppWalker::new(instance, random_spins(instance.len(), &mut rng))?;
    let out = anneal(&mut walker, schedule, &mut rng);
    Ok(residue(instance, &SpinConfig::new(out.best_spins).expect("±1 spins")).expect("matching length"))
}

/// Fraction of runs whose best residue reaches `target` exactly.
pub fn npp_sa_success_probability(
    instance: &NppInstance,
    schedule: &SaSchedule,
    n_runs: usize,
    seed: u64,
    target: &BigUint,
) -> Result<SuccessEstimate, NppError> {
    NppWalker::new(instance, vec![1; instance.len()])?;
    schedule.validate().map_err(|e| NppError::Invalid(e.to_string()))?;
    Ok(estimate_success(n_runs, seed, |s| {
        npp_sa_run(instance, schedule, s).map(|p| p.omega.magnitude() <= target).unwrap_or(false)
    }))
}
