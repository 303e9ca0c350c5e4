//! Number partitioning: random instances, exact residues, heuristics, and
//! closed-form ensemble predictions.
//!
//! Numbers are kept as exact integers. The real-valued ensemble on `[0, 1)`
//! is recovered by scaling with `2^{−b}`.

use std::path::Path;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::SpinConfig;
use crate::rng::rng_from_seed;

mod anneal;
mod heuristics;
mod stats;
mod study;

pub use anneal::{npp_sa_run, npp_sa_success_probability, NppWalker};
pub use heuristics::{
    algorithmic_tunneling, greedy_partition, kk_partition, npp_brute_force, AtOptions, AtResult, FlipGroups,
    MAX_AT_KAPPA, MAX_NPP_BRUTE_FORCE,
};
pub use study::{adaptive_success, npp_study, Heuristic, SaEffort, StudyConfig, StudyReport, StudyRow, STUDY_HEADER};
pub use stats::{kk_scaling, n_kappa, predict_stats, residue_density, NppPrediction};

pub const NPP_FORMAT: &str = "npp-1";

#[derive(Debug, Error)]
pub enum NppError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{what} refused for N={n}: {detail}")]
    TooLarge { what: &'static str, n: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NppInstance {
    a: Vec<BigUint>,
    b: u64,
    seed: Option<u64>,
}

impl NppInstance {
    pub fn new(a: Vec<BigUint>, b: u64) -> Result<Self, NppError> {
        if a.is_empty() {
            return Err(NppError::Invalid("empty instance".into()));
        }
        if let Some((j, x)) = a.iter().enumerate().find(|(_, x)| x.is_zero() || x.bits() > b) {
            return Err(NppError::Invalid(format!("a[{j}] = {x} is not in [1, 2^{b})")));
        }
        Ok(Self { a, b, seed: None })
    }

    pub fn from_u64s(a: &[u64]) -> Result<Self, NppError> {
        let b = a.iter().map(|x| 64 - x.leading_zeros() as u64).max().unwrap_or(1).max(1);
        Self::new(a.iter().map(|&x| BigUint::from(x)).collect(), b)
    }

    pub fn numbers(&self) -> &[BigUint] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn bits(&self) -> u64 {
        self.b
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `b/N ≥ 1 − log₂N / (2N)`: the regime where every known algorithm is exponential.
    pub fn is_hard(&self) -> bool {
        let n = self.len() as f64;
        self.b as f64 / n >= 1.0 - n.log2() / (2.0 * n)
    }

    /// Numbers on the unit interval, `a_j / 2^b`.
    pub fn scaled(&self) -> Vec<f64> {
        let scale = (-(self.b as f64)).exp2();
        self.a.iter().map(|x| big_to_f64(x) * scale).collect()
    }

    /// `⟨a²⟩ = N⁻¹ Σ a_j²` of the scaled numbers.
    pub fn mean_square(&self) -> f64 {
        let s = self.scaled();
        s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64
    }

    /// Numbers as `i128` when every signed sum fits.
    pub(crate) fn as_i128(&self) -> Option<Vec<i128>> {
        let headroom = usize::BITS - self.len().leading_zeros();
        if self.b + headroom as u64 >= 126 {
            return None;
        }
        self.a.iter().map(|x| x.to_i128()).collect()
    }

    pub fn to_file(&self) -> NppFile {
        NppFile {
            format: NPP_FORMAT.to_owned(),
            n: self.len(),
            b: self.b,
            a: self.a.iter().map(|x| x.to_string()).collect(),
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(src: &str) -> Result<Self, NppError> {
        serde_json::from_str::<NppFile>(src)?.instance()
    }

    pub fn read(path: &Path) -> Result<Self, NppError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NppFile {
    pub format: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub b: u64,
    pub a: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl NppFile {
    pub fn instance(&self) -> Result<NppInstance, NppError> {
        if self.format != NPP_FORMAT {
            return Err(NppError::Invalid(format!("unsupported format {:?}", self.format)));
        }
        let a = self
            .a
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(|e| NppError::Invalid(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if a.len() != self.n {
            return Err(NppError::Invalid(format!("N = {} but {} numbers", self.n, a.len())));
        }
        let mut inst = NppInstance::new(a, self.b)?;
        inst.seed = self.seed;
        Ok(inst)
    }
}

/// `N` numbers drawn uniformly from `[1, 2^b)`.
pub fn generate_npp(n: usize, b: u64, seed: u64) -> Result<NppInstance, NppError> {
    if n < 2 || b < 1 {
        return Err(NppError::Invalid(format!("need N >= 2 and b >= 1, got N={n}, b={b}")));
    }
    let mut rng = rng_from_seed(seed);
    let words = b.div_ceil(32) as usize;
    let top_mask = if b % 32 == 0 { u32::MAX } else { (1u32 << (b % 32)) - 1 };
    let a = (0..n)
        .map(|_| loop {
            let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
            digits[words - 1] &= top_mask;
            let x = BigUint::new(digits);
            if !x.is_zero() {
                break x;
            }
        })
        .collect();
    Ok(NppInstance { a, b, seed: Some(seed) })
}

/// A two-set assignment with its exact signed residue `Ω = Σ a_j s_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub config: SpinConfig,
    pub omega: BigInt,
}

impl Partition {
    /// `E = |Ω|`.
    pub fn energy(&self) -> BigUint {
        self.omega.magnitude().clone()
    }

    /// `|Ω| · 2^{−b}`.
    pub fn scaled_energy(&self, b: u64) -> f64 {
        big_to_f64(self.omega.magnitude()) * (-(b as f64)).exp2()
    }
}

pub fn residue(instance: &NppInstance, config: &SpinConfig) -> Result<Partition, NppError> {
    if config.len() != instance.len() {
        return Err(NppError::Invalid(format!("{} spins for {} numbers", config.len(), instance.len())));
    }
    let mut omega = BigInt::zero();
    for (a, &s) in instance.a.iter().zip(config.as_slice()) {
        let term = BigInt::from_biguint(if s > 0 { Sign::Plus } else { Sign::Minus }, a.clone());
        omega += term;
    }
    Ok(Partition { config: config.clone(), omega })
}
