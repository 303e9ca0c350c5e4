//! K-local Ising cost functions and instance generators.
//!
//! The cost of a configuration `s ∈ {−1,+1}^n` is
//! `E(s) = −Σ_t c_t Π_{j∈t} s_j`, where fields are terms with a single variable.

mod brute;
mod chimera;
mod generators;
pub mod io;

pub use brute::{brute_force_ground_state, GroundState, MAX_BRUTE_FORCE_SPINS};
pub use chimera::ChimeraGraph;
pub use generators::{
    random_ising, weak_strong_network, weak_strong_pair, GraphModel, NetworkInstance,
    PairingPattern,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::ENERGY_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("term repeats variable {0}")]
    RepeatedVariable(usize),
    #[error("empty variable tuple")]
    EmptyTerm,
    #[error("configuration has length {got}, problem has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("spin value {0} is not ±1")]
    InvalidSpin(i64),
    #[error("rows and cols must be at least 1")]
    EmptyGraph,
    #[error("qubit {index} out of range for a graph with {count} qubits")]
    QubitOutOfRange { index: usize, count: usize },
    #[error("graph has no room for a weak-strong domino")]
    NoDomino,
    #[error("{n} variables exceeds the exhaustive-search limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("reference optimum is not a local minimum: flipping variable {variable} lowers the energy by {improvement}")]
    Certification { variable: usize, improvement: f64 },
    #[error("problem contains {order}-local terms; at most {max}-local supported here")]
    Unsupported { order: usize, max: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameter(String),
}

/// One monomial of the cost function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub vars: Vec<usize>,
    #[serde(rename = "c")]
    pub coeff: f64,
}

/// Sparse K-local Ising cost function.
///
/// Terms are stored with sorted, distinct variable tuples; duplicate tuples
/// are merged on construction. Problems are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    terms: Vec<Term>,
    /// Term indices touching each variable.
    incidence: Vec<Vec<usize>>,
}

impl IsingProblem {
    pub fn new<I, V>(n: usize, terms: I) -> Result<Self, ProblemError>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: Into<Vec<usize>>,
    {
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (vars, coeff) in terms {
            let mut vars: Vec<usize> = vars.into();
            if vars.is_empty() {
                return Err(ProblemError::EmptyTerm);
            }
            vars.sort_unstable();
            for w in vars.windows(2) {
                if w[0] == w[1] {
                    return Err(ProblemError::RepeatedVariable(w[0]));
                }
            }
            if let Some(&index) = vars.iter().find(|&&v| v >= n) {
                return Err(ProblemError::IndexOutOfRange { index, n });
            }
            *merged.entry(vars).or_insert(0.0) += coeff;
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(vars, coeff)| Term { vars, coeff })
            .collect();
        let mut incidence = vec![Vec::new(); n];
        for (t, term) in terms.iter().enumerate() {
            for &v in &term.vars {
                incidence[v].push(t);
            }
        }
        Ok(Self { n, terms, incidence })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Term indices containing variable `j`.
    pub fn incident_terms(&self, j: usize) -> &[usize] {
        &self.incidence[j]
    }

    /// Largest term order K (1 for a problem without terms).
    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.vars.len()).max().unwrap_or(1).max(1)
    }

    /// Only even-order terms, so the energy is invariant under a global flip.
    pub fn is_even(&self) -> bool {
        self.terms.iter().all(|t| t.vars.len() % 2 == 0)
    }

    pub fn evaluate_energy(&self, config: &SpinConfig) -> Result<f64, ProblemError> {
        if config.len() != self.n {
            return Err(ProblemError::LengthMismatch {
                expected: self.n,
                got: config.len(),
            });
        }
        Ok(self.energy_of(config.as_slice()))
    }

    /// Energy of a raw spin slice; the caller guarantees the length.
    pub(crate) fn energy_of(&self, spins: &[i8]) -> f64 {
        debug_assert_eq!(spins.len(), self.n);
        -self
            .terms
            .iter()
            .map(|t| t.coeff * term_sign(&t.vars, spins))
            .sum::<f64>()
    }

    /// `E(s with j flipped) − E(s)`.
    pub fn flip_delta(&self, spins: &[i8], j: usize) -> f64 {
        2.0 * self.incidence[j]
            .iter()
            .map(|&t| {
                let term = &self.terms[t];
                term.coeff * term_sign(&term.vars, spins)
            })
            .sum::<f64>()
    }

    /// Returns the first variable whose flip lowers the energy by more than
    /// the tolerance, together with the (negative) energy change.
    pub fn improving_flip(&self, config: &SpinConfig) -> Option<(usize, f64)> {
        let spins = config.as_slice();
        (0..self.n)
            .map(|j| (j, self.flip_delta(spins, j)))
            .find(|&(_, d)| d < -ENERGY_TOL)
    }

    /// Splits a ≤2-local problem into fields and symmetric neighbor lists.
    pub fn two_local(&self) -> Result<TwoLocal, ProblemError> {
        let order = self.order();
        if order > 2 {
            return Err(ProblemError::Unsupported { order, max: 2 });
        }
        let mut fields = vec![0.0; self.n];
        let mut neighbors = vec![Vec::new(); self.n];
        for t in &self.terms {
            match t.vars.as_slice() {
                [j] => fields[*j] += t.coeff,
                [j, k] => {
                    neighbors[*j].push((*k, t.coeff));
                    neighbors[*k].push((*j, t.coeff));
                }
                _ => unreachable!(),
            }
        }
        Ok(TwoLocal { fields, neighbors })
    }

    /// Drops every term touching one of `removed`.
    pub fn without_variables(&self, removed: &std::collections::BTreeSet<usize>) -> Self {
        let kept = self
            .terms
            .iter()
            .filter(|t| t.vars.iter().all(|v| !removed.contains(v)))
            .map(|t| (t.vars.clone(), t.coeff));
        Self::new(self.n, kept).expect("subset of a valid problem")
    }
}

#[inline]
fn term_sign(vars: &[usize], spins: &[i8]) -> f64 {
    let mut p: i8 = 1;
    for &v in vars {
        p *= spins[v];
    }
    p as f64
}

/// Fields and pair couplings of a 2-local problem, `E = −Σ h_j s_j − Σ J_jk s_j s_k`.
#[derive(Debug, Clone)]
pub struct TwoLocal {
    pub fields: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl TwoLocal {
    /// `h_j + Σ_k J_jk s_k` for a spin slice indexed by `value(k)`.
    #[inline]
    pub fn local_field(&self, j: usize, value: impl Fn(usize) -> i8) -> f64 {
        self.neighbors[j]
            .iter()
            .fold(self.fields[j], |acc, &(k, c)| acc + c * value(k) as f64)
    }
}

/// Classical spin configuration with entries in {−1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self, ProblemError> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(ProblemError::InvalidSpin(bad as i64));
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_spins_unchecked(spins: Vec<i8>) -> Self {
        debug_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        Self(spins)
    }

    pub fn uniform(n: usize, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        Self(vec![value; n])
    }

    /// Bit `j` of `bits` set means spin `j` is −1.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl TryFrom<Vec<i64>> for SpinConfig {
    type Error = ProblemError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        if let Some(&bad) = v.iter().find(|&&s| s != 1 && s != -1) {
            return Err(ProblemError::InvalidSpin(bad));
        }
        Ok(Self(v.into_iter().map(|s| s as i8).collect()))
    }
}

impl From<SpinConfig> for Vec<i64> {
    fn from(c: SpinConfig) -> Self {
        c.0.into_iter().map(i64::from).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_ferromagnetic_bond() {
        let p = IsingProblem::new(2, [(vec![0, 1], 1.0)]).unwrap();
        let e = p.evaluate_energy(&SpinConfig::uniform(2, 1)).unwrap();
        assert_eq!(e, -1.0);
    }

    #[test]
    fn duplicate_tuples_merge() {
        let p = IsingProblem::new(3, [(vec![1, 0], 0.5), (vec![0, 1], 0.25), (vec![2], 1.0)]).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[0].vars, vec![0, 1]);
        assert_eq!(p.terms()[0].coeff, 0.75);
        assert_eq!(p.order(), 2);
    }

    #[test]
    fn rejects_bad_terms() {
        assert_eq!(
            IsingProblem::new(2, [(vec![0, 2], 1.0)]),
            Err(ProblemError::IndexOutOfRange { index: 2, n: 2 })
        );
        assert_eq!(
            IsingProblem::new(2, [(vec![1, 1], 1.0)]),
            Err(ProblemError::RepeatedVariable(1))
        );
        assert_eq!(IsingProblem::new(2, [(Vec::<usize>::new(), 1.0)]), Err(ProblemError::EmptyTerm));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let p = IsingProblem::new(3, [(vec![0], 1.0)]).unwrap();
        assert!(matches!(
            p.evaluate_energy(&SpinConfig::uniform(2, 1)),
            Err(ProblemError::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn spin_config_validates() {
        assert!(SpinConfig::new(vec![1, -1, 0]).is_err());
        let c: SpinConfig = serde_json::from_str("[1,-1,1]").unwrap();
        assert_eq!(c.as_slice(), &[1, -1, 1]);
        assert!(serde_json::from_str::<SpinConfig>("[1,2]").is_err());
    }

    fn arb_problem() -> impl Strategy<Value = (IsingProblem, Vec<i8>)> {
        (2usize..8).prop_flat_map(|n| {
            let term = (proptest::collection::btree_set(0..n, 1..=n.min(4)), -2.0f64..2.0)
                .prop_map(|(vars, c)| (vars.into_iter().collect::<Vec<_>>(), c));
            (
                proptest::collection::vec(term, 1..12),
                proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n),
            )
                .prop_map(move |(terms, spins)| (IsingProblem::new(n, terms).unwrap(), spins))
        })
    }

    proptest! {
        #[test]
        fn flip_delta_matches_reevaluation((p, spins) in arb_problem(), j in 0usize..8) {
            let j = j % p.num_vars();
            let before = p.energy_of(&spins);
            let mut after = spins.clone();
            after[j] = -after[j];
            let d = p.flip_delta(&spins, j);
            prop_assert!((p.energy_of(&after) - before - d).abs() < 1e-9);
        }

        #[test]
        fn even_problems_are_flip_symmetric((p, spins) in arb_problem()) {
            let even = IsingProblem::new(
                p.num_vars(),
                p.terms().iter().filter(|t| t.vars.len() % 2 == 0).map(|t| (t.vars.clone(), t.coeff)),
            ).unwrap();
            let c = SpinConfig::new(spins).unwrap();
            let a = even.evaluate_energy(&c).unwrap();
            let b = even.evaluate_energy(&c.flipped()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
