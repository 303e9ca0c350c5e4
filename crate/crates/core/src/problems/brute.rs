use super::{IsingProblem, ProblemError, SpinConfig};
use crate::constants::ENERGY_TOL;

pub const MAX_BRUTE_FORCE_SPINS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    /// Lexicographically smallest minimizer (−1 sorts before +1).
    pub config: SpinConfig,
    pub energy: f64,
    /// Number of configurations within the energy tolerance of the minimum.
    pub degeneracy: u64,
}

/// Exact minimum by Gray-code enumeration of all `2^n` configurations.
pub fn brute_force_ground_state(problem: &IsingProblem) -> Result<GroundState, ProblemError> {
    let n = problem.num_vars();
    if n > MAX_BRUTE_FORCE_SPINS {
        return Err(ProblemError::TooLarge { n, limit: MAX_BRUTE_FORCE_SPINS });
    }
    let mut spins = vec![1i8; n];
    let mut energy = problem.energy_of(&spins);
    let mut best = spins.clone();
    let mut best_energy = energy;
    let mut degeneracy = 1u64;
    for step in 1u64..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        energy += problem.flip_delta(&spins, j);
        spins[j] = -spins[j];
        if step & 0xFFFF == 0 {
            // bound the drift of the running sum
            energy = problem.energy_of(&spins);
        }
        if energy < best_energy - ENERGY_TOL {
            best_energy = energy;
            best.copy_from_slice(&spins);
            degeneracy = 1;
        } else if energy <= best_energy + ENERGY_TOL {
            degeneracy += 1;
            if spins < best {
                best.copy_from_slice(&spins);
            }
        }
    }
    let energy = problem.energy_of(&best);
    Ok(GroundState {
        config: SpinConfig::from_spins_unchecked(best),
        energy,
        degeneracy,
    })
}
