//! Benchmark workbench for finite-range tunneling on rugged energy landscapes.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`problems`]: K-local Ising cost functions, Chimera graphs, crafted
//!   weak-strong cluster instances and brute-force ground states.
//! - [`sa`]: Metropolis simulated annealing with restart statistics and grid tuning.
//! - [`schedule`] and [`qmc`]: annealing schedules and discrete-time path-integral
//!   Monte Carlo with worldline cluster updates.
//! - [`quantum`]: exact reference dynamics for small systems (Lanczos spectra,
//!   Schrödinger propagation, two-level rate equation).
//! - [`instanton`]: coherent-state mean-field energies and tunneling actions.
//! - [`npp`]: number partitioning instances, heuristics and closed-form statistics.
//! - [`bench`]: time-to-target accounting, bootstrap quantiles and scaling fits.

pub mod bench;
pub mod constants;
pub mod instanton;
pub mod npp;
pub mod problems;
pub mod qmc;
pub mod quantum;
pub mod rng;
pub mod sa;
pub mod schedule;

pub use problems::{ChimeraGraph, IsingProblem, SpinConfig};
pub use schedule::AnnealSchedule;
