//! Model constants used for effort accounting and unit conversion.
//!
//! These are inputs to the cost model, recorded verbatim, not measurements of
//! this implementation.

/// Single-core time for one Metropolis spin update, in seconds (1/5 ns).
pub const SPIN_UPDATE_SECONDS: f64 = 0.2e-9;

/// Worldline update time per unit of β (1/GHz) with the D-Wave 2X schedule, in seconds.
pub const WORLDLINE_SECONDS_PER_BETA_DW2X: f64 = 870e-9;

/// Worldline update time per unit of β (1/GHz) with the linear schedule, in seconds.
pub const WORLDLINE_SECONDS_PER_BETA_LINEAR: f64 = 115e-9;

/// Boltzmann constant over Planck constant, GHz per kelvin.
pub const KB_OVER_H_GHZ_PER_K: f64 = 20.8366;

/// Target success probability of the time-to-solution metric.
pub const TARGET_SUCCESS: f64 = 0.99;

/// Qubit line width at the end of the anneal, GHz.
pub const LINE_WIDTH_MRT_GHZ: f64 = 0.661;

/// Ohmic coupling coefficient at the end of the anneal.
pub const OHMIC_ETA_MRT: f64 = 0.12;

/// Device temperature used with the noise model, mK.
pub const DEVICE_TEMPERATURE_MK: f64 = 12.0;

/// Karmarkar-Karp residue scaling constant.
pub const KK_ALPHA: f64 = 0.72;

/// Default field on weak-cluster qubits.
pub const WEAK_FIELD: f64 = 0.44;

/// Default field on strong-cluster qubits.
pub const STRONG_FIELD: f64 = -1.0;

/// Energy tolerance for deciding that two classical energies are equal.
pub const ENERGY_TOL: f64 = 1e-9;
