//! Exact reference dynamics for small transverse-field Ising systems.
//!
//! Units: schedule amplitudes are linear frequencies in GHz, times are in
//! ns, and propagation uses the angular Hamiltonian `2π·H`. Basis state `x`
//! has `s_j = −1` where bit `j` is set, and
//! `H(s) = −A(s) Σ_j σˣ_j + B(s) H_P` with `H_P` diagonal in that basis.

pub mod evolve;
pub mod lanczos;
pub mod rate;
pub mod symmetry;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::constants::{KB_OVER_H_GHZ_PER_K, LINE_WIDTH_MRT_GHZ, OHMIC_ETA_MRT};
use crate::problems::{IsingProblem, SpinConfig};
use crate::schedule::AnnealSchedule;
use evolve::{propagate, KrylovOptions};
use lanczos::{lowest_eigenpairs, LanczosOptions};
use symmetry::SymmetricSector;

pub use rate::{rate_evolve, RateCurve, RateModel, SyntheticRate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("{what} needs at most {max} qubits, got {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("eigensolver: {0}")]
    Eigensolver(String),
    #[error("step size: {0}")]
    StepSize(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub const MAX_SPECTRUM_QUBITS: usize = 20;
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest symmetric-sector dimension accepted for time evolution.
pub const MAX_EVOLUTION_DIM: usize = 1 << 14;

#[derive(Debug, Clone)]
pub struct QuantumModel {
    problem: IsingProblem,
    schedule: AnnealSchedule,
    /// Classical energy of every basis state.
    energies: Vec<f64>,
}

impl QuantumModel {
    pub fn new(problem: IsingProblem, schedule: AnnealSchedule) -> Result<Self, QuantumError> {
        let n = problem.num_vars();
        if n > MAX_SPECTRUM_QUBITS {
            return Err(QuantumError::TooLarge { what: "exact quantum model", n, max: MAX_SPECTRUM_QUBITS });
        }
        let energies = (0..1usize << n)
            .into_par_iter()
            .map(|x| problem.energy_of(SpinConfig::from_bits(n, x as u64).as_slice()))
            .collect();
        Ok(Self { problem, schedule, energies })
    }

    pub fn problem(&self) -> &IsingProblem {
        &self.problem
    }

    pub fn schedule(&self) -> &AnnealSchedule {
        &self.schedule
    }

    pub fn num_qubits(&self) -> usize {
        self.problem.num_vars()
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn classical_energies(&self) -> &[f64] {
        &self.energies
    }

    /// `y = H(s) x` in GHz, matrix-free.
    pub fn apply(&self, s: f64, x: &[f64], y: &mut [f64]) {
        let (a, b) = self.schedule.at(s);
        let n = self.num_qubits();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = b * self.energies[i] * x[i];
            for j in 0..n {
                acc -= a * x[i ^ (1 << j)];
            }
            *yi = acc;
        }
    }

    pub fn dense_hamiltonian(&self, s: f64) -> Result<DMatrix<f64>, QuantumError> {
        let n = self.num_qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(QuantumError::TooLarge { what: "dense Hamiltonian", n, max: MAX_DENSE_QUBITS });
        }
        let (a, b) = self.schedule.at(s);
        let dim = self.dim();
        let mut h = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            h[(x, x)] = b * self.energies[x];
            for j in 0..n {
                h[(x, x ^ (1 << j))] -= a;
            }
        }
        Ok(h)
    }

    /// All eigenvalues by dense diagonalization, ascending.
    pub fn dense_spectrum(&self, s: f64) -> Result<Vec<f64>, QuantumError> {
        let mut vals: Vec<f64> = SymmetricEigen::new(self.dense_hamiltonian(s)?).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// The `k` lowest eigenvalues of `H(s)` in GHz.
    pub fn lowest_levels(&self, s: f64, k: usize, sector: Sector) -> Result<Vec<f64>, QuantumError> {
        let opts = LanczosOptions::default();
        let pairs = match sector {
            Sector::Full => lowest_eigenpairs(self.dim(), k, |x, y| self.apply(s, x, y), &opts)?,
            Sector::Symmetric => {
                let red = ReducedHamiltonian::new(self);
                red.eigenpairs(s, k, &opts)?
            }
        };
        Ok(pairs.into_iter().map(|p| p.0).collect())
    }
}

/// Which part of the Hilbert space an eigensolve covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Full,
    /// The sector symmetric under the problem's qubit permutation symmetries,
    /// which holds the ground state and everything reachable from it.
    Symmetric,
}

/// The model restricted to its symmetric sector.
pub struct ReducedHamiltonian<'a> {
    model: &'a QuantumModel,
    sector: SymmetricSector,
    diag: Vec<f64>,
    /// Midpoint of the diagonal range, removed as a global phase during propagation.
    center: f64,
}

impl<'a> ReducedHamiltonian<'a> {
    pub fn new(model: &'a QuantumModel) -> Self {
        let sector = SymmetricSector::of_problem(&model.problem);
        let diag: Vec<f64> = sector.representatives().iter().map(|&x| model.energies[x]).collect();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
        Self { model, sector, diag, center: 0.5 * (lo + hi) }
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn sector(&self) -> &SymmetricSector {
        &self.sector
    }

    fn apply_real(&self, s: f64, x: &[f64], y: &mut [f64]) {
        let (a, b) = self.model.schedule.at(s);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = b * self.diag[i] * x[i];
        }
        self.sector.apply_driver(-a, x, y);
    }

    /// `y = 2π (−a Σσˣ + b (H_P − center)) x`.
    fn apply_angular(&self, [a, b]: [f64; 2], x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[i] * (2.0 * PI * b * (self.diag[i] - self.center));
        }
        self.sector.apply_driver(-2.0 * PI * a, x, y);
    }

    pub fn eigenpairs(&self, s: f64, k: usize, opts: &LanczosOptions) -> Result<Vec<(f64, Vec<f64>)>, QuantumError> {
        lowest_eigenpairs(self.dim(), k, |x, y| self.apply_real(s, x, y), opts)
    }
}

/// Low-lying levels on a grid of `s` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub s: Vec<f64>,
    /// `levels[i][l]`: level `l` at `s[i]`, GHz.
    pub levels: Vec<Vec<f64>>,
    /// Smallest `E1 − E0` on the grid and where it occurs.
    pub min_gap: f64,
    pub min_gap_s: f64,
}

impl Spectrum {
    pub fn gap(&self, i: usize, upper: usize, lower: usize) -> f64 {
        self.levels[i][upper] - self.levels[i][lower]
    }

    pub fn to_csv(&self) -> String {
        let k = self.levels.first().map_or(0, Vec::len);
        let mut out = String::from("s");
        for l in 0..k {
            out.push_str(&format!(",E{l}"));
        }
        out.push('\n');
        for (s, lv) in self.s.iter().zip(&self.levels) {
            out.push_str(&format!("{s}"));
            for e in lv {
                out.push_str(&format!(",{e:.10}"));
            }
            out.push('\n');
        }
        out
    }
}

/// The `k ≥ 2` lowest levels at each grid point, computed in parallel.
pub fn spectrum_vs_s(model: &QuantumModel, k: usize, grid: &[f64], sector: Sector) -> Result<Spectrum, QuantumError> {
    if k < 2 || grid.is_empty() {
        return Err(QuantumError::Invalid("need k >= 2 levels and a nonempty grid".into()));
    }
    let levels = grid
        .par_iter()
        .map(|&s| model.lowest_levels(s, k, sector))
        .collect::<Result<Vec<_>, _>>()?;
    let (i, min_gap) = levels
        .iter()
        .map(|l| l[1] - l[0])
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty grid");
    Ok(Spectrum { s: grid.to_vec(), min_gap, min_gap_s: grid[i], levels })
}

/// Golden-section refinement of the minimum of `E1 − E0` on `[lo, hi]`.
pub fn refine_min_gap(model: &QuantumModel, (mut lo, mut hi): (f64, f64), sector: Sector, tol: f64) -> Result<(f64, f64), QuantumError> {
    let gap = |s: f64| model.lowest_levels(s, 2, sector).map(|l| l[1] - l[0]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (gap(x1)?, gap(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = gap(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = gap(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

#[derive(Debug, Clone, Copy)]
pub struct EvolutionOptions {
    /// Step of the fourth-order Magnus propagator, ns.
    pub dt_ns: f64,
    pub krylov: KrylovOptions,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self { dt_ns: 0.05, krylov: KrylovOptions::default() }
    }
}

/// Instantaneous-eigenstate populations along an anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    pub t_ns: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    /// Largest `|‖ψ‖ − 1|` seen at the output times.
    pub max_norm_error: f64,
}

impl Populations {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ns,P0,P1\n");
        for ((t, p0), p1) in self.t_ns.iter().zip(&self.p0).zip(&self.p1) {
            out.push_str(&format!("{t},{p0:.12},{p1:.12}\n"));
        }
        out
    }

    pub fn final_p0(&self) -> f64 {
        *self.p0.last().expect("at least one output time")
    }
}

/// Solves `i dψ/dt = 2π H(t/T_QA) ψ` from the ground state at `s = 0`.
///
/// The state is propagated in the symmetric sector, which is exact because the
/// initial ground state lies in it. `P0`, `P1` are the populations of the two
/// lowest eigenstates of that sector at each output time.
pub fn schrodinger_evolve(
    model: &QuantumModel,
    t_qa_ns: f64,
    output_ns: &[f64],
    opts: &EvolutionOptions,
) -> Result<Populations, QuantumError> {
    if !(t_qa_ns > 0.0) {
        return Err(QuantumError::Invalid(format!("T_QA = {t_qa_ns} must be positive")));
    }
    if output_ns.windows(2).any(|w| w[1] < w[0]) || output_ns.iter().any(|&t| !(0.0..=t_qa_ns).contains(&t)) {
        return Err(QuantumError::Invalid("output times must be sorted within [0, T_QA]".into()));
    }
    let red = ReducedHamiltonian::new(model);
    if red.dim() > MAX_EVOLUTION_DIM {
        return Err(QuantumError::Invalid(format!(
            "symmetric sector has dimension {} > {MAX_EVOLUTION_DIM}",
            red.dim()
        )));
    }
    let lopts = LanczosOptions::default();
    let ground = red.eigenpairs(0.0, 1, &lopts)?.remove(0).1;
    let mut psi: Vec<Complex64> = ground.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut out = Populations { t_ns: Vec::new(), p0: Vec::new(), p1: Vec::new(), max_norm_error: 0.0 };
    let mut t = 0.0;
    for &target in output_ns {
        if target > t {
            propagate(
                red.dim(),
                |tt| {
                    let (a, b) = model.schedule.at(tt / t_qa_ns);
                    [a, b]
                },
                |c, x, y| red.apply_angular(c, x, y),
                &mut psi,
                (t, target),
                opts.dt_ns,
                opts.krylov,
                |_, _| {},
            )?;
            t = target;
        }
        let pairs = red.eigenpairs(t / t_qa_ns, 2.min(red.dim()), &lopts)?;
        let overlap = |v: &[f64]| v.iter().zip(&psi).map(|(a, b)| b * *a).sum::<Complex64>().norm_sqr();
        out.t_ns.push(t);
        out.p0.push(overlap(&pairs[0].1));
        out.p1.push(pairs.get(1).map_or(0.0, |p| overlap(&p.1)));
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        out.max_norm_error = out.max_norm_error.max((norm - 1.0).abs());
    }
    Ok(out)
}

/// Final ground-state population with the step halved until two successive
/// values agree within `tol`. Returns `(P0, dt used)`.
pub fn converged_final_p0(model: &QuantumModel, t_qa_ns: f64, dt0: f64, tol: f64) -> Result<(f64, f64), QuantumError> {
    let mut dt = dt0;
    let mut prev = schrodinger_evolve(model, t_qa_ns, &[t_qa_ns], &EvolutionOptions { dt_ns: dt, ..Default::default() })?
        .final_p0();
    for _ in 0..8 {
        dt /= 2.0;
        let next = schrodinger_evolve(model, t_qa_ns, &[t_qa_ns], &EvolutionOptions { dt_ns: dt, ..Default::default() })?
            .final_p0();
        if (next - prev).abs() < tol {
            return Ok((next, dt));
        }
        prev = next;
    }
    Err(QuantumError::StepSize(format!("P0 at T_QA = {t_qa_ns} ns not converged down to dt = {dt:.2e} ns")))
}

/// Evolves a full-space state under `H(t) = −A(t) Σσˣ + B(t) H_P` (GHz, ns)
/// from `t0` to `t1`. Both amplitudes may take any sign.
pub fn evolve_driven<FA, FB>(
    problem: &IsingProblem,
    a: FA,
    b: FB,
    psi: &mut [Complex64],
    (t0, t1): (f64, f64),
    dt: f64,
) -> Result<(), QuantumError>
where
    FA: Fn(f64) -> f64,
    FB: Fn(f64) -> f64,
{
    let n = problem.num_vars();
    if n > MAX_DENSE_QUBITS {
        return Err(QuantumError::TooLarge { what: "full-space evolution", n, max: MAX_DENSE_QUBITS });
    }
    if psi.len() != 1 << n {
        return Err(QuantumError::Invalid(format!("state length {} != 2^{n}", psi.len())));
    }
    let energies: Vec<f64> = (0..1usize << n)
        .map(|x| problem.energy_of(SpinConfig::from_bits(n, x as u64).as_slice()))
        .collect();
    let apply = |[at, bt]: [f64; 2], x: &[Complex64], y: &mut [Complex64]| {
        let (at, bt) = (2.0 * PI * at, 2.0 * PI * bt);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = x[i] * (bt * energies[i]);
            for j in 0..n {
                acc -= x[i ^ (1 << j)] * at;
            }
            *yi = acc;
        }
    };
    propagate(psi.len(), |t| [a(t), b(t)], apply, psi, (t0, t1), dt, KrylovOptions::default(), |_, _| {})
}

/// `k_B T / h` in GHz for a temperature in mK.
pub fn temperature_to_frequency(t_mk: f64) -> f64 {
    KB_OVER_H_GHZ_PER_K * t_mk * 1e-3
}

/// Noise parameters rescaled along the schedule:
/// `(W(s)/W_MRT)² = η(s)/η_MRT = B(s)/B(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParameters {
    pub line_width_ghz: f64,
    pub eta: f64,
}

pub fn noise_parameters(schedule: &AnnealSchedule, s: f64) -> NoiseParameters {
    let ratio = schedule.b(s) / schedule.b(1.0);
    NoiseParameters { line_width_ghz: LINE_WIDTH_MRT_GHZ * ratio.sqrt(), eta: OHMIC_ETA_MRT * ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::random_ising;
    use crate::problems::GraphModel;

    fn single_spin(h: f64) -> IsingProblem {
        IsingProblem::new(1, [(vec![0], h)]).unwrap()
    }

    #[test]
    fn transverse_only_levels() {
        let m = QuantumModel::new(single_spin(1.0), AnnealSchedule::linear(1.0, 1.0)).unwrap();
        let l = m.lowest_levels(0.0, 2, Sector::Full).unwrap();
        assert!((l[0] + 1.0).abs() < 1e-12 && (l[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_end_point_is_classical() {
        let p = random_ising(&GraphModel::Complete { n: 6 }, &[-1.0, 1.0], 4).unwrap();
        let m = QuantumModel::new(p, AnnealSchedule::linear(1.0, 2.0)).unwrap();
        let mut classical = m.classical_energies().to_vec();
        classical.sort_by(f64::total_cmp);
        let l = m.lowest_levels(1.0, 4, Sector::Full).unwrap();
        for (e, c) in l.iter().zip(&classical) {
            assert!((e - 2.0 * c).abs() < 1e-8, "{l:?} vs {classical:?}");
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..3 {
            let p = random_ising(&GraphModel::ErdosRenyi { n: 8, p: 0.5 }, &[-1.0, 1.0], seed).unwrap();
            let m = QuantumModel::new(p, AnnealSchedule::linear(1.0, 1.0)).unwrap();
            for s in [0.1, 0.5, 0.9] {
                let dense = m.dense_spectrum(s).unwrap();
                let sparse = m.lowest_levels(s, 4, Sector::Full).unwrap();
                for (a, b) in dense.iter().zip(&sparse) {
                    assert!((a - b).abs() < 1e-8, "seed {seed} s {s}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn stationary_state_stays_put() {
        // B = 0 throughout: the transverse ground state is an eigenstate
        let sched = AnnealSchedule::from_csv_str("flat", "s,A_GHz,B_GHz\n0,1,0\n1,1,0\n").unwrap();
        let m = QuantumModel::new(single_spin(1.0), sched).unwrap();
        let out = schrodinger_evolve(&m, 10.0, &[0.0, 2.5, 5.0, 10.0], &EvolutionOptions::default()).unwrap();
        for p in &out.p0 {
            assert!((p - 1.0).abs() < 1e-10);
        }
        assert!(out.max_norm_error < 1e-8);
    }

    #[test]
    fn temperature_conversion() {
        assert!((temperature_to_frequency(12.0) - 0.25004).abs() < 1e-4);
        assert!((temperature_to_frequency(4.8) - 0.1).abs() < 1e-3);
    }

    #[test]
    fn noise_at_end_of_anneal() {
        let s = AnnealSchedule::dw2x_approx();
        let p = noise_parameters(&s, 1.0);
        assert_eq!((p.line_width_ghz, p.eta), (0.661, 0.12));
        let half = noise_parameters(&s, 0.5);
        let ratio = s.b(0.5) / s.b(1.0);
        assert!((half.eta / 0.12 - ratio).abs() < 1e-12);
        assert!(((half.line_width_ghz / 0.661).powi(2) - ratio).abs() < 1e-12);
    }
}
