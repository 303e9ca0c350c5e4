use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ftbench::bench::{qmc_effort_seconds, sa_effort_seconds, BenchmarkRecord};
use ftbench::constants::{ENERGY_TOL, SPIN_UPDATE_SECONDS};
use ftbench::npp::{npp_brute_force, npp_sa_run, NppInstance};
use ftbench::problems::io::read_instance;
use ftbench::problems::{brute_force_ground_state, MAX_BRUTE_FORCE_SPINS};
use ftbench::qmc::{qmc_anneal, Boundary, QmcParams, Readout};
use ftbench::quantum::{spectrum_vs_s, QuantumError, QuantumModel, Sector};
use ftbench::rng::derive_seed;
use ftbench::sa::{sa_run, SaSchedule};
use ftbench::{AnnealSchedule, IsingProblem};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::{ensure_parent, write_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sa,
    Qmc,
    Exact,
    Brute,
}

impl Algorithm {
    fn id(self) -> &'static str {
        match self {
            Self::Sa => "sa",
            Self::Qmc => "qmc",
            Self::Exact => "exact",
            Self::Brute => "brute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutArg {
    Slice0,
    BestReplica,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    algorithm: Algorithm,
    /// Instance files (kspin-1 JSON, npp-1 JSON, or the `i j J` text format).
    #[arg(required = true)]
    #[serde(skip)]
    instances: Vec<PathBuf>,
    /// JSON-lines record file; a directory of spectrum CSVs for `exact`.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    /// Independent runs per instance.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Sweeps per run.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Initial inverse temperature of SA.
    #[arg(long, default_value_t = 0.1)]
    beta_init: f64,
    /// Final inverse temperature of SA.
    #[arg(long, default_value_t = 3.0)]
    beta_final: f64,
    /// QMC inverse temperature, 1/GHz.
    #[arg(long, default_value_t = 10.0)]
    beta: f64,
    /// QMC replicas.
    #[arg(long, default_value_t = 32)]
    trotter: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    boundary: BoundaryArg,
    #[arg(long, value_enum, default_value_t = ReadoutArg::Slice0)]
    readout: ReadoutArg,
    /// Annealing schedule: linear, dw2x-approx, or a CSV path.
    #[arg(long, default_value = "linear")]
    schedule: String,
    /// Grid points in s for `exact`.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Levels per grid point for `exact`.
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

enum Loaded {
    Ising { problem: IsingProblem, target: Option<f64> },
    Npp(NppInstance),
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let bad = |e: String| CliError::Input(format!("{}: {e}", path.display()));
    let src = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let is_npp = serde_json::from_str::<serde_json::Value>(&src)
        .ok()
        .is_some_and(|v| v.get("format").and_then(|f| f.as_str()) == Some(ftbench::npp::NPP_FORMAT));
    if is_npp {
        return NppInstance::from_json(&src).map(Loaded::Npp).map_err(|e| bad(e.to_string()));
    }
    let file = read_instance(path).map_err(|e| bad(e.to_string()))?;
    let problem = file.problem().map_err(|e| bad(e.to_string()))?;
    let target = match file.metadata.reference_energy {
        Some(e) => Some(e),
        None if problem.num_vars() <= MAX_BRUTE_FORCE_SPINS.min(24) => {
            Some(brute_force_ground_state(&problem).map_err(|e| CliError::Numerical(e.to_string()))?.energy)
        }
        None => None,
    };
    Ok(Loaded::Ising { problem, target })
}

/// FNV-1a of the canonical parameter JSON.
fn digest(args: &SolveArgs) -> String {
    let json = serde_json::to_string(args).expect("serializable");
    let h = json.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    format!("{h:016x}")
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn run(args: SolveArgs, seed: u64) -> Result<(), CliError> {
    let loaded = args.instances.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let schedule = AnnealSchedule::load(&args.schedule).map_err(|e| CliError::Input(format!("--schedule: {e}")))?;
    if args.algorithm == Algorithm::Exact {
        return exact(&args, &loaded, schedule);
    }
    let sa_schedule = SaSchedule::linear(args.beta_init, args.beta_final, args.sweeps);
    if args.algorithm == Algorithm::Sa {
        sa_schedule.validate().map_err(|e| CliError::Input(e.to_string()))?;
    }
    let boundary = match args.boundary {
        BoundaryArg::Periodic => Boundary::Periodic,
        BoundaryArg::Open => Boundary::Open,
    };
    let readout = match args.readout {
        ReadoutArg::Slice0 => Readout::Slice0,
        ReadoutArg::BestReplica => Readout::BestReplica,
    };
    let qmc = QmcParams { beta: args.beta, trotter: args.trotter, n_sweeps: args.sweeps, boundary, readout };
    if args.algorithm == Algorithm::Qmc {
        qmc.validate().map_err(|e| CliError::Input(e.to_string()))?;
    }
    let cost_key = match schedule.worldline_cost() {
        ftbench::bench::WorldlineCost::Linear => "linear",
        ftbench::bench::WorldlineCost::Dw2x => "dw2x",
    };
    let params_digest = digest(&args);
    let runs = if args.algorithm == Algorithm::Brute { 1 } else { args.runs };
    let jobs: Vec<(usize, usize)> = (0..loaded.len()).flat_map(|i| (0..runs).map(move |r| (i, r))).collect();
    let mut records: Vec<BenchmarkRecord> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let run_seed = derive_seed(derive_seed(seed, i as u64), r as u64);
            let mut rec = BenchmarkRecord {
                instance_id: instance_id(&args.instances[i]),
                algorithm: args.algorithm.id().into(),
                params_digest: params_digest.clone(),
                seed: run_seed,
                n: 0,
                n_sweeps: args.sweeps as u64,
                beta: None,
                success: false,
                energy: None,
                target_energy: None,
                run_seconds: 0.0,
                update_seconds: SPIN_UPDATE_SECONDS,
                error: None,
            };
            let outcome: Result<(f64, Option<f64>), String> = match (&loaded[i], args.algorithm) {
                (Loaded::Ising { problem, target }, Algorithm::Sa) => {
                    rec.n = problem.num_vars();
                    rec.beta = Some(args.beta_final);
                    rec.run_seconds = sa_effort_seconds(args.sweeps as u64, rec.n as u64);
                    sa_run(problem, &sa_schedule, run_seed).map(|r| (r.energy, *target)).map_err(|e| e.to_string())
                }
                (Loaded::Ising { problem, target }, Algorithm::Qmc) => {
                    rec.n = problem.num_vars();
                    rec.beta = Some(args.beta);
                    rec.run_seconds = qmc_effort_seconds(args.sweeps as u64, rec.n as u64, args.beta, cost_key).unwrap_or(f64::NAN);
                    rec.update_seconds = rec.run_seconds / (args.sweeps * rec.n).max(1) as f64;
                    qmc_anneal(problem, &schedule, &qmc, run_seed).map(|r| (r.energy, *target)).map_err(|e| e.to_string())
                }
                (Loaded::Ising { problem, target }, Algorithm::Brute) => {
                    rec.n = problem.num_vars();
                    rec.n_sweeps = 0;
                    brute_force_ground_state(problem).map(|g| (g.energy, *target)).map_err(|e| e.to_string())
                }
                (Loaded::Npp(inst), Algorithm::Sa) => {
                    rec.n = inst.len();
                    rec.beta = Some(args.beta_final);
                    rec.run_seconds = sa_effort_seconds(args.sweeps as u64, rec.n as u64);
                    let b = inst.bits();
                    let target = npp_brute_force(inst).ok().map(|p| p.scaled_energy(b));
                    npp_sa_run(inst, &sa_schedule, run_seed).map(|p| (p.scaled_energy(b), target)).map_err(|e| e.to_string())
                }
                (Loaded::Npp(inst), Algorithm::Brute) => {
                    rec.n = inst.len();
                    rec.n_sweeps = 0;
                    let b = inst.bits();
                    npp_brute_force(inst).map(|p| (p.scaled_energy(b), None)).map_err(|e| e.to_string())
                }
                (Loaded::Npp(inst), alg) => {
                    rec.n = inst.len();
                    Err(format!("{} does not support number-partitioning instances", alg.id()))
                }
                (_, Algorithm::Exact) => unreachable!("handled above"),
            };
            match outcome {
                Ok((energy, target)) => {
                    rec.energy = Some(energy);
                    rec.target_energy = target;
                    match target {
                        Some(t) => rec.success = energy <= t + ENERGY_TOL,
                        None if args.algorithm == Algorithm::Brute => rec.success = true,
                        None => rec.error = Some("no reference energy".into()),
                    }
                }
                Err(e) => rec.error = Some(e),
            }
            rec
        })
        .collect();
    records.sort_by_key(|r| r.key());
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    write_file(&args.out, &out)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!("{} records, {} successes, {failed} errors -> {}", records.len(), records.iter().filter(|r| r.success).count(), args.out.display());
    Ok(())
}

fn exact(args: &SolveArgs, loaded: &[Loaded], schedule: AnnealSchedule) -> Result<(), CliError> {
    if args.points < 2 {
        return Err(CliError::Input("--points must be at least 2".into()));
    }
    let grid: Vec<f64> = (0..args.points).map(|i| i as f64 / (args.points - 1) as f64).collect();
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    for (path, inst) in args.instances.iter().zip(loaded) {
        let Loaded::Ising { problem, .. } = inst else {
            return Err(CliError::Input(format!("{}: exact spectra need an Ising instance", path.display())));
        };
        let quantum = |e: QuantumError| match e {
            QuantumError::TooLarge { .. } | QuantumError::Invalid(_) => CliError::Input(format!("{}: {e}", path.display())),
            other => CliError::Numerical(format!("{}: {other}", path.display())),
        };
        let model = QuantumModel::new(problem.clone(), schedule.clone()).map_err(quantum)?;
        let spectrum = spectrum_vs_s(&model, args.levels, &grid, Sector::Full).map_err(quantum)?;
        let target = args.out.join(format!("{}-spectrum.csv", instance_id(path)));
        ensure_parent(&target)?;
        write_file(&target, &spectrum.to_csv())?;
        println!("{}: min gap {:.6} GHz at s = {:.4} -> {}", instance_id(path), spectrum.min_gap, spectrum.min_gap_s, target.display());
    }
    Ok(())
}
