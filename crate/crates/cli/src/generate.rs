use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ftbench::constants::{STRONG_FIELD, WEAK_FIELD};
use ftbench::npp::generate_npp;
use ftbench::problems::io::{InstanceFile, InstanceMetadata};
use ftbench::problems::{
    brute_force_ground_state, random_ising, weak_strong_network, weak_strong_pair, GraphModel, PairingPattern,
    MAX_BRUTE_FORCE_SPINS,
};
use ftbench::rng::derive_seed;
use ftbench::{ChimeraGraph, IsingProblem};

use crate::error::{parse_list, CliError};
use crate::write_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    WeakStrongPair,
    WeakStrongNetwork,
    RandomIsing,
    Npp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Graph {
    Chimera,
    Complete,
    Er,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    kind: Kind,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of instances.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Weak-cell field of the pair.
    #[arg(long, default_value_t = WEAK_FIELD, allow_negative_numbers = true)]
    h1: f64,
    /// Strong-cell field of the pair.
    #[arg(long, default_value_t = STRONG_FIELD, allow_negative_numbers = true)]
    h2: f64,
    /// Chimera rows.
    #[arg(long, default_value_t = 1)]
    rows: usize,
    /// Chimera columns.
    #[arg(long, default_value_t = 2)]
    cols: usize,
    /// Domino layout: hdomino or hdomino-mirror.
    #[arg(long, default_value = "hdomino-mirror")]
    pattern: String,
    /// Interaction graph of random instances.
    #[arg(long, value_enum, default_value_t = Graph::Chimera)]
    graph: Graph,
    /// Variables (complete and er graphs, npp).
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Edge probability of er graphs.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Coupling values drawn uniformly.
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    coeffs: String,
    /// Bits per number (npp); defaults to N.
    #[arg(long)]
    b: Option<u64>,
}

fn with_reference(problem: &IsingProblem, mut meta: InstanceMetadata) -> Result<InstanceMetadata, CliError> {
    if problem.num_vars() <= MAX_BRUTE_FORCE_SPINS.min(24) {
        let gs = brute_force_ground_state(problem).map_err(|e| CliError::Numerical(e.to_string()))?;
        meta.reference_energy = Some(gs.energy);
        meta.reference_optimum = Some(gs.config);
    }
    Ok(meta)
}

pub fn run(args: GenerateArgs, seed: u64) -> Result<(), CliError> {
    let input = |e: ftbench::problems::ProblemError| CliError::Input(e.to_string());
    let mut written = Vec::new();
    match args.kind {
        Kind::WeakStrongPair => {
            let problem = weak_strong_pair(args.h1, args.h2);
            let meta = InstanceMetadata {
                generator: "weak-strong-pair".into(),
                h1: Some(args.h1),
                h2: Some(args.h2),
                rows: Some(1),
                cols: Some(2),
                ..Default::default()
            };
            let path = args.out.join("weak-strong-pair.json");
            write_file(&path, &InstanceFile::new(&problem, with_reference(&problem, meta)?).to_json())?;
            written.push(path);
        }
        Kind::WeakStrongNetwork => {
            let pattern = PairingPattern::from_id(&args.pattern)
                .ok_or_else(|| CliError::Input(format!("unknown pattern {:?}", args.pattern)))?;
            let graph = ChimeraGraph::intact(args.rows, args.cols).map_err(input)?;
            for i in 0..args.count {
                let s = derive_seed(seed, i as u64);
                let net = weak_strong_network(&graph, pattern, s).map_err(|e| CliError::Numerical(e.to_string()))?;
                let meta = InstanceMetadata {
                    generator: "weak-strong-network".into(),
                    seed: Some(s),
                    pattern: Some(pattern.id().into()),
                    h1: Some(WEAK_FIELD),
                    h2: Some(STRONG_FIELD),
                    rows: Some(args.rows),
                    cols: Some(args.cols),
                    reference_optimum: Some(net.reference.clone()),
                    reference_energy: Some(net.reference_energy),
                };
                let path = args.out.join(format!("network-{}x{}-{i:03}.json", args.rows, args.cols));
                write_file(&path, &InstanceFile::new(&net.problem, meta).to_json())?;
                written.push(path);
            }
        }
        Kind::RandomIsing => {
            let coeffs: Vec<f64> = parse_list(&args.coeffs, "--coeffs")?;
            let model = match args.graph {
                Graph::Chimera => GraphModel::Chimera(ChimeraGraph::intact(args.rows, args.cols).map_err(input)?),
                Graph::Complete => GraphModel::Complete { n: args.n },
                Graph::Er => GraphModel::ErdosRenyi { n: args.n, p: args.p },
            };
            for i in 0..args.count {
                let s = derive_seed(seed, i as u64);
                let problem = random_ising(&model, &coeffs, s).map_err(input)?;
                let meta = InstanceMetadata { generator: "random-ising".into(), seed: Some(s), ..Default::default() };
                let path = args.out.join(format!("random-{}-{i:03}.json", problem.num_vars()));
                write_file(&path, &InstanceFile::new(&problem, with_reference(&problem, meta)?).to_json())?;
                written.push(path);
            }
        }
        Kind::Npp => {
            let b = args.b.unwrap_or(args.n as u64);
            for i in 0..args.count {
                let inst = generate_npp(args.n, b, derive_seed(seed, i as u64)).map_err(|e| CliError::Input(e.to_string()))?;
                let path = args.out.join(format!("npp-N{}-b{b}-{i:03}.json", args.n));
                write_file(&path, &inst.to_json())?;
                written.push(path);
            }
        }
    }
    for p in &written {
        println!("{}", p.display());
    }
    Ok(())
}
