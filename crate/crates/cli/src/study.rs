use std::path::PathBuf;

use clap::Args;
use ftbench::npp::{npp_study, Heuristic, SaEffort, StudyConfig};
use ftbench::sa::TuneGrid;

use crate::error::{parse_list, CliError};
use crate::write_file;

#[derive(Args, Debug)]
pub struct StudyArgs {
    /// Problem sizes, e.g. `12,14,16`.
    #[arg(long, default_value = "12,14,16,18,20")]
    sizes: String,
    /// Instances per size (b = N).
    #[arg(long, default_value_t = 100)]
    ensemble: usize,
    /// Any of random, greedy, kk, at, brute, sa.
    #[arg(long, default_value = "random,greedy,kk,at,brute")]
    heuristics: String,
    /// Flip-group size of algorithmic tunneling.
    #[arg(long, default_value_t = 2)]
    kappa: usize,
    /// Annealing sweep counts to tune over.
    #[arg(long, default_value = "10,30,100")]
    sa_sweeps: String,
    /// Annealing β ramps `init:final` (units of 2^b) to tune over.
    #[arg(long, default_value = "0:20,0:100")]
    sa_betas: String,
    /// Stop a success estimate after this many successes.
    #[arg(long, default_value_t = 10)]
    sa_min_successes: usize,
    /// Run budget per success estimate.
    #[arg(long, default_value_t = 20_000)]
    sa_max_runs: usize,
    /// Quantile of the per-instance effort that tuning minimizes.
    #[arg(long, default_value_t = 0.5)]
    quantile: f64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: StudyArgs, seed: u64) -> Result<(), CliError> {
    let sizes: Vec<usize> = parse_list(&args.sizes, "--sizes")?;
    let heuristics = args
        .heuristics
        .split(',')
        .map(str::trim)
        .map(|h| Heuristic::from_id(h).ok_or_else(|| CliError::Input(format!("unknown heuristic {h:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let sa = if heuristics.contains(&Heuristic::Sa) {
        let betas = args
            .sa_betas
            .split(',')
            .map(|r| {
                let (a, b) = r.split_once(':').ok_or_else(|| CliError::Input(format!("--sa-betas: {r:?} is not init:final")))?;
                let p = |x: &str| x.trim().parse::<f64>().map_err(|e| CliError::Input(format!("--sa-betas: {x:?}: {e}")));
                Ok((p(a)?, p(b)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let grid = TuneGrid { sweeps: parse_list(&args.sa_sweeps, "--sa-sweeps")?, betas };
        Some(SaEffort { grid, min_successes: args.sa_min_successes, max_runs: args.sa_max_runs, quantile: args.quantile })
    } else {
        None
    };
    let cfg = StudyConfig { sizes, ensemble: args.ensemble, heuristics, kappa: args.kappa, sa, seed };
    let report = npp_study(&cfg).map_err(|e| match e {
        ftbench::npp::NppError::Invalid(_) | ftbench::npp::NppError::TooLarge { .. } => CliError::Input(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    })?;
    write_file(&args.out, &report.to_csv())?;
    print!("{}", report.to_csv());
    if cfg.sa.is_some() {
        match &report.sa_fit {
            Some(fit) => println!("sa alpha {:.3} (95% CI {:.3}..{:.3})", fit.alpha, fit.ci.0, fit.ci.1),
            None => return Err(CliError::Numerical("annealing effort could not be fitted".into())),
        }
    }
    Ok(())
}
