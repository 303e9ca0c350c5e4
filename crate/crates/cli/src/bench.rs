use std::path::PathBuf;

use clap::Args;
use ftbench::bench::{summarize, summary_csv, BenchmarkRecord};

use crate::error::{parse_list, CliError};
use crate::write_file;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON-lines record files from `solve`.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    /// Quantiles of the per-instance time to target.
    #[arg(long, default_value = "0.5,0.75,0.85")]
    quantiles: String,
    /// Bootstrap resamples for the confidence intervals.
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    /// Summary CSV.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: BenchArgs, seed: u64) -> Result<(), CliError> {
    let quantiles: Vec<f64> = parse_list(&args.quantiles, "--quantiles")?;
    if quantiles.is_empty() || quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(CliError::Input(format!("--quantiles must lie in [0, 1], got {:?}", args.quantiles)));
    }
    let mut records = Vec::new();
    for path in &args.records {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        for (i, line) in src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: BenchmarkRecord = serde_json::from_str(line)
                .map_err(|e| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
            records.push(rec);
        }
    }
    if records.is_empty() {
        return Err(CliError::Input("no records".into()));
    }
    let rows = summarize(&records, &quantiles, args.boot, seed).map_err(|e| CliError::Numerical(e.to_string()))?;
    let csv = summary_csv(&rows);
    write_file(&args.out, &csv)?;
    print!("{csv}");
    Ok(())
}
