//! Time-to-target accounting, effort models, bootstrap quantiles and scaling fits.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::constants::{
    SPIN_UPDATE_SECONDS, TARGET_SUCCESS, WORLDLINE_SECONDS_PER_BETA_DW2X, WORLDLINE_SECONDS_PER_BETA_LINEAR,
};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("unknown schedule kind {0:?}")]
    UnknownSchedule(String),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("time {0} is not positive")]
    NonPositiveTime(f64),
    #[error("empty sample")]
    Empty,
    #[error("quantile {0} outside (0, 1)")]
    Quantile(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Binomial estimate of a per-run success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub p: f64,
    pub stderr: f64,
    pub successes: usize,
    pub runs: usize,
}

impl SuccessEstimate {
    pub fn from_counts(successes: usize, runs: usize) -> Self {
        let p = if runs == 0 { 0.0 } else { successes as f64 / runs as f64 };
        let stderr = if runs == 0 { 0.0 } else { (p * (1.0 - p) / runs as f64).sqrt() };
        Self { p, stderr, successes, runs }
    }
}

/// Runs `trial(seed_i)` for `n_runs` derived seeds in parallel and counts successes.
pub fn estimate_success<F>(n_runs: usize, seed: u64, trial: F) -> SuccessEstimate
where
    F: Fn(u64) -> bool + Sync,
{
    let successes = (0..n_runs as u64)
        .into_par_iter()
        .filter(|&i| trial(derive_seed(seed, i)))
        .count();
    SuccessEstimate::from_counts(successes, n_runs)
}

/// Independent runs needed to succeed at least once with 99% probability,
/// `⌈ln(0.01)/ln(1 − p)⌉`, with a floor of one run. `None` when `p = 0`.
pub fn runs_to_target(p: f64) -> Option<u64> {
    if p.is_nan() || p <= 0.0 {
        return None;
    }
    if p >= TARGET_SUCCESS {
        return Some(1);
    }
    let ratio = (1.0 - TARGET_SUCCESS).ln() / (1.0 - p).ln();
    // keep exact ratios such as p = 0.9 -> 2 from rounding up
    Some(((ratio - 1e-9).ceil() as u64).max(1))
}

/// Time to reach the optimum with 99% probability, `t_run·ln(0.01)/ln(1 − p)`,
/// floored at one run. `Ok(None)` means the point is absent (`p = 0`).
pub fn time_to_target(p: f64, t_run: f64) -> Result<Option<f64>, BenchError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BenchError::Probability(p));
    }
    if p == 0.0 {
        return Ok(None);
    }
    if p >= TARGET_SUCCESS {
        return Ok(Some(t_run));
    }
    let ratio = (1.0 - TARGET_SUCCESS).ln() / (1.0 - p).ln();
    Ok(Some(t_run * ratio.max(1.0)))
}

/// Single-core SA time for one run: `n_sweeps × N × T_su`.
pub fn sa_effort_seconds(n_sweeps: u64, n: u64) -> f64 {
    n_sweeps as f64 * n as f64 * SPIN_UPDATE_SECONDS
}

/// Cost model for one worldline update, keyed by the annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorldlineCost {
    Dw2x,
    Linear,
}

impl WorldlineCost {
    /// `T_worldline` in seconds at inverse temperature `beta` (1/GHz).
    pub fn worldline_seconds(self, beta: f64) -> f64 {
        beta * match self {
            Self::Dw2x => WORLDLINE_SECONDS_PER_BETA_DW2X,
            Self::Linear => WORLDLINE_SECONDS_PER_BETA_LINEAR,
        }
    }
}

impl FromStr for WorldlineCost {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dw2x" | "dw2x-approx" => Ok(Self::Dw2x),
            "linear" => Ok(Self::Linear),
            other => Err(BenchError::UnknownSchedule(other.to_owned())),
        }
    }
}

/// Single-core QMC time for one run: `n_sweeps × N × T_worldline(β)`.
pub fn qmc_effort_seconds(n_sweeps: u64, n: u64, beta: f64, schedule: &str) -> Result<f64, BenchError> {
    if !(beta > 0.0) {
        return Err(BenchError::Invalid(format!("beta {beta} must be positive")));
    }
    let cost: WorldlineCost = schedule.parse()?;
    Ok(n_sweeps as f64 * n as f64 * cost.worldline_seconds(beta))
}

/// Relative total time to solve a network of `c` independent pairs, each
/// solved with probability `p` per run:
/// `n_sweeps × β × ⌈ln(0.01)/ln(1 − p^c)⌉`. `None` when `p^c` underflows.
pub fn pair_to_network_estimate(p: f64, c: u32, n_sweeps: u64, beta: f64) -> Result<Option<f64>, BenchError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BenchError::Probability(p));
    }
    if c == 0 {
        return Err(BenchError::Invalid("pair count must be at least 1".into()));
    }
    let network = p.powi(c as i32);
    Ok(runs_to_target(network).map(|runs| n_sweeps as f64 * beta * runs as f64))
}

/// Required margin on `n_sweeps · T_QA / 1 ns`.
pub const SWEEPS_CONDITION_MARGIN: f64 = 10.0;

/// Diagnostic for `n_sweeps ≫ 1 ns / T_QA`, read as `n_sweeps · T_QA ≥ 10 ns`.
pub fn sweeps_condition_check(n_sweeps: u64, t_qa_ns: f64) -> bool {
    n_sweeps as f64 * t_qa_ns >= SWEEPS_CONDITION_MARGIN
}

/// Nearest-rank empirical quantile. Infinite entries stand for absent data
/// and sort last, so the result is infinite when the quantile falls on them.
pub fn nearest_rank(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    nearest_rank_sorted(&sorted, q)
}

fn nearest_rank_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileCi {
    /// `None` when absent (infinite).
    pub quantile: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Nearest-rank quantile with a 95% percentile-bootstrap interval. The
/// bootstrap resamples the values (instances) with replacement.
pub fn quantile_ci(values: &[f64], q: f64, n_boot: usize, seed: u64) -> Result<QuantileCi, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(BenchError::Quantile(q));
    }
    let point = nearest_rank(values, q);
    let n = values.len();
    let mut rng = rng_from_seed(seed);
    let mut boot = Vec::with_capacity(n_boot);
    let mut sample = vec![0.0; n];
    for _ in 0..n_boot {
        for s in sample.iter_mut() {
            *s = values[rng.random_range(0..n)];
        }
        sample.sort_by(f64::total_cmp);
        boot.push(nearest_rank_sorted(&sample, q));
    }
    let (lo, hi) = if boot.is_empty() {
        (point, point)
    } else {
        boot.sort_by(f64::total_cmp);
        (nearest_rank_sorted(&boot, 0.025), nearest_rank_sorted(&boot, 0.975))
    };
    Ok(QuantileCi { quantile: finite(point), ci_lo: finite(lo), ci_hi: finite(hi) })
}

/// Least-squares fit of `log2 T = α N + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Base-2 exponent α in `T ∝ 2^{αN}`.
    pub alpha: f64,
    /// `2^c`.
    pub prefactor: f64,
    /// RMS residual in log2 units.
    pub residual: f64,
    /// 95% confidence interval on α from the slope standard error.
    pub ci: (f64, f64),
}

pub const MIN_FIT_POINTS: usize = 4;

pub fn scaling_fit(sizes: &[f64], times: &[f64]) -> Result<FitResult, BenchError> {
    if sizes.len() != times.len() {
        return Err(BenchError::Invalid("sizes and times differ in length".into()));
    }
    let m = sizes.len();
    if m < MIN_FIT_POINTS {
        return Err(BenchError::TooFewPoints { need: MIN_FIT_POINTS, got: m });
    }
    if let Some(&t) = times.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        return Err(BenchError::NonPositiveTime(t));
    }
    let y: Vec<f64> = times.iter().map(|t| t.log2()).collect();
    let mf = m as f64;
    let mx = sizes.iter().sum::<f64>() / mf;
    let my = y.iter().sum::<f64>() / mf;
    let sxx: f64 = sizes.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BenchError::Invalid("all sizes equal".into()));
    }
    let sxy: f64 = sizes.iter().zip(&y).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = sizes.iter().zip(&y).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let dof = mf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).expect("dof > 0").inverse_cdf(0.975);
    Ok(FitResult {
        alpha,
        prefactor: intercept.exp2(),
        residual: (sse / mf).sqrt(),
        ci: (alpha - t * se, alpha + t * se),
    })
}

/// One solver run, as emitted by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance_id: String,
    pub algorithm: String,
    pub params_digest: String,
    pub seed: u64,
    pub n: usize,
    pub n_sweeps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_energy: Option<f64>,
    /// Modeled single-core time of this run, seconds.
    pub run_seconds: f64,
    /// Cost-model constant per update (T_su or T_worldline), seconds.
    pub update_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchmarkRecord {
    /// Sort key used when merging record streams.
    pub fn key(&self) -> (String, usize, String, String, u64) {
        (self.algorithm.clone(), self.n, self.instance_id.clone(), self.params_digest.clone(), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub quantile: f64,
    pub tts: QuantileCi,
    pub algorithm: String,
    pub instances: usize,
}

pub const SUMMARY_HEADER: &str = "N,quantile,tts_seconds,ci_lo,ci_hi,algorithm";

impl SummaryRow {
    pub fn csv_line(&self) -> String {
        let cell = |x: Option<f64>| x.map_or_else(|| "absent".to_owned(), |v| format!("{v:.6e}"));
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.quantile,
            cell(self.tts.quantile),
            cell(self.tts.ci_lo),
            cell(self.tts.ci_hi),
            self.algorithm
        )
    }
}

/// Per-instance time-to-target quantiles grouped by `(algorithm, N)`.
///
/// Records with an `error` count as failed runs of their instance. Instances
/// where no run succeeded have an infinite (absent) time to target.
pub fn summarize(records: &[BenchmarkRecord], quantiles: &[f64], n_boot: usize, seed: u64) -> Result<Vec<SummaryRow>, BenchError> {
    // (algorithm, N) -> instance -> (successes, runs, seconds per run)
    let mut groups: BTreeMap<(String, usize), BTreeMap<String, (usize, usize, f64)>> = BTreeMap::new();
    for r in records {
        let inst = groups
            .entry((r.algorithm.clone(), r.n))
            .or_default()
            .entry(r.instance_id.clone())
            .or_insert((0, 0, 0.0));
        inst.0 += usize::from(r.success && r.error.is_none());
        inst.1 += 1;
        inst.2 = inst.2.max(r.run_seconds);
    }
    let mut rows = Vec::new();
    for (g, ((algorithm, n), instances)) in groups.into_iter().enumerate() {
        let tts: Vec<f64> = instances
            .values()
            .map(|&(s, runs, t)| {
                let p = s as f64 / runs as f64;
                time_to_target(p, t).map(|x| x.unwrap_or(f64::INFINITY))
            })
            .collect::<Result<_, _>>()?;
        for (qi, &q) in quantiles.iter().enumerate() {
            let ci = quantile_ci(&tts, q, n_boot, derive_seed(seed, (g * 64 + qi) as u64))?;
            rows.push(SummaryRow { n, quantile: q, tts: ci, algorithm: algorithm.clone(), instances: tts.len() });
        }
    }
    rows.sort_by(|a, b| (a.n, &a.algorithm).cmp(&(b.n, &b.algorithm)).then(a.quantile.total_cmp(&b.quantile)));
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tts_examples() {
        assert_eq!(time_to_target(0.99, 20e-6).unwrap(), Some(20e-6));
        let half = time_to_target(0.5, 20e-6).unwrap().unwrap();
        assert!((half - 132.877e-6).abs() < 1e-9, "{half}");
        assert_eq!(time_to_target(1.0, 3.0).unwrap(), Some(3.0));
        assert_eq!(time_to_target(0.0, 3.0).unwrap(), None);
        assert!(time_to_target(1.5, 3.0).is_err());
    }

    #[test]
    fn tts_is_monotone_and_continuous_at_floor() {
        let mut last = f64::INFINITY;
        for i in 1..=1000 {
            let p = i as f64 / 1000.0;
            let t = time_to_target(p, 1.0).unwrap().unwrap();
            assert!(t <= last);
            last = t;
        }
        let below = time_to_target(0.99 - 1e-12, 1.0).unwrap().unwrap();
        assert!((below - 1.0).abs() < 1e-9);
    }

    #[test]
    fn runs_needed() {
        assert_eq!(runs_to_target(0.9), Some(2));
        assert_eq!(runs_to_target(0.5), Some(7));
        assert_eq!(runs_to_target(0.995), Some(1));
        assert_eq!(runs_to_target(0.0), None);
    }

    #[test]
    fn effort_models() {
        assert!((sa_effort_seconds(50_000, 945) - 9.45e-3).abs() < 1e-15);
        assert!((sa_effort_seconds(1, 1) - 0.2e-9).abs() < 1e-24);
        assert!((sa_effort_seconds(50_000, 945) * 1e9 - 9.45e6).abs() < 1e-3);
        assert!((sa_effort_seconds(10, 20) - 2.0 * sa_effort_seconds(10, 10)).abs() < 1e-24);
        let wl = WorldlineCost::Dw2x.worldline_seconds(32.5);
        assert!((wl - 28.275e-6).abs() < 1e-15);
        assert!((wl / 28.3e-6 - 1.0).abs() < 1e-3);
        assert!((WorldlineCost::Linear.worldline_seconds(10.0) - 1.15e-6).abs() < 1e-15);
        let per_qubit = qmc_effort_seconds(23_000, 1, 32.5, "dw2x").unwrap();
        assert!((per_qubit - 0.650325).abs() < 1e-9);
        assert!(matches!(qmc_effort_seconds(1, 1, 1.0, "cubic"), Err(BenchError::UnknownSchedule(_))));
        assert!(qmc_effort_seconds(1, 1, 0.0, "linear").is_err());
    }

    #[test]
    fn network_estimate() {
        assert_eq!(pair_to_network_estimate(0.95, 1, 1, 1.0).unwrap(), Some(2.0));
        assert_eq!(pair_to_network_estimate(0.9, 2, 1, 1.0).unwrap(), Some(3.0));
        assert_eq!(pair_to_network_estimate(1.0, 50, 7, 2.0).unwrap(), Some(14.0));
        assert_eq!(pair_to_network_estimate(1e-200, 3, 1, 1.0).unwrap(), None);
        assert!(pair_to_network_estimate(0.5, 0, 1, 1.0).is_err());
    }

    #[test]
    fn sweeps_condition() {
        assert!(sweeps_condition_check(23_000, 71.0));
        assert!(!sweeps_condition_check(1, 0.5));
        assert!(sweeps_condition_check(1, 10.0));
        assert!(!sweeps_condition_check(1, 9.99));
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.5), 50.0);
        assert_eq!(nearest_rank(&v, 0.85), 85.0);
        assert_eq!(nearest_rank(&[3.0], 0.1), 3.0);
        let ci = quantile_ci(&v, 0.5, 500, 1).unwrap();
        assert_eq!(ci.quantile, Some(50.0));
        assert!(ci.ci_lo.unwrap() <= 50.0 && ci.ci_hi.unwrap() >= 50.0);
    }

    #[test]
    fn constant_sample_has_zero_width() {
        let ci = quantile_ci(&[4.0; 30], 0.75, 200, 3).unwrap();
        assert_eq!((ci.quantile, ci.ci_lo, ci.ci_hi), (Some(4.0), Some(4.0), Some(4.0)));
    }

    #[test]
    fn absent_values_propagate() {
        let mut v = vec![1.0; 60];
        v.extend([f64::INFINITY; 40]);
        let ci = quantile_ci(&v, 0.85, 200, 0).unwrap();
        assert_eq!(ci.quantile, None);
        assert_eq!(quantile_ci(&v, 0.5, 200, 0).unwrap().quantile, Some(1.0));
        assert!(quantile_ci(&[], 0.5, 10, 0).is_err());
        assert!(quantile_ci(&v, 1.0, 10, 0).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let n: Vec<f64> = (10..=20).step_by(2).map(f64::from).collect();
        let t: Vec<f64> = n.iter().map(|x| (0.8 * x).exp2() * 3.0).collect();
        let fit = scaling_fit(&n, &t).unwrap();
        assert!((fit.alpha - 0.8).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
        assert!(scaling_fit(&n[..3], &t[..3]).is_err());
        let mut bad = t.clone();
        bad[2] = 0.0;
        assert!(matches!(scaling_fit(&n, &bad), Err(BenchError::NonPositiveTime(_))));
    }

    fn record(instance: &str, n: usize, success: bool) -> BenchmarkRecord {
        BenchmarkRecord {
            instance_id: instance.into(),
            algorithm: "sa".into(),
            params_digest: "x".into(),
            seed: 0,
            n,
            n_sweeps: 10,
            beta: None,
            success,
            energy: None,
            target_energy: None,
            run_seconds: 1.0,
            update_seconds: SPIN_UPDATE_SECONDS,
            error: None,
        }
    }

    #[test]
    fn summary_marks_absent_quantiles() {
        let mut recs = Vec::new();
        for i in 0..10 {
            for run in 0..4 {
                // instances 0..7 always succeed, 8 and 9 never
                recs.push(record(&format!("i{i}"), 16, i < 8 && run < 4));
            }
        }
        let rows = summarize(&recs, &[0.5, 0.85], 100, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].tts.quantile, Some(1.0));
        assert_eq!(rows[1].tts.quantile, None);
        let csv = summary_csv(&rows);
        assert!(csv.starts_with(SUMMARY_HEADER));
        assert!(csv.lines().nth(2).unwrap().contains("absent"));
        assert_eq!(csv, summary_csv(&summarize(&recs, &[0.5, 0.85], 100, 0).unwrap()));
    }
}
