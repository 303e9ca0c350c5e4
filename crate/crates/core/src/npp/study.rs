use serde::{Deserialize, Serialize};

use super::{
    algorithmic_tunneling, generate_npp, greedy_partition, kk_partition, npp_brute_force, predict_stats, residue,
    AtOptions, NppError, NppInstance, NppWalker, Partition,
};
use crate::bench::{nearest_rank, scaling_fit, FitResult};
use crate::problems::SpinConfig;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sa::{anneal, random_spins, tune_grid, SaSchedule, TuneGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    Random,
    Greedy,
    Kk,
    At,
    Brute,
    Sa,
}

impl Heuristic {
    pub fn id(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Greedy => "greedy",
            Self::Kk => "kk",
            Self::At => "at",
            Self::Brute => "brute",
            Self::Sa => "sa",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        [Self::Random, Self::Greedy, Self::Kk, Self::At, Self::Brute, Self::Sa].into_iter().find(|h| h.id() == id)
    }
}

/// Annealing effort measurement: tune over `grid`, stopping each success
/// estimate once `min_successes` runs succeeded or `max_runs` were spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaEffort {
    pub grid: TuneGrid,
    pub min_successes: usize,
    pub max_runs: usize,
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub sizes: Vec<usize>,
    pub ensemble: usize,
    pub heuristics: Vec<Heuristic>,
    pub kappa: usize,
    pub sa: Option<SaEffort>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub heuristic: Heuristic,
    /// Median of `|Ω| 2^{−b}` over the ensemble.
    pub median_residue: f64,
    /// Median spin updates to reach the optimum with 99% probability (annealing only).
    pub median_effort: Option<f64>,
    /// Closed-form prediction of `median_residue`, where one exists.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub sa_fit: Option<FitResult>,
}

pub const STUDY_HEADER: &str = "N,heuristic,median_residue,median_effort,predicted";

impl StudyReport {
    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map_or_else(|| "absent".to_owned(), |v| format!("{v:.6e}"));
        let mut out = format!("{STUDY_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6e},{},{}\n",
                r.n,
                r.heuristic.id(),
                r.median_residue,
                cell(r.median_effort),
                cell(r.predicted)
            ));
        }
        out
    }
}

/// Success probability estimated with an early stop at `min_successes`.
pub fn adaptive_success(instance: &NppInstance, schedule: &SaSchedule, target: u128, effort: &SaEffort, seed: u64) -> Result<f64, NppError> {
    let a = instance.as_i128().ok_or_else(|| NppError::TooLarge {
        what: "annealing",
        n: instance.len(),
        detail: format!("{}-bit numbers overflow the 128-bit residue", instance.bits()),
    })?;
    let (mut successes, mut runs) = (0usize, 0usize);
    while runs < effort.max_runs && successes < effort.min_successes {
        let mut rng = rng_from_seed(derive_seed(seed, runs as u64));
        let mut walker = NppWalker::new(instance, random_spins(instance.len(), &mut rng))?;
        let best = anneal(&mut walker, schedule, &mut rng).best_spins;
        let omega: i128 = a.iter().zip(&best).map(|(&x, &s)| x * s as i128).sum();
        successes += usize::from(omega.unsigned_abs() <= target);
        runs += 1;
    }
    Ok(successes as f64 / runs.max(1) as f64)
}

fn scaled(p: &Partition, b: u64) -> f64 {
    p.scaled_energy(b)
}

/// Runs every heuristic over `ensemble` random instances with `b = N` at each size.
pub fn npp_study(cfg: &StudyConfig) -> Result<StudyReport, NppError> {
    use rayon::prelude::*;

    if cfg.heuristics.contains(&Heuristic::Brute) || cfg.heuristics.contains(&Heuristic::Sa) {
        if let Some(&n) = cfg.sizes.iter().find(|&&n| n > super::MAX_NPP_BRUTE_FORCE) {
            return Err(NppError::TooLarge { what: "exhaustive search", n, detail: "exact optima are needed".into() });
        }
    }
    if cfg.heuristics.contains(&Heuristic::Sa) && cfg.sa.is_none() {
        return Err(NppError::Invalid("annealing requested without an effort grid".into()));
    }
    let mut rows = Vec::new();
    let mut fit_points = Vec::new();
    for (si, &n) in cfg.sizes.iter().enumerate() {
        let b = n as u64;
        let instances = (0..cfg.ensemble)
            .map(|i| generate_npp(n, b, derive_seed(cfg.seed, (si * 1_000_003 + i) as u64)))
            .collect::<Result<Vec<_>, _>>()?;
        let needs_opt = cfg.heuristics.iter().any(|h| matches!(h, Heuristic::Brute | Heuristic::Sa));
        let optima: Vec<Option<Partition>> = instances
            .par_iter()
            .map(|inst| if needs_opt { npp_brute_force(inst).map(Some) } else { Ok(None) })
            .collect::<Result<_, _>>()?;
        let mean_square = instances.iter().map(NppInstance::mean_square).sum::<f64>() / instances.len().max(1) as f64;
        let pred = predict_stats(n, mean_square, cfg.kappa);
        for &h in &cfg.heuristics {
            let residues: Vec<f64> = match h {
                Heuristic::Random => instances
                    .iter()
                    .enumerate()
                    .map(|(i, inst)| {
                        let spins = random_spins(n, &mut rng_from_seed(derive_seed(cfg.seed ^ 0x5eed, i as u64)));
                        residue(inst, &SpinConfig::new(spins).expect("±1")).map(|p| scaled(&p, b))
                    })
                    .collect::<Result<_, _>>()?,
                Heuristic::Greedy => instances.iter().map(|i| scaled(&greedy_partition(i), b)).collect(),
                Heuristic::Kk => instances.iter().map(|i| scaled(&kk_partition(i), b)).collect(),
                Heuristic::At => instances
                    .par_iter()
                    .enumerate()
                    .map(|(i, inst)| {
                        algorithmic_tunneling(inst, &AtOptions::new(cfg.kappa), derive_seed(cfg.seed, i as u64), None)
                            .map(|r| scaled(&r.partition, b))
                    })
                    .collect::<Result<_, _>>()?,
                Heuristic::Brute | Heuristic::Sa => optima.iter().map(|p| scaled(p.as_ref().expect("computed"), b)).collect(),
            };
            let predicted = match h {
                Heuristic::Random => Some(pred.mean_energy),
                Heuristic::Brute => Some(pred.median_min_energy),
                Heuristic::At => Some(pred.e_kappa),
                _ => None,
            };
            let median_effort = if h == Heuristic::Sa {
                let effort = cfg.sa.as_ref().expect("checked");
                let targets: Vec<u128> = optima
                    .iter()
                    .map(|p| p.as_ref().expect("computed").omega.magnitude().try_into().expect("fits"))
                    .collect();
                let sizes = vec![n; instances.len()];
                let stream = derive_seed(cfg.seed, 0xa11ea1 + si as u64);
                let tuned = tune_grid(&sizes, &effort.grid, effort.quantile, |i, sched| {
                    adaptive_success(&instances[i], sched, targets[i], effort, derive_seed(stream, i as u64)).unwrap_or(0.0)
                })
                .ok();
                let q = tuned.map(|t| t.quantile_effort);
                if let Some(q) = q {
                    fit_points.push((n as f64, q));
                }
                q
            } else {
                None
            };
            rows.push(StudyRow { n, heuristic: h, median_residue: nearest_rank(&residues, 0.5), median_effort, predicted });
        }
    }
    let sa_fit = if fit_points.is_empty() {
        None
    } else {
        let (x, y): (Vec<f64>, Vec<f64>) = fit_points.into_iter().unzip();
        scaling_fit(&x, &y).ok()
    };
    Ok(StudyReport { rows, sa_fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_ids_round_trip() {
        for h in [Heuristic::Random, Heuristic::Greedy, Heuristic::Kk, Heuristic::At, Heuristic::Brute, Heuristic::Sa] {
            assert_eq!(Heuristic::from_id(h.id()), Some(h));
        }
        assert_eq!(Heuristic::from_id("bogus"), None);
    }

    #[test]
    fn small_study_orders_heuristics() {
        let cfg = StudyConfig {
            sizes: vec![12, 14],
            ensemble: 30,
            heuristics: vec![Heuristic::Random, Heuristic::Greedy, Heuristic::Kk, Heuristic::Brute, Heuristic::At],
            kappa: 2,
            sa: None,
            seed: 4,
        };
        let report = npp_study(&cfg).unwrap();
        assert_eq!(report.rows.len(), 10);
        let get = |n, h| report.rows.iter().find(|r| r.n == n && r.heuristic == h).unwrap().median_residue;
        for n in [12, 14] {
            assert!(get(n, Heuristic::Brute) <= get(n, Heuristic::Kk));
            assert!(get(n, Heuristic::Kk) < get(n, Heuristic::Random));
        }
        assert!(report.to_csv().starts_with(STUDY_HEADER));
        assert!(report.to_csv().contains("absent"));
    }

    #[test]
    fn annealing_effort_fit() {
        let grid = TuneGrid { sweeps: vec![20], betas: vec![(0.0, 50.0)] };
        let cfg = StudyConfig {
            sizes: vec![8, 10, 12, 14],
            ensemble: 6,
            heuristics: vec![Heuristic::Sa],
            kappa: 1,
            sa: Some(SaEffort { grid, min_successes: 8, max_runs: 4000, quantile: 0.5 }),
            seed: 1,
        };
        let report = npp_study(&cfg).unwrap();
        let fit = report.sa_fit.expect("four sizes");
        assert!(fit.alpha > 0.2 && fit.alpha < 1.5, "{fit:?}");
        let missing = StudyConfig { sa: None, ..cfg };
        assert!(npp_study(&missing).is_err());
    }
}
