//! Tunneling actions from spin-coherent-state paths.
//!
//! A product state of spins with polar angle `θ_j` and imaginary azimuth
//! `iϕ_j` has `⟨σˣ⟩ = sinθ coshϕ` and `⟨σᶻ⟩ = cosθ`. For a uniform domain of
//! `D` spins the energy per spin reduces to `υ(θ) = −A sinθ − B g(cosθ)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::problems::IsingProblem;
use crate::quantum::temperature_to_frequency;

#[derive(Debug, Error)]
pub enum InstantonError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("path: {0}")]
    Path(String),
    #[error("no classically forbidden region between the minima")]
    NoForbiddenRegion,
    #[error("path csv: {0}")]
    Csv(#[from] csv::Error),
}

/// `⟨Ψ|H|Ψ⟩ = −A Σ sinθ_j coshϕ_j − B Σ_terms J Π cosθ`.
pub fn mean_field_energy(angles: &[(f64, f64)], problem: &IsingProblem, a: f64, b: f64) -> Result<f64, InstantonError> {
    if angles.len() != problem.num_vars() {
        return Err(InstantonError::Invalid(format!("{} angles for {} spins", angles.len(), problem.num_vars())));
    }
    let transverse: f64 = angles.iter().map(|&(t, p)| t.sin() * p.cosh()).sum();
    let classical: f64 = problem
        .terms()
        .iter()
        .map(|t| t.coeff * t.vars.iter().map(|&v| angles[v].0.cos()).product::<f64>())
        .sum();
    Ok(-a * transverse - b * classical)
}

/// Single-angle potential of a uniform domain.
pub struct ReducedPotential<'a> {
    pub a: f64,
    pub b: f64,
    /// Rescaled mean-field cost on `[−1, 1]`.
    pub g: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub d: usize,
}

impl ReducedPotential<'_> {
    /// `υ(θ) = −A sinθ − B g(cosθ)`.
    pub fn upsilon(&self, theta: f64) -> f64 {
        -self.a * theta.sin() - self.b * (self.g)(theta.cos())
    }

    /// Local minima of `υ` on `[0, π]`, ascending in θ: a dense scan refined by
    /// golden-section search.
    pub fn minima(&self) -> Vec<f64> {
        const SCAN: usize = 1000;
        let h = PI / SCAN as f64;
        let vals: Vec<f64> = (0..=SCAN).map(|i| self.upsilon(i as f64 * h)).collect();
        let mut out: Vec<f64> = Vec::new();
        for i in 0..=SCAN {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i == SCAN { f64::INFINITY } else { vals[i + 1] };
            // strict on the right so a flat pair yields its smaller angle only
            if vals[i] <= left && vals[i] < right {
                let lo = (i as f64 - 1.0).max(0.0) * h;
                let hi = (i as f64 + 1.0).min(SCAN as f64) * h;
                let t = golden_min(|t| self.upsilon(t), lo, hi, 1e-13);
                if out.last().is_none_or(|&prev| (t - prev).abs() > 1e-9) {
                    out.push(t);
                }
            }
        }
        out
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// How the imaginary-time momentum is obtained along the barrier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WkbVariant {
    /// `coshϕ = (A sinθ₀ + B(g(cosθ₀) − g(cosθ))) / (A sinθ)`: the path
    /// conserves the energy of the starting minimum.
    #[default]
    EnergyConserving,
    /// `sinhϕ = v / (A sinθ)` with `v² = B²(g(cosθ) − g(cosθ₀))² − A² sin²θ`,
    /// the deep-well form, clamped to the region where `v² ≥ 0`.
    DeepWell,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbAction {
    /// Rescaled action `a_min/ħ` per spin; zero without a barrier.
    pub action: f64,
    pub theta0: f64,
    pub theta1: f64,
}

const QUAD_RTOL: f64 = 1e-8;

/// Reduced WKB action `∫ ϕ(θ) sinθ dθ` between the two lowest minima of `υ`,
/// restricted to the classically forbidden region `coshϕ ≥ 1`.
pub fn wkb_action(pot: &ReducedPotential, variant: WkbVariant) -> Result<WkbAction, InstantonError> {
    if !(pot.a > 0.0) || !(pot.b >= 0.0) {
        return Err(InstantonError::Invalid(format!("need A > 0 and B >= 0, got {} and {}", pot.a, pot.b)));
    }
    let mut minima = pot.minima();
    if minima.len() < 2 {
        let t = minima.first().copied().unwrap_or(0.0);
        return Ok(WkbAction { action: 0.0, theta0: t, theta1: t });
    }
    if minima.len() > 2 {
        minima.sort_by(|x, y| pot.upsilon(*x).total_cmp(&pot.upsilon(*y)));
        minima.truncate(2);
        minima.sort_by(f64::total_cmp);
    }
    let (t0, t1) = (minima[0], minima[1]);
    let g0 = (pot.g)(t0.cos());
    let numerator = |t: f64| match variant {
        WkbVariant::EnergyConserving => pot.a * t0.sin() + pot.b * (g0 - (pot.g)(t.cos())),
        WkbVariant::DeepWell => pot.b * ((pot.g)(t.cos()) - g0).abs(),
    };
    // positive inside the forbidden region
    let excess = |t: f64| numerator(t) - pot.a * t.sin();
    let integrand = |t: f64| {
        let c = numerator(t) / (pot.a * t.sin());
        if c > 1.0 {
            c.acosh() * t.sin()
        } else {
            0.0
        }
    };
    let regions = positive_regions(&excess, t0, t1);
    if regions.is_empty() {
        return Err(InstantonError::NoForbiddenRegion);
    }
    let action = regions.iter().map(|&(lo, hi)| integrate(&integrand, lo, hi)).sum();
    Ok(WkbAction { action, theta0: t0, theta1: t1 })
}

/// Subintervals of `[lo, hi]` where `f > 0`, with endpoints found by bisection.
fn positive_regions(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    const SCAN: usize = 2000;
    let h = (hi - lo) / SCAN as f64;
    let bisect = |mut a: f64, mut b: f64| {
        // f(a) <= 0 < f(b) or the reverse
        let fa_pos = f(a) > 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == fa_pos {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        0.5 * (a + b)
    };
    let mut regions = Vec::new();
    let mut start = if f(lo) > 0.0 { Some(lo) } else { None };
    let mut prev = lo;
    for i in 1..=SCAN {
        let x = if i == SCAN { hi } else { lo + i as f64 * h };
        let pos = f(x) > 0.0;
        match (start, pos) {
            (None, true) => start = Some(bisect(prev, x)),
            (Some(s), false) => {
                regions.push((s, bisect(prev, x)));
                start = None;
            }
            _ => {}
        }
        prev = x;
    }
    if let Some(s) = start {
        regions.push((s, hi));
    }
    regions
}

/// Tanh-sinh quadrature to a relative tolerance, which copes with the
/// square-root behaviour at turning points.
fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rough = quadrature::integrate(f, a, b, 1e-6).integral;
    quadrature::integrate(f, a, b, (QUAD_RTOL * rough.abs()).max(1e-300)).integral
}

/// Lowest splitting of the Curie-Weiss model `H = −A Σσˣ − (B/D)(Σσᶻ)²` in
/// the symmetric sector of `D` spins, by dense diagonalization.
pub fn curie_weiss_splitting(d: usize, a: f64, b: f64) -> Result<f64, InstantonError> {
    if d == 0 {
        return Err(InstantonError::Invalid("need at least one spin".into()));
    }
    let spin = d as f64 / 2.0;
    let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
    for k in 0..=d {
        let m = spin - k as f64;
        h[(k, k)] = -b / d as f64 * (2.0 * m).powi(2);
        if k < d {
            // ⟨m−1|S₋|m⟩ = sqrt(S(S+1) − m(m−1))
            let e = (spin * (spin + 1.0) - m * (m - 1.0)).sqrt();
            h[(k + 1, k)] = -a * e;
            h[(k, k + 1)] = -a * e;
        }
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals[1] - vals[0])
}

/// Imaginary-time path of every spin on a grid `τ ∈ [0, β]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPath {
    pub tau: Vec<f64>,
    /// `theta[j][k]`: spin `j` at `tau[k]`.
    pub theta: Vec<Vec<f64>>,
    /// Imaginary part `ϕ` of the azimuth.
    pub phi: Vec<Vec<f64>>,
}

const PERIODIC_TOL: f64 = 1e-9;

impl SpinPath {
    /// Every spin on the same single-spin path.
    pub fn uniform(tau: Vec<f64>, theta: Vec<f64>, phi: Vec<f64>, spins: usize) -> Self {
        Self { tau, theta: vec![theta; spins], phi: vec![phi; spins] }
    }

    pub fn num_spins(&self) -> usize {
        self.theta.len()
    }

    pub fn validate(&self) -> Result<(), InstantonError> {
        let bad = |m: String| Err(InstantonError::Path(m));
        let k = self.tau.len();
        if k < 2 {
            return bad("need at least two time points".into());
        }
        if self.tau.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("tau must increase".into());
        }
        if self.phi.len() != self.theta.len() || self.theta.iter().chain(&self.phi).any(|v| v.len() != k) {
            return bad("every spin needs theta and phi at each time".into());
        }
        for (j, (th, ph)) in self.theta.iter().zip(&self.phi).enumerate() {
            if th.iter().any(|t| !(0.0..=PI).contains(t)) {
                return bad(format!("theta of spin {j} outside [0, pi]"));
            }
            if (th[0] - th[k - 1]).abs() > PERIODIC_TOL || (ph[0] - ph[k - 1]).abs() > PERIODIC_TOL {
                return bad(format!("spin {j} is not periodic"));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["tau".to_owned()];
        for j in 1..=self.num_spins() {
            header.push(format!("theta_{j}"));
            header.push(format!("phi_{j}"));
        }
        w.write_record(&header).expect("in-memory write");
        for (k, t) in self.tau.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for (th, ph) in self.theta.iter().zip(&self.phi) {
                row.push(th[k].to_string());
                row.push(ph[k].to_string());
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_csv_str(src: &str) -> Result<Self, InstantonError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(src.as_bytes());
        let width = r.headers()?.len();
        if width < 3 || width % 2 == 0 {
            return Err(InstantonError::Path("header must be tau,theta_1,phi_1,...".into()));
        }
        let spins = (width - 1) / 2;
        let mut path = Self { tau: Vec::new(), theta: vec![Vec::new(); spins], phi: vec![Vec::new(); spins] };
        for rec in r.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| InstantonError::Path(format!("{x:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            path.tau.push(vals[0]);
            for j in 0..spins {
                path.theta[j].push(vals[1 + 2 * j]);
                path.phi[j].push(vals[2 + 2 * j]);
            }
        }
        path.validate()?;
        Ok(path)
    }
}

/// `S/ħ = ½ Σ_j ω_j + ∫ V dτ` with Berry terms `ω_j = ∫ (1 − cosθ_j) dϕ_j`,
/// both by the trapezoidal rule.
pub fn action_functional(path: &SpinPath, problem: &IsingProblem, a: f64, b: f64) -> Result<f64, InstantonError> {
    path.validate()?;
    if path.num_spins() != problem.num_vars() {
        return Err(InstantonError::Invalid("path and problem sizes differ".into()));
    }
    let k = path.tau.len();
    let berry: f64 = path
        .theta
        .iter()
        .zip(&path.phi)
        .map(|(th, ph)| {
            (0..k - 1)
                .map(|i| 0.5 * ((1.0 - th[i].cos()) + (1.0 - th[i + 1].cos())) * (ph[i + 1] - ph[i]))
                .sum::<f64>()
        })
        .sum();
    let mut angles = vec![(0.0, 0.0); path.num_spins()];
    let mut potential = Vec::with_capacity(k);
    for i in 0..k {
        for (j, slot) in angles.iter_mut().enumerate() {
            *slot = (path.theta[j][i], path.phi[j][i]);
        }
        potential.push(mean_field_energy(&angles, problem, a, b)?);
    }
    let integral: f64 = (0..k - 1).map(|i| 0.5 * (potential[i] + potential[i + 1]) * (path.tau[i + 1] - path.tau[i])).sum();
    Ok(0.5 * berry + integral)
}

/// Tunneling exponent `D · a_min/ħ`.
pub fn rate_exponent(d: usize, action: f64) -> f64 {
    d as f64 * action
}

/// Thermal activation exponent `ΔE / (k_B T / h)` for `ΔE` in GHz.
pub fn thermal_exponent(delta_e_ghz: f64, temperature_mk: f64) -> f64 {
    delta_e_ghz / temperature_to_frequency(temperature_mk)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentComparison {
    pub tunneling: f64,
    pub thermal: f64,
    /// `ΔE/k_BT > αD`: tunneling is exponentially favoured over activation.
    pub tunneling_favoured: bool,
}

pub fn compare_exponents(d: usize, action: f64, delta_e_ghz: f64, temperature_mk: f64) -> ExponentComparison {
    let tunneling = rate_exponent(d, action);
    let thermal = thermal_exponent(delta_e_ghz, temperature_mk);
    ExponentComparison { tunneling, thermal, tunneling_favoured: thermal > tunneling }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::QuantumModel;
    use crate::rng::rng_from_seed;
    use crate::schedule::AnnealSchedule;
    use rand::Rng as _;

    fn quadratic(a: f64) -> ReducedPotential<'static> {
        ReducedPotential { a, b: 1.0, g: Box::new(|x| x * x), d: 1 }
    }

    #[test]
    fn mean_field_limits() {
        let p = crate::problems::random_ising(&crate::problems::GraphModel::Complete { n: 4 }, &[-1.0, 1.0], 2).unwrap();
        let flat = vec![(PI / 2.0, 0.0); 4];
        assert!((mean_field_energy(&flat, &p, 0.7, 0.0).unwrap() + 2.8).abs() < 1e-12);
        let up = vec![(0.0, 0.0); 4];
        let classical = p.evaluate_energy(&crate::SpinConfig::uniform(4, 1)).unwrap();
        assert!((mean_field_energy(&up, &p, 0.7, 1.3).unwrap() - 1.3 * classical).abs() < 1e-12);
    }

    #[test]
    fn mean_field_matches_dense_expectation() {
        let mut rng = rng_from_seed(8);
        for seed in 0..3 {
            let p = crate::problems::random_ising(&crate::problems::GraphModel::ErdosRenyi { n: 6, p: 0.5 }, &[-1.0, 0.5, 1.0], seed)
                .unwrap();
            let angles: Vec<(f64, f64)> = (0..6).map(|_| (rng.random::<f64>() * PI, 0.0)).collect();
            let sched = AnnealSchedule::from_csv_str("flat", "s,A_GHz,B_GHz\n0,0.6,1.4\n1,0.6,1.4\n").unwrap();
            let model = QuantumModel::new(p.clone(), sched).unwrap();
            // bit j set means spin down: amplitude sin(θ/2)
            let psi: Vec<f64> = (0..64usize)
                .map(|x| {
                    (0..6)
                        .map(|j| if x >> j & 1 == 1 { (angles[j].0 / 2.0).sin() } else { (angles[j].0 / 2.0).cos() })
                        .product()
                })
                .collect();
            let mut h_psi = vec![0.0; 64];
            model.apply(0.5, &psi, &mut h_psi);
            let dense: f64 = psi.iter().zip(&h_psi).map(|(a, b)| a * b).sum();
            let mf = mean_field_energy(&angles, &p, 0.6, 1.4).unwrap();
            assert!((dense - mf).abs() < 1e-8, "{dense} vs {mf}");
        }
    }

    #[test]
    fn quadratic_minima() {
        let w = wkb_action(&quadratic(0.5), WkbVariant::default()).unwrap();
        assert!((w.theta0 - 0.25f64.asin()).abs() < 1e-7, "{}", w.theta0);
        assert!((w.theta1 - (PI - 0.25f64.asin())).abs() < 1e-7);
        assert!(w.action > 0.0);
    }

    #[test]
    fn barrier_vanishes_for_strong_field() {
        let w = wkb_action(&quadratic(2.5), WkbVariant::default()).unwrap();
        assert_eq!(w.action, 0.0);
        assert!((w.theta0 - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn action_decreases_with_transverse_field() {
        for (variant, top) in [(WkbVariant::EnergyConserving, 9), (WkbVariant::DeepWell, 8)] {
            let actions: Vec<f64> = (1..=top).map(|i| wkb_action(&quadratic(i as f64 / 10.0), variant).unwrap().action).collect();
            assert!(actions.windows(2).all(|w| w[1] < w[0]), "{variant:?}: {actions:?}");
        }
        // the deep-well velocity is imaginary everywhere once the wells are shallow
        assert!(matches!(wkb_action(&quadratic(0.9), WkbVariant::DeepWell), Err(InstantonError::NoForbiddenRegion)));
    }

    #[test]
    fn symmetric_under_reflection() {
        let quartic = |x: f64| x * x - 0.3 * x.powi(4);
        for variant in [WkbVariant::EnergyConserving, WkbVariant::DeepWell] {
            let w1 = wkb_action(&ReducedPotential { a: 0.4, b: 1.0, g: Box::new(quartic), d: 1 }, variant).unwrap();
            let w2 = wkb_action(&ReducedPotential { a: 0.4, b: 1.0, g: Box::new(move |x| quartic(-x)), d: 1 }, variant).unwrap();
            assert!((w1.action - w2.action).abs() < 1e-8 * w1.action);
        }
    }

    #[test]
    fn quadratic_reference_values() {
        // independent adaptive quadrature of the same integrands
        let e = wkb_action(&quadratic(0.5), WkbVariant::EnergyConserving).unwrap().action;
        let d = wkb_action(&quadratic(0.5), WkbVariant::DeepWell).unwrap().action;
        assert!((e - 2.190382464687).abs() < 1e-7 && (d - 1.631795041).abs() < 1e-7, "{e} {d}");
    }

    #[test]
    fn curie_weiss_small_cases() {
        // one spin: H = −A σˣ − B, splitting 2A
        assert!((curie_weiss_splitting(1, 0.3, 1.0).unwrap() - 0.6).abs() < 1e-12);
        let g8 = curie_weiss_splitting(8, 0.5, 1.0).unwrap();
        let g12 = curie_weiss_splitting(12, 0.5, 1.0).unwrap();
        assert!(g12 < g8 && g8 > 0.0);
    }

    fn circle_path(k: usize, beta: f64, spins: usize) -> SpinPath {
        let tau: Vec<f64> = (0..=k).map(|i| beta * i as f64 / k as f64).collect();
        let theta: Vec<f64> = tau.iter().map(|t| 1.2 + 0.3 * (2.0 * PI * t / beta).cos()).collect();
        let phi: Vec<f64> = tau.iter().map(|t| 0.4 * (2.0 * PI * t / beta).sin()).collect();
        SpinPath::uniform(tau, theta, phi, spins)
    }

    #[test]
    fn static_path_at_minimum() {
        let t0 = quadratic(0.5).minima()[0];
        let d = 5;
        // uniform domain: fields-free all-to-all couplings J = 1/D reproduce −D cos²θ
        let terms: Vec<(Vec<usize>, f64)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (vec![i, j], 2.0 / d as f64))).collect();
        let problem = IsingProblem::new(d, terms).unwrap();
        let beta = 3.0;
        let tau: Vec<f64> = (0..=10).map(|i| beta * i as f64 / 10.0).collect();
        let path = SpinPath::uniform(tau, vec![t0; 11], vec![0.0; 11], d);
        let s = action_functional(&path, &problem, 0.5, 1.0).unwrap();
        let v = mean_field_energy(&vec![(t0, 0.0); d], &problem, 0.5, 1.0).unwrap();
        assert!((s - beta * v).abs() < 1e-12);
    }

    #[test]
    fn uniform_domain_is_linear_in_size() {
        let single = IsingProblem::new(1, [(vec![0], 0.7)]).unwrap();
        let fields = IsingProblem::new(4, (0..4).map(|j| (vec![j], 0.7))).unwrap();
        let s1 = action_functional(&circle_path(200, 2.0, 1), &single, 0.5, 1.0).unwrap();
        let s4 = action_functional(&circle_path(200, 2.0, 4), &fields, 0.5, 1.0).unwrap();
        assert!((s4 - 4.0 * s1).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_converges() {
        let single = IsingProblem::new(1, [(vec![0], 0.7)]).unwrap();
        let coarse = action_functional(&circle_path(400, 2.0, 1), &single, 0.5, 1.0).unwrap();
        let fine = action_functional(&circle_path(800, 2.0, 1), &single, 0.5, 1.0).unwrap();
        assert!(((coarse - fine) / fine).abs() < 1e-4);
    }

    #[test]
    fn path_validation_and_csv() {
        let p = circle_path(16, 1.0, 2);
        let back = SpinPath::from_csv_str(&p.to_csv()).unwrap();
        assert_eq!(back.num_spins(), 2);
        assert!(back.tau.iter().zip(&p.tau).all(|(a, b)| (a - b).abs() < 1e-12));
        let mut open = p.clone();
        open.theta[1][16] += 0.1;
        assert!(open.validate().is_err());
        let single = IsingProblem::new(2, [(vec![0], 0.7)]).unwrap();
        assert!(action_functional(&open, &single, 0.5, 1.0).is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(rate_exponent(0, 1.3), 0.0);
        assert_eq!(rate_exponent(16, 0.5), 2.0 * rate_exponent(8, 0.5));
        let c = compare_exponents(8, 0.1, 1.0, 12.0);
        assert!(c.tunneling_favoured && (c.thermal - 1.0 / temperature_to_frequency(12.0)).abs() < 1e-12);
    }
}
