use std::f64::consts::{E, PI};

use crate::constants::KK_ALPHA;

/// Probability of one attainable signed residue `Ω` under the Gaussian
/// ensemble. Attainable residues share the parity of `Σ a_j`, so they are
/// spaced by two and the weights carry a factor 2.
pub fn residue_density(omega: f64, n: usize, mean_square: f64) -> f64 {
    let var = n as f64 * mean_square;
    2.0 / (2.0 * PI * var).sqrt() * (-omega * omega / (2.0 * var)).exp()
}

/// `N^{−α log₂N}`, the Karmarkar-Karp residue scaling up to a prefactor.
pub fn kk_scaling(n: usize) -> f64 {
    let n = n as f64;
    n.powf(-KK_ALPHA * n.log2())
}

/// Size beyond which differencing beats κ-flip descent: `(e/κ) e^{κ/α}`.
pub fn n_kappa(kappa: usize, alpha: f64) -> f64 {
    E / kappa as f64 * (kappa as f64 / alpha).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NppPrediction {
    /// `⟨E⟩ = sqrt(2⟨a²⟩N/π)` for a random configuration.
    pub mean_energy: f64,
    /// `⟨E⟩ 2^{−N}`.
    pub median_min_energy: f64,
    /// `1 − 2κ/N`.
    pub q: f64,
    /// `⟨a²⟩ (1 − q²)^{1/2}`, exactly as the conditional width is usually quoted.
    pub sigma_q: f64,
    /// `1 / sqrt(8πκ⟨a²⟩)`.
    pub p_kappa_00: f64,
    /// `[C(N,κ) P_κ(0|0)]⁻¹`.
    pub e_kappa: f64,
    /// `4πκ⟨a²⟩ (κ/N)^κ e^{−κ}`, the large-N form of `e_kappa`.
    pub e_at: f64,
    /// `N^{α log₂N − κ} κ^κ e^{−κ}`.
    pub at_over_kk: f64,
    pub n_kappa: f64,
}

pub fn predict_stats(n: usize, mean_square: f64, kappa: usize) -> NppPrediction {
    let (nf, k) = (n as f64, kappa as f64);
    let mean_energy = (2.0 * mean_square * nf / PI).sqrt();
    let q = 1.0 - 2.0 * k / nf;
    let p_kappa_00 = 1.0 / (8.0 * PI * k * mean_square).sqrt();
    let binom: f64 = (0..kappa).map(|i| (nf - i as f64) / (i as f64 + 1.0)).product();
    NppPrediction {
        mean_energy,
        median_min_energy: mean_energy * (-nf).exp2(),
        q,
        sigma_q: mean_square * (1.0 - q * q).max(0.0).sqrt(),
        p_kappa_00,
        e_kappa: 1.0 / (binom * p_kappa_00),
        e_at: 4.0 * PI * k * mean_square * (k / nf).powf(k) * (-k).exp(),
        at_over_kk: nf.powf(KK_ALPHA * nf.log2() - k) * k.powf(k) * (-k).exp(),
        n_kappa: n_kappa(kappa, KK_ALPHA),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_size() {
        assert!((n_kappa(8, 0.72) / 22735.0 - 1.0).abs() < 1e-3);
        assert!((predict_stats(100, 1.0 / 3.0, 8).n_kappa - n_kappa(8, KK_ALPHA)).abs() < 1e-9);
    }

    #[test]
    fn half_flips_decorrelate() {
        let p = predict_stats(20, 0.7, 10);
        assert_eq!(p.q, 0.0);
        assert!((p.sigma_q - 0.7).abs() < 1e-15);
    }

    #[test]
    fn worked_values() {
        let p = predict_stats(20, 1.0 / 3.0, 2);
        assert!((p.p_kappa_00 - 0.244_301_255_951).abs() < 1e-11);
        assert!((p.e_at - 0.011_337_822_176).abs() < 1e-11);
        // the large-N form is within a factor of a few of the exact order statistic
        assert!(p.e_kappa / p.e_at > 0.3 && p.e_kappa / p.e_at < 3.0, "{} {}", p.e_kappa, p.e_at);
        assert!((p.mean_energy - (2.0 / 3.0 * 20.0 / PI).sqrt()).abs() < 1e-15);
        assert!((p.median_min_energy * 2f64.powi(20) - p.mean_energy).abs() < 1e-12);
    }

    #[test]
    fn residue_weights_cover_the_parity_lattice() {
        // summing every other integer recovers unit mass
        let (n, m2) = (24, 1000.0);
        let total: f64 = (-2000..=2000).map(|k| residue_density(2.0 * k as f64, n, m2)).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn kk_residue_shrinks_superpolynomially() {
        assert!(kk_scaling(64) < kk_scaling(32) && kk_scaling(32) < 1.0);
        assert!((kk_scaling(2) - 2f64.powf(-KK_ALPHA)).abs() < 1e-15);
    }
}
