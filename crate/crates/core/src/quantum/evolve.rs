//! Krylov propagation of `iψ̇ = H(t)ψ` for real symmetric, time-dependent `H`.
//!
//! Exponentials are applied through a Lanczos basis, subdividing a step when
//! the Krylov error estimate exceeds the tolerance. The Krylov image is an isometry, so the
//! norm is preserved to rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::QuantumError;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub max_dim: usize,
    /// Bound on the estimated error of one exponential.
    pub tol: f64,
    pub max_subdivisions: u32,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { max_dim: 40, tol: 1e-10, max_subdivisions: 24 }
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Workspace reused across steps.
pub struct KrylovPropagator {
    opts: KrylovOptions,
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
}

impl KrylovPropagator {
    pub fn new(dim: usize, opts: KrylovOptions) -> Self {
        let m = opts.max_dim.min(dim).max(1);
        Self { opts, basis: vec![vec![Complex64::new(0.0, 0.0); dim]; m + 1], w: vec![Complex64::new(0.0, 0.0); dim] }
    }

    /// `ψ ← exp(−i H dt) ψ` for a fixed operator `apply(x, y): y = H x`.
    pub fn step<F>(&mut self, apply: &F, psi: &mut [Complex64], dt: f64) -> Result<(), QuantumError>
    where
        F: Fn(&[Complex64], &mut [Complex64]),
    {
        let mut remaining = dt;
        let mut h = dt;
        let mut halvings = 0;
        while remaining > 0.0 {
            h = h.min(remaining);
            if self.try_step(apply, psi, h)? {
                remaining -= h;
                // allow the step to grow back after a hard stretch
                h *= 1.5;
            } else {
                h /= 2.0;
                halvings += 1;
                if halvings > self.opts.max_subdivisions * 4 || h < dt * 0.5f64.powi(self.opts.max_subdivisions as i32) {
                    return Err(QuantumError::StepSize(format!("Krylov step shrank below {h:.3e}")));
                }
            }
        }
        Ok(())
    }

    fn try_step<F>(&mut self, apply: &F, psi: &mut [Complex64], h: f64) -> Result<bool, QuantumError>
    where
        F: Fn(&[Complex64], &mut [Complex64]),
    {
        let nrm = norm(psi);
        if nrm == 0.0 {
            return Ok(true);
        }
        let m_max = self.basis.len() - 1;
        for (b, p) in self.basis[0].iter_mut().zip(psi.iter()) {
            *b = p / nrm;
        }
        let (mut alpha, mut beta) = (Vec::with_capacity(m_max), Vec::with_capacity(m_max));
        let mut m = 0;
        loop {
            apply(&self.basis[m], &mut self.w);
            let a = cdot(&self.basis[m], &self.w).re;
            for _ in 0..2 {
                for b in &self.basis[..=m] {
                    let c = cdot(b, &self.w);
                    for (wi, bi) in self.w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
            }
            alpha.push(a);
            m += 1;
            let b = norm(&self.w);
            let exhausted = b < 1e-12 * (1.0 + a.abs());
            if exhausted || m == m_max || m % 8 == 0 {
                let c = expm_e1(&alpha, &beta, h);
                let err = if exhausted { 0.0 } else { b * c[m - 1].norm() };
                if err <= self.opts.tol {
                    for x in psi.iter_mut() {
                        *x = Complex64::new(0.0, 0.0);
                    }
                    for (ci, v) in c.iter().zip(&self.basis) {
                        let ci = ci * nrm;
                        for (x, vi) in psi.iter_mut().zip(v) {
                            *x += ci * vi;
                        }
                    }
                    return Ok(true);
                }
                if exhausted || m == m_max {
                    return Ok(false);
                }
            }
            beta.push(b);
            for (t, wi) in self.basis[m].iter_mut().zip(&self.w) {
                *t = wi / b;
            }
        }
    }
}

/// `exp(−i T h) e₁` for the tridiagonal `T` with diagonal `alpha` and off-diagonal `beta`.
fn expm_e1(alpha: &[f64], beta: &[f64], h: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| Complex64::from_polar(1.0, -eig.eigenvalues[k] * h) * (q[(i, k)] * q[(0, k)]))
                .sum()
        })
        .collect()
}

/// A Hamiltonian `H(t) = Σ_i c_i(t) H_i` that is linear in two coefficients.
pub type Coefficients = [f64; 2];

/// Integrates `iψ̇ = H(t)ψ` from `t0` to `t1` with the fourth-order
/// commutator-free Magnus scheme: two exponentials per step of mixed
/// Hamiltonians sampled at the Gauss points.
///
/// `coeffs(t)` gives the coefficients of `H(t)` and `apply(c, x, y)` sets
/// `y = H(c) x` in angular units. `observe(t, ψ)` is called at `t0` and
/// after every step.
pub fn propagate<C, F, O>(
    dim: usize,
    coeffs: C,
    apply: F,
    psi: &mut [Complex64],
    (t0, t1): (f64, f64),
    dt: f64,
    opts: KrylovOptions,
    mut observe: O,
) -> Result<(), QuantumError>
where
    C: Fn(f64) -> Coefficients,
    F: Fn(Coefficients, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64]),
{
    if !(dt > 0.0) || !(t1 >= t0) {
        return Err(QuantumError::StepSize(format!("invalid step {dt} on [{t0}, {t1}]")));
    }
    let r3 = 3f64.sqrt();
    let (g1, g2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let (w1, w2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
    let mix = |x: Coefficients, y: Coefficients, a: f64, b: f64| [2.0 * (a * x[0] + b * y[0]), 2.0 * (a * x[1] + b * y[1])];
    let mut prop = KrylovPropagator::new(dim, opts);
    let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    observe(t0, psi);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let (c1, c2) = (coeffs(t + g1 * h), coeffs(t + g2 * h));
        // the weights of each exponential sum to 1/2, hence the factor 2 in `mix`
        for c in [mix(c1, c2, w2, w1), mix(c1, c2, w1, w2)] {
            prop.step(&|x: &[Complex64], y: &mut [Complex64]| apply(c, x, y), psi, 0.5 * h)?;
        }
        observe(t0 + (k + 1) as f64 * h, psi);
    }
    Ok(())
}
