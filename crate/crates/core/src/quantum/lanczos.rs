//! Lanczos eigensolver for the lowest eigenpairs of a real symmetric operator.
//!
//! Each eigenpair is found by a restarted Lanczos run with full
//! reorthogonalization, then locked; later runs stay orthogonal to the locked
//! vectors, so degenerate levels are returned with their multiplicity.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;

use super::QuantumError;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_basis: 160, max_restarts: 60, tol: 1e-9, seed: 0x5eed }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Two rounds of Gram-Schmidt against `basis`.
fn orthogonalize<'a>(v: &mut [f64], basis: impl Iterator<Item = &'a Vec<f64>> + Clone) {
    for _ in 0..2 {
        for b in basis.clone() {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
}

fn lowest(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> (f64, DVector<f64>) {
    let vals = &eig.eigenvalues;
    let i = (0..vals.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("nonempty");
    (vals[i], eig.eigenvectors.column(i).into_owned())
}

/// The `k` lowest eigenpairs of the operator `apply(x, y): y = H x` on
/// `dim`-dimensional vectors, sorted ascending.
pub fn lowest_eigenpairs<F>(dim: usize, k: usize, apply: F, opts: &LanczosOptions) -> Result<Vec<(f64, Vec<f64>)>, QuantumError>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k > dim {
        return Err(QuantumError::Eigensolver(format!("requested {k} levels of a {dim}-dimensional space")));
    }
    let mut rng = rng_from_seed(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut w = vec![0.0; dim];
    for level in 0..k {
        let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut converged = None;
        let mut last_residual = f64::INFINITY;
        for _ in 0..opts.max_restarts {
            orthogonalize(&mut start, locked.iter());
            if normalize(&mut start) == 0.0 {
                return Err(QuantumError::Eigensolver("start vector vanished after deflation".into()));
            }
            let m_max = opts.max_basis.min(dim - level).max(1);
            let mut basis: Vec<Vec<f64>> = vec![start.clone()];
            let (mut alpha, mut beta) = (Vec::new(), Vec::new());
            let mut done = false;
            let mut best = None;
            for j in 0..m_max {
                apply(&basis[j], &mut w);
                let a = dot(&w, &basis[j]);
                alpha.push(a);
                orthogonalize(&mut w, locked.iter().chain(basis.iter()));
                let b = dot(&w, &w).sqrt();
                let check = j + 1 == m_max || b < 1e-12 || (j + 1) % 8 == 0;
                if check {
                    let eig = tridiagonal_eigen(&alpha, &beta);
                    let (theta, y) = lowest(&eig);
                    let residual = (b * y[y.len() - 1]).abs();
                    last_residual = residual;
                    best = Some((theta, y));
                    if residual <= opts.tol * theta.abs().max(1.0) || b < 1e-12 {
                        done = true;
                        break;
                    }
                }
                if j + 1 == m_max {
                    break;
                }
                beta.push(b);
                w.iter_mut().for_each(|x| *x /= b);
                basis.push(w.clone());
            }
            let (theta, y) = best.expect("at least one check per restart");
            let mut x = vec![0.0; dim];
            for (c, v) in y.iter().zip(&basis) {
                axpy(*c, v, &mut x);
            }
            if done {
                orthogonalize(&mut x, locked.iter());
                normalize(&mut x);
                converged = Some((theta, x));
                break;
            }
            start = x;
        }
        let (theta, x) = converged.ok_or_else(|| {
            QuantumError::Eigensolver(format!(
                "level {level} not converged after {} restarts (residual {last_residual:.3e})",
                opts.max_restarts
            ))
        })?;
        values.push(theta);
        locked.push(x);
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = values.into_iter().zip(locked).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}
