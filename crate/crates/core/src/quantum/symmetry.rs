//! Reduction to the subspace invariant under qubit permutations that leave
//! the cost function unchanged.
//!
//! The driver `−A Σ σˣ` and the uniform superposition are symmetric under every
//! qubit permutation, so a state prepared in the fully symmetric sector of
//! the problem's automorphism group stays there. The sector is spanned by
//! normalized orbit sums of basis states.

use std::collections::HashMap;

use crate::problems::IsingProblem;

/// Permutations `p` with `problem(p(s)) = problem(s)` drawn from single
/// transpositions and products of two disjoint transpositions. Double
/// transpositions are kept only when neither factor is a symmetry itself.
pub fn find_automorphisms(problem: &IsingProblem) -> Vec<Vec<usize>> {
    let n = problem.num_vars();
    let table: HashMap<&[usize], f64> = problem.terms().iter().map(|t| (t.vars.as_slice(), t.coeff)).collect();
    let preserves = |perm: &[usize]| {
        let mut mapped = Vec::new();
        problem.terms().iter().all(|t| {
            mapped.clear();
            mapped.extend(t.vars.iter().map(|&v| perm[v]));
            mapped.sort_unstable();
            table.get(mapped.as_slice()).is_some_and(|&c| (c - t.coeff).abs() <= 1e-12 * c.abs().max(1.0))
        })
    };
    let swap = |pairs: &[(usize, usize)]| {
        let mut p: Vec<usize> = (0..n).collect();
        for &(i, j) in pairs {
            p.swap(i, j);
        }
        p
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut gens = Vec::new();
    let mut single = vec![false; pairs.len()];
    for (idx, &pair) in pairs.iter().enumerate() {
        let p = swap(&[pair]);
        if preserves(&p) {
            single[idx] = true;
            gens.push(p);
        }
    }
    for (x, &(i, j)) in pairs.iter().enumerate() {
        if single[x] {
            continue;
        }
        for (y, &(k, l)) in pairs.iter().enumerate().skip(x + 1) {
            if single[y] || k == i || k == j || l == i || l == j {
                continue;
            }
            let p = swap(&[(i, j), (k, l)]);
            if preserves(&p) {
                gens.push(p);
            }
        }
    }
    gens
}

fn permute_bits(x: usize, perm: &[usize]) -> usize {
    let mut y = 0;
    let mut rest = x;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        y |= 1 << perm[j];
        rest &= rest - 1;
    }
    y
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

/// Orbit basis of the symmetric sector and the driver term in that basis.
#[derive(Debug, Clone)]
pub struct SymmetricSector {
    n: usize,
    /// Orbit index of each basis state.
    orbit_of: Vec<u32>,
    sizes: Vec<usize>,
    /// Smallest basis state of each orbit.
    reps: Vec<usize>,
    /// `Σσˣ` in the orbit basis, as sparse rows.
    driver: Vec<Vec<(u32, f64)>>,
}

impl SymmetricSector {
    pub fn new(n: usize, generators: &[Vec<usize>]) -> Self {
        let dim = 1usize << n;
        let mut parent: Vec<u32> = (0..dim as u32).collect();
        for g in generators {
            for x in 0..dim {
                let y = permute_bits(x, g);
                let (a, b) = (find(&mut parent, x as u32), find(&mut parent, y as u32));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi as usize] = lo;
                }
            }
        }
        let mut index = HashMap::new();
        let mut orbit_of = vec![0u32; dim];
        let (mut sizes, mut reps) = (Vec::new(), Vec::new());
        for x in 0..dim {
            let root = find(&mut parent, x as u32);
            let id = *index.entry(root).or_insert_with(|| {
                reps.push(x);
                sizes.push(0);
                sizes.len() as u32 - 1
            });
            orbit_of[x] = id;
            sizes[id as usize] += 1;
        }
        let driver = reps
            .iter()
            .enumerate()
            .map(|(a, &x)| {
                let mut row: Vec<(u32, f64)> = Vec::new();
                for j in 0..n {
                    let b = orbit_of[x ^ (1 << j)];
                    match row.iter_mut().find(|(c, _)| *c == b) {
                        Some(entry) => entry.1 += 1.0,
                        None => row.push((b, 1.0)),
                    }
                }
                for (b, c) in row.iter_mut() {
                    *c *= (sizes[a] as f64 / sizes[*b as usize] as f64).sqrt();
                }
                row
            })
            .collect();
        Self { n, orbit_of, sizes, reps, driver }
    }

    /// Sector of the automorphisms found by [`find_automorphisms`].
    pub fn of_problem(problem: &IsingProblem) -> Self {
        Self::new(problem.num_vars(), &find_automorphisms(problem))
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn representatives(&self) -> &[usize] {
        &self.reps
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `y += c · Σσˣ x` in the orbit basis.
    pub fn apply_driver<T>(&self, c: f64, x: &[T], y: &mut [T])
    where
        T: Copy + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        for (a, row) in self.driver.iter().enumerate() {
            for &(b, w) in row {
                y[a] += x[b as usize] * (c * w);
            }
        }
    }

    /// Orbit-basis amplitudes of a full state, assumed symmetric.
    pub fn project(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (x, &v) in full.iter().enumerate() {
            out[self.orbit_of[x] as usize] += v;
        }
        for (o, &size) in out.iter_mut().zip(&self.sizes) {
            *o /= (size as f64).sqrt();
        }
        out
    }

    /// Full-space amplitudes of an orbit-basis state.
    pub fn embed<T>(&self, reduced: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T>,
    {
        self.orbit_of
            .iter()
            .map(|&o| reduced[o as usize] * (1.0 / (self.sizes[o as usize] as f64).sqrt()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::weak_strong_pair;

    #[test]
    fn pair_sector_dimension() {
        let pair = weak_strong_pair(0.44, -1.0);
        let sector = SymmetricSector::of_problem(&pair);
        // two 4-spin Dicke ladders and four exchangeable right-side qubit pairs
        assert_eq!(sector.dim(), 5 * 5 * 35);
        assert_eq!(sector.orbit_sizes().iter().sum::<usize>(), 1 << 16);
    }

    #[test]
    fn driver_is_symmetric_and_matches_full_space() {
        let p = IsingProblem::new(4, [(vec![0, 1], 1.0), (vec![2, 3], 1.0), (vec![0], 0.5), (vec![2], 0.5)]).unwrap();
        let sector = SymmetricSector::of_problem(&p);
        let dim = sector.dim();
        assert!(dim < 16);
        for a in 0..dim {
            let mut ea = vec![0.0; dim];
            ea[a] = 1.0;
            let mut col = vec![0.0; dim];
            sector.apply_driver(1.0, &ea, &mut col);
            for b in 0..dim {
                let mut eb = vec![0.0; dim];
                eb[b] = 1.0;
                let mut back = vec![0.0; dim];
                sector.apply_driver(1.0, &eb, &mut back);
                assert!((col[b] - back[a]).abs() < 1e-12);
            }
            let full = sector.embed(&ea);
            let mut xf = vec![0.0; 16];
            for (x, &v) in full.iter().enumerate() {
                for j in 0..4 {
                    xf[x ^ (1 << j)] += v;
                }
            }
            let reduced = sector.project(&xf);
            for b in 0..dim {
                assert!((reduced[b] - col[b]).abs() < 1e-12);
            }
        }
    }
}
