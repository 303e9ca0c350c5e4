use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ProblemError;

/// Grid of 8-qubit K4,4 unit cells.
///
/// Qubit `k` of cell `(r, c)` has index `((r*cols)+c)*8 + k`. Within a cell,
/// qubits 0..4 couple to qubits 4..8. Qubits 4..8 couple to the same `k`
/// in the horizontally adjacent cell, qubits 0..4 to the same `k` in the
/// vertically adjacent cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    broken: BTreeSet<usize>,
}

pub const CELL_SIZE: usize = 8;

impl ChimeraGraph {
    pub fn new(rows: usize, cols: usize, broken: BTreeSet<usize>) -> Result<Self, ProblemError> {
        if rows == 0 || cols == 0 {
            return Err(ProblemError::EmptyGraph);
        }
        let count = rows * cols * CELL_SIZE;
        if let Some(&index) = broken.iter().find(|&&q| q >= count) {
            return Err(ProblemError::QubitOutOfRange { index, count });
        }
        Ok(Self { rows, cols, broken })
    }

    pub fn intact(rows: usize, cols: usize) -> Result<Self, ProblemError> {
        Self::new(rows, cols, BTreeSet::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn broken(&self) -> &BTreeSet<usize> {
        &self.broken
    }

    /// Total index space, including broken qubits.
    pub fn index_space(&self) -> usize {
        self.rows * self.cols * CELL_SIZE
    }

    /// Number of working qubits.
    pub fn num_qubits(&self) -> usize {
        self.index_space() - self.broken.len()
    }

    pub fn qubit(&self, row: usize, col: usize, k: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols && k < CELL_SIZE);
        ((row * self.cols) + col) * CELL_SIZE + k
    }

    pub fn cell_of(&self, qubit: usize) -> (usize, usize) {
        let cell = qubit / CELL_SIZE;
        (cell / self.cols, cell % self.cols)
    }

    pub fn cell_qubits(&self, row: usize, col: usize) -> impl Iterator<Item = usize> + '_ {
        (0..CELL_SIZE)
            .map(move |k| self.qubit(row, col, k))
            .filter(|q| !self.broken.contains(q))
    }

    pub fn is_working(&self, qubit: usize) -> bool {
        qubit < self.index_space() && !self.broken.contains(&qubit)
    }

    /// Intra-cell edges of one cell.
    pub fn intra_edges(&self, row: usize, col: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(16);
        for a in 0..4 {
            for b in 4..8 {
                self.push_edge(&mut out, self.qubit(row, col, a), self.qubit(row, col, b));
            }
        }
        out
    }

    /// Edges between two adjacent cells; empty if the cells are not neighbors.
    pub fn inter_edges(&self, a: (usize, usize), b: (usize, usize)) -> Vec<(usize, usize)> {
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        let ks = if first.0 == second.0 && first.1 + 1 == second.1 {
            4..8
        } else if first.1 == second.1 && first.0 + 1 == second.0 {
            0..4
        } else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(4);
        for k in ks {
            self.push_edge(
                &mut out,
                self.qubit(first.0, first.1, k),
                self.qubit(second.0, second.1, k),
            );
        }
        out
    }

    fn push_edge(&self, out: &mut Vec<(usize, usize)>, a: usize, b: usize) {
        if !self.broken.contains(&a) && !self.broken.contains(&b) {
            out.push((a.min(b), a.max(b)));
        }
    }

    /// All edges: per cell in row-major order, its intra edges, then the edge
    /// group to the right neighbor, then the group to the neighbor below.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.extend(self.intra_edges(r, c));
                if c + 1 < self.cols {
                    out.extend(self.inter_edges((r, c), (r, c + 1)));
                }
                if r + 1 < self.rows {
                    out.extend(self.inter_edges((r, c), (r + 1, c)));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let g = ChimeraGraph::intact(1, 1).unwrap();
        assert_eq!(g.num_qubits(), 8);
        assert_eq!(g.edges().len(), 16);
    }

    #[test]
    fn two_cells_in_a_row() {
        let g = ChimeraGraph::intact(1, 2).unwrap();
        assert_eq!(g.num_qubits(), 16);
        let edges = g.edges();
        assert_eq!(edges.len(), 36);
        // horizontal couplers use the k = 4..8 half
        let inter: Vec<_> = edges.iter().filter(|(a, b)| a / 8 != b / 8).collect();
        assert_eq!(inter, vec![&(4, 12), &(5, 13), &(6, 14), &(7, 15)]);
    }

    #[test]
    fn broken_qubit_drops_its_edges() {
        let g = ChimeraGraph::new(1, 1, [0].into()).unwrap();
        assert_eq!(g.num_qubits(), 7);
        assert_eq!(g.edges().len(), 12);
    }

    #[test]
    fn broken_out_of_range() {
        assert_eq!(
            ChimeraGraph::new(1, 1, [8].into()),
            Err(ProblemError::QubitOutOfRange { index: 8, count: 8 })
        );
        assert_eq!(ChimeraGraph::intact(0, 3), Err(ProblemError::EmptyGraph));
    }

    #[test]
    fn intact_edge_count_formula() {
        for r in 1..5 {
            for c in 1..5 {
                let g = ChimeraGraph::intact(r, c).unwrap();
                assert_eq!(g.edges().len(), 16 * r * c + 4 * c * (r - 1) + 4 * r * (c - 1));
            }
        }
    }

    #[test]
    fn vertical_couplers_use_left_half() {
        let g = ChimeraGraph::intact(2, 1).unwrap();
        assert_eq!(g.inter_edges((1, 0), (0, 0)), vec![(0, 8), (1, 9), (2, 10), (3, 11)]);
        assert!(g.inter_edges((0, 0), (0, 0)).is_empty());
    }
}
