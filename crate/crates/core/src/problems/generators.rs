use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{brute_force_ground_state, ChimeraGraph, IsingProblem, ProblemError, SpinConfig};
use crate::constants::{STRONG_FIELD, WEAK_FIELD};
use crate::rng::rng_from_seed;

/// Two ferromagnetically coupled unit cells on a 1×2 Chimera tile: field `h1`
/// on the left (weak) cell, `h2` on the right (strong) cell, `J = 1` on every
/// intra- and inter-cell edge.
pub fn weak_strong_pair(h1: f64, h2: f64) -> IsingProblem {
    let graph = ChimeraGraph::intact(1, 2).expect("1x2 grid");
    let mut terms: Vec<(Vec<usize>, f64)> = graph.edges().into_iter().map(|(a, b)| (vec![a, b], 1.0)).collect();
    terms.extend(graph.cell_qubits(0, 0).map(|q| (vec![q], h1)));
    terms.extend(graph.cell_qubits(0, 1).map(|q| (vec![q], h2)));
    IsingProblem::new(graph.index_space(), terms).expect("valid pair")
}

/// How unit cells are grouped into weak-strong dominoes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingPattern {
    /// Horizontal dominoes on columns (2d, 2d+1), weak cell left and strong
    /// cell right in every domino. Strong cells only meet vertically.
    #[serde(rename = "hdomino")]
    Domino,
    /// Horizontal dominoes whose orientation alternates along a row
    /// (W S | S W | W S ...), so strong cells meet both vertically and
    /// horizontally between neighboring dominoes.
    #[serde(rename = "hdomino-mirror")]
    MirroredDomino,
}

impl PairingPattern {
    pub fn id(self) -> &'static str {
        match self {
            Self::Domino => "hdomino",
            Self::MirroredDomino => "hdomino-mirror",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "hdomino" => Some(Self::Domino),
            "hdomino-mirror" => Some(Self::MirroredDomino),
            _ => None,
        }
    }

    /// `(weak cell, strong cell)` for every domino, row-major.
    pub fn dominoes(self, rows: usize, cols: usize) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for r in 0..rows {
            for d in 0..cols / 2 {
                let (left, right) = ((r, 2 * d), (r, 2 * d + 1));
                let mirrored = self == Self::MirroredDomino && d % 2 == 1;
                out.push(if mirrored { (right, left) } else { (left, right) });
            }
        }
        out
    }
}

/// A generated weak-strong cluster network with its certified reference optimum.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub problem: IsingProblem,
    pub reference: SpinConfig,
    pub reference_energy: f64,
    pub pattern: PairingPattern,
    pub dominoes: Vec<((usize, usize), (usize, usize))>,
    /// Adjacent strong-cell pairs and the sign drawn for their four couplers.
    pub strong_couplings: Vec<((usize, usize), (usize, usize), f64)>,
}

/// Largest number of strong cells whose contracted states are enumerated.
pub const MAX_CONTRACTED_STRONG_CELLS: usize = 28;

/// Builds a weak-strong cluster network on `graph`.
///
/// Every domino gets `h1 = 0.44` on its weak cell and `h2 = −1` on its strong
/// cell, ferromagnetic couplers inside both cells and between them. The four
/// couplers between each pair of adjacent strong cells share one random sign.
/// Terms touching broken qubits are dropped.
///
/// The reference optimum comes from contracting each cell to a single
/// super-spin, eliminating weak cells analytically, enumerating the strong
/// super-spins exactly, and certifying the expanded state as a 1-flip local
/// minimum of the full problem.
pub fn weak_strong_network(
    graph: &ChimeraGraph,
    pattern: PairingPattern,
    seed: u64,
) -> Result<NetworkInstance, ProblemError> {
    let dominoes = pattern.dominoes(graph.rows(), graph.cols());
    if dominoes.is_empty() {
        return Err(ProblemError::NoDomino);
    }
    let intact = ChimeraGraph::intact(graph.rows(), graph.cols())?;
    let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut strong_cells = Vec::new();
    for &(weak, strong) in &dominoes {
        for cell in [weak, strong] {
            terms.extend(intact.intra_edges(cell.0, cell.1).into_iter().map(|(a, b)| (vec![a, b], 1.0)));
        }
        terms.extend(intact.inter_edges(weak, strong).into_iter().map(|(a, b)| (vec![a, b], 1.0)));
        terms.extend(intact.cell_qubits(weak.0, weak.1).map(|q| (vec![q], WEAK_FIELD)));
        terms.extend(intact.cell_qubits(strong.0, strong.1).map(|q| (vec![q], STRONG_FIELD)));
        strong_cells.push(strong);
    }
    strong_cells.sort_unstable();

    let mut rng = rng_from_seed(seed);
    let mut strong_couplings = Vec::new();
    for (i, &a) in strong_cells.iter().enumerate() {
        for &b in &strong_cells[i + 1..] {
            let edges = intact.inter_edges(a, b);
            if edges.is_empty() {
                continue;
            }
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            terms.extend(edges.into_iter().map(|(p, q)| (vec![p, q], sign)));
            strong_couplings.push((a, b, sign));
        }
    }
    let problem = IsingProblem::new(intact.index_space(), terms)?.without_variables(graph.broken());
    let reference = contracted_optimum(graph, &problem, &dominoes)?;
    if let Some((variable, improvement)) = problem.improving_flip(&reference) {
        return Err(ProblemError::Certification { variable, improvement });
    }
    let reference_energy = problem.evaluate_energy(&reference)?;
    Ok(NetworkInstance {
        problem,
        reference,
        reference_energy,
        pattern,
        dominoes,
        strong_couplings,
    })
}

/// Term coefficients after replacing every qubit by its cell's super-spin.
/// Keys are sorted cell indices with odd multiplicity in the original term.
fn contract(problem: &IsingProblem) -> BTreeMap<Vec<usize>, f64> {
    let mut out = BTreeMap::new();
    for t in problem.terms() {
        let mut cells: Vec<usize> = t.vars.iter().map(|&q| q / super::chimera::CELL_SIZE).collect();
        cells.sort_unstable();
        let mut odd = Vec::new();
        let mut i = 0;
        while i < cells.len() {
            let mut j = i;
            while j < cells.len() && cells[j] == cells[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                odd.push(cells[i]);
            }
            i = j;
        }
        if !odd.is_empty() {
            *out.entry(odd).or_insert(0.0) += t.coeff;
        }
    }
    out
}

fn contracted_optimum(
    graph: &ChimeraGraph,
    problem: &IsingProblem,
    dominoes: &[((usize, usize), (usize, usize))],
) -> Result<SpinConfig, ProblemError> {
    let cell_index = |(r, c): (usize, usize)| r * graph.cols() + c;
    let contracted = contract(problem);

    let strong: Vec<usize> = dominoes.iter().map(|&(_, s)| cell_index(s)).collect();
    if strong.len() > MAX_CONTRACTED_STRONG_CELLS {
        return Err(ProblemError::TooLarge { n: strong.len(), limit: MAX_CONTRACTED_STRONG_CELLS });
    }
    let strong_pos: BTreeMap<usize, usize> = strong.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    // weak cell -> (field F, coupling C to its strong partner)
    let mut weak: BTreeMap<usize, (usize, f64, f64)> = dominoes
        .iter()
        .map(|&(w, s)| (cell_index(w), (cell_index(s), 0.0, 0.0)))
        .collect();

    let mut strong_terms: Vec<(Vec<usize>, f64)> = Vec::new();
    for (cells, &c) in &contracted {
        match cells.as_slice() {
            [w] if weak.contains_key(w) => weak.get_mut(w).unwrap().1 += c,
            [a, b] if weak.contains_key(a) || weak.contains_key(b) => {
                let (w, other) = if weak.contains_key(a) { (*a, *b) } else { (*b, *a) };
                let entry = weak.get_mut(&w).unwrap();
                if entry.0 != other {
                    return Err(ProblemError::InvalidParameter(format!(
                        "weak cell {w} couples to cell {other}, not its partner"
                    )));
                }
                entry.2 += c;
            }
            _ => {
                let mapped: Option<Vec<usize>> = cells.iter().map(|c| strong_pos.get(c).copied()).collect();
                let mapped = mapped.ok_or_else(|| {
                    ProblemError::InvalidParameter("term touches a cell outside the pairing".into())
                })?;
                strong_terms.push((mapped, c));
            }
        }
    }
    // min over S_w of −(F S_w + C S_w S_s) = −|F + C S_s|, affine in S_s
    for &(s, f, c) in weak.values() {
        let field = ((f + c).abs() - (f - c).abs()) / 2.0;
        strong_terms.push((vec![strong_pos[&s]], field));
    }
    let reduced = IsingProblem::new(strong.len(), strong_terms)?;
    let best = brute_force_ground_state(&reduced)?;

    let mut cell_spin = vec![1i8; graph.rows() * graph.cols()];
    for (i, &s) in strong.iter().enumerate() {
        cell_spin[s] = best.config.as_slice()[i];
    }
    for (&w, &(s, f, c)) in &weak {
        let drive = f + c * cell_spin[s] as f64;
        cell_spin[w] = if drive > 0.0 { 1 } else { -1 };
    }
    let spins = (0..graph.index_space())
        .map(|q| cell_spin[q / super::chimera::CELL_SIZE])
        .collect();
    Ok(SpinConfig::from_spins_unchecked(spins))
}

/// Interaction graph for [`random_ising`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphModel {
    Complete { n: usize },
    Chimera(ChimeraGraph),
    /// Each pair present independently with probability `p`.
    ErdosRenyi { n: usize, p: f64 },
}

impl GraphModel {
    pub fn num_vars(&self) -> usize {
        match self {
            Self::Complete { n } | Self::ErdosRenyi { n, .. } => *n,
            Self::Chimera(g) => g.index_space(),
        }
    }
}

/// Random 2-local instance: every edge of the graph model gets a coefficient
/// drawn uniformly from `coefficients`. No fields.
pub fn random_ising(model: &GraphModel, coefficients: &[f64], seed: u64) -> Result<IsingProblem, ProblemError> {
    let n = model.num_vars();
    if n < 2 {
        return Err(ProblemError::InvalidParameter("need at least 2 variables".into()));
    }
    if coefficients.is_empty() {
        return Err(ProblemError::InvalidParameter("empty coefficient set".into()));
    }
    let mut rng = rng_from_seed(seed);
    let edges: Vec<(usize, usize)> = match model {
        GraphModel::Complete { n } => (0..*n).flat_map(|a| (a + 1..*n).map(move |b| (a, b))).collect(),
        GraphModel::Chimera(g) => g.edges(),
        GraphModel::ErdosRenyi { n, p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(ProblemError::InvalidParameter(format!("edge probability {p}")));
            }
            let mut e = Vec::new();
            for a in 0..*n {
                for b in a + 1..*n {
                    if rng.random::<f64>() < *p {
                        e.push((a, b));
                    }
                }
            }
            e
        }
    };
    let terms: Vec<(Vec<usize>, f64)> = edges
        .into_iter()
        .map(|(a, b)| (vec![a, b], coefficients[rng.random_range(0..coefficients.len())]))
        .collect();
    IsingProblem::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ENERGY_TOL;

    fn left_up_right_down() -> SpinConfig {
        SpinConfig::new((0..16).map(|q| if q < 8 { 1 } else { -1 }).collect()).unwrap()
    }

    #[test]
    fn pair_energies() {
        let p = weak_strong_pair(0.44, -1.0);
        assert_eq!(p.num_vars(), 16);
        assert_eq!(p.terms().len(), 36 + 16);
        let ground = p.evaluate_energy(&SpinConfig::uniform(16, -1)).unwrap();
        let false_min = p.evaluate_energy(&left_up_right_down()).unwrap();
        assert!((ground + 40.48).abs() < ENERGY_TOL);
        assert!((false_min + 39.52).abs() < ENERGY_TOL);
        assert!((false_min - ground - 0.96).abs() < ENERGY_TOL);
    }

    #[test]
    fn pair_ground_state_by_enumeration() {
        let gs = brute_force_ground_state(&weak_strong_pair(0.44, -1.0)).unwrap();
        assert_eq!(gs.config, SpinConfig::uniform(16, -1));
        assert!((gs.energy + 40.48).abs() < ENERGY_TOL);
        assert_eq!(gs.degeneracy, 1);
    }

    #[test]
    fn pair_bifurcates_at_one_half() {
        for i in 1..10 {
            let h1 = i as f64 / 10.0;
            if i == 5 {
                continue;
            }
            let gs = brute_force_ground_state(&weak_strong_pair(h1, -1.0)).unwrap();
            let expected = if h1 < 0.5 { SpinConfig::uniform(16, -1) } else { left_up_right_down() };
            assert_eq!(gs.config, expected, "h1 = {h1}");
        }
    }

    #[test]
    fn single_domino_network_is_the_pair() {
        let g = ChimeraGraph::intact(1, 2).unwrap();
        for pattern in [PairingPattern::Domino, PairingPattern::MirroredDomino] {
            let net = weak_strong_network(&g, pattern, 99).unwrap();
            assert_eq!(net.problem, weak_strong_pair(0.44, -1.0));
            assert!(net.strong_couplings.is_empty());
            assert_eq!(net.reference, SpinConfig::uniform(16, -1));
            assert!((net.reference_energy + 40.48).abs() < ENERGY_TOL);
        }
    }

    #[test]
    fn two_by_two_has_one_strong_group() {
        let g = ChimeraGraph::intact(2, 2).unwrap();
        for seed in 0..8 {
            let net = weak_strong_network(&g, PairingPattern::Domino, seed).unwrap();
            assert_eq!(net.dominoes.len(), 2);
            assert_eq!(net.strong_couplings.len(), 1);
            let sign = net.strong_couplings[0].2;
            let strong_terms = net
                .problem
                .terms()
                .iter()
                .filter(|t| t.vars.len() == 2 && t.vars[0] % 16 >= 8 && t.vars[1] - t.vars[0] == 16)
                .count();
            assert_eq!(strong_terms, 4);
            assert!(sign == 1.0 || sign == -1.0);
        }
    }

    #[test]
    fn strong_group_count_matches_adjacency() {
        let g = ChimeraGraph::intact(3, 4).unwrap();
        let plain = weak_strong_network(&g, PairingPattern::Domino, 5).unwrap();
        // strong cells in columns 1 and 3, three rows: 2 vertical pairs per column
        assert_eq!(plain.strong_couplings.len(), 4);
        let mirrored = weak_strong_network(&g, PairingPattern::MirroredDomino, 5).unwrap();
        // strong cells in columns 1 and 2: 4 vertical + 3 horizontal
        assert_eq!(mirrored.strong_couplings.len(), 7);
        for net in [plain, mirrored] {
            assert!(net.problem.improving_flip(&net.reference).is_none());
        }
    }

    #[test]
    fn broken_qubits_drop_terms() {
        let g = ChimeraGraph::new(1, 2, [3, 12].into()).unwrap();
        let net = weak_strong_network(&g, PairingPattern::Domino, 0).unwrap();
        assert!(net.problem.terms().iter().all(|t| !t.vars.contains(&3) && !t.vars.contains(&12)));
        assert!(net.problem.improving_flip(&net.reference).is_none());
    }

    #[test]
    fn no_domino_in_single_column() {
        let g = ChimeraGraph::intact(3, 1).unwrap();
        assert!(matches!(
            weak_strong_network(&g, PairingPattern::Domino, 0),
            Err(ProblemError::NoDomino)
        ));
    }

    #[test]
    fn random_complete_graph() {
        let p = random_ising(&GraphModel::Complete { n: 4 }, &[1.0, -1.0], 1).unwrap();
        assert_eq!(p.terms().len(), 6);
        assert!(p.terms().iter().all(|t| t.vars.len() == 2 && t.coeff.abs() == 1.0));
        assert_eq!(p, random_ising(&GraphModel::Complete { n: 4 }, &[1.0, -1.0], 1).unwrap());
        assert_ne!(p, random_ising(&GraphModel::Complete { n: 4 }, &[1.0, -1.0], 2).unwrap());
    }

    #[test]
    fn random_chimera_is_brute_forceable() {
        let g = ChimeraGraph::intact(1, 2).unwrap();
        let p = random_ising(&GraphModel::Chimera(g), &[1.0, -1.0], 3).unwrap();
        assert_eq!(p.terms().len(), 36);
        let gs = brute_force_ground_state(&p).unwrap();
        assert!(gs.degeneracy >= 2);
        assert!(p.improving_flip(&gs.config).is_none());
    }
}
