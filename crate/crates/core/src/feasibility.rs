//! Feasibility of the transportation problem and the face of the flow
//! polytope that carries a given pair of marginals.

use petgraph::algo::{dinics, tarjan_scc};
use petgraph::graph::{DiGraph, EdgeIndex, NodeIndex};
use petgraph::unionfind::UnionFind;

use crate::table::{Cap, CapMatrix, Marginals};

/// True iff a real matrix `0 <= z_ij <= k_ij` with row sums `alpha` and
/// column sums `beta` exists.
///
/// Decided by a max-flow computation. Shapes must agree.
pub fn feasible(marginals: &Marginals, k: &CapMatrix) -> bool {
    feasible_table(marginals, k).is_some()
}

/// An integer table with the given marginals and `z_ij <= k_ij`, if any
/// exists. Returned in row-major order.
pub fn feasible_table(marginals: &Marginals, k: &CapMatrix) -> Option<Vec<u64>> {
    let (m, n) = (marginals.m(), marginals.n());
    assert_eq!((m, n), (k.rows(), k.cols()), "shape mismatch");
    let total = marginals.total();
    let mut g: DiGraph<(), u64> = DiGraph::with_capacity(m + n + 2, m * n + m + n);
    let source = g.add_node(());
    let sink = g.add_node(());
    let rows: Vec<NodeIndex> = (0..m).map(|_| g.add_node(())).collect();
    let cols: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for (i, &a) in marginals.alpha().iter().enumerate() {
        g.add_edge(source, rows[i], a);
    }
    for (j, &b) in marginals.beta().iter().enumerate() {
        g.add_edge(cols[j], sink, b);
    }
    let mut cell_edges: Vec<Option<EdgeIndex>> = Vec::with_capacity(m * n);
    for (i, &row) in rows.iter().enumerate() {
        for (j, &col) in cols.iter().enumerate() {
            let cap = k.get(i, j).min_with(total);
            cell_edges.push((cap > 0).then(|| g.add_edge(row, col, cap)));
        }
    }
    let (flow, flows) = dinics(&g, source, sink);
    if flow != total {
        return None;
    }
    Some(cell_edges.iter().map(|e| e.map_or(0, |e| flows[e.index()])).collect())
}

/// A connected block of free cells, solved independently.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Free cells `(i, j)` in original indices.
    pub cells: Vec<(usize, usize)>,
}

/// Which cells are pinned to a bound on every feasible table, and how the
/// remaining cells split into independent blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub m: usize,
    pub n: usize,
    /// `Some(v)` for a cell whose value is `v` on every feasible table with
    /// `v` equal to 0 or to the cell bound.
    pub forced: Vec<Option<u64>>,
    /// Row and column targets left for the free cells.
    pub residual_alpha: Vec<u64>,
    pub residual_beta: Vec<u64>,
    pub components: Vec<Component>,
}

impl Face {
    pub fn forced(&self, i: usize, j: usize) -> Option<u64> {
        self.forced[i * self.n + j]
    }

    /// Number of cells that sit on a bound although the bound is positive,
    /// i.e. the target lies on the boundary of the Newton polytope.
    pub fn boundary_cells(&self, k: &CapMatrix) -> usize {
        (0..self.m * self.n)
            .filter(|&c| self.forced[c].is_some() && k.entries()[c] != Cap::Finite(0))
            .count()
    }
}

/// Face analysis, or `None` if the instance is infeasible.
///
/// Starting from one feasible table, a cell at a bound can leave it iff it
/// lies on a cycle of the residual graph, i.e. its row and column share a
/// strongly connected component.
pub fn face(marginals: &Marginals, k: &CapMatrix) -> Option<Face> {
    let z0 = feasible_table(marginals, k)?;
    let (m, n) = (marginals.m(), marginals.n());
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(m + n, 2 * m * n);
    let nodes: Vec<NodeIndex> = (0..m + n).map(|_| g.add_node(())).collect();
    for i in 0..m {
        for j in 0..n {
            let z = z0[i * n + j];
            if k.get(i, j) != Cap::Finite(z) {
                g.add_edge(nodes[i], nodes[m + j], ());
            }
            if z > 0 {
                g.add_edge(nodes[m + j], nodes[i], ());
            }
        }
    }
    let mut scc_of = vec![0usize; m + n];
    for (c, comp) in tarjan_scc(&g).iter().enumerate() {
        for v in comp {
            scc_of[v.index()] = c;
        }
    }
    let mut forced = vec![None; m * n];
    let mut residual_alpha = marginals.alpha().to_vec();
    let mut residual_beta = marginals.beta().to_vec();
    let mut uf = UnionFind::<usize>::new(m + n);
    let mut free = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let z = z0[i * n + j];
            let at_bound = z == 0 || k.get(i, j) == Cap::Finite(z);
            if at_bound && scc_of[i] != scc_of[m + j] {
                forced[i * n + j] = Some(z);
                residual_alpha[i] -= z;
                residual_beta[j] -= z;
            } else {
                free.push((i, j));
                uf.union(i, m + j);
            }
        }
    }
    let mut components: Vec<Component> = Vec::new();
    let mut comp_of_root = std::collections::HashMap::new();
    for &(i, j) in &free {
        let root = uf.find(i);
        let idx = *comp_of_root.entry(root).or_insert_with(|| {
            components.push(Component { rows: Vec::new(), cols: Vec::new(), cells: Vec::new() });
            components.len() - 1
        });
        components[idx].cells.push((i, j));
    }
    for comp in &mut components {
        let mut rows: Vec<usize> = comp.cells.iter().map(|c| c.0).collect();
        let mut cols: Vec<usize> = comp.cells.iter().map(|c| c.1).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        comp.rows = rows;
        comp.cols = cols;
    }
    Some(Face { m, n, forced, residual_alpha, residual_beta, components })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marg(a: &[u64], b: &[u64]) -> Marginals {
        Marginals::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert!(feasible(&marg(&[2, 2], &[2, 2]), &CapMatrix::infinite(2, 2)));
        assert!(!feasible(&marg(&[3, 0], &[1, 2]), &CapMatrix::ones(2, 2)));
        let id = CapMatrix::from_finite(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(feasible(&marg(&[1, 1], &[1, 1]), &id));
    }

    #[test]
    fn interior_target_has_no_forced_cells() {
        let f = face(&marg(&[2, 2], &[2, 2]), &CapMatrix::infinite(2, 2)).unwrap();
        assert!(f.forced.iter().all(|c| c.is_none()));
        assert_eq!(f.components.len(), 1);
    }

    #[test]
    fn saturated_binary_table_is_fully_forced() {
        // Only the all-ones table fits.
        let f = face(&marg(&[2, 2], &[2, 2]), &CapMatrix::ones(2, 2)).unwrap();
        assert!(f.forced.iter().all(|c| *c == Some(1)));
        assert!(f.components.is_empty());
    }

    #[test]
    fn zero_row_splits_off() {
        let f = face(&marg(&[0, 3], &[1, 2]), &CapMatrix::infinite(2, 2)).unwrap();
        assert_eq!(f.forced(0, 0), Some(0));
        assert_eq!(f.forced(0, 1), Some(0));
        // Row 2 is then determined: (1, 2).
        assert_eq!(f.forced(1, 0), None);
        assert!(f.components.iter().all(|c| c.rows == vec![1]));
    }
}
