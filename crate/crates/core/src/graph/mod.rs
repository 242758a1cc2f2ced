//! Directed confidence graphs and the nonnegative-matrix structure derived
//! from them: strongly connected components, condensation, the
//! essential/inessential split of agents and the Gantmacher block form.

mod classify;
mod gantmacher;
mod pattern;
mod scc;

pub use classify::{classify, classify_graph, AgentClassification, AgentRole, Mindedness};
pub use gantmacher::{gantmacher_form, GantmacherForm, GantmacherViolation};
pub use pattern::{is_irreducible, is_primitive, is_strongly_connected, period};
pub use scc::{condensation, scc, CondensationDag, SccPartition};

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;

/// Weights at or below this value do not induce an edge. Blending leaves
/// geometric residues that would otherwise keep the graph spuriously
/// connected long after a link has been abandoned.
pub const POSITIVE_WEIGHT_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({from}, {to}) references a vertex outside 0..{n}")]
    VertexOutOfRange { from: usize, to: usize, n: usize },
    #[error("partition is inconsistent with the graph: {0}")]
    InconsistentPartition(&'static str),
}

/// A simple digraph on `0..n`; edge `(i, j)` means `i` places positive
/// confidence on `j`. Successor lists are sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    successors: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self { successors: vec![Vec::new(); n] }
    }

    /// Duplicate edges collapse into one.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(GraphError::VertexOutOfRange { from, to, n });
            }
            g.successors[from].push(to);
        }
        for s in &mut g.successors {
            s.sort_unstable();
            s.dedup();
        }
        Ok(g)
    }

    /// The positivity pattern of `matrix`: edge `(i, j)` iff `w_ij > threshold`.
    pub fn from_matrix(matrix: &Matrix, threshold: f64) -> Self {
        let successors = matrix
            .rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(_, &w)| w > threshold)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self { successors }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.successors.len()
    }

    #[inline]
    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.successors[i].binary_search(&j).is_ok()
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.has_edge(i, i)
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    /// Edges reversed.
    pub fn transpose(&self) -> Self {
        let mut t = Self::empty(self.n());
        for (i, j) in self.edges() {
            t.successors[j].push(i);
        }
        // pushes arrive in increasing i, so lists are already sorted
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_collapse_and_bounds_are_checked() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (0, 1), (2, 0)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        assert_eq!(
            DirectedGraph::from_edges(2, [(0, 2)]),
            Err(GraphError::VertexOutOfRange { from: 0, to: 2, n: 2 })
        );
    }

    #[test]
    fn threshold_drops_residual_weights() {
        let m = Matrix::from_rows(&[[1.0 - 1e-16, 1e-16], [0.5, 0.5]]).unwrap();
        let g = DirectedGraph::from_matrix(&m, POSITIVE_WEIGHT_THRESHOLD);
        assert_eq!(g.successors(0), &[0]);
        assert_eq!(g.successors(1), &[0, 1]);
        let loose = DirectedGraph::from_matrix(&m, 0.0);
        assert_eq!(loose.successors(0), &[0, 1]);
    }

    #[test]
    fn transpose_reverses() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (2, 1), (1, 0)]).unwrap();
        let t = g.transpose();
        assert_eq!(t.successors(1), &[0, 2]);
        assert_eq!(t.successors(0), &[1]);
    }
}
