use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::pattern::is_strongly_connected;
use super::{scc, DirectedGraph, POSITIVE_WEIGHT_THRESHOLD};
use crate::matrix::Matrix;

/// A reordering of agents that brings a nonnegative matrix into lower
/// block-triangular form with irreducible diagonal blocks, the `g` essential
/// blocks first.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GantmacherForm {
    /// `permutation[k]` is the original agent placed at position `k`.
    pub permutation: Vec<usize>,
    /// Contiguous ranges of permuted positions, one per diagonal block.
    pub blocks: Vec<Range<usize>>,
    /// Number of leading essential blocks.
    pub g: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GantmacherViolation {
    #[error("order is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("blocks do not tile 0..{0}")]
    BadBlocks(usize),
    #[error("essential block {block} couples to position {col}")]
    EssentialCoupling { block: usize, col: usize },
    #[error("block {block} has positive entries above the diagonal")]
    AboveDiagonal { block: usize },
    #[error("inessential block {block} has no weight on earlier blocks")]
    DetachedInessential { block: usize },
    #[error("diagonal block {block} is reducible")]
    ReducibleBlock { block: usize },
}

pub fn gantmacher_form(matrix: &Matrix) -> GantmacherForm {
    GantmacherForm::from_graph(&DirectedGraph::from_matrix(matrix, POSITIVE_WEIGHT_THRESHOLD))
}

impl GantmacherForm {
    pub fn from_graph(graph: &DirectedGraph) -> Self {
        let partition = scc(graph);
        let is_sink: Vec<bool> = partition
            .classes
            .iter()
            .enumerate()
            .map(|(id, members)| {
                members
                    .iter()
                    .all(|&v| graph.successors(v).iter().all(|&w| partition.class_of[w] == id))
            })
            .collect();

        let mut essential: Vec<&Vec<usize>> = partition
            .classes
            .iter()
            .zip(&is_sink)
            .filter_map(|(c, &s)| s.then_some(c))
            .collect();
        essential.sort_unstable_by_key(|c| c[0]);
        // SCC order is sinks-first, so every inessential class only
        // reaches classes placed before it.
        let inessential = partition.classes.iter().zip(&is_sink).filter_map(|(c, &s)| (!s).then_some(c));

        let mut permutation = Vec::with_capacity(graph.n());
        let mut blocks = Vec::with_capacity(partition.len());
        for class in essential.iter().copied().chain(inessential) {
            let start = permutation.len();
            permutation.extend_from_slice(class);
            blocks.push(start..permutation.len());
        }
        let g = essential.len();
        Self { permutation, blocks, g }
    }

    /// `P W P^T`.
    pub fn permute(&self, matrix: &Matrix) -> Matrix {
        matrix.permuted(&self.permutation)
    }

    /// Diagonal block `k` of the permuted matrix.
    pub fn diagonal_block(&self, permuted: &Matrix, k: usize) -> Matrix {
        let r = self.blocks[k].clone();
        let rows: Vec<Vec<f64>> = r.clone().map(|i| permuted.row(i)[r.clone()].to_vec()).collect();
        Matrix::from_rows(&rows).expect("diagonal block is square")
    }

    /// Checks the block layout against `matrix` with the given positivity
    /// threshold.
    pub fn verify(&self, matrix: &Matrix, threshold: f64) -> Result<(), GantmacherViolation> {
        let n = matrix.n();
        let mut seen = vec![false; n];
        for &v in &self.permutation {
            if v >= n || core::mem::replace(&mut seen[v], true) {
                return Err(GantmacherViolation::NotAPermutation(n));
            }
        }
        if self.permutation.len() != n {
            return Err(GantmacherViolation::NotAPermutation(n));
        }
        let mut expected_start = 0;
        for b in &self.blocks {
            if b.start != expected_start || b.end <= b.start {
                return Err(GantmacherViolation::BadBlocks(n));
            }
            expected_start = b.end;
        }
        if expected_start != n || self.g > self.blocks.len() {
            return Err(GantmacherViolation::BadBlocks(n));
        }

        let p = self.permute(matrix);
        for (k, block) in self.blocks.iter().enumerate() {
            let mut earlier = false;
            for i in block.clone() {
                for (col, &w) in p.row(i).iter().enumerate() {
                    if w <= threshold {
                        continue;
                    }
                    if k < self.g && !block.contains(&col) {
                        return Err(GantmacherViolation::EssentialCoupling { block: k, col });
                    }
                    if col >= block.end {
                        return Err(GantmacherViolation::AboveDiagonal { block: k });
                    }
                    earlier |= col < block.start;
                }
            }
            if k >= self.g && !earlier {
                return Err(GantmacherViolation::DetachedInessential { block: k });
            }
            let sub = DirectedGraph::from_matrix(&self.diagonal_block(&p, k), threshold);
            if !is_strongly_connected(&sub) {
                return Err(GantmacherViolation::ReducibleBlock { block: k });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn follower_is_placed_after_leader() {
        // agent 0 trusts agent 1; both self-trust
        let m = Matrix::from_rows(&[[0.5, 0.5], [0.0, 1.0]]).unwrap();
        let form = gantmacher_form(&m);
        assert_eq!(form.permutation, vec![1, 0]);
        assert_eq!(form.blocks, vec![0..1, 1..2]);
        assert_eq!(form.g, 1);
        form.verify(&m, POSITIVE_WEIGHT_THRESHOLD).unwrap();
    }

    #[test]
    fn strongly_connected_is_one_block() {
        let m = Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let form = gantmacher_form(&m);
        assert_eq!(form.blocks, vec![0..2]);
        assert_eq!(form.g, 1);
        form.verify(&m, POSITIVE_WEIGHT_THRESHOLD).unwrap();
    }

    #[test]
    fn identity_layout_is_accepted_when_already_in_form() {
        let m = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, 0.3, 0.4]]).unwrap();
        let identity = GantmacherForm { permutation: vec![0, 1, 2], blocks: vec![0..1, 1..2, 2..3], g: 2 };
        identity.verify(&m, POSITIVE_WEIGHT_THRESHOLD).unwrap();
        gantmacher_form(&m).verify(&m, POSITIVE_WEIGHT_THRESHOLD).unwrap();
    }

    #[test]
    fn wrong_layouts_are_caught() {
        let m = Matrix::from_rows(&[[0.5, 0.5], [0.0, 1.0]]).unwrap();
        let bad = GantmacherForm { permutation: vec![0, 1], blocks: vec![0..1, 1..2], g: 1 };
        assert!(matches!(
            bad.verify(&m, POSITIVE_WEIGHT_THRESHOLD),
            Err(GantmacherViolation::EssentialCoupling { block: 0, col: 1 })
        ));
        let merged = GantmacherForm { permutation: vec![1, 0], blocks: vec![0..2], g: 1 };
        assert!(matches!(
            merged.verify(&m, POSITIVE_WEIGHT_THRESHOLD),
            Err(GantmacherViolation::ReducibleBlock { block: 0 })
        ));
        let dup = GantmacherForm { permutation: vec![1, 1], blocks: vec![0..2], g: 1 };
        assert!(matches!(dup.verify(&m, 0.0), Err(GantmacherViolation::NotAPermutation(2))));
    }
}
