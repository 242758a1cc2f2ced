use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{gantmacher_form, is_primitive, POSITIVE_WEIGHT_THRESHOLD};
use crate::matrix::Matrix;

/// Every pair of agents trusts at least one common agent `k`.
pub fn degroot_consensus_condition(matrix: &Matrix) -> bool {
    let pattern = BitMatrix::from_matrix(matrix);
    let rows = &pattern.rows;
    (0..rows.len()).all(|i| (i + 1..rows.len()).all(|j| pattern.rows_intersect(i, j)))
}

/// Earliest `t` in `1..=t_max` for which `A^t` has a strictly positive
/// column, found on the positivity pattern alone.
pub fn berger_positive_column_condition(matrix: &Matrix, t_max: usize) -> Option<usize> {
    let base = BitMatrix::from_matrix(matrix);
    if base.n == 0 {
        return None;
    }
    let mut power = base.clone();
    for t in 1..=t_max {
        if power.has_full_column() {
            return Some(t);
        }
        if t < t_max {
            power = power.mul(&base);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceVerdict {
    /// `A^t x` converges for every `x`.
    pub limit_exists: bool,
    /// The limit is a consensus for every `x`.
    pub consensus: bool,
    /// Every diagonal block of the Gantmacher form is primitive, essential or not.
    pub all_blocks_primitive: bool,
    pub g: usize,
    pub inessential_classes: usize,
}

/// Convergence of homogeneous pooling read off the Gantmacher form.
///
/// Only the essential blocks govern the limit: an inessential block leaks
/// weight to earlier blocks, so its spectral radius is below one and its own
/// periodicity dies out. Likewise inessential classes do not prevent
/// consensus, they inherit the single leader class's value.
pub fn gantmacher_convergence_check(matrix: &Matrix) -> ConvergenceVerdict {
    let form = gantmacher_form(matrix);
    let permuted = form.permute(matrix);
    let primitive: Vec<bool> =
        (0..form.blocks.len()).map(|k| is_primitive(&form.diagonal_block(&permuted, k))).collect();
    let limit_exists = matrix.n() > 0 && primitive[..form.g].iter().all(|&p| p);
    ConvergenceVerdict {
        limit_exists,
        consensus: limit_exists && form.g == 1,
        all_blocks_primitive: matrix.n() > 0 && primitive.iter().all(|&p| p),
        g: form.g,
        inessential_classes: form.blocks.len() - form.g,
    }
}

/// Boolean matrix with one bit row per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitMatrix {
    fn from_matrix(m: &Matrix) -> Self {
        let n = m.n();
        let words = n.div_ceil(64);
        let rows = m
            .rows()
            .map(|r| {
                let mut bits = vec![0u64; words];
                for (j, &w) in r.iter().enumerate() {
                    if w > POSITIVE_WEIGHT_THRESHOLD {
                        bits[j / 64] |= 1 << (j % 64);
                    }
                }
                bits
            })
            .collect();
        Self { n, words, rows }
    }

    fn rows_intersect(&self, i: usize, j: usize) -> bool {
        self.rows[i].iter().zip(&self.rows[j]).any(|(a, b)| a & b != 0)
    }

    fn mul(&self, other: &BitMatrix) -> BitMatrix {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = vec![0u64; self.words];
                for k in 0..self.n {
                    if r[k / 64] >> (k % 64) & 1 == 1 {
                        for (o, b) in out.iter_mut().zip(&other.rows[k]) {
                            *o |= b;
                        }
                    }
                }
                out
            })
            .collect();
        BitMatrix { n: self.n, words: self.words, rows }
    }

    fn has_full_column(&self) -> bool {
        let mut all = vec![u64::MAX; self.words];
        for r in &self.rows {
            for (a, b) in all.iter_mut().zip(r) {
                *a &= b;
            }
        }
        all.iter().any(|&w| w != 0)
    }
}
