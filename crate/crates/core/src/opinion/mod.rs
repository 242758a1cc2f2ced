//! Opinion pooling: DeGroot iteration with a fixed confidence matrix, the
//! bounded-confidence process, the classical convergence conditions and the
//! consensus / polarization / fragmentation taxonomy.

mod iterate;
mod theorems;

pub use iterate::{
    iterate_bounded_confidence, iterate_homogeneous, IterationLimits, OpinionTrajectory, SummaryRow,
};
pub use theorems::{
    berger_positive_column_condition, degroot_consensus_condition, gantmacher_convergence_check,
    ConvergenceVerdict,
};

use alloc::vec::Vec;
use core::ops::Deref;

use crate::matrix::{ConfidenceMatrix, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpinionError {
    #[error("opinion {index} is not finite")]
    NonFinite { index: usize },
    #[error("confidence radius {index} is negative or not finite")]
    InvalidEpsilon { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Opinions `x_i(t)` of all agents at one time step. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self, OpinionError> {
        match values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(OpinionError::NonFinite { index }),
            None => Ok(Self(values)),
        }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// `max_i |x_i - y_i|`.
    pub fn max_abs_diff(&self, other: &OpinionVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Deref for OpinionVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for OpinionVector {
    type Error = OpinionError;
    fn try_from(values: Vec<f64>) -> Result<Self, OpinionError> {
        Self::new(values)
    }
}

/// Per-agent confidence radii `eps_i >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonProfile(Vec<f64>);

impl EpsilonProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, OpinionError> {
        match values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            Some(index) => Err(OpinionError::InvalidEpsilon { index }),
            None => Ok(Self(values)),
        }
    }

    pub fn uniform(n: usize, eps: f64) -> Result<Self, OpinionError> {
        Self::new(alloc::vec![eps; n])
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

impl Deref for EpsilonProfile {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Stable opinion patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum OpinionPattern {
    /// One opinion left.
    Consensus,
    /// Exactly two opinions.
    Polarization,
    /// Three or more opinions.
    Fragmentation,
    /// No stable configuration within the step budget.
    NonConverged,
}

impl OpinionPattern {
    pub fn from_cluster_count(count: usize, converged: bool) -> Self {
        match (converged, count) {
            (false, _) => OpinionPattern::NonConverged,
            (true, 0 | 1) => OpinionPattern::Consensus,
            (true, 2) => OpinionPattern::Polarization,
            (true, _) => OpinionPattern::Fragmentation,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpinionPattern::Consensus => "consensus",
            OpinionPattern::Polarization => "polarization",
            OpinionPattern::Fragmentation => "fragmentation",
            OpinionPattern::NonConverged => "non-converged",
        }
    }
}

/// Agents sharing (within tolerance) one opinion.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OpinionCluster {
    /// Mean opinion of the members.
    pub value: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StabilityReport {
    pub converged: bool,
    /// First step `t` with `max_i |x_i(t) - x_i(t-1)| < tol`.
    pub t_stable: Option<usize>,
    pub clusters: Vec<OpinionCluster>,
    pub pattern: OpinionPattern,
}

/// Groups opinions by scanning them in sorted order and cutting wherever
/// two neighbours are more than `cluster_tol` apart. Clusters come out in
/// increasing opinion order.
pub fn cluster_opinions(x: &[f64], cluster_tol: f64) -> Vec<OpinionCluster> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));

    let mut clusters: Vec<OpinionCluster> = Vec::new();
    let mut prev: Option<f64> = None;
    for &i in &order {
        match (prev, clusters.last_mut()) {
            (Some(p), Some(c)) if x[i] - p <= cluster_tol => c.members.push(i),
            _ => clusters.push(OpinionCluster { value: 0.0, members: alloc::vec![i] }),
        }
        prev = Some(x[i]);
    }
    for c in &mut clusters {
        c.value = c.members.iter().map(|&i| x[i]).sum::<f64>() / c.members.len() as f64;
        c.members.sort_unstable();
    }
    clusters
}

/// Number of clusters without building member lists.
pub fn cluster_count(x: &[f64], cluster_tol: f64) -> usize {
    if x.is_empty() {
        return 0;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > cluster_tol).count()
}

/// One pooling step `x <- A x`.
pub fn pool(matrix: &ConfidenceMatrix, x: &OpinionVector) -> Result<OpinionVector, OpinionError> {
    let n = matrix.n();
    if x.len() != n {
        return Err(OpinionError::DimensionMismatch { expected: n, found: x.len() });
    }
    let out = matrix
        .as_matrix()
        .mul_vec(x)
        .expect("dimensions checked above");
    Ok(OpinionVector(out))
}

/// Bounded-confidence weights: agent `i` spreads its confidence uniformly
/// over `{j : |x_i - x_j| <= eps_i}`, a set that always contains `i`.
pub fn bc_matrix(x: &OpinionVector, eps: &EpsilonProfile) -> Result<ConfidenceMatrix, OpinionError> {
    let n = x.len();
    if eps.len() != n {
        return Err(OpinionError::DimensionMismatch { expected: n, found: eps.len() });
    }
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        let xi = x[i];
        let e = eps[i];
        let row = m.row_mut(i);
        let mut count = 0usize;
        for (w, &xj) in row.iter_mut().zip(x.iter()) {
            if (xi - xj).abs() <= e {
                *w = 1.0;
                count += 1;
            }
        }
        let share = 1.0 / count as f64;
        for w in row.iter_mut().filter(|w| **w > 0.0) {
            *w = share;
        }
    }
    Ok(ConfidenceMatrix::from_matrix_unchecked(m))
}
