use alloc::vec::Vec;

use super::{
    bc_matrix, cluster_count, cluster_opinions, pool, EpsilonProfile, OpinionError, OpinionPattern,
    OpinionVector, StabilityReport,
};
use crate::matrix::ConfidenceMatrix;

/// Stopping rule for pooling iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLimits {
    pub max_t: usize,
    /// Stable once the largest per-agent change drops below this.
    pub tol: f64,
    /// Gap that separates two opinion clusters.
    pub cluster_tol: f64,
}

impl Default for IterationLimits {
    fn default() -> Self {
        Self { max_t: 10_000, tol: 1e-9, cluster_tol: 1e-6 }
    }
}

/// Opinion vectors `x(0), x(1), ...` of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionTrajectory {
    pub states: Vec<OpinionVector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub t: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub clusters: usize,
}

impl OpinionTrajectory {
    pub fn last(&self) -> &OpinionVector {
        self.states.last().expect("trajectory holds at least x(0)")
    }

    /// Number of pooling steps taken.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn summary(&self, cluster_tol: f64) -> Vec<SummaryRow> {
        self.states
            .iter()
            .enumerate()
            .map(|(t, x)| SummaryRow {
                t,
                min: x.min(),
                max: x.max(),
                mean: x.mean(),
                clusters: cluster_count(x, cluster_tol),
            })
            .collect()
    }
}

fn drive<F>(
    x0: &OpinionVector,
    limits: IterationLimits,
    mut step: F,
) -> Result<(OpinionTrajectory, StabilityReport), OpinionError>
where
    F: FnMut(&OpinionVector) -> Result<OpinionVector, OpinionError>,
{
    let mut states = alloc::vec![x0.clone()];
    let mut t_stable = None;
    for t in 1..=limits.max_t {
        let prev = states.last().expect("non-empty");
        let next = step(prev)?;
        let change = next.max_abs_diff(prev);
        states.push(next);
        if change < limits.tol {
            t_stable = Some(t);
            break;
        }
    }
    let converged = t_stable.is_some();
    let last = states.last().expect("non-empty");
    let clusters = cluster_opinions(last, limits.cluster_tol);
    let pattern = OpinionPattern::from_cluster_count(clusters.len(), converged);
    let report = StabilityReport { converged, t_stable, clusters, pattern };
    Ok((OpinionTrajectory { states }, report))
}

/// DeGroot pooling with a fixed matrix, `x(t+1) = A x(t)`.
pub fn iterate_homogeneous(
    matrix: &ConfidenceMatrix,
    x0: &OpinionVector,
    limits: IterationLimits,
) -> Result<(OpinionTrajectory, StabilityReport), OpinionError> {
    if x0.len() != matrix.n() {
        return Err(OpinionError::DimensionMismatch { expected: matrix.n(), found: x0.len() });
    }
    drive(x0, limits, |x| pool(matrix, x))
}

/// The bounded-confidence process: the weights are rebuilt from the current
/// opinions before every pooling step.
pub fn iterate_bounded_confidence(
    x0: &OpinionVector,
    eps: &EpsilonProfile,
    limits: IterationLimits,
) -> Result<(OpinionTrajectory, StabilityReport), OpinionError> {
    if eps.len() != x0.len() {
        return Err(OpinionError::DimensionMismatch { expected: x0.len(), found: eps.len() });
    }
    drive(x0, limits, |x| pool(&bc_matrix(x, eps)?, x))
}
