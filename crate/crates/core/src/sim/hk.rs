//! Standalone bounded-confidence experiments on opinions in `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use super::{derive_seed, sample_initial, ConfigError, InitialProfileSpec};
use crate::opinion::{
    cluster_count, iterate_bounded_confidence, EpsilonProfile, IterationLimits, StabilityReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HkRun {
    pub seed: u64,
    pub report: StabilityReport,
    /// Cluster count of `x(0), x(1), ...`.
    pub cluster_counts: Vec<usize>,
    pub final_opinions: Vec<f64>,
}

/// One bounded-confidence run from `sample_initial(init, n, seed)`.
pub fn hk_run(
    n: usize,
    epsilon: f64,
    init: &InitialProfileSpec,
    seed: u64,
    limits: IterationLimits,
) -> Result<HkRun, ConfigError> {
    if n == 0 {
        return Err(ConfigError::new("n", "must be at least 1"));
    }
    let eps = EpsilonProfile::uniform(n, epsilon).map_err(|_| ConfigError::new("epsilon", "must be >= 0"))?;
    let x0 = sample_initial(init, n, seed)?;
    let (traj, report) = iterate_bounded_confidence(&x0, &eps, limits).expect("dimensions agree");
    let cluster_counts = traj.states.iter().map(|x| cluster_count(x, limits.cluster_tol)).collect();
    let final_opinions = traj.last().to_vec();
    Ok(HkRun { seed, report, cluster_counts, final_opinions })
}

/// Relative frequencies of `values` in `bins` equal bins over `[0, 1]`.
/// Values outside the interval go to the nearest edge bin.
pub fn relative_frequencies(values: &[f64], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    if values.is_empty() || bins == 0 {
        return h;
    }
    let w = 1.0 / values.len() as f64;
    for &v in values {
        let b = ((v * bins as f64) as isize).clamp(0, bins as isize - 1) as usize;
        h[b] += w;
    }
    h
}

/// Per-run relative frequencies averaged over runs.
pub fn opinion_histogram(final_opinions: &[Vec<f64>], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    if final_opinions.is_empty() {
        return h;
    }
    for run in final_opinions {
        for (acc, f) in h.iter_mut().zip(relative_frequencies(run, bins)) {
            *acc += f;
        }
    }
    let k = final_opinions.len() as f64;
    h.iter_mut().for_each(|v| *v /= k);
    h
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HkSweepRow {
    pub epsilon: f64,
    pub runs: usize,
    pub histogram: Vec<f64>,
    /// Share of runs ending in a single cluster.
    pub consensus_share: f64,
    pub mean_final_clusters: f64,
    pub mean_t_stable: Option<f64>,
}

/// Runs `runs` seeds for each radius; run `k` draws `x(0)` with
/// `derive_seed(master_seed, k)`, so every radius sees the same profiles.
pub fn hk_sweep(
    epsilons: &[f64],
    n: usize,
    init: &InitialProfileSpec,
    runs: usize,
    master_seed: u64,
    limits: IterationLimits,
    bins: usize,
) -> Result<Vec<HkSweepRow>, ConfigError> {
    if runs == 0 {
        return Err(ConfigError::new("runs", "must be at least 1"));
    }
    epsilons
        .iter()
        .map(|&eps| {
            let results: Vec<HkRun> = (0..runs)
                .map(|k| hk_run(n, eps, init, derive_seed(master_seed, k as u64), limits))
                .collect::<Result<_, _>>()?;
            Ok(summarize(eps, &results, bins))
        })
        .collect()
}

pub fn summarize(epsilon: f64, results: &[HkRun], bins: usize) -> HkSweepRow {
    let finals: Vec<Vec<f64>> = results.iter().map(|r| r.final_opinions.clone()).collect();
    let k = results.len() as f64;
    let consensus = results.iter().filter(|r| r.report.clusters.len() == 1).count() as f64;
    let clusters = results.iter().map(|r| r.report.clusters.len() as f64).sum::<f64>();
    let stable: Vec<f64> = results.iter().filter_map(|r| r.report.t_stable.map(|t| t as f64)).collect();
    HkSweepRow {
        epsilon,
        runs: results.len(),
        histogram: opinion_histogram(&finals, bins),
        consensus_share: consensus / k,
        mean_final_clusters: clusters / k,
        mean_t_stable: (!stable.is_empty()).then(|| stable.iter().sum::<f64>() / stable.len() as f64),
    }
}
