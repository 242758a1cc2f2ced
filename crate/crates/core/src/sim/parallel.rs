use alloc::vec::Vec;
use std::thread;

use super::run::{ensemble_initial, ensemble_member, Ensemble, EnsembleBuilder, SimError, Trajectory};
use super::{derive_seed, ConfigError, SimConfig};

/// [`monte_carlo`](super::monte_carlo) with the members spread over
/// `threads` scoped workers. Members and reduction order are the same, so
/// the result is identical for any thread count.
pub fn monte_carlo_parallel(
    config: &SimConfig,
    runs: usize,
    master_seed: u64,
    threads: usize,
) -> Result<Ensemble, SimError> {
    if runs == 0 {
        return Err(ConfigError::new("runs", "must be at least 1").into());
    }
    let x0 = ensemble_initial(config, master_seed)?;
    let threads = threads.clamp(1, runs);
    let chunk = runs.div_ceil(threads);
    let chunks: Vec<Result<Vec<Trajectory>, SimError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let x0 = &x0;
                let range = (w * chunk).min(runs)..((w + 1) * chunk).min(runs);
                s.spawn(move || range.map(|k| ensemble_member(config, x0, master_seed, k)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("ensemble worker panicked")).collect()
    });
    let mut builder = EnsembleBuilder::new();
    let mut k = 0;
    for chunk in chunks {
        for t in chunk? {
            builder.push(k, derive_seed(master_seed, k as u64), &t);
            k += 1;
        }
    }
    Ok(builder.finish())
}
