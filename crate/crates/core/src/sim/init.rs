use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal};

use super::ConfigError;
use crate::opinion::OpinionVector;

pub const DEFAULT_LOGNORMAL_S: f64 = 0.25;

/// Distribution of `x(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "lowercase"))]
pub enum InitialProfileSpec {
    /// Uniform on `[0, 1]`.
    Uniform01,
    /// Lognormal with the given mean; `s` is the log-scale deviation.
    LogNormal {
        mean: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_s"))]
        s: f64,
    },
    Beta { a: f64, b: f64 },
}

#[cfg(feature = "serde")]
fn default_s() -> f64 {
    DEFAULT_LOGNORMAL_S
}

impl Default for InitialProfileSpec {
    fn default() -> Self {
        InitialProfileSpec::LogNormal { mean: 3.0, s: DEFAULT_LOGNORMAL_S }
    }
}

impl InitialProfileSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            InitialProfileSpec::Uniform01 => Ok(()),
            InitialProfileSpec::LogNormal { mean, s } => {
                if !positive(mean) {
                    return Err(ConfigError::new("init.mean", "must be positive"));
                }
                if !(s.is_finite() && s >= 0.0) {
                    return Err(ConfigError::new("init.s", "must be nonnegative"));
                }
                Ok(())
            }
            InitialProfileSpec::Beta { a, b } => {
                if !positive(a) {
                    return Err(ConfigError::new("init.a", "must be positive"));
                }
                if !positive(b) {
                    return Err(ConfigError::new("init.b", "must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Draws `n` initial opinions; the same seed always gives the same vector.
pub fn sample_initial(spec: &InitialProfileSpec, n: usize, seed: u64) -> Result<OpinionVector, ConfigError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = match *spec {
        InitialProfileSpec::Uniform01 => (0..n).map(|_| rng.random::<f64>()).collect(),
        InitialProfileSpec::LogNormal { mean, s } => {
            // E[exp(N(mu, s^2))] = exp(mu + s^2 / 2)
            let mu = libm::log(mean) - 0.5 * s * s;
            let d = LogNormal::new(mu, s).map_err(|_| ConfigError::new("init.s", "must be nonnegative"))?;
            d.sample_iter(&mut rng).take(n).collect()
        }
        InitialProfileSpec::Beta { a, b } => {
            let d = Beta::new(a, b).map_err(|_| ConfigError::new("init", "invalid beta shape"))?;
            d.sample_iter(&mut rng).take(n).collect()
        }
    };
    Ok(OpinionVector::new(values).expect("samplers produce finite values"))
}
