//! Experiment orchestration: configured runs, ensembles, opinion shifts and
//! return statistics.

pub mod hk;
mod init;
#[cfg(feature = "std")]
mod parallel;
pub mod presets;
mod run;
mod shift;
mod stats;

pub use init::{sample_initial, InitialProfileSpec, DEFAULT_LOGNORMAL_S};
pub use run::{
    ensemble_initial, ensemble_member, monte_carlo, run, Ensemble, EnsembleBuilder, RunSummary,
    ShiftRecord, SimError, Simulation, StepRow, Trajectory, RECOVERY_TOL,
};
#[cfg(feature = "std")]
pub use parallel::monte_carlo_parallel;
pub use shift::{
    inject_shift, shift_summary, shift_targets, ShiftSpec, ShiftSummary, ShiftTarget, DEFAULT_MAGNITUDE,
};
pub use stats::{moments, return_stats, return_stats_trimmed, returns, ReturnStats, StatsError};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{EngineSetup, NoiseMode};
use crate::market::{fundamental_price, DividendLaw, MarketParams, TargetSetReading, UpdateRule};
use crate::opinion::EpsilonProfile;

/// A configuration value that failed validation, named by its key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

impl core::error::Error for ConfigError {}

/// One value for everyone, or one per agent.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum AgentValues {
    Scalar(f64),
    PerAgent(Vec<f64>),
}

impl AgentValues {
    pub fn expand(&self, n: usize, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            AgentValues::Scalar(v) => Ok(alloc::vec![*v; n]),
            AgentValues::PerAgent(v) if v.len() == n => Ok(v.clone()),
            AgentValues::PerAgent(v) => {
                Err(ConfigError::new(key, format!("has {} entries, expected n = {n}", v.len())))
            }
        }
    }
}

impl From<f64> for AgentValues {
    fn from(v: f64) -> Self {
        AgentValues::Scalar(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    /// Bounded confidence around one's own opinion.
    Bc,
    /// Confidence in agents close to the last price.
    Pa,
    /// Confidence in agents close to the fundamental price.
    #[default]
    Fb,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bc => "bc",
            ModelKind::Pa => "pa",
            ModelKind::Fb => "fb",
        }
    }
}

impl core::str::FromStr for ModelKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "bc" => Ok(ModelKind::Bc),
            "pa" => Ok(ModelKind::Pa),
            "fb" => Ok(ModelKind::Fb),
            _ => Err(ConfigError::new("model", format!("unknown model `{s}`, expected bc, pa or fb"))),
        }
    }
}

/// A complete, self-describing run configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimConfig {
    pub n: usize,
    pub t_max: usize,
    pub model: ModelKind,
    /// Apply the PA/FB deviation test to the truster's own opinion.
    pub literal_eq: bool,
    pub market: MarketParams,
    pub alpha: AgentValues,
    /// Absolute radius for BC, relative deviation for PA and FB.
    pub epsilon: AgentValues,
    pub init: InitialProfileSpec,
    pub noise_mode: NoiseMode,
    pub dividend: DividendLaw,
    pub seed: u64,
    pub shift: Option<ShiftSpec>,
    /// Keep every opinion vector in the trajectory.
    pub record_opinions: bool,
    pub cluster_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            t_max: 200,
            model: ModelKind::Fb,
            literal_eq: false,
            market: MarketParams::default(),
            alpha: AgentValues::Scalar(0.5),
            epsilon: AgentValues::Scalar(0.05),
            init: InitialProfileSpec::default(),
            noise_mode: NoiseMode::Idiosyncratic,
            dividend: DividendLaw::Normal,
            seed: 0,
            shift: None,
            record_opinions: false,
            cluster_tol: 1e-6,
        }
    }
}

impl SimConfig {
    /// Checks every field; the error names the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::new("n", "must be at least 1"));
        }
        if self.t_max == 0 {
            return Err(ConfigError::new("t_max", "must be at least 1"));
        }
        self.market
            .validate()
            .map_err(|e| match e {
                crate::market::MarketError::InvalidParam { name, reason } => {
                    ConfigError::new(format!("market.{name}"), reason)
                }
                other => ConfigError::new("market", other.to_string()),
            })?;
        let alpha = self.alpha.expand(self.n, "alpha")?;
        if let Some(i) = alpha.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(ConfigError::new("alpha", format!("value {} is outside [0, 1]", alpha[i])));
        }
        let eps = self.epsilon.expand(self.n, "epsilon")?;
        if let Some(i) = eps.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(ConfigError::new("epsilon", format!("value {} must be finite and >= 0", eps[i])));
        }
        self.init.validate()?;
        if self.dividend == DividendLaw::LogNormal && self.market.sigma > 0.0 && self.market.y_bar <= 0.0 {
            return Err(ConfigError::new("market.y_bar", "must be positive for lognormal dividends"));
        }
        if self.model == ModelKind::Fb {
            self.fundamental_price()?;
        }
        if !(self.cluster_tol.is_finite() && self.cluster_tol >= 0.0) {
            return Err(ConfigError::new("cluster_tol", "must be finite and >= 0"));
        }
        if let Some(shift) = &self.shift {
            shift.validate(self.n, self.t_max)?;
        }
        Ok(())
    }

    /// `p*` of the configured market; must be positive for the FB rule.
    pub fn fundamental_price(&self) -> Result<f64, ConfigError> {
        let p = fundamental_price(&self.market).map_err(|e| ConfigError::new("market.r", e.to_string()))?;
        if !(p > 0.0) {
            return Err(ConfigError::new(
                "market.y_bar",
                format!("fundamental price {p} must be positive, raise y_bar above a*sigma^2*z_s"),
            ));
        }
        Ok(p)
    }

    pub fn update_rule(&self) -> Result<UpdateRule, ConfigError> {
        Ok(match self.model {
            ModelKind::Bc => UpdateRule::BoundedConfidence,
            ModelKind::Pa => UpdateRule::PriceAdaptive,
            ModelKind::Fb => UpdateRule::Fundamental { fundamental_price: self.fundamental_price()? },
        })
    }

    pub fn engine_setup(&self) -> Result<EngineSetup, ConfigError> {
        self.validate()?;
        let eps = EpsilonProfile::new(self.epsilon.expand(self.n, "epsilon")?)
            .map_err(|e| ConfigError::new("epsilon", e.to_string()))?;
        Ok(EngineSetup {
            rule: self.update_rule()?,
            reading: if self.literal_eq { TargetSetReading::Truster } else { TargetSetReading::Trustee },
            params: self.market,
            alpha: self.alpha.expand(self.n, "alpha")?,
            eps,
            noise: self.noise_mode,
            dividend: self.dividend,
            track_wealth: false,
        })
    }
}

/// Stream index used for `x(0)`; dynamics use streams `0, 1, 2, ...`.
pub const INIT_STREAM: u64 = u64::MAX;

/// Independent 64-bit seed for `stream` under `seed` (splitmix64 finalizer
/// over a golden-ratio offset).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn errors_name_the_key() {
        let c = SimConfig { alpha: AgentValues::Scalar(1.5), ..SimConfig::default() };
        assert_eq!(c.validate().unwrap_err().key, "alpha");
        let c = SimConfig { n: 0, ..SimConfig::default() };
        assert_eq!(c.validate().unwrap_err().key, "n");
        let c = SimConfig { epsilon: AgentValues::PerAgent(alloc::vec![0.1; 3]), ..SimConfig::default() };
        assert_eq!(c.validate().unwrap_err().key, "epsilon");
        let mut c = SimConfig::default();
        c.market.a = -1.0;
        assert_eq!(c.validate().unwrap_err().key, "market.a");
        let mut c = SimConfig::default();
        c.market.r = 0.0;
        assert_eq!(c.validate().unwrap_err().key, "market.r");
        c.model = ModelKind::Bc;
        c.validate().unwrap();
    }

    #[test]
    fn seeds_are_spread() {
        let a: Vec<u64> = (0..1000).map(|k| derive_seed(42, k)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_ne!(derive_seed(1, INIT_STREAM), derive_seed(1, 0));
    }
}
