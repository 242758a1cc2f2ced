//! JSON configuration files, presets and command-line overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use confnet_core::sim::presets::{self, NamedConfig, Preset};
use confnet_core::sim::{AgentValues, ModelKind, SimConfig};
use confnet_core::NoiseMode;
use serde_json::{Map, Value};

use crate::error::CliError;

/// A configuration file: every `SimConfig` key, plus `out_dir` and `preset`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub sim: SimConfig,
    pub out_dir: Option<PathBuf>,
    pub preset: Option<String>,
}

const CLI_KEYS: [&str; 2] = ["out_dir", "preset"];

pub fn parse_config(text: &str) -> Result<CliConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("config is not valid JSON: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::config("config must be a JSON object"));
    };
    let out_dir = take_string(&mut map, "out_dir")?.map(PathBuf::from);
    let preset = take_string(&mut map, "preset")?;
    if preset.is_some() {
        if let Some(key) = map.keys().next() {
            return Err(CliError::config(format!(
                "invalid `{key}`: a preset config may only set {}",
                CLI_KEYS.join(" and ")
            )));
        }
    }
    let sim: SimConfig = serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::config(format!("invalid config: {}", e.inner()))
        } else {
            CliError::config(format!("invalid `{path}`: {}", e.inner()))
        }
    })?;
    Ok(CliConfig { sim, out_dir, preset })
}

fn take_string(map: &mut Map<String, Value>, key: &str) -> Result<Option<String>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(CliError::config(format!("invalid `{key}`: expected a string"))),
    }
}

pub fn read_config(path: &Path) -> Result<CliConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Idiosyncratic,
    Common,
}

impl From<NoiseArg> for NoiseMode {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Idiosyncratic => NoiseMode::Idiosyncratic,
            NoiseArg::Common => NoiseMode::Common,
        }
    }
}

/// Flags shared by `run` and `montecarlo`.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named experiment; see `confnet presets`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence radius for every agent.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Update propensity for every agent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dividend standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Test the truster's own opinion in the PA / FB rule.
    #[arg(long)]
    pub literal_eq: bool,
    #[arg(long, value_enum)]
    pub noise_mode: Option<NoiseArg>,
}

impl SimArgs {
    pub fn apply(&self, c: &mut SimConfig) {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(e) = self.epsilon {
            c.epsilon = AgentValues::Scalar(e);
        }
        if let Some(a) = self.alpha {
            c.alpha = AgentValues::Scalar(a);
        }
        if let Some(s) = self.sigma {
            c.market.sigma = s;
        }
        if let Some(m) = self.model {
            c.model = m;
        }
        if self.literal_eq {
            c.literal_eq = true;
        }
        if let Some(n) = self.noise_mode {
            c.noise_mode = n.into();
        }
    }
}

/// Validated configs to run, and where to write.
#[derive(Debug, Clone)]
pub struct Plan {
    pub configs: Vec<NamedConfig>,
    pub out_dir: PathBuf,
}

pub const DEFAULT_OUT_DIR: &str = "confnet-out";

pub fn plan(args: &SimArgs) -> Result<Plan, CliError> {
    let file = args.config.as_deref().map(read_config).transpose()?;
    let preset_name = args.preset.clone().or_else(|| file.as_ref().and_then(|f| f.preset.clone()));
    let mut configs = match (&preset_name, &file) {
        (Some(name), _) => match presets::preset(name) {
            Some(Preset::Sim(list)) => list,
            Some(Preset::Hk(_)) => {
                return Err(CliError::config(format!("invalid `preset`: `{name}` is a bounded-confidence sweep, use `confnet hk`")))
            }
            None => {
                return Err(CliError::config(format!(
                    "invalid `preset`: unknown preset `{name}`, expected one of {}",
                    presets::NAMES.join(", ")
                )))
            }
        },
        (None, Some(f)) => vec![NamedConfig { label: "run".into(), config: f.sim.clone() }],
        (None, None) => return Err(CliError::config("give --config or --preset")),
    };
    for c in &mut configs {
        args.apply(&mut c.config);
        c.config.validate()?;
    }
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| file.and_then(|f| f.out_dir))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(Plan { configs, out_dir })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_and_bad_keys_are_named() {
        let e = parse_config(r#"{"n": 3, "bogus": 1}"#).unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = parse_config(r#"{"market": {"sigma": "x"}}"#).unwrap_err().to_string();
        assert!(e.contains("market.sigma"), "{e}");
        let e = parse_config(r#"{"preset": "bc-grid", "n": 3}"#).unwrap_err().to_string();
        assert!(e.contains("`n`"), "{e}");
    }

    #[test]
    fn cli_keys_are_split_off() {
        let c = parse_config(r#"{"n": 3, "t_max": 5, "model": "bc", "out_dir": "x"}"#).unwrap();
        assert_eq!(c.sim.n, 3);
        assert_eq!(c.sim.model, ModelKind::Bc);
        assert_eq!(c.out_dir, Some(PathBuf::from("x")));
        assert_eq!(c.sim.market, SimConfig::default().market);
    }

    #[test]
    fn overrides_then_validation() {
        let args = SimArgs { preset: Some("pa-grid".into()), alpha: Some(1.5), ..SimArgs::default() };
        let e = plan(&args).unwrap_err().to_string();
        assert!(e.contains("`alpha`"), "{e}");
        let args = SimArgs { preset: Some("hk-baseline".into()), ..SimArgs::default() };
        assert_eq!(plan(&args).unwrap_err().exit_code(), 2);
        let args = SimArgs { preset: Some("fb-grid".into()), seed: Some(9), ..SimArgs::default() };
        assert!(plan(&args).unwrap().configs.iter().all(|c| c.config.seed == 9));
    }
}
