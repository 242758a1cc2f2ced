//! Named experiment setups. Every preset expands to explicit configs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{AgentValues, InitialProfileSpec, ModelKind, ShiftSpec, ShiftTarget, SimConfig};

pub const GRID_ALPHAS: [f64; 3] = [0.1, 0.5, 0.9];
pub const GRID_SIGMAS: [f64; 3] = [0.1, 0.5, 1.0];

/// Absolute BC radius used by the presets.
pub const BC_EPSILON: f64 = 0.3;
/// Relative PA / FB tolerance used by the presets.
pub const RELATIVE_EPSILON: f64 = 0.05;
pub const SHIFT_TIME: usize = 50;
/// FB tolerance and noise level of the shift presets: a band narrow enough
/// that some agents stay outside it for the whole network memory.
pub const SHIFT_EPSILON: f64 = 0.001;
pub const SHIFT_SIGMA: f64 = 0.1;

pub const NAMES: [&str; 8] = [
    "bc-grid",
    "pa-grid",
    "fb-grid",
    "shift-essential",
    "fb-shift-essential",
    "shift-inessential",
    "flash-crash",
    "hk-baseline",
];

#[derive(Debug, Clone, PartialEq)]
pub struct NamedConfig {
    pub label: String,
    pub config: SimConfig,
}

/// Bounded-confidence sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct HkPreset {
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub runs: usize,
    pub init: InitialProfileSpec,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Sim(Vec<NamedConfig>),
    Hk(HkPreset),
}

/// Shared free parameters; only the model and its radius differ.
pub fn base(model: ModelKind) -> SimConfig {
    let epsilon = match model {
        ModelKind::Bc => BC_EPSILON,
        ModelKind::Pa | ModelKind::Fb => RELATIVE_EPSILON,
    };
    SimConfig { model, t_max: 200, epsilon: AgentValues::Scalar(epsilon), ..SimConfig::default() }
}

/// `alpha x sigma` grid for one model.
pub fn grid(model: ModelKind) -> Vec<NamedConfig> {
    let mut out = Vec::with_capacity(9);
    for alpha in GRID_ALPHAS {
        for sigma in GRID_SIGMAS {
            let mut config = base(model);
            config.alpha = AgentValues::Scalar(alpha);
            config.market.sigma = sigma;
            out.push(NamedConfig { label: format!("{}-alpha{alpha}-sigma{sigma}", model.as_str()), config });
        }
    }
    out
}

fn shift_config(target: ShiftTarget, sigma: f64) -> SimConfig {
    let mut config = base(ModelKind::Fb);
    config.epsilon = AgentValues::Scalar(SHIFT_EPSILON);
    config.t_max = 150;
    config.alpha = AgentValues::Scalar(0.5);
    config.market.sigma = sigma;
    config.shift = Some(ShiftSpec { time: SHIFT_TIME, target, magnitude: -0.5 });
    config
}

pub fn shift_essential() -> SimConfig {
    shift_config(ShiftTarget::EssentialClasses(usize::MAX), SHIFT_SIGMA)
}

pub fn shift_inessential() -> SimConfig {
    shift_config(ShiftTarget::InessentialUnion, SHIFT_SIGMA)
}

pub fn flash_crash() -> SimConfig {
    let mut config = shift_config(ShiftTarget::EssentialClasses(2), 0.0);
    config.epsilon = AgentValues::Scalar(RELATIVE_EPSILON);
    config.alpha = AgentValues::Scalar(0.9);
    config
}

pub fn hk_baseline() -> HkPreset {
    HkPreset {
        n: 100,
        epsilons: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4],
        runs: 1000,
        init: InitialProfileSpec::Uniform01,
        bins: 100,
    }
}

pub fn preset(name: &str) -> Option<Preset> {
    let single = |label: &str, config| Preset::Sim(vec![NamedConfig { label: label.into(), config }]);
    Some(match name {
        "bc-grid" => Preset::Sim(grid(ModelKind::Bc)),
        "pa-grid" => Preset::Sim(grid(ModelKind::Pa)),
        "fb-grid" => Preset::Sim(grid(ModelKind::Fb)),
        "shift-essential" | "fb-shift-essential" => single("shift-essential", shift_essential()),
        "shift-inessential" => single("shift-inessential", shift_inessential()),
        "flash-crash" => single("flash-crash", flash_crash()),
        "hk-baseline" => Preset::Hk(hk_baseline()),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_expands_to_valid_configs() {
        for name in NAMES {
            match preset(name).unwrap() {
                Preset::Sim(list) => {
                    assert!(!list.is_empty());
                    for c in list {
                        c.config.validate().unwrap();
                    }
                }
                Preset::Hk(h) => assert!(h.runs > 0 && !h.epsilons.is_empty()),
            }
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn grids_cover_the_table() {
        let g = grid(ModelKind::Pa);
        assert_eq!(g.len(), 9);
        assert_eq!(g[8].config.alpha, AgentValues::Scalar(0.9));
        assert_eq!(g[8].config.market.sigma, 1.0);
    }
}
