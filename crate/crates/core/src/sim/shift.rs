use alloc::format;
use alloc::vec::Vec;

use super::{ConfigError, Trajectory};
use crate::graph::AgentClassification;
use crate::opinion::OpinionVector;

/// Default relative change applied to targeted opinions.
pub const DEFAULT_MAGNITUDE: f64 = -0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ShiftTarget {
    /// The `k` largest essential classes (ties: smaller first member).
    EssentialClasses(usize),
    /// Every agent of every inessential class.
    InessentialUnion,
    /// These agents, whatever their class.
    Agents(Vec<usize>),
}

/// An exogenous opinion change at the start of step `time`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ShiftSpec {
    pub time: usize,
    pub target: ShiftTarget,
    /// Targeted opinions are multiplied by `1 + magnitude`.
    #[cfg_attr(feature = "serde", serde(default = "default_magnitude"))]
    pub magnitude: f64,
}

#[cfg(feature = "serde")]
fn default_magnitude() -> f64 {
    DEFAULT_MAGNITUDE
}

impl ShiftSpec {
    pub fn validate(&self, n: usize, t_max: usize) -> Result<(), ConfigError> {
        if self.time == 0 || self.time >= t_max {
            return Err(ConfigError::new("shift.time", format!("must lie in 1..{t_max}")));
        }
        if !(self.magnitude.is_finite() && self.magnitude > -1.0) {
            return Err(ConfigError::new("shift.magnitude", "must be finite and greater than -1"));
        }
        match &self.target {
            ShiftTarget::EssentialClasses(0) => {
                Err(ConfigError::new("shift.target", "essential-classes needs at least one class"))
            }
            ShiftTarget::Agents(a) if a.iter().any(|&i| i >= n) => {
                Err(ConfigError::new("shift.target", format!("agent index out of range 0..{n}")))
            }
            _ => Ok(()),
        }
    }
}

/// Agents selected by `target` under `classification`, ascending.
pub fn shift_targets(classification: &AgentClassification, target: &ShiftTarget) -> Vec<usize> {
    let mut agents: Vec<usize> = match target {
        ShiftTarget::EssentialClasses(k) => {
            classification.essential_by_size().into_iter().take(*k).flatten().copied().collect()
        }
        ShiftTarget::InessentialUnion => classification.inessential_agents(),
        ShiftTarget::Agents(a) => a.iter().copied().filter(|&i| i < classification.n()).collect(),
    };
    agents.sort_unstable();
    agents.dedup();
    agents
}

/// Scales the targeted opinions by `1 + magnitude`; also returns the number
/// of agents changed (zero leaves `x` as it was).
pub fn inject_shift(
    x: &OpinionVector,
    classification: &AgentClassification,
    spec: &ShiftSpec,
) -> (OpinionVector, usize) {
    let targets = shift_targets(classification, &spec.target);
    let mut out = x.clone();
    let factor = 1.0 + spec.magnitude;
    let values = out.as_mut_slice();
    for &i in &targets {
        values[i] *= factor;
    }
    (out, targets.len())
}

/// Price response to the shift recorded in a trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShiftSummary {
    pub time: usize,
    pub affected: usize,
    /// `p(t0 - 1)`.
    pub pre_shift_price: f64,
    pub trough_price: f64,
    pub trough_t: usize,
    /// `(pre - trough) / pre`.
    pub drawdown: f64,
    /// `max_{t >= t0} |p - pre| / pre`.
    pub peak_deviation: f64,
    /// `max_{t >= t0} |p - p*| / p*`, for the FB rule.
    pub peak_fundamental_deviation: Option<f64>,
    /// First `t` after the trough with `|p - pre| / pre <= tol`.
    pub recovery_t: Option<usize>,
}

pub fn shift_summary(trajectory: &Trajectory, recovery_tol: f64) -> Option<ShiftSummary> {
    let record = trajectory.shift.as_ref()?;
    let t0 = record.time;
    let pre = record.pre_shift_price;
    let after: Vec<(usize, f64)> =
        trajectory.rows.iter().filter(|r| r.t >= t0).map(|r| (r.t, r.price)).collect();
    let &(trough_t, trough_price) = after.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
    let rel = |p: f64| ((p - pre) / pre).abs();
    let peak_deviation = after.iter().map(|&(_, p)| rel(p)).fold(0.0, f64::max);
    let peak_fundamental_deviation = trajectory
        .fundamental_price
        .map(|ps| after.iter().map(|&(_, p)| ((p - ps) / ps).abs()).fold(0.0, f64::max));
    let recovery_t = after.iter().find(|&&(t, p)| t > trough_t && rel(p) <= recovery_tol).map(|&(t, _)| t);
    Some(ShiftSummary {
        time: t0,
        affected: record.agents.len(),
        pre_shift_price: pre,
        trough_price,
        trough_t,
        drawdown: (pre - trough_price) / pre,
        peak_deviation,
        peak_fundamental_deviation,
        recovery_t,
    })
}
