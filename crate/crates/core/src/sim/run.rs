use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::shift::{shift_summary, shift_targets, ShiftSummary, ShiftTarget};
use super::stats::return_stats;
use super::{derive_seed, sample_initial, ConfigError, SimConfig, INIT_STREAM};
use crate::engine::{EngineError, MarketEngine};
use crate::graph::{classify, AgentClassification};
use crate::opinion::{cluster_count, OpinionVector};

/// Tolerance used for the recovery time in shift summaries.
pub const RECOVERY_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One emitted time step. `g` and `essential_agents` describe `A(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRow {
    pub t: usize,
    pub price: f64,
    pub mean_opinion: f64,
    pub min_opinion: f64,
    pub max_opinion: f64,
    pub dividend: f64,
    pub g: usize,
    pub essential_agents: usize,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShiftRecord {
    /// Step at whose start the opinions were changed.
    pub time: usize,
    pub agents: Vec<usize>,
    pub magnitude: f64,
    /// `p(time - 1)`.
    pub pre_shift_price: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Trajectory {
    pub initial_price: f64,
    pub initial_opinions: Vec<f64>,
    /// Rows for `t = 1..=t_max`.
    pub rows: Vec<StepRow>,
    /// `x(t)` for every row, when requested.
    pub opinions: Option<Vec<Vec<f64>>>,
    pub shift: Option<ShiftRecord>,
    pub fundamental_price: Option<f64>,
}

impl Trajectory {
    /// `p(1), ..., p(t_max)`.
    pub fn prices(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.price).collect()
    }
}

/// A run in progress, stepped by the caller or driven to the end.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    engine: MarketEngine,
    classification: AgentClassification,
    trajectory: Trajectory,
}

impl Simulation {
    /// Uses the config's own seed for both `x(0)` and the dynamics.
    pub fn from_config(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let x0 = sample_initial(&config.init, config.n, derive_seed(config.seed, INIT_STREAM))?;
        Self::new(config, x0, derive_seed(config.seed, 0))
    }

    pub fn new(config: &SimConfig, x0: OpinionVector, dynamics_seed: u64) -> Result<Self, SimError> {
        let setup = config.engine_setup()?;
        if x0.len() != config.n {
            return Err(ConfigError::new("n", "initial opinions have the wrong length").into());
        }
        let fundamental_price = matches!(config.model, super::ModelKind::Fb)
            .then(|| config.fundamental_price())
            .transpose()?;
        let initial_opinions = x0.to_vec();
        let engine = MarketEngine::new(setup, x0, ChaCha8Rng::seed_from_u64(dynamics_seed))?;
        let classification = classify(engine.confidence().as_matrix());
        let trajectory = Trajectory {
            initial_price: engine.price(),
            initial_opinions,
            rows: Vec::with_capacity(config.t_max),
            opinions: config.record_opinions.then(Vec::new),
            shift: None,
            fundamental_price,
        };
        Ok(Self { config: config.clone(), engine, classification, trajectory })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn engine(&self) -> &MarketEngine {
        &self.engine
    }

    pub fn t(&self) -> usize {
        self.engine.t()
    }

    pub fn is_finished(&self) -> bool {
        self.engine.t() >= self.config.t_max
    }

    /// Classification of the current `A(t)`.
    pub fn classification(&self) -> &AgentClassification {
        &self.classification
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// Changes the targeted opinions now, ahead of the next step, and records
    /// the shift. Returns the affected agents; an empty target changes
    /// nothing but is still recorded.
    pub fn apply_shift(&mut self, target: &ShiftTarget, magnitude: f64) -> &[usize] {
        let agents = shift_targets(&self.classification, target);
        self.engine.scale_opinions(&agents, 1.0 + magnitude);
        self.trajectory.shift = Some(ShiftRecord {
            time: self.engine.t() + 1,
            agents,
            magnitude,
            pre_shift_price: self.engine.price(),
        });
        &self.trajectory.shift.as_ref().expect("just set").agents
    }

    /// Advances one step, first applying the configured shift if it is due.
    pub fn step(&mut self) -> Result<StepRow, SimError> {
        if let Some(spec) = &self.config.shift {
            if spec.time == self.engine.t() + 1 && self.trajectory.shift.is_none() {
                let (target, magnitude) = (spec.target.clone(), spec.magnitude);
                self.apply_shift(&target, magnitude);
            }
        }
        let out = self.engine.step()?;
        self.classification = classify(self.engine.confidence().as_matrix());
        let x = self.engine.opinions();
        let row = StepRow {
            t: out.t,
            price: out.price,
            mean_opinion: x.mean(),
            min_opinion: x.min(),
            max_opinion: x.max(),
            dividend: out.dividend,
            g: self.classification.g(),
            essential_agents: self.classification.essential_agent_count(),
            clusters: cluster_count(x, self.config.cluster_tol),
        };
        self.trajectory.rows.push(row);
        if let Some(ops) = self.trajectory.opinions.as_mut() {
            ops.push(x.to_vec());
        }
        Ok(row)
    }

    /// Steps until `t_max`.
    pub fn run_to_end(mut self) -> Result<Trajectory, SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.trajectory)
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }
}

/// One full realization. Deterministic in `config` (seed included).
pub fn run(config: &SimConfig) -> Result<Trajectory, SimError> {
    Simulation::from_config(config)?.run_to_end()
}

/// `x(0)` shared by every member of an ensemble.
pub fn ensemble_initial(config: &SimConfig, master_seed: u64) -> Result<OpinionVector, SimError> {
    config.validate()?;
    Ok(sample_initial(&config.init, config.n, derive_seed(master_seed, INIT_STREAM))?)
}

/// Member `k` of the ensemble under `master_seed`. `config.seed` is not used.
pub fn ensemble_member(
    config: &SimConfig,
    x0: &OpinionVector,
    master_seed: u64,
    k: usize,
) -> Result<Trajectory, SimError> {
    Simulation::new(config, x0.clone(), derive_seed(master_seed, k as u64))?.run_to_end()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub final_price: f64,
    /// `None` when the returns are degenerate (e.g. a constant path).
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub shift: Option<ShiftSummary>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ensemble {
    pub runs: usize,
    pub initial_price: f64,
    /// Pointwise mean of `p(t)` over runs, `t = 1..=t_max`.
    pub mean_path: Vec<f64>,
    /// Pointwise cross-run variance of `p(t)` (divisor `runs`).
    pub variance_path: Vec<f64>,
    /// Moments of the returns of the mean path.
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub per_run: Vec<RunSummary>,
}

impl Ensemble {
    /// Averages of the per-run moments over runs where they are defined.
    pub fn mean_run_moments(&self) -> (Option<f64>, Option<f64>) {
        let avg = |f: fn(&RunSummary) -> Option<f64>| {
            let v: Vec<f64> = self.per_run.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        (avg(|r| r.skewness), avg(|r| r.excess_kurtosis))
    }
}

/// Folds trajectories into an [`Ensemble`]. Members must be pushed in run
/// order for bitwise-stable results.
#[derive(Debug, Clone)]
pub struct EnsembleBuilder {
    initial_price: Option<f64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
    per_run: Vec<RunSummary>,
}

impl Default for EnsembleBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl EnsembleBuilder {
    pub fn new() -> Self {
        Self { initial_price: None, mean: Vec::new(), m2: Vec::new(), per_run: Vec::new() }
    }

    pub fn push(&mut self, run: usize, seed: u64, trajectory: &Trajectory) {
        let prices = trajectory.prices();
        if self.per_run.is_empty() {
            self.mean = alloc::vec![0.0; prices.len()];
            self.m2 = alloc::vec![0.0; prices.len()];
            self.initial_price = Some(trajectory.initial_price);
        }
        let k = (self.per_run.len() + 1) as f64;
        for ((m, s), &p) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(&prices) {
            let d = p - *m;
            *m += d / k;
            *s += d * (p - *m);
        }
        let stats = return_stats(&prices).ok();
        self.per_run.push(RunSummary {
            run,
            seed,
            final_price: prices.last().copied().unwrap_or(trajectory.initial_price),
            skewness: stats.as_ref().map(|s| s.skewness),
            excess_kurtosis: stats.as_ref().map(|s| s.excess_kurtosis),
            shift: shift_summary(trajectory, RECOVERY_TOL),
        });
    }

    pub fn finish(self) -> Ensemble {
        let runs = self.per_run.len();
        let variance_path = self.m2.iter().map(|s| s / runs.max(1) as f64).collect();
        let stats = return_stats(&self.mean).ok();
        Ensemble {
            runs,
            initial_price: self.initial_price.unwrap_or(f64::NAN),
            skewness: stats.as_ref().map(|s| s.skewness),
            excess_kurtosis: stats.as_ref().map(|s| s.excess_kurtosis),
            mean_path: self.mean,
            variance_path,
            per_run: self.per_run,
        }
    }
}

/// `runs` realizations from one shared `x(0)`, run `k` seeded with
/// `derive_seed(master_seed, k)`. With `runs = 1` and
/// `master_seed = config.seed` this reproduces [`run`].
pub fn monte_carlo(config: &SimConfig, runs: usize, master_seed: u64) -> Result<Ensemble, SimError> {
    if runs == 0 {
        return Err(ConfigError::new("runs", "must be at least 1").into());
    }
    let x0 = ensemble_initial(config, master_seed)?;
    let mut builder = EnsembleBuilder::new();
    for k in 0..runs {
        let traj = ensemble_member(config, &x0, master_seed, k)?;
        builder.push(k, derive_seed(master_seed, k as u64), &traj);
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{AgentValues, InitialProfileSpec, ModelKind, ShiftSpec};

    fn small(model: ModelKind, sigma: f64) -> SimConfig {
        let mut c = SimConfig { n: 20, t_max: 60, model, seed: 11, ..SimConfig::default() };
        c.market = crate::market::MarketParams { r: 0.05, a: 1.0, sigma, z_s: 0.01, y_bar: 0.15 };
        c
    }

    #[test]
    fn wide_bc_price_is_flat_after_first_step() {
        let mut c = small(ModelKind::Bc, 0.0);
        c.epsilon = AgentValues::Scalar(100.0);
        let traj = run(&c).unwrap();
        let mean0 = traj.initial_opinions.iter().sum::<f64>() / 20.0;
        let expected = mean0 / 1.05;
        for r in &traj.rows {
            assert!((r.price - expected).abs() < 1e-12);
        }
        assert_eq!(traj.rows.len(), 60);
        assert_eq!(traj.rows[0].g, 1);
    }

    #[test]
    fn fb_fixed_point() {
        let c = small(ModelKind::Fb, 0.0);
        let ps = c.fundamental_price().unwrap();
        let x0 = OpinionVector::new(alloc::vec![ps * 1.05; 20]).unwrap();
        let traj = Simulation::new(&c, x0, 0).unwrap().run_to_end().unwrap();
        for r in &traj.rows {
            assert!((r.price - ps).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        for sigma in [0.0, 0.4] {
            let c = small(ModelKind::Pa, sigma);
            assert_eq!(run(&c).unwrap(), run(&c).unwrap());
        }
    }

    #[test]
    fn single_member_ensemble_is_the_run() {
        let c = small(ModelKind::Bc, 0.3);
        let e = monte_carlo(&c, 1, c.seed).unwrap();
        assert_eq!(e.mean_path, run(&c).unwrap().prices());
        assert!(e.variance_path.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noiseless_ensemble_has_no_spread() {
        let c = small(ModelKind::Fb, 0.0);
        let e = monte_carlo(&c, 5, 3).unwrap();
        assert!(e.variance_path.iter().all(|&v| v == 0.0));
        assert!(e.per_run.windows(2).all(|w| w[0].skewness == w[1].skewness));
    }

    #[test]
    fn configured_shift_is_applied_once() {
        let mut c = small(ModelKind::Fb, 0.0);
        c.init = InitialProfileSpec::Uniform01;
        c.shift = Some(ShiftSpec { time: 30, target: ShiftTarget::Agents(alloc::vec![0, 1]), magnitude: -0.5 });
        let traj = run(&c).unwrap();
        let rec = traj.shift.as_ref().unwrap();
        assert_eq!(rec.time, 30);
        assert_eq!(rec.pre_shift_price, traj.rows[28].price);
        let s = shift_summary(&traj, 0.01).unwrap();
        assert_eq!(s.affected, 2);
    }

    #[test]
    fn shift_targets_come_from_current_network() {
        let mut c = small(ModelKind::Fb, 0.2);
        c.epsilon = AgentValues::Scalar(0.02);
        let mut sim = Simulation::from_config(&c).unwrap();
        for _ in 0..10 {
            sim.step().unwrap();
        }
        let before = sim.classification().clone();
        let agents = sim.apply_shift(&ShiftTarget::EssentialClasses(1), -0.5).to_vec();
        assert!(agents.iter().all(|&i| before.is_essential(i)));
    }
}
