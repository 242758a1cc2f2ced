use std::path::{Path, PathBuf};
use std::thread;

use clap::Args;
use confnet_core::opinion::IterationLimits;
use confnet_core::sim::hk::{hk_run, summarize, HkRun, HkSweepRow};
use confnet_core::sim::presets::{self, HkPreset, Preset};
use confnet_core::sim::{
    derive_seed, monte_carlo_parallel, return_stats, run, shift_summary, Ensemble, InitialProfileSpec, ShiftSummary,
    SimConfig, Trajectory, DEFAULT_LOGNORMAL_S, RECOVERY_TOL,
};
use serde::Serialize;

use crate::config::{plan, SimArgs};
use crate::emit::{
    csv_bytes, histogram_rows, json_bytes, mean_path_rows, stdout_line, trajectory_csv, write_file, write_json,
    HISTOGRAM_HEADER, MEAN_PATH_HEADER,
};
use crate::error::CliError;
use crate::input::{classification_report, read_matrix, InputFormat};

fn out_path(dir: &Path, label: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{label}.{suffix}"))
}

#[derive(Debug, Serialize)]
struct ReturnMoments {
    skewness: f64,
    excess_kurtosis: f64,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    label: &'a str,
    seed: u64,
    steps: usize,
    initial_price: f64,
    final_price: f64,
    fundamental_price: Option<f64>,
    returns: Option<ReturnMoments>,
    final_g: usize,
    final_essential_agents: usize,
    final_clusters: usize,
    shift: Option<ShiftSummary>,
}

fn run_report<'a>(label: &'a str, config: &SimConfig, t: &Trajectory) -> RunReport<'a> {
    let last = t.rows.last().expect("t_max >= 1");
    RunReport {
        label,
        seed: config.seed,
        steps: t.rows.len(),
        initial_price: t.initial_price,
        final_price: last.price,
        fundamental_price: t.fundamental_price,
        returns: return_stats(&t.prices())
            .ok()
            .map(|s| ReturnMoments { skewness: s.skewness, excess_kurtosis: s.excess_kurtosis }),
        final_g: last.g,
        final_essential_agents: last.essential_agents,
        final_clusters: last.clusters,
        shift: shift_summary(t, RECOVERY_TOL),
    }
}

pub fn cmd_run(args: &SimArgs) -> Result<(), CliError> {
    let plan = plan(args)?;
    for nc in &plan.configs {
        write_json(&out_path(&plan.out_dir, &nc.label, "config.json"), &nc.config)?;
    }
    for nc in &plan.configs {
        let t = run(&nc.config)?;
        write_file(&out_path(&plan.out_dir, &nc.label, "trajectory.csv"), &trajectory_csv(&t.rows)?)?;
        write_json(&out_path(&plan.out_dir, &nc.label, "summary.json"), &run_report(&nc.label, &nc.config, &t))?;
        stdout_line(&format!(
            "{}: seed {}, {} steps, final price {}",
            nc.label,
            nc.config.seed,
            t.rows.len(),
            t.rows.last().map_or(t.initial_price, |r| r.price)
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EnsembleReport<'a> {
    label: &'a str,
    master_seed: u64,
    #[serde(flatten)]
    ensemble: &'a Ensemble,
    mean_run_skewness: Option<f64>,
    mean_run_excess_kurtosis: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[derive(Debug, Serialize)]
struct DrawdownReport {
    runs: usize,
    shift_time: usize,
    mean_affected: f64,
    median_drawdown: Option<f64>,
    max_drawdown: Option<f64>,
    median_peak_deviation: Option<f64>,
    median_peak_fundamental_deviation: Option<f64>,
    recovered_runs: usize,
    median_recovery_steps: Option<f64>,
}

fn drawdown_report(e: &Ensemble) -> Option<DrawdownReport> {
    let s: Vec<&ShiftSummary> = e.per_run.iter().filter_map(|r| r.shift.as_ref()).collect();
    let first = s.first()?;
    let col = |f: fn(&ShiftSummary) -> f64| s.iter().map(|x| f(x)).collect::<Vec<f64>>();
    let recovery: Vec<f64> = s.iter().filter_map(|x| x.recovery_t.map(|t| (t - x.time) as f64)).collect();
    Some(DrawdownReport {
        runs: s.len(),
        shift_time: first.time,
        mean_affected: s.iter().map(|x| x.affected as f64).sum::<f64>() / s.len() as f64,
        median_drawdown: median(col(|x| x.drawdown)),
        max_drawdown: col(|x| x.drawdown).into_iter().reduce(f64::max),
        median_peak_deviation: median(col(|x| x.peak_deviation)),
        median_peak_fundamental_deviation: median(s.iter().filter_map(|x| x.peak_fundamental_deviation).collect()),
        recovered_runs: recovery.len(),
        median_recovery_steps: median(recovery),
    })
}

#[derive(Debug, Clone, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<(), CliError> {
    let plan = plan(&args.sim)?;
    let threads = args.threads.unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()));
    for nc in &plan.configs {
        write_json(&out_path(&plan.out_dir, &nc.label, "config.json"), &nc.config)?;
    }
    for nc in &plan.configs {
        let master = nc.config.seed;
        let e = monte_carlo_parallel(&nc.config, args.runs, master, threads)?;
        let (skew, kurt) = e.mean_run_moments();
        let report = EnsembleReport {
            label: &nc.label,
            master_seed: master,
            ensemble: &e,
            mean_run_skewness: skew,
            mean_run_excess_kurtosis: kurt,
        };
        write_json(&out_path(&plan.out_dir, &nc.label, "ensemble.json"), &report)?;
        let rows = mean_path_rows(&e.mean_path, &e.variance_path);
        write_file(&out_path(&plan.out_dir, &nc.label, "mean_path.csv"), &csv_bytes(&rows, &MEAN_PATH_HEADER)?)?;
        if let Some(d) = drawdown_report(&e) {
            write_json(&out_path(&plan.out_dir, &nc.label, "drawdown.json"), &d)?;
        }
        stdout_line(&format!(
            "{}: master seed {master}, {} runs, final mean price {}",
            nc.label,
            e.runs,
            e.mean_path.last().copied().unwrap_or(e.initial_price)
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Edge list (`i j [w]` per line) or, for `.csv`, a square matrix.
    pub input: PathBuf,
    /// Force the input format.
    #[arg(long, value_parser = ["edges", "matrix"])]
    pub format: Option<String>,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let format = match args.format.as_deref() {
        Some("edges") => InputFormat::EdgeList,
        Some(_) => InputFormat::MatrixCsv,
        None => InputFormat::guess(&args.input),
    };
    let m = read_matrix(&args.input, format)?;
    let bytes = json_bytes(&classification_report(&m))?;
    match &args.out {
        Some(p) => write_file(p, &bytes),
        None => {
            stdout_line(String::from_utf8_lossy(&bytes).trim_end());
            Ok(())
        }
    }
}

/// `uniform01`, `beta:A,B` or `lognormal:MEAN[,S]`.
pub fn parse_init(s: &str) -> Result<InitialProfileSpec, String> {
    let (family, params) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if params.is_empty() {
        Vec::new()
    } else {
        params.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"))).collect::<Result<_, _>>()?
    };
    let spec = match (family, nums.as_slice()) {
        ("uniform01", []) => InitialProfileSpec::Uniform01,
        ("beta", [a, b]) => InitialProfileSpec::Beta { a: *a, b: *b },
        ("lognormal", [mean]) => InitialProfileSpec::LogNormal { mean: *mean, s: DEFAULT_LOGNORMAL_S },
        ("lognormal", [mean, s]) => InitialProfileSpec::LogNormal { mean: *mean, s: *s },
        _ => return Err(format!("unknown profile `{s}`, expected uniform01, beta:A,B or lognormal:MEAN[,S]")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[derive(Debug, Clone, Args)]
pub struct HkArgs {
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_init)]
    pub init: Option<InitialProfileSpec>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Only `hk-baseline`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value = crate::config::DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = IterationLimits::default().max_t)]
    pub max_t: usize,
}

/// Everything an hk invocation resolved to.
#[derive(Debug, Serialize)]
struct HkPlan {
    n: usize,
    epsilons: Vec<f64>,
    runs: usize,
    init: InitialProfileSpec,
    bins: usize,
    seed: u64,
    max_t: usize,
    tol: f64,
    cluster_tol: f64,
}

fn hk_plan(args: &HkArgs) -> Result<HkPlan, CliError> {
    let base = match args.preset.as_deref() {
        None => HkPreset { n: 100, epsilons: Vec::new(), runs: 1, init: InitialProfileSpec::Uniform01, bins: 100 },
        Some(name) => match presets::preset(name) {
            Some(Preset::Hk(h)) => h,
            _ => return Err(CliError::config(format!("invalid `preset`: `{name}` is not a bounded-confidence preset"))),
        },
    };
    let epsilons = if args.epsilon.is_empty() { base.epsilons } else { args.epsilon.clone() };
    if epsilons.is_empty() {
        return Err(CliError::config("invalid `epsilon`: give --epsilon or --preset hk-baseline"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(CliError::config(format!("invalid `epsilon`: value {e} must be finite and >= 0")));
    }
    let limits = IterationLimits { max_t: args.max_t, ..IterationLimits::default() };
    let plan = HkPlan {
        n: args.n.unwrap_or(base.n),
        epsilons,
        runs: args.runs.unwrap_or(base.runs),
        init: args.init.unwrap_or(base.init),
        bins: args.bins.unwrap_or(base.bins),
        seed: args.seed,
        max_t: limits.max_t,
        tol: limits.tol,
        cluster_tol: limits.cluster_tol,
    };
    for (key, v) in [("n", plan.n), ("runs", plan.runs), ("bins", plan.bins), ("max_t", plan.max_t)] {
        if v == 0 {
            return Err(CliError::config(format!("invalid `{key}`: must be at least 1")));
        }
    }
    Ok(plan)
}

#[derive(Debug, Serialize)]
struct ClusterSummary {
    value: f64,
    size: usize,
}

#[derive(Debug, Serialize)]
struct SingleHkReport {
    epsilon: f64,
    seed: u64,
    converged: bool,
    t_stable: Option<usize>,
    pattern: confnet_core::opinion::OpinionPattern,
    clusters: Vec<ClusterSummary>,
}

#[derive(Debug, Serialize)]
struct ClusterCountRow {
    epsilon: f64,
    t: usize,
    clusters: f64,
}

/// Mean cluster count per step; finished runs hold their final count.
fn mean_cluster_counts(epsilon: f64, results: &[HkRun]) -> Vec<ClusterCountRow> {
    let len = results.iter().map(|r| r.cluster_counts.len()).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let sum: usize =
                results.iter().map(|r| *r.cluster_counts.get(t).or(r.cluster_counts.last()).unwrap_or(&0)).sum();
            ClusterCountRow { epsilon, t, clusters: sum as f64 / results.len() as f64 }
        })
        .collect()
}

pub fn cmd_hk(args: &HkArgs) -> Result<(), CliError> {
    let plan = hk_plan(args)?;
    let limits = IterationLimits { max_t: plan.max_t, ..IterationLimits::default() };
    write_json(&args.out_dir.join("hk.config.json"), &plan)?;
    let mut counts = Vec::new();
    let mut hist = Vec::new();
    let mut rows: Vec<HkSweepRow> = Vec::new();
    let mut singles = Vec::new();
    for &eps in &plan.epsilons {
        let results: Vec<HkRun> = (0..plan.runs)
            .map(|k| hk_run(plan.n, eps, &plan.init, derive_seed(plan.seed, k as u64), limits))
            .collect::<Result<_, _>>()?;
        counts.extend(mean_cluster_counts(eps, &results));
        let row = summarize(eps, &results, plan.bins);
        hist.extend(histogram_rows(eps, &row.histogram));
        if plan.runs == 1 {
            let r = &results[0];
            singles.push(SingleHkReport {
                epsilon: eps,
                seed: r.seed,
                converged: r.report.converged,
                t_stable: r.report.t_stable,
                pattern: r.report.pattern,
                clusters: r
                    .report
                    .clusters
                    .iter()
                    .map(|c| ClusterSummary { value: c.value, size: c.members.len() })
                    .collect(),
            });
        }
        stdout_line(&format!(
            "epsilon {eps}: {} runs, mean final clusters {}, consensus share {}",
            plan.runs, row.mean_final_clusters, row.consensus_share
        ));
        rows.push(row);
    }
    write_file(&args.out_dir.join("hk.clusters.csv"), &csv_bytes(&counts, &["epsilon", "t", "clusters"])?)?;
    write_file(&args.out_dir.join("hk.histogram.csv"), &csv_bytes(&hist, &HISTOGRAM_HEADER)?)?;
    if plan.runs == 1 {
        write_json(&args.out_dir.join("hk.report.json"), &singles)?;
    } else {
        write_json(&args.out_dir.join("hk.report.json"), &rows)?;
    }
    Ok(())
}

pub fn cmd_presets() -> Result<(), CliError> {
    for name in presets::NAMES {
        match presets::preset(name).expect("listed") {
            Preset::Sim(list) => {
                let labels: Vec<&str> = list.iter().map(|c| c.label.as_str()).collect();
                stdout_line(&format!("{name}: {}", labels.join(" ")));
            }
            Preset::Hk(h) => stdout_line(&format!(
                "{name}: n {} runs {} epsilons {:?} bins {}",
                h.n, h.runs, h.epsilons, h.bins
            )),
        }
    }
    Ok(())
}
