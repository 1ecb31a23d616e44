use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ExperimentConfig, Mode, ProtocolId};
use super::prepared::{Lengths, Prepared, TrialOutcome};
use super::{bernoulli_stderr, hoeffding_half_width};
use crate::error::{Error, Result};
use crate::model::RandomSource;

/// Environment variable holding the default number of worker threads.
pub const WORKERS_ENV: &str = "SMP_LAB_WORKERS";

const TRIAL_STREAM: u64 = 0x7472_6961_6c73;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub protocol: ProtocolId,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub adversary: Option<String>,
    pub accepted: Option<u64>,
    pub estimate: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub accepted_far: Option<u64>,
    pub far_estimate: Option<f64>,
    pub value_mean: Option<f64>,
    pub value_stderr: Option<f64>,
    pub exact: Option<f64>,
    pub exact_rational: Option<String>,
    pub within_ci: Option<bool>,
    pub lengths: Lengths,
    pub declared: Lengths,
    pub shape_ok: bool,
    pub metadata: BTreeMap<String, Value>,
    pub config: ExperimentConfig,
    /// Kept out of the JSON record so identical configs give identical
    /// records.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrialReport {
    /// Standard error of the acceptance estimate.
    pub fn stderr(&self) -> Option<f64> {
        self.estimate.map(|p| bernoulli_stderr(p, self.trials))
    }

    pub fn far_stderr(&self) -> Option<f64> {
        self.far_estimate.map(|p| bernoulli_stderr(p, self.trials))
    }
}

/// Workers from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run(config: &ExperimentConfig) -> Result<TrialReport> {
    run_with_workers(config, worker_count())
}

pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<TrialReport> {
    let start = Instant::now();
    let prepared = Prepared::new(config)?;
    let base = RandomSource::new(config.seed, 0).derive(TRIAL_STREAM);
    let stream = |t: usize| base.derive(t as u64);

    let outcomes: Vec<TrialOutcome> = if config.mode == Mode::Exact {
        vec![prepared.trial(stream(0))?]
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| prepared.trial(stream(t)))
                .collect::<Result<Vec<_>>>()
        })?
    };

    let lengths = outcomes[0].lengths;
    let declared = prepared.declared();
    let mc = config.mode != Mode::Exact;
    let trials = config.trials;
    let count = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let accepted = mc.then(|| count(&|o| o.hit));
    let estimate = accepted.map(|a| a as f64 / trials as f64);
    let accepted_far = (mc && outcomes[0].far_hit.is_some()).then(|| count(&|o| o.far_hit == Some(true)));
    let values: Vec<f64> = outcomes.iter().filter_map(|o| o.value).collect();
    let (value_mean, value_stderr) = if mc && !values.is_empty() {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        (Some(mean), Some((var / k).sqrt()))
    } else {
        (None, None)
    };
    let ci = mc.then(|| hoeffding_half_width(trials, config.beta));

    let exact = if config.mode == Mode::MonteCarlo { None } else { prepared.exact()? };
    let within_ci = match (estimate, ci, &exact) {
        (Some(p), Some(w), Some((e, _))) => Some((p - e).abs() <= w),
        _ => None,
    };

    let report = TrialReport {
        protocol: config.protocol,
        n: config.n,
        trials,
        seed: config.seed,
        mode: config.mode,
        adversary: config.adversary().map(|a| a.name().to_string()),
        accepted,
        estimate,
        ci_half_width: ci,
        accepted_far,
        far_estimate: accepted_far.map(|a| a as f64 / trials as f64),
        value_mean,
        value_stderr,
        exact: exact.as_ref().map(|(e, _)| *e),
        exact_rational: exact.as_ref().and_then(|(_, r)| r.map(|r| r.to_string())),
        within_ci,
        lengths,
        declared,
        shape_ok: lengths == declared,
        metadata: prepared.metadata(),
        config: config.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(out) = &config.out {
        persist(&report, out)?;
    }
    Ok(report)
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(existing) if existing.is_object() && v.is_object() => merge(existing, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

/// One report per grid point; each point is a JSON object merged into the
/// template config.
pub fn sweep(template: &ExperimentConfig, grid: &[Value]) -> Result<Vec<TrialReport>> {
    sweep_with_workers(template, grid, worker_count())
}

pub fn sweep_with_workers(template: &ExperimentConfig, grid: &[Value], workers: usize) -> Result<Vec<TrialReport>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let base = serde_json::to_value(template)?;
    grid.iter()
        .map(|point| {
            let mut v = base.clone();
            merge(&mut v, point);
            let config: ExperimentConfig = serde_json::from_value(v)?;
            run_with_workers(&config, workers)
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    protocol: &'a str,
    n: usize,
    trials: usize,
    seed: u64,
    mode: &'a str,
    adversary: &'a str,
    estimate: Option<f64>,
    ci_half_width: Option<f64>,
    far_estimate: Option<f64>,
    exact: Option<f64>,
    within_ci: Option<bool>,
    alice_len: usize,
    bob_len: usize,
    merlin_len: usize,
    shape_ok: bool,
    wall_time_secs: f64,
}

/// Appends the report to `<out>.jsonl` and a summary row to `<out>.csv`.
pub fn persist(report: &TrialReport, out: &Path) -> Result<()> {
    use std::io::Write;
    let with_ext = |ext: &str| {
        let mut p = out.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut jsonl = OpenOptions::new().create(true).append(true).open(with_ext(".jsonl"))?;
    writeln!(jsonl, "{}", serde_json::to_string(report)?)?;

    let csv_path = with_ext(".csv");
    let fresh = std::fs::metadata(&csv_path).map_or(true, |m| m.len() == 0);
    let file = OpenOptions::new().create(true).append(true).open(&csv_path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    let mode = match report.mode {
        Mode::MonteCarlo => "monte_carlo",
        Mode::Exact => "exact",
        Mode::Both => "both",
    };
    w.serialize(CsvRow {
        protocol: report.protocol.as_str(),
        n: report.n,
        trials: report.trials,
        seed: report.seed,
        mode,
        adversary: report.adversary.as_deref().unwrap_or(""),
        estimate: report.estimate,
        ci_half_width: report.ci_half_width,
        far_estimate: report.far_estimate,
        exact: report.exact,
        within_ci: report.within_ci,
        alice_len: report.lengths.alice,
        bob_len: report.lengths.bob,
        merlin_len: report.lengths.merlin,
        shape_ok: report.shape_ok,
        wall_time_secs: report.wall_time_secs,
    })?;
    w.flush()?;
    Ok(())
}
