//! `smp-lab`: run protocol experiments, parameter sweeps and the
//! acceptance battery from the command line.
//!
//! Exit status: 0 on success, 1 when a verify criterion fails, 2 on a
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use smp_core::harness::{run_with_workers, sweep_with_workers, worker_count, ExperimentConfig};
use smp_core::verify::{criterion, Fault, Manifest, VerifyOptions, CRITERIA, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "smp-lab", version, about = "Simultaneous-message protocols with an untrusted prover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its report as JSON.
    Run(ExperimentArgs),
    /// Run the experiment once per grid point; prints one JSON report per line.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// JSON array of objects merged into the config, or `@path` to a file holding one.
        #[arg(long)]
        grid: String,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Inject a known defect; the battery should then fail.
        #[arg(long, value_parser = ["broken-code-rate"])]
        fault: Option<String>,
        /// Comma-separated criterion ids; all of them by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Write the JSON manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Merlin strategy as JSON, e.g. '{"variant":"ne_tamper","u":4,"v":0}'.
    #[arg(long)]
    adversary: Option<String>,
    /// Multiplier on copy, survivor and sample counts.
    #[arg(long)]
    scale: Option<f64>,
    /// monte_carlo, exact or both.
    #[arg(long)]
    mode: Option<String>,
    /// Append results to `<out>.jsonl` and `<out>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config JSON file; its fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (default from SMP_LAB_WORKERS or the core count).
    #[arg(long)]
    workers: Option<usize>,
}

struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_object() && v.is_object() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut v = Value::Object(Map::new());
        let mut set = |k: &str, x: Value| {
            merge(&mut v, json!({ k: x }));
        };
        if let Some(p) = &self.protocol {
            set("protocol", json!(p));
        }
        if let Some(n) = self.n {
            set("n", json!(n));
        }
        if let Some(t) = self.trials {
            set("trials", json!(t));
        }
        if let Some(s) = self.seed {
            set("seed", json!(s));
        }
        if let Some(a) = &self.adversary {
            set("adversary", serde_json::from_str::<Value>(a)?);
        }
        if let Some(s) = self.scale {
            set("params", json!({"scale": s, "sample_scale": s}));
        }
        if let Some(m) = &self.mode {
            set("mode", json!(m.replace('-', "_")));
        }
        if let Some(o) = &self.out {
            set("out", json!(o));
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            merge(&mut v, serde_json::from_str(&text)?);
        }
        Ok(ExperimentConfig::from_json(&v.to_string())?)
    }

    fn workers(&self) -> usize {
        self.workers.filter(|&w| w > 0).unwrap_or_else(worker_count)
    }
}

fn read_grid(arg: &str) -> Result<Vec<Value>, ConfigError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn verify(seed: u64, fault: Option<String>, only: Vec<u8>, manifest: Option<PathBuf>) -> Result<bool, ConfigError> {
    let opts = VerifyOptions {
        seed,
        fault: fault.map(|_| Fault::BrokenCodeRate),
    };
    let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|(id, _)| *id).collect() } else { only };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
        return Err(ConfigError(format!("no criterion {bad}")));
    }
    let criteria: Vec<_> = ids
        .into_iter()
        .map(|id| {
            let r = criterion(id, &opts);
            println!("{}", r.line());
            r
        })
        .collect();
    let m = Manifest {
        seed,
        fault: opts.fault,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    };
    let failed = m.criteria.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", m.criteria.len() - failed, m.criteria.len());
    if let Some(path) = manifest {
        std::fs::write(&path, serde_json::to_string_pretty(&m)?).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(m.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(exp) => exp
            .config()
            .and_then(|c| Ok(run_with_workers(&c, exp.workers())?))
            .and_then(|r| {
                println!("{}", serde_json::to_string_pretty(&r)?);
                Ok(true)
            }),
        Command::Sweep { exp, grid } => exp.config().and_then(|c| {
            let grid = read_grid(&grid)?;
            for r in sweep_with_workers(&c, &grid, exp.workers())? {
                println!("{}", serde_json::to_string(&r)?);
            }
            Ok(true)
        }),
        Command::Verify { seed, fault, only, manifest } => verify(seed, fault, only, manifest),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(ConfigError(msg)) => {
            eprintln!("smp-lab: {msg}");
            ExitCode::from(2)
        }
    }
}
