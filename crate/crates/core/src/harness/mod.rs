//! Experiment runner: seeded parallel trials, exact cross-checks,
//! Hoeffding intervals and JSON-lines/CSV output.

mod config;
mod prepared;
mod run;

pub use config::{ExperimentConfig, Mode, ProtocolId, ProtocolParams};
pub use prepared::{Lengths, Prepared, TrialOutcome};
pub use run::{persist, run, run_with_workers, sweep, sweep_with_workers, worker_count, TrialReport, WORKERS_ENV};

/// Half-width `sqrt(ln(2/beta) / (2T))` of a two-sided Hoeffding interval
/// for a mean of `T` values in `[0, 1]`.
pub fn hoeffding_half_width(trials: usize, beta: f64) -> f64 {
    ((2.0 / beta).ln() / (2.0 * trials as f64)).sqrt()
}

/// Standard error of a Bernoulli frequency, `sqrt(p(1-p)/T)`.
pub fn bernoulli_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
