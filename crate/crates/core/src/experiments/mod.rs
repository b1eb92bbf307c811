//! Named experiments, their configuration and their outputs.
//!
//! Every experiment is a deterministic function of its [`ExperimentConfig`]:
//! paths and particles draw from counter-based substreams and all Monte Carlo
//! means are reduced in index order, so [`run_experiment`] returns identical
//! records for any thread count. Wall-clock time is reported separately.

mod config;
mod output;
mod runs;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::meanfield::DistributionIteration;
use crate::segments::TrajectoryPair;
use crate::stats::Estimate;

pub use config::{
    ExperimentConfig, GridSection, InitialSpec, OutputSection, ParamsSection, RunSection, ToleranceSection,
};
pub use output::{emit_outputs, read_results, OutputFiles, Timing};
pub use runs::{method_of_steps_mean, reflected_bm_targets};

/// Names accepted in `[experiment] name`.
pub const EXPERIMENTS: &[&str] = &[
    "reflected_bm_oracle",
    "k_variation_stability",
    "delay_mean_oracle",
    "picard_contraction",
    "uniqueness",
    "continuity",
    "distribution_iteration",
    "mean_field_cross_check",
];

/// One-line description of a named experiment.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "reflected_bm_oracle" => "reflected Brownian motion on [0,∞): E X(T), E X(T)², E|K| against closed forms",
        "k_variation_stability" => "E|K| of reflected Brownian motion at dt and dt/2 on coupled noise",
        "delay_mean_oracle" => "particle mean of the linear mean-field delay equation against the method of steps",
        "picard_contraction" => "Monte Carlo D_n of the Picard iteration on the smallness window [0, t0]",
        "uniqueness" => "Picard fixed points from two different starts on the same noise",
        "continuity" => "E sup|X^δ - X|² for perturbed initial segments under a log-Lipschitz drift",
        "distribution_iteration" => "sup_t W2 between successive measure flows of the distribution iteration",
        "mean_field_cross_check" => "W2 between the interacting particle system and the iterated flow",
        _ => return None,
    })
}

/// One checked (or informational) quantity of a run.
///
/// A record with a `target` passes iff `|value - target| <= tolerance`;
/// records without a target are informational and always pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub metric: String,
    pub value: f64,
    pub std_err: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl ResultRecord {
    pub fn check(experiment: &str, metric: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        ResultRecord {
            experiment: experiment.into(),
            metric: metric.into(),
            value,
            std_err: None,
            target: Some(target),
            tolerance: Some(tolerance),
            passed: value.is_finite() && (value - target).abs() <= tolerance,
        }
    }

    pub fn info(experiment: &str, metric: impl Into<String>, value: f64) -> Self {
        ResultRecord {
            experiment: experiment.into(),
            metric: metric.into(),
            value,
            std_err: None,
            target: None,
            tolerance: None,
            passed: true,
        }
    }

    pub fn with_std_err(mut self, se: f64) -> Self {
        self.std_err = Some(se);
        self
    }

    /// `|mean - target| <= k·SE + bias`.
    pub fn statistical(experiment: &str, metric: &str, est: &Estimate, target: f64, k: f64, bias: f64) -> Self {
        Self::check(experiment, metric, est.mean, target, k * est.std_err + bias).with_std_err(est.std_err)
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
    /// Sample trajectories, labelled.
    pub trajectories: Vec<(String, TrajectoryPair)>,
    pub flows: Option<DistributionIteration>,
    pub seconds: f64,
}

impl RunOutput {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }
}

/// Validates `cfg` and dispatches to the named experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = match cfg.experiment.name.as_str() {
        "reflected_bm_oracle" => runs::reflected_bm_oracle(cfg),
        "k_variation_stability" => runs::k_variation_stability(cfg),
        "delay_mean_oracle" => runs::delay_mean_oracle(cfg),
        "picard_contraction" => runs::picard_contraction(cfg),
        "uniqueness" => runs::uniqueness(cfg),
        "continuity" => runs::continuity(cfg),
        "distribution_iteration" => runs::distribution_iteration(cfg),
        "mean_field_cross_check" => runs::mean_field_cross_check(cfg),
        _ => unreachable!("validated"),
    }?;
    out.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}
