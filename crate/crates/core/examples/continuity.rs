//! Sensitivity of the solution to its initial segment under a log-Lipschitz drift.

use mvsde::experiments::{run_experiment, ExperimentConfig};

fn main() -> mvsde::Result<()> {
    let mut cfg = ExperimentConfig::defaults("continuity")?;
    cfg.experiment.paths = 400;
    let out = run_experiment(&cfg)?;
    for r in &out.records {
        println!(
            "{:<28} {:.4e}{}",
            r.metric,
            r.value,
            if r.passed { "" } else { "  FAIL" }
        );
    }
    Ok(())
}
