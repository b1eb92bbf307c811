//! Interacting particles whose drift reads the delayed mean, against the method of steps.

use mvsde::coefficients::{ConstantDiffusion, LawFree, MeanFieldLinear};
use mvsde::experiments::method_of_steps_mean;
use mvsde::meanfield::{self_consistent_solve, LawFunctional};
use mvsde::monotone::MonotoneOperator;
use mvsde::segments::{Segment, TimeGrid};
use mvsde::solver::{NoisePath, Scheme, SolverConfig};
use mvsde::stats::mean;
use std::sync::Arc;

fn main() -> mvsde::Result<()> {
    let grid = TimeGrid::new(0.01, 1.0, 2.0)?;
    let cfg = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero)?;
    let b = MeanFieldLinear {
        weight: 0.5,
        functional: LawFunctional::EvalDelay,
    };
    let sigma = LawFree(Arc::new(ConstantDiffusion {
        sigma: 0.5,
        noise_dim: 1,
    }));
    let n = 2000;
    let xi_law = vec![Segment::constant(&grid, &[1.0])?; n];
    let noises: Vec<_> = (0..n as u64).map(|i| NoisePath::generate(&grid, 1, 5, i)).collect();
    let flow = self_consistent_solve(&cfg, &xi_law, &b, &sigma, &noises)?;
    for step in (0..=grid.steps()).step_by(25) {
        let t = grid.time(step);
        let xs: Vec<f64> = flow.paths().iter().map(|p| p.state(step)[0]).collect();
        println!(
            "t = {t:.2}  particle mean {:.4}  method of steps {:.4}",
            mean(&xs),
            method_of_steps_mean(0.5, 1.0, 1.0, t)
        );
    }
    Ok(())
}
