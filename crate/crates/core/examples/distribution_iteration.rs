//! Fixed-point iteration on measure flows for a mean-field delay equation.

use mvsde::coefficients::{ConstantDiffusion, LawFree, MeanFieldLinear};
use mvsde::meanfield::{distribution_iterate, LawFunctional, W2Options};
use mvsde::monotone::MonotoneOperator;
use mvsde::rng::{standard_normal, substream, Stream};
use mvsde::segments::{Segment, TimeGrid};
use mvsde::solver::{NoisePath, Scheme, SolverConfig};
use std::sync::Arc;

fn main() -> mvsde::Result<()> {
    let grid = TimeGrid::new(0.01, 0.1, 1.0)?;
    let cfg = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero)?;
    let b = MeanFieldLinear {
        weight: 1.0,
        functional: LawFunctional::EvalDelay,
    };
    let sigma = LawFree(Arc::new(ConstantDiffusion {
        sigma: 0.5,
        noise_dim: 1,
    }));
    let n = 128;
    let xi_law = (0..n as u64)
        .map(|i| {
            let level = 1.0 + 0.5 * standard_normal(&mut substream(3, Stream::InitialLaw, i));
            Segment::from_fn(&grid, 1, |t| vec![level + t])
        })
        .collect::<mvsde::Result<Vec<_>>>()?;
    let noises: Vec<_> = (0..n as u64).map(|i| NoisePath::generate(&grid, 1, 3, i)).collect();
    let it = distribution_iterate(&cfg, &xi_law, &b, &sigma, 8, &noises)?;
    for (k, w) in it.successive_distances(W2Options::default())?.iter().enumerate() {
        println!("sup_t W2(mu^{k}, mu^{}) = {:.3e}", k + 1, w.value);
    }
    println!("max second moment = {:.4}", it.max_second_moment());
    Ok(())
}
