//! Picard iteration for a delay equation with reflection, and its contraction table.

use mvsde::coefficients::{ConstantDiffusion, LinearDelay, PathCoefficient};
use mvsde::monotone::{ConvexDomain, MonotoneOperator};
use mvsde::segments::{Segment, TimeGrid};
use mvsde::solver::{contraction_report, picard_iterate, smallness_horizon, NoisePath, Scheme, SolverConfig};

fn main() -> mvsde::Result<()> {
    let f = LinearDelay { a: 0.5, b: 0.25 };
    let g = ConstantDiffusion {
        sigma: 1.0,
        noise_dim: 1,
    };
    let l2 = f.lipschitz_sq().unwrap() + g.lipschitz_sq().unwrap();
    let t0 = smallness_horizon(l2, 4.0, 1e-3)?;
    let grid = TimeGrid::new(1e-3, 0.02, 0.2)?;
    let cfg = SolverConfig::new(
        grid,
        Scheme::ResolventStep,
        MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0)?),
    )?;
    let xi = Segment::constant(&grid, &[1.0])?;
    let ensemble = (0..500)
        .map(|p| picard_iterate(&cfg, &xi, &f, &g, &NoisePath::generate(&grid, 1, 7, p), 8))
        .collect::<mvsde::Result<Vec<_>>>()?;
    let report = contraction_report(&ensemble, Some(grid.step_of(t0)?))?;
    println!("window [0, {t0:.3}]");
    for row in &report.rows {
        let ratio = row.ratio.map_or("-".to_string(), |r| format!("{r:.3e}"));
        println!(
            "D_{} = {:.3e} ± {:.1e}   ratio {ratio}",
            row.n, row.estimate.mean, row.estimate.std_err
        );
    }
    Ok(())
}
