//! Brownian motion reflected at zero: Monte Carlo moments against closed forms.

use mvsde::coefficients::{ConstantDiffusion, Zero};
use mvsde::experiments::reflected_bm_targets;
use mvsde::monotone::{ConvexDomain, MonotoneOperator};
use mvsde::segments::{Segment, TimeGrid};
use mvsde::solver::{solve_path, NoisePath, Scheme, SolverConfig};
use mvsde::stats::Estimate;

fn main() -> mvsde::Result<()> {
    let grid = TimeGrid::new(1e-3, 0.0, 1.0)?;
    let op = MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0)?);
    let g = ConstantDiffusion {
        sigma: 1.0,
        noise_dim: 1,
    };
    let xi = Segment::constant(&grid, &[0.0])?;
    let (t_mean, t_second, t_k) = reflected_bm_targets(1.0, 1.0);
    for scheme in [Scheme::ReflectedBridge, Scheme::ResolventStep] {
        let cfg = SolverConfig::new(grid, scheme, op.clone())?;
        let (mut x, mut x2, mut k) = (vec![], vec![], vec![]);
        for path in 0..20_000 {
            let noise = NoisePath::generate(&grid, 1, 42, path).with_bridge_uniforms(42, path);
            let traj = solve_path(&cfg, &xi, &Zero, &g, &noise)?;
            let end = traj.state(grid.steps())[0];
            x.push(end);
            x2.push(end * end);
            k.push(traj.total_variation(0.0, 1.0)?);
        }
        let (x, x2, k) = (
            Estimate::from_samples(&x),
            Estimate::from_samples(&x2),
            Estimate::from_samples(&k),
        );
        println!("{}:", scheme.name());
        println!("  E X(1)   = {:.4} ± {:.4}  (exact {t_mean:.4})", x.mean, x.std_err);
        println!("  E X(1)²  = {:.4} ± {:.4}  (exact {t_second:.4})", x2.mean, x2.std_err);
        println!("  E |K|_1  = {:.4} ± {:.4}  (exact {t_k:.4})", k.mean, k.std_err);
    }
    Ok(())
}
