//! Mollified segments and Monte Carlo smoothing of a non-Lipschitz drift.

use std::sync::Arc;

use mvsde::coefficients::{mollify_segment, smooth_coefficient, KappaDrift, ModulusKappa, PathCoefficient};
use mvsde::rng::{substream, Stream};
use mvsde::segments::{Segment, TimeGrid};

fn main() -> mvsde::Result<()> {
    let grid = TimeGrid::new(0.01, 0.5, 1.0)?;
    let zeta = Segment::from_fn(&grid, 1, |t| vec![if t < -0.25 { -1.0 } else { 3.0 }])?;
    for n in [1, 4, 16] {
        let m = mollify_segment(&zeta.view(), n)?;
        println!(
            "n = {n:>2}: φ_n(ζ)(-r0) = {:.4}, φ_n(ζ)(0) = {:.4}, sup = {:.4}",
            m.point(0)[0],
            m.end()[0],
            m.sup_norm()
        );
    }

    let f = Arc::new(KappaDrift {
        kappa: ModulusKappa::log_lipschitz((-2.0f64).exp())?,
        gain: 1.0,
    });
    let mut rng = substream(9, Stream::Smoothing, 0);
    let smoothed = smooth_coefficient(f.clone(), 8, 2000, &grid, 1, &mut rng)?;
    let mut out = [0.0];
    for x in [-0.5, -0.01, 0.0, 0.01, 0.5] {
        let seg = Segment::constant(&grid, &[x])?;
        f.eval(0.0, &seg.view(), &mut out)?;
        let raw = out[0];
        smoothed.eval(0.0, &seg.view(), &mut out)?;
        println!("x = {x:>5}: f = {raw:>8.4}  f_8 = {:>8.4}", out[0]);
    }
    Ok(())
}
