//! Exact W2 between empirical segment laws under the sup-norm cost.

use mvsde::meanfield::{hungarian, wasserstein2, wasserstein2_with, EmpiricalSegmentLaw, W2Options};
use mvsde::rng::{standard_normal, substream, Stream};
use mvsde::segments::{Segment, TimeGrid};

fn main() -> mvsde::Result<()> {
    let grid = TimeGrid::new(0.05, 0.5, 1.0)?;
    let mut rng = substream(1, Stream::Instance, 0);
    let mut law = |shift: f64| -> mvsde::Result<Vec<Segment>> {
        (0..64)
            .map(|_| {
                let level = shift + standard_normal(&mut rng);
                Segment::from_fn(&grid, 1, |t| vec![level + t])
            })
            .collect()
    };
    let (a, b) = (law(0.0)?, law(0.5)?);
    let (la, lb) = (
        EmpiricalSegmentLaw::from_segments(&a)?,
        EmpiricalSegmentLaw::from_segments(&b)?,
    );
    println!("W2(a, b) = {:.5}", wasserstein2(&la, &lb)?);
    println!("W2(a, a) = {:.5}", wasserstein2(&la, &la)?);
    let bound = wasserstein2_with(&la, &lb, W2Options { exact_cap: 16 })?;
    println!(
        "greedy bound above the exact cap = {:.5} (exact: {})",
        bound.value, bound.exact
    );

    let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
    println!("assignment of a 3x3 cost matrix: {:?}", hungarian(&cost));
    Ok(())
}
