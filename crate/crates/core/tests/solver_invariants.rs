//! Pathwise invariants of the scheme checked with hand-written oracles.

use mvsde::coefficients::{mollify_segment, ConstantDiffusion, KappaDrift, LinearDelay, ModulusKappa, Zero};
use mvsde::monotone::{ConvexDomain, Graph1d, MonotoneOperator};
use mvsde::rng::{standard_normal, substream, Stream};
use mvsde::segments::{Segment, TimeGrid};
use mvsde::solver::{solve_path, NoisePath, Scheme, SolverConfig};

fn grid() -> TimeGrid {
    TimeGrid::new(0.01, 0.1, 1.0).unwrap()
}

fn config(op: MonotoneOperator, scheme: Scheme) -> SolverConfig {
    let mut cfg = SolverConfig::new(grid(), scheme, op).unwrap();
    cfg.verify_membership = false;
    cfg
}

#[test]
fn x_plus_k_is_the_free_euler_sum() {
    // zero drift: X_n + K_n = ξ(0) + σ·W_n up to round-off
    let grid = grid();
    let sigma = 1.3;
    let g = ConstantDiffusion { sigma, noise_dim: 1 };
    let cfg = config(
        MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0).unwrap()),
        Scheme::ResolventStep,
    );
    let xi = Segment::constant(&grid, &[0.2]).unwrap();
    for path in 0..50 {
        let noise = NoisePath::generate(&grid, 1, 7, path);
        let traj = solve_path(&cfg, &xi, &Zero, &g, &noise).unwrap();
        let mut w = 0.0;
        for k in 1..=grid.steps() {
            w += noise.increment(k - 1)[0];
            let lhs = traj.state(k)[0] + traj.k(k)[0];
            assert!((lhs - (0.2 + sigma * w)).abs() < 1e-12, "path {path} step {k}");
        }
    }
}

#[test]
fn states_stay_in_box_ball_and_halfspace() {
    let grid = grid();
    let domains = [
        ConvexDomain::cuboid(vec![-0.5, 0.0], vec![0.5, 1.0]).unwrap(),
        ConvexDomain::ball(vec![1.0, -1.0], 0.3).unwrap(),
        ConvexDomain::halfspace(vec![1.0, 1.0], 0.0).unwrap(),
    ];
    let f = LinearDelay { a: -2.0, b: 1.0 };
    let g = ConstantDiffusion {
        sigma: 2.0,
        noise_dim: 2,
    };
    for domain in domains {
        let start = domain.interior_point();
        let xi = Segment::constant(&grid, &start).unwrap();
        for scheme in [Scheme::ResolventStep, Scheme::ProjectThenStep] {
            let cfg = config(MonotoneOperator::normal_cone(domain.clone()), scheme);
            for path in 0..20 {
                let noise = NoisePath::generate(&grid, 2, 11, path);
                let traj = solve_path(&cfg, &xi, &f, &g, &noise).unwrap();
                for k in 0..=grid.steps() {
                    assert!(
                        domain.distance(traj.state(k)) <= 1e-12,
                        "{domain:?} {scheme:?} step {k}"
                    );
                }
            }
        }
    }
}

#[test]
fn box_increments_lie_in_the_normal_cone() {
    // componentwise: ΔK_i > 0 only at the upper face, < 0 only at the lower face
    let grid = grid();
    let (lo, hi) = (vec![-0.5, -1.0], vec![0.5, 0.25]);
    let cfg = config(
        MonotoneOperator::normal_cone(ConvexDomain::cuboid(lo.clone(), hi.clone()).unwrap()),
        Scheme::ResolventStep,
    );
    let g = ConstantDiffusion {
        sigma: 1.5,
        noise_dim: 2,
    };
    let xi = Segment::constant(&grid, &[0.0, 0.0]).unwrap();
    let mut pushes = 0;
    for path in 0..40 {
        let traj = solve_path(&cfg, &xi, &Zero, &g, &NoisePath::generate(&grid, 2, 3, path)).unwrap();
        for k in 1..=grid.steps() {
            let (x, dk) = (traj.state(k), traj.increment(k - 1));
            for i in 0..2 {
                if dk[i] > 0.0 {
                    assert_eq!(x[i], hi[i]);
                    pushes += 1;
                } else if dk[i] < 0.0 {
                    assert_eq!(x[i], lo[i]);
                    pushes += 1;
                }
            }
        }
    }
    assert!(pushes > 0);
}

#[test]
fn ball_increments_point_outward_from_the_boundary() {
    let grid = grid();
    let (c, r) = ([0.0, 0.0], 0.4);
    let cfg = config(
        MonotoneOperator::normal_cone(ConvexDomain::ball(c.to_vec(), r).unwrap()),
        Scheme::ProjectThenStep,
    );
    let g = ConstantDiffusion {
        sigma: 1.0,
        noise_dim: 2,
    };
    let xi = Segment::constant(&grid, &c).unwrap();
    for path in 0..40 {
        let traj = solve_path(&cfg, &xi, &Zero, &g, &NoisePath::generate(&grid, 2, 5, path)).unwrap();
        for k in 1..=grid.steps() {
            let (x, dk) = (traj.state(k), traj.increment(k - 1));
            let norm_dk = dk[0].hypot(dk[1]);
            if norm_dk == 0.0 {
                continue;
            }
            assert!((x[0].hypot(x[1]) - r).abs() < 1e-12);
            let cos = (dk[0] * x[0] + dk[1] * x[1]) / (norm_dk * r);
            assert!((cos - 1.0).abs() < 1e-9, "cos {cos}");
        }
    }
}

#[test]
fn sign_graph_increments_are_dt_times_a_selection() {
    let grid = grid();
    let dt = grid.dt();
    let cfg = config(MonotoneOperator::graph(Graph1d::sign()), Scheme::ResolventStep);
    let g = ConstantDiffusion {
        sigma: 0.2,
        noise_dim: 1,
    };
    let xi = Segment::constant(&grid, &[0.3]).unwrap();
    let mut at_zero = 0;
    for path in 0..40 {
        let traj = solve_path(&cfg, &xi, &Zero, &g, &NoisePath::generate(&grid, 1, 9, path)).unwrap();
        for k in 1..=grid.steps() {
            let (y, v) = (traj.state(k)[0], traj.increment(k - 1)[0] / dt);
            if y > 0.0 {
                assert!((v - 1.0).abs() < 1e-9);
            } else if y < 0.0 {
                assert!((v + 1.0).abs() < 1e-9);
            } else {
                assert!(v.abs() <= 1.0 + 1e-9);
                at_zero += 1;
            }
        }
    }
    // the sign graph pins small states at zero
    assert!(at_zero > 0);
}

#[test]
fn same_noise_same_path() {
    let grid = grid();
    let cfg = config(
        MonotoneOperator::normal_cone(ConvexDomain::halfline(-1.0).unwrap()),
        Scheme::ResolventStep,
    );
    let f = KappaDrift {
        kappa: ModulusKappa::log_lipschitz((-2.0f64).exp()).unwrap(),
        gain: 1.0,
    };
    let g = ConstantDiffusion {
        sigma: 1.0,
        noise_dim: 1,
    };
    let xi = Segment::constant(&grid, &[0.5]).unwrap();
    let noise = NoisePath::generate(&grid, 1, 13, 0);
    let a = solve_path(&cfg, &xi, &f, &g, &noise).unwrap();
    let b = solve_path(&cfg, &xi, &f, &g, &noise).unwrap();
    assert_eq!(a.path(), b.path());
    assert_eq!(a.increments(), b.increments());
}

#[test]
fn mollifier_is_bounded_and_lipschitz_in_the_input() {
    // sup-norm retraction onto the radius-n ball is 2-Lipschitz, the window average is 1-Lipschitz
    let grid = grid();
    let mut rng = substream(17, Stream::Instance, 0);
    for n in [1u32, 3, 10, 50] {
        for _ in 0..200 {
            let scale = 0.1 + 20.0 * standard_normal(&mut rng).abs();
            let a = Segment::from_fn(&grid, 1, |_| vec![scale * standard_normal(&mut rng)]).unwrap();
            let b = Segment::from_fn(&grid, 1, |_| vec![scale * standard_normal(&mut rng)]).unwrap();
            let (ma, mb) = (
                mollify_segment(&a.view(), n).unwrap(),
                mollify_segment(&b.view(), n).unwrap(),
            );
            assert!(ma.sup_norm() <= n as f64 * (1.0 + 1e-12));
            assert!(ma.sup_distance(&mb).unwrap() <= 2.0 * a.sup_distance(&b).unwrap() + 1e-12);
        }
    }
}
