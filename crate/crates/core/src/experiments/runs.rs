//! The named experiments.

use rayon::prelude::*;

use crate::coefficients::{
    build_mean_field_coefficient, build_path_coefficient, CoefficientSpec, SharedMeanFieldCoefficient,
    SharedPathCoefficient,
};
use crate::error::{Error, Result};
use crate::meanfield::{distribution_iterate, self_consistent_solve, W2Options};
use crate::monotone::{ConvexDomain, MonotoneOperator};
use crate::segments::{Segment, TimeGrid, TrajectoryPair};
use crate::solver::{
    contraction_report, picard_fixed_point, picard_iterate, smallness_horizon, solve_path, NoisePath, Scheme,
    SolverConfig,
};
use crate::stats::{mean, regression_slope, Estimate};

use super::{ExperimentConfig, InitialSpec, ResultRecord, RunOutput};

/// `(E X(T), E X(T)², E|K|_0^T)` for `σ`-scaled Brownian motion reflected at its start.
pub fn reflected_bm_targets(sigma: f64, horizon: f64) -> (f64, f64, f64) {
    let first = sigma.abs() * (2.0 * horizon / std::f64::consts::PI).sqrt();
    (first, sigma * sigma * horizon, first)
}

/// Mean `m(t)` of the linear delay equation `m'(t) = -(m(t) - w·m(t - r0))`
/// with `m ≡ initial` on `[-r0, 0]`, by RK4 on a fine grid with cubic Hermite
/// interpolation of the history at half steps.
pub fn method_of_steps_mean(weight: f64, initial: f64, r0: f64, t: f64) -> f64 {
    if r0 == 0.0 {
        return initial * (-(1.0 - weight) * t).exp();
    }
    let per = 2000usize;
    let h = r0 / per as f64;
    let n = (t / h).ceil() as usize;
    let mut hist = vec![initial; per + 1];
    let f = |m: f64, d: f64| -(m - weight * d);
    // right-hand m' at each node; zero on the constant history, kink at t = 0
    let mut slope = vec![0.0; per + 1];
    slope[per] = f(initial, initial);
    for step in 0..n {
        let m = hist[per + step];
        let (d0, d1) = (hist[step], hist[step + 1]);
        let dm = if step < per {
            d0
        } else {
            0.5 * (d0 + d1) + h / 8.0 * (slope[step] - slope[step + 1])
        };
        let k1 = f(m, d0);
        let k2 = f(m + 0.5 * h * k1, dm);
        let k3 = f(m + 0.5 * h * k2, dm);
        let k4 = f(m + h * k3, d1);
        let next = m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        hist.push(next);
        slope.push(f(next, d1));
    }
    let x = t / h;
    let lo = (x.floor() as usize).min(n);
    let hi = (lo + 1).min(n);
    let w = x - lo as f64;
    hist[per + lo] * (1.0 - w) + hist[per + hi] * w
}

fn path_coefficients(cfg: &ExperimentConfig) -> Result<(SharedPathCoefficient, SharedPathCoefficient)> {
    let m = cfg.experiment.noise_dim;
    let f = build_path_coefficient(&cfg.drift, m).map_err(|e| Error::config("drift", e.to_string()))?;
    let g = build_path_coefficient(&cfg.diffusion, m).map_err(|e| Error::config("diffusion", e.to_string()))?;
    Ok((f, g))
}

fn mean_field_coefficients(cfg: &ExperimentConfig) -> Result<(SharedMeanFieldCoefficient, SharedMeanFieldCoefficient)> {
    let m = cfg.experiment.noise_dim;
    let b = build_mean_field_coefficient(&cfg.drift, m).map_err(|e| Error::config("drift", e.to_string()))?;
    let s = build_mean_field_coefficient(&cfg.diffusion, m).map_err(|e| Error::config("diffusion", e.to_string()))?;
    Ok((b, s))
}

/// Runs `f` for every path index in parallel; results come back in index order.
fn per_path<T: Send>(n: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(i).map_err(|e| e.at_particle(i as usize)))
        .collect()
}

fn constant_sigma(cfg: &ExperimentConfig) -> Result<f64> {
    if cfg.diffusion.name != "constant_diffusion" {
        return Err(Error::config(
            "diffusion.name",
            "this oracle needs `constant_diffusion`",
        ));
    }
    cfg.diffusion.number("sigma", 1.0)
}

fn keep_trajectories(
    cfg: &ExperimentConfig,
    paths: impl IntoIterator<Item = TrajectoryPair>,
) -> Vec<(String, TrajectoryPair)> {
    paths
        .into_iter()
        .take(cfg.output.trajectories)
        .enumerate()
        .map(|(i, p)| (format!("path_{i}"), p))
        .collect()
}

fn output(
    cfg: &ExperimentConfig,
    records: Vec<ResultRecord>,
    trajectories: Vec<(String, TrajectoryPair)>,
) -> RunOutput {
    RunOutput {
        config: cfg.clone(),
        records,
        trajectories,
        flows: None,
        seconds: 0.0,
    }
}

/// Reflection level and initial value of the reflected-BM oracle.
fn reflected_bm_setup(cfg: &ExperimentConfig) -> Result<f64> {
    let lower = match &cfg.operator {
        MonotoneOperator::NormalCone {
            domain: ConvexDomain::Halfline { lower },
        } => *lower,
        _ => {
            return Err(Error::config(
                "operator",
                "this oracle needs the normal cone of a half-line",
            ))
        }
    };
    if cfg.drift.name != "zero" {
        return Err(Error::config("drift.name", "this oracle needs the `zero` drift"));
    }
    match &cfg.initial {
        InitialSpec::Constant { value } if value == &[lower] => Ok(lower),
        _ => Err(Error::config("initial", "this oracle starts at the reflection level")),
    }
}

struct ReflectedSample {
    x: f64,
    variation: f64,
    path: Option<TrajectoryPair>,
}

fn reflected_sample(
    solver: &SolverConfig,
    coeffs: &(SharedPathCoefficient, SharedPathCoefficient),
    noise: &NoisePath,
    lower: f64,
    keep: bool,
) -> Result<ReflectedSample> {
    let grid = solver.grid;
    let xi = Segment::constant(&grid, &[lower])?;
    let traj = solve_path(solver, &xi, coeffs.0.as_ref(), coeffs.1.as_ref(), noise)?;
    Ok(ReflectedSample {
        x: traj.state(grid.steps())[0] - lower,
        variation: traj.variation_between(0, grid.steps())?,
        path: keep.then_some(traj),
    })
}

pub(super) fn reflected_bm_oracle(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let lower = reflected_bm_setup(cfg)?;
    let sigma = constant_sigma(cfg)?;
    let solver = cfg.solver_config()?;
    let grid = solver.grid;
    let coeffs = path_coefficients(cfg)?;
    let samples = per_path(cfg.experiment.paths, |i| {
        let noise = cfg.noise_path(&grid, i);
        reflected_sample(&solver, &coeffs, &noise, lower, (i as usize) < cfg.output.trajectories)
    })?;
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let x2: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let ks: Vec<f64> = samples.iter().map(|s| s.variation).collect();
    let (t_mean, t_second, t_var) = reflected_bm_targets(sigma, grid.horizon());
    let tol = &cfg.tolerance;
    let dt = grid.dt();
    let records = vec![
        ResultRecord::statistical(
            name,
            "mean_x_T",
            &Estimate::from_samples(&xs),
            t_mean,
            tol.se_multiplier,
            tol.bias_dt * dt,
        ),
        ResultRecord::statistical(
            name,
            "second_moment_x_T",
            &Estimate::from_samples(&x2),
            t_second,
            tol.se_multiplier,
            tol.bias_dt * dt,
        ),
        ResultRecord::statistical(
            name,
            "mean_k_variation",
            &Estimate::from_samples(&ks),
            t_var,
            tol.se_multiplier,
            tol.variation_bias_dt * dt,
        ),
    ];
    Ok(output(
        cfg,
        records,
        keep_trajectories(cfg, samples.into_iter().filter_map(|s| s.path)),
    ))
}

pub(super) fn k_variation_stability(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let lower = reflected_bm_setup(cfg)?;
    let coarse = cfg.solver_config()?;
    let fine_grid = TimeGrid::from_steps(
        coarse.grid.dt() / 2.0,
        2 * coarse.grid.delay_steps(),
        2 * coarse.grid.steps(),
    )?;
    let mut fine = coarse.clone();
    fine.grid = fine_grid;
    let coeffs = path_coefficients(cfg)?;
    let (seed, m) = (cfg.experiment.seed, cfg.experiment.noise_dim);
    let bridge = cfg.experiment.scheme == Scheme::ReflectedBridge;
    let pairs = per_path(cfg.experiment.paths, |i| {
        let mut fine_noise = NoisePath::generate(&fine_grid, m, seed, i);
        let mut coarse_noise = fine_noise.coarsen(2)?;
        if bridge {
            fine_noise = fine_noise.with_bridge_uniforms(seed, i);
            coarse_noise = coarse_noise.with_bridge_uniforms(seed ^ 0x5bd1_e995, i);
        }
        let keep = (i as usize) < cfg.output.trajectories;
        let a = reflected_sample(&coarse, &coeffs, &coarse_noise, lower, keep)?;
        let b = reflected_sample(&fine, &coeffs, &fine_noise, lower, false)?;
        Ok((a, b.variation))
    })?;
    let coarse_k: Vec<f64> = pairs.iter().map(|p| p.0.variation).collect();
    let fine_k: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let a = Estimate::from_samples(&coarse_k);
    let b = Estimate::from_samples(&fine_k);
    let records = vec![
        ResultRecord::info(name, "mean_k_variation_dt", a.mean).with_std_err(a.std_err),
        ResultRecord::info(name, "mean_k_variation_half_dt", b.mean).with_std_err(b.std_err),
        ResultRecord::check(
            name,
            "relative_change",
            (a.mean - b.mean).abs() / b.mean.abs(),
            0.0,
            cfg.tolerance.variation_rel,
        ),
    ];
    Ok(output(
        cfg,
        records,
        keep_trajectories(cfg, pairs.into_iter().filter_map(|p| p.0.path)),
    ))
}

pub(super) fn delay_mean_oracle(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    if cfg.drift.name != "mf_linear" || cfg.drift.text("reads", "delay")? != "delay" {
        return Err(Error::config(
            "drift",
            "this oracle needs `mf_linear` reading the delayed value",
        ));
    }
    if cfg.operator != MonotoneOperator::Zero {
        return Err(Error::config("operator", "this oracle needs the zero operator"));
    }
    let initial = match &cfg.initial {
        InitialSpec::Constant { value } if value.len() == 1 => value[0],
        _ => {
            return Err(Error::config(
                "initial",
                "this oracle needs a one-dimensional constant segment",
            ))
        }
    };
    constant_sigma(cfg)?;
    let weight = cfg.drift.number("weight", 1.0)?;
    let solver = cfg.solver_config()?;
    let grid = solver.grid;
    let (b, s) = mean_field_coefficients(cfg)?;
    let n = cfg.experiment.particles;
    let xi: Vec<Segment> = (0..n as u64)
        .map(|i| cfg.initial_segment(&grid, i))
        .collect::<Result<_>>()?;
    let noises: Vec<NoisePath> = (0..n as u64)
        .into_par_iter()
        .map(|i| cfg.noise_path(&grid, i))
        .collect();
    let flow = self_consistent_solve(&solver, &xi, b.as_ref(), s.as_ref(), &noises)?;
    let last = grid.delay_steps().min(grid.steps());
    let mut max_err: f64 = 0.0;
    let mut max_se: f64 = 0.0;
    let mut column = vec![0.0; n];
    for k in 0..=last {
        for (c, p) in column.iter_mut().zip(flow.paths()) {
            *c = p.state(k)[0];
        }
        let est = Estimate::from_samples(&column);
        let target = method_of_steps_mean(weight, initial, grid.r0(), grid.time(k));
        max_err = max_err.max((est.mean - target).abs());
        max_se = max_se.max(est.std_err);
    }
    let tol = &cfg.tolerance;
    let records = vec![
        ResultRecord::check(
            name,
            "max_abs_mean_error",
            max_err,
            0.0,
            tol.se_multiplier * max_se + tol.bias_dt * grid.dt(),
        )
        .with_std_err(max_se),
        ResultRecord::info(name, "window_end", grid.time(last)),
    ];
    let trajectories = keep_trajectories(cfg, flow.into_paths());
    Ok(output(cfg, records, trajectories))
}

/// Grid steps of the contraction window `[0, t0]`.
fn contraction_window(
    cfg: &ExperimentConfig,
    f: &SharedPathCoefficient,
    g: &SharedPathCoefficient,
    grid: &TimeGrid,
) -> Result<usize> {
    let t0 = match cfg.params.t0 {
        Some(t0) => t0,
        None => {
            let l2 = match (f.lipschitz_sq(), g.lipschitz_sq()) {
                (Some(a), Some(b)) => a + b,
                _ => {
                    return Err(Error::config(
                        "params.t0",
                        "coefficients have no known Lipschitz constant; set t0",
                    ))
                }
            };
            smallness_horizon(l2, cfg.params.bdg_constant, grid.dt())
                .map_err(|e| Error::config("params.t0", e.to_string()))?
        }
    };
    let steps = (t0 / grid.dt() + 1e-9).floor() as usize;
    if steps == 0 || steps > grid.steps() {
        return Err(Error::config(
            "params.t0",
            format!("window t0 = {t0} does not fit the grid"),
        ));
    }
    Ok(steps)
}

pub(super) fn picard_contraction(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let solver = cfg.solver_config()?;
    let grid = solver.grid;
    let (f, g) = path_coefficients(cfg)?;
    let window = contraction_window(cfg, &f, &g, &grid)?;
    let n_iters = cfg.experiment.n_iters;
    if n_iters < 3 {
        return Err(Error::config(
            "experiment.n_iters",
            "the contraction report needs at least three iterates",
        ));
    }
    let ensemble = per_path(cfg.experiment.paths, |i| {
        let xi = cfg.initial_segment(&grid, i)?;
        picard_iterate(&solver, &xi, f.as_ref(), g.as_ref(), &cfg.noise_path(&grid, i), n_iters)
    })?;
    let report = contraction_report(&ensemble, Some(window))?;
    let mut records = vec![ResultRecord::info(name, "t0", grid.time(window))];
    for row in &report.rows {
        records.push(
            ResultRecord::info(name, format!("d_{}", row.n), row.estimate.mean).with_std_err(row.estimate.std_err),
        );
    }
    let means: Vec<f64> = report.rows.iter().map(|r| r.estimate.mean).collect();
    for n in 1..means.len() {
        let ratio = means[n] / means[n - 1].max(f64::MIN_POSITIVE);
        let metric = format!("ratio_{}", n);
        records.push(if n == 1 {
            ResultRecord::info(name, metric, ratio)
        } else {
            ResultRecord::check(name, metric, ratio, 0.0, cfg.tolerance.ratio_max)
        });
    }
    let increases = means.windows(2).filter(|w| w[1] > w[0]).count();
    records.push(ResultRecord::check(
        name,
        "monotone_violations",
        increases as f64,
        0.0,
        0.0,
    ));
    let finals = ensemble.into_iter().map(|mut it| it.pop().expect("n_iters >= 3"));
    Ok(output(cfg, records, keep_trajectories(cfg, finals)))
}

/// A constant path on the boundary of the domain, or far from the initial data when there is none.
fn adversarial_start(grid: &TimeGrid, op: &MonotoneOperator, dim: usize) -> Result<TrajectoryPair> {
    let point = match op.domain() {
        Some(ConvexDomain::Halfline { lower }) => vec![*lower],
        Some(ConvexDomain::Halfspace { normal, offset }) => normal.iter().map(|n| n * offset).collect(),
        Some(ConvexDomain::Box { lower, upper }) => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| {
                if l.is_finite() {
                    *l
                } else if u.is_finite() {
                    *u
                } else {
                    0.0
                }
            })
            .collect(),
        Some(ConvexDomain::Ball { center, radius }) => {
            let mut c = center.clone();
            c[0] += radius;
            c
        }
        None => vec![-5.0; dim],
    };
    let values = point.iter().copied().cycle().take(grid.path_len() * dim).collect();
    TrajectoryPair::from_path(grid, dim, values)
}

pub(super) fn uniqueness(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let solver = cfg.solver_config()?;
    let grid = solver.grid;
    let (f, g) = path_coefficients(cfg)?;
    let dim = cfg.experiment.dim;
    let (tol, max_iters) = (cfg.params.fixed_point_tol, cfg.experiment.n_iters);
    let runs = per_path(cfg.experiment.paths, |i| {
        let xi = cfg.initial_segment(&grid, i)?;
        let noise = cfg.noise_path(&grid, i);
        let natural = TrajectoryPair::initial_extension(&grid, &xi)?;
        let adversarial = adversarial_start(&grid, &solver.operator, dim)?;
        let a = picard_fixed_point(&solver, &xi, f.as_ref(), g.as_ref(), &noise, natural, tol, max_iters)?;
        let b = picard_fixed_point(
            &solver,
            &xi,
            f.as_ref(),
            g.as_ref(),
            &noise,
            adversarial,
            tol,
            max_iters,
        )?;
        let distance = a.path.sup_distance(&b.path, grid.steps());
        Ok((
            distance,
            a.iterations.max(b.iterations),
            a.last_change.max(b.last_change),
            a.path,
        ))
    })?;
    type Run = (f64, usize, f64, TrajectoryPair);
    let max_of = |pick: &dyn Fn(&Run) -> f64| runs.iter().map(pick).fold(0.0, f64::max);
    let records = vec![
        ResultRecord::check(
            name,
            "max_sup_distance",
            max_of(&|r| r.0),
            0.0,
            cfg.tolerance.deterministic,
        ),
        ResultRecord::info(name, "max_iterations", max_of(&|r| r.1 as f64)),
        ResultRecord::info(name, "max_final_change", max_of(&|r| r.2)),
    ];
    Ok(output(
        cfg,
        records,
        keep_trajectories(cfg, runs.into_iter().map(|r| r.3)),
    ))
}

/// `E sup|X^δ - X|²` for each `δ`, on shared noise.
fn perturbation_distances(
    cfg: &ExperimentConfig,
    solver: &SolverConfig,
    f: &SharedPathCoefficient,
    g: &SharedPathCoefficient,
    deltas: &[f64],
) -> Result<(Vec<Estimate>, Vec<TrajectoryPair>)> {
    let grid = solver.grid;
    let dim = cfg.experiment.dim;
    let per = per_path(cfg.experiment.paths, |i| {
        let xi = cfg.initial_segment(&grid, i)?;
        let noise = cfg.noise_path(&grid, i);
        let base = solve_path(solver, &xi, f.as_ref(), g.as_ref(), &noise)?;
        let distances = deltas
            .iter()
            .map(|&d| {
                let moved = xi.shifted(&vec![d; dim]);
                let other = solve_path(solver, &moved, f.as_ref(), g.as_ref(), &noise)?;
                Ok(base.sup_distance_sq(&other, grid.steps()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((distances, base))
    })?;
    let estimates = (0..deltas.len())
        .map(|j| Estimate::from_samples(&per.iter().map(|p| p.0[j]).collect::<Vec<_>>()))
        .collect();
    Ok((estimates, per.into_iter().map(|p| p.1).collect()))
}

fn log_log_slope(deltas: &[f64], estimates: &[Estimate]) -> f64 {
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.mean.ln()).collect();
    regression_slope(&xs, &ys)
}

pub(super) fn continuity(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let solver = cfg.solver_config()?;
    let (f, g) = path_coefficients(cfg)?;
    let mut deltas = cfg.params.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let (estimates, bases) = perturbation_distances(cfg, &solver, &f, &g, &deltas)?;
    let mut records: Vec<ResultRecord> = deltas
        .iter()
        .zip(&estimates)
        .map(|(d, e)| ResultRecord::info(name, format!("distance_sq_delta_{d:e}"), e.mean).with_std_err(e.std_err))
        .collect();
    let means: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let violations = means.windows(2).filter(|w| w[1] >= w[0]).count();
    records.push(ResultRecord::check(
        name,
        "decreasing_violations",
        violations as f64,
        0.0,
        0.0,
    ));
    let first = means[0];
    let last = *means.last().expect("nonempty deltas");
    records.push(ResultRecord::check(
        name,
        "reduction_inverse",
        last / first.max(f64::MIN_POSITIVE),
        0.0,
        1.0 / cfg.tolerance.continuity_reduction,
    ));
    if deltas.len() >= 2 && means.iter().all(|m| *m > 0.0) {
        records.push(ResultRecord::info(
            name,
            "log_log_slope",
            log_log_slope(&deltas, &estimates),
        ));
    }
    let is_kappa = matches!(cfg.drift.name.as_str(), "kappa_drift" | "log_lipschitz_drift");
    if cfg.params.compare_linear && is_kappa && deltas.len() >= 2 {
        let linear = CoefficientSpec::new("kappa_drift")
            .with_text("kappa", "linear")
            .with("lipschitz", 1.0)
            .with("gain", cfg.drift.number("gain", 1.0)?);
        let f_lin = build_path_coefficient(&linear, cfg.experiment.noise_dim)?;
        let (lin, _) = perturbation_distances(cfg, &solver, &f_lin, &g, &deltas)?;
        let slope = if lin.iter().all(|e| e.mean > 0.0) {
            log_log_slope(&deltas, &lin)
        } else {
            0.0
        };
        records.push(ResultRecord::check(
            name,
            "linear_log_log_slope",
            slope,
            2.0,
            cfg.tolerance.slope_tol,
        ));
    }
    Ok(output(cfg, records, keep_trajectories(cfg, bases)))
}

fn mean_field_inputs(cfg: &ExperimentConfig, grid: &TimeGrid) -> Result<(Vec<Segment>, Vec<NoisePath>)> {
    let n = cfg.experiment.particles as u64;
    let xi = (0..n)
        .map(|i| cfg.initial_segment(grid, i))
        .collect::<Result<Vec<_>>>()?;
    let noises = (0..n).into_par_iter().map(|i| cfg.noise_path(grid, i)).collect();
    Ok((xi, noises))
}

pub(super) fn distribution_iteration(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let solver = cfg.solver_config()?;
    let (b, s) = mean_field_coefficients(cfg)?;
    let (xi, noises) = mean_field_inputs(cfg, &solver.grid)?;
    let n_iters = cfg.experiment.n_iters;
    if n_iters < 2 {
        return Err(Error::config(
            "experiment.n_iters",
            "need at least two distribution iterates",
        ));
    }
    let it = distribution_iterate(&solver, &xi, b.as_ref(), s.as_ref(), n_iters, &noises)?;
    let opts = W2Options {
        exact_cap: cfg.params.w2_exact_cap,
    };
    let d = it.successive_distances(opts)?;
    let mut records: Vec<ResultRecord> = d
        .iter()
        .enumerate()
        .map(|(n, w)| ResultRecord::info(name, format!("sup_w2_{n}"), w.value))
        .collect();
    let violations = d[1..].windows(2).filter(|w| w[1].value >= w[0].value).count();
    records.push(ResultRecord::check(
        name,
        "decrease_violations",
        violations as f64,
        0.0,
        0.0,
    ));
    records.push(ResultRecord::check(
        name,
        "final_sup_w2",
        d.last().expect("n_iters >= 2").value,
        0.0,
        cfg.tolerance.w2_max,
    ));
    records.push(ResultRecord::check(
        name,
        "max_second_moment",
        it.max_second_moment(),
        0.0,
        cfg.tolerance.moment_ceiling,
    ));
    records.push(ResultRecord::info(
        name,
        "w2_exact",
        if d.iter().all(|w| w.exact) { 1.0 } else { 0.0 },
    ));
    let mut out = output(cfg, records, keep_trajectories(cfg, it.ensemble().iter().cloned()));
    if cfg.output.flows {
        out.flows = Some(it);
    }
    Ok(out)
}

pub(super) fn mean_field_cross_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let name = cfg.experiment.name.as_str();
    let solver = cfg.solver_config()?;
    let (b, s) = mean_field_coefficients(cfg)?;
    let (xi, noises) = mean_field_inputs(cfg, &solver.grid)?;
    let it = distribution_iterate(
        &solver,
        &xi,
        b.as_ref(),
        s.as_ref(),
        cfg.experiment.n_iters.max(1),
        &noises,
    )?;
    let live = self_consistent_solve(&solver, &xi, b.as_ref(), s.as_ref(), &noises)?;
    let opts = W2Options {
        exact_cap: cfg.params.w2_exact_cap,
    };
    let profile = live.w2_profile(it.flows.last().expect("nonempty"), opts)?;
    let values: Vec<f64> = profile.iter().map(|w| w.value).collect();
    let records = vec![
        ResultRecord::check(name, "time_mean_w2", mean(&values), 0.0, cfg.tolerance.w2_max),
        ResultRecord::info(name, "sup_w2", values.iter().copied().fold(0.0, f64::max)),
    ];
    let mut out = output(cfg, records, keep_trajectories(cfg, live.paths().iter().cloned()));
    if cfg.output.flows {
        out.flows = Some(it);
    }
    Ok(out)
}
