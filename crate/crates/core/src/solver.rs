//! Time stepping for the path-dependent multivalued SDE.
//!
//! The coefficients are treated explicitly (left-point, Euler–Maruyama) and
//! the monotone operator implicitly through its resolvent:
//!
//! ```text
//! p      = X(t_k) + f(t_k, X_{t_k})·dt + g(t_k, X_{t_k})·ΔW_k
//! X_next = J_dt(p)          ΔK_k = p - X_next ∈ dt·A(X_next)
//! ```
//!
//! Picard iteration freezes the coefficient argument at the previous
//! iterate's segments and reuses the same noise path for every iterate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::PathCoefficient;
use crate::error::{Error, Result};
use crate::monotone::{dot, ConvexDomain, MonotoneOperator, DEFAULT_TOL};
use crate::rng::{open_uniform, standard_normal, substream, Stream};
use crate::segments::{Segment, SegmentView, TimeGrid, TrajectoryBuilder, TrajectoryPair};
use crate::stats::Estimate;

/// How the multivalued term is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Backward Euler on `A`: `X_next = J_dt(p)`. Works for every operator.
    ResolventStep,
    /// `X_next = P_D(p)`; normal cones and the zero operator only.
    ProjectThenStep,
    /// Half-space reflection that samples the Brownian-bridge minimum of the
    /// normal coordinate within the step, removing the discrete-monitoring
    /// bias of plain projection. Needs bridge uniforms in the noise path.
    ReflectedBridge,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ResolventStep => "resolvent_step",
            Scheme::ProjectThenStep => "project_then_step",
            Scheme::ReflectedBridge => "reflected_bridge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: TimeGrid,
    pub scheme: Scheme,
    pub operator: MonotoneOperator,
    pub membership_tol: f64,
    /// Check `ΔK_k` membership after every step.
    pub verify_membership: bool,
}

impl SolverConfig {
    pub fn new(grid: TimeGrid, scheme: Scheme, operator: MonotoneOperator) -> Result<Self> {
        let cfg = SolverConfig {
            grid,
            scheme,
            operator,
            membership_tol: DEFAULT_TOL,
            verify_membership: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(domain) = self.operator.domain() {
            domain.validate()?;
        }
        match (self.scheme, &self.operator) {
            (Scheme::ProjectThenStep, MonotoneOperator::Graph1d { .. }) => {
                Err(Error::invalid("project_then_step needs a normal-cone or zero operator"))
            }
            (
                Scheme::ReflectedBridge,
                MonotoneOperator::NormalCone {
                    domain: ConvexDomain::Halfspace { .. } | ConvexDomain::Halfline { .. },
                },
            ) => Ok(()),
            (Scheme::ReflectedBridge, _) => Err(Error::invalid(
                "reflected_bridge needs the normal cone of a half-space or half-line",
            )),
            _ => Ok(()),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.operator.dim() {
            Some(d) if d != dim => Err(Error::invalid(format!(
                "state dimension {dim} does not match the operator dimension {d}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Brownian increments `ΔW_k ~ N(0, dt·I_m)` for one path, stored for reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    dim: usize,
    dt: f64,
    increments: Vec<f64>,
    bridge: Option<Vec<f64>>,
}

impl NoisePath {
    /// Increments from the Brownian substream `(seed, path)`.
    pub fn generate(grid: &TimeGrid, dim: usize, seed: u64, path: u64) -> Self {
        let mut rng = substream(seed, Stream::Brownian, path);
        Self::from_rng(grid, dim, &mut rng)
    }

    pub fn from_rng<R: Rng + ?Sized>(grid: &TimeGrid, dim: usize, rng: &mut R) -> Self {
        let sd = grid.dt().sqrt();
        let increments = (0..grid.steps() * dim).map(|_| sd * standard_normal(rng)).collect();
        NoisePath {
            dim,
            dt: grid.dt(),
            increments,
            bridge: None,
        }
    }

    /// Attaches one open-interval uniform per step from the bridge substream `(seed, path)`.
    pub fn with_bridge_uniforms(mut self, seed: u64, path: u64) -> Self {
        let mut rng = substream(seed, Stream::Bridge, path);
        self.bridge = Some((0..self.steps()).map(|_| open_uniform(&mut rng)).collect());
        self
    }

    pub fn from_increments(grid: &TimeGrid, dim: usize, increments: Vec<f64>) -> Result<Self> {
        if dim == 0 || increments.len() != grid.steps() * dim {
            return Err(Error::invalid("noise increments do not match the grid"));
        }
        Ok(NoisePath {
            dim,
            dt: grid.dt(),
            increments,
            bridge: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.increments.len() / self.dim
    }

    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.dim..(step + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn bridge_uniform(&self, step: usize) -> Option<f64> {
        self.bridge.as_ref().map(|b| b[step])
    }

    /// Sums groups of `factor` consecutive increments (same Brownian path on a coarser grid).
    pub fn coarsen(&self, factor: usize) -> Result<NoisePath> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::invalid("coarsening factor must divide the step count"));
        }
        let steps = self.steps() / factor;
        let mut increments = vec![0.0; steps * self.dim];
        for k in 0..steps {
            for j in 0..factor {
                let src = self.increment(k * factor + j);
                for (acc, v) in increments[k * self.dim..(k + 1) * self.dim].iter_mut().zip(src) {
                    *acc += v;
                }
            }
        }
        Ok(NoisePath {
            dim: self.dim,
            dt: self.dt * factor as f64,
            increments,
            bridge: None,
        })
    }

    fn check(&self, grid: &TimeGrid) -> Result<()> {
        if self.steps() != grid.steps() || (self.dt - grid.dt()).abs() > 1e-15 * grid.dt() {
            return Err(Error::invalid("noise path does not match the grid"));
        }
        Ok(())
    }
}

/// Half-space data `{<n, x> <= c}` for the bridge scheme.
fn halfspace_of(domain: &ConvexDomain) -> (&[f64], f64) {
    match domain {
        ConvexDomain::Halfspace { normal, offset } => (normal, *offset),
        ConvexDomain::Halfline { lower } => (&[-1.0], -lower),
        _ => unreachable!("validated by SolverConfig"),
    }
}

/// One step, writing into `x_next` and `dk`.
#[allow(clippy::too_many_arguments)]
fn step_into(
    cfg: &SolverConfig,
    x: &[f64],
    drift: &[f64],
    diffusion: &[f64],
    dw: &[f64],
    bridge_u: Option<f64>,
    x_next: &mut [f64],
    dk: &mut [f64],
) -> Result<()> {
    let dt = cfg.grid.dt();
    let tol = cfg.membership_tol;
    let m = dw.len();
    let dist = cfg.operator.distance_to_domain(x);
    if dist > tol * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt()) {
        return Err(Error::Precondition(format!(
            "state is at distance {dist:e} outside the domain"
        )));
    }
    for i in 0..x.len() {
        let mut p = x[i] + drift[i] * dt;
        for j in 0..m {
            p += diffusion[i * m + j] * dw[j];
        }
        x_next[i] = p;
    }
    match cfg.scheme {
        Scheme::ResolventStep => {
            dk.copy_from_slice(x_next);
            cfg.operator.resolvent_in_place(dt, x_next)?;
        }
        Scheme::ProjectThenStep => {
            dk.copy_from_slice(x_next);
            if let Some(domain) = cfg.operator.domain() {
                domain.project_in_place(x_next);
            }
        }
        Scheme::ReflectedBridge => {
            let domain = cfg.operator.domain().expect("validated");
            let (normal, offset) = halfspace_of(domain);
            let u =
                bridge_u.ok_or_else(|| Error::invalid("reflected_bridge needs bridge uniforms in the noise path"))?;
            let s0 = offset - dot(normal, x);
            let s1 = offset - dot(normal, x_next);
            // variance of the normal coordinate over the step
            let var: f64 = (0..m)
                .map(|j| {
                    let c: f64 = (0..x.len()).map(|i| diffusion[i * m + j] * normal[i]).sum();
                    c * c
                })
                .sum::<f64>()
                * dt;
            let low = if var > 0.0 {
                0.5 * (s0 + s1 - ((s1 - s0) * (s1 - s0) - 2.0 * var * u.ln()).sqrt())
            } else {
                s0.min(s1)
            };
            let push = (-low).max(0.0);
            dk.copy_from_slice(x_next);
            for (xi, ni) in x_next.iter_mut().zip(normal.iter()) {
                *xi -= push * ni;
            }
        }
    }
    for (d, xn) in dk.iter_mut().zip(x_next.iter()) {
        *d -= xn;
    }
    if cfg.verify_membership {
        check_membership(cfg, x_next, dk)?;
    }
    Ok(())
}

fn check_membership(cfg: &SolverConfig, x_next: &[f64], dk: &[f64]) -> Result<()> {
    let tol = cfg.membership_tol;
    let ok = match cfg.scheme {
        Scheme::ResolventStep => {
            let v: Vec<f64> = dk.iter().map(|d| d / cfg.grid.dt()).collect();
            cfg.operator.contains(x_next, &v, tol)?
        }
        Scheme::ProjectThenStep => match cfg.operator.domain() {
            Some(domain) => domain.in_normal_cone(x_next, dk, tol)?,
            None => dk.iter().all(|d| *d == 0.0),
        },
        Scheme::ReflectedBridge => {
            // ΔK is a nonnegative multiple of the outward normal and x_next is admissible
            let (normal, offset) = halfspace_of(cfg.operator.domain().expect("validated"));
            let along = dot(dk, normal);
            let perp: f64 = dk
                .iter()
                .zip(normal.iter())
                .map(|(d, n)| (d - along * n).powi(2))
                .sum::<f64>()
                .sqrt();
            along >= -tol && perp <= tol * (1.0 + along.abs()) && dot(normal, x_next) <= offset + tol
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InternalConsistency(format!(
            "increment {dk:?} is not in the operator at {x_next:?}"
        )))
    }
}

/// One scheme step: returns `(X_next, ΔK)` with `X_next + ΔK = x + drift·dt + diffusion·dW`.
///
/// `diffusion` is a row-major `d×m` matrix with `m = dw.len()`.
pub fn euler_step(
    cfg: &SolverConfig,
    x: &[f64],
    drift: &[f64],
    diffusion: &[f64],
    dw: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    euler_step_with_bridge(cfg, x, drift, diffusion, dw, None)
}

/// [`euler_step`] with an explicit bridge uniform for the reflected bridge scheme.
pub fn euler_step_with_bridge(
    cfg: &SolverConfig,
    x: &[f64],
    drift: &[f64],
    diffusion: &[f64],
    dw: &[f64],
    bridge_u: Option<f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = x.len();
    cfg.check_dim(d)?;
    if drift.len() != d || diffusion.len() != d * dw.len() {
        return Err(Error::invalid("drift or diffusion has the wrong shape"));
    }
    let mut x_next = vec![0.0; d];
    let mut dk = vec![0.0; d];
    step_into(cfg, x, drift, diffusion, dw, bridge_u, &mut x_next, &mut dk)?;
    Ok((x_next, dk))
}

/// Reusable buffers for stepping one trajectory.
#[derive(Debug)]
pub(crate) struct Stepper<'c> {
    cfg: &'c SolverConfig,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    x: Vec<f64>,
    x_next: Vec<f64>,
    dk: Vec<f64>,
}

impl<'c> Stepper<'c> {
    pub(crate) fn new(cfg: &'c SolverConfig, dim: usize, noise_dim: usize) -> Result<Self> {
        cfg.check_dim(dim)?;
        Ok(Stepper {
            cfg,
            drift: vec![0.0; dim],
            diffusion: vec![0.0; dim * noise_dim],
            x: vec![0.0; dim],
            x_next: vec![0.0; dim],
            dk: vec![0.0; dim],
        })
    }

    /// Advances `builder` by one step. `eval` fills drift and diffusion from
    /// the coefficient segment, which is read from `frozen` when given and from
    /// the builder's own path otherwise.
    pub(crate) fn advance<F>(
        &mut self,
        builder: &mut TrajectoryBuilder,
        noise: &NoisePath,
        frozen: Option<&TrajectoryPair>,
        mut eval: F,
    ) -> Result<()>
    where
        F: FnMut(f64, &SegmentView<'_>, &mut [f64], &mut [f64]) -> Result<()>,
    {
        let k = builder.steps_done();
        let t = self.cfg.grid.time(k);
        {
            let seg = match frozen {
                Some(p) => p.segment_view(k),
                None => builder.current_segment(),
            };
            eval(t, &seg, &mut self.drift, &mut self.diffusion).map_err(|e| e.at_step(k))?;
        }
        self.x.copy_from_slice(builder.current());
        step_into(
            self.cfg,
            &self.x,
            &self.drift,
            &self.diffusion,
            noise.increment(k),
            noise.bridge_uniform(k),
            &mut self.x_next,
            &mut self.dk,
        )
        .map_err(|e| e.at_step(k))?;
        builder.push(&self.x_next, &self.dk);
        Ok(())
    }
}

pub(crate) fn check_inputs(cfg: &SolverConfig, xi: &Segment, noise: &NoisePath) -> Result<()> {
    cfg.check_dim(xi.dim())?;
    noise.check(&cfg.grid)?;
    for j in 0..xi.len() {
        let p = xi.point(j);
        let dist = cfg.operator.distance_to_domain(p);
        if dist > cfg.membership_tol * (1.0 + p.iter().map(|v| v * v).sum::<f64>().sqrt()) {
            return Err(Error::Precondition(format!(
                "initial segment leaves the domain at point {j}"
            )));
        }
    }
    Ok(())
}

fn integrate(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
    frozen: Option<&TrajectoryPair>,
) -> Result<TrajectoryPair> {
    check_inputs(cfg, xi, noise)?;
    let mut builder = TrajectoryBuilder::new(&cfg.grid, xi)?;
    let mut stepper = Stepper::new(cfg, xi.dim(), noise.dim())?;
    for _ in 0..cfg.grid.steps() {
        stepper.advance(&mut builder, noise, frozen, |t, seg, drift, diffusion| {
            f.eval(t, seg, drift)?;
            g.eval(t, seg, diffusion)
        })?;
    }
    Ok(builder.finish())
}

/// Solves the self-referential equation: coefficients read the segment that
/// ends at the current state.
pub fn solve_path(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
) -> Result<TrajectoryPair> {
    integrate(cfg, xi, f, g, noise, None)
}

/// Solves with coefficient arguments frozen at the segments of `frozen`.
pub fn solve_frozen(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
    frozen: &TrajectoryPair,
) -> Result<TrajectoryPair> {
    if frozen.grid() != &cfg.grid || frozen.dim() != xi.dim() {
        return Err(Error::invalid("frozen path does not match the grid"));
    }
    integrate(cfg, xi, f, g, noise, Some(frozen))
}

/// Picard iterates `1..=n_iters` starting from the initial extension of `xi`.
pub fn picard_iterate(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
    n_iters: usize,
) -> Result<Vec<TrajectoryPair>> {
    let start = TrajectoryPair::initial_extension(&cfg.grid, xi)?;
    picard_iterate_from(cfg, xi, f, g, noise, start, n_iters)
}

/// Picard iterates `1..=n_iters` from an arbitrary zeroth iterate.
pub fn picard_iterate_from(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
    start: TrajectoryPair,
    n_iters: usize,
) -> Result<Vec<TrajectoryPair>> {
    if n_iters == 0 {
        return Err(Error::invalid("need at least one Picard iterate"));
    }
    let mut iterates = Vec::with_capacity(n_iters);
    let mut prev = start;
    for _ in 0..n_iters {
        let next = solve_frozen(cfg, xi, f, g, noise, &prev)?;
        iterates.push(next.clone());
        prev = next;
    }
    Ok(iterates)
}

/// Outcome of iterating Picard to a numerical fixed point.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub path: TrajectoryPair,
    pub iterations: usize,
    /// Sup distance between the last two iterates.
    pub last_change: f64,
}

/// Iterates until successive iterates agree to `tol` in sup-distance or `max_iters` is reached.
#[allow(clippy::too_many_arguments)]
pub fn picard_fixed_point(
    cfg: &SolverConfig,
    xi: &Segment,
    f: &dyn PathCoefficient,
    g: &dyn PathCoefficient,
    noise: &NoisePath,
    start: TrajectoryPair,
    tol: f64,
    max_iters: usize,
) -> Result<FixedPoint> {
    let mut prev = start;
    let mut last_change = f64::INFINITY;
    for it in 1..=max_iters {
        let next = solve_frozen(cfg, xi, f, g, noise, &prev)?;
        last_change = next.sup_distance(&prev, cfg.grid.steps());
        prev = next;
        if last_change <= tol {
            return Ok(FixedPoint {
                path: prev,
                iterations: it,
                last_change,
            });
        }
    }
    Ok(FixedPoint {
        path: prev,
        iterations: max_iters,
        last_change,
    })
}

/// One row of a contraction table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    /// `D_n` compares iterates `n+1` and `n`.
    pub n: usize,
    pub estimate: Estimate,
    /// `D_{n+1} / D_n` when `D_n > 0` and the next row exists.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Diagnostics cover `[-r0, t_{window_steps}]`.
    pub window_steps: usize,
    pub rows: Vec<ContractionRow>,
}

impl ContractionReport {
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.ratio).collect()
    }
}

/// Monte Carlo estimates of `D_n = E sup_{[-r0, t0]} |X^{(n+1)} - X^{(n)}|²`.
///
/// `ensemble[p]` holds iterates `1, 2, …` for path `p`. `window_steps`
/// restricts the sup to `[-r0, t0]`; `None` uses the full horizon.
pub fn contraction_report(ensemble: &[Vec<TrajectoryPair>], window_steps: Option<usize>) -> Result<ContractionReport> {
    if ensemble.len() < 2 {
        return Err(Error::invalid("contraction report needs at least two paths"));
    }
    let n_iter = ensemble[0].len();
    if n_iter < 3 || ensemble.iter().any(|p| p.len() != n_iter) {
        return Err(Error::invalid(
            "contraction report needs at least three iterates per path",
        ));
    }
    let steps = ensemble[0][0].grid().steps();
    let window = window_steps.unwrap_or(steps);
    if window > steps {
        return Err(Error::invalid("contraction window exceeds the horizon"));
    }
    let mut rows: Vec<ContractionRow> = (1..n_iter)
        .map(|n| {
            let samples: Vec<f64> = ensemble
                .iter()
                .map(|iters| iters[n].sup_distance_sq(&iters[n - 1], window))
                .collect();
            ContractionRow {
                n,
                estimate: Estimate::from_samples(&samples),
                ratio: None,
            }
        })
        .collect();
    for i in 0..rows.len().saturating_sub(1) {
        let here = rows[i].estimate.mean;
        if here > 0.0 {
            rows[i].ratio = Some(rows[i + 1].estimate.mean / here);
        }
    }
    Ok(ContractionReport {
        window_steps: window,
        rows,
    })
}

/// Largest grid horizon `t0` with `2(L₂ + C·L₂)·t0·e^{2 t0} <= 1/2`.
pub fn smallness_horizon(l2: f64, bdg_constant: f64, dt: f64) -> Result<f64> {
    if !(l2 > 0.0 && bdg_constant >= 0.0 && dt > 0.0) {
        return Err(Error::invalid("smallness horizon needs L2 > 0, C >= 0, dt > 0"));
    }
    let lhs = |t: f64| 2.0 * (l2 + bdg_constant * l2) * t * (2.0 * t).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while lhs(hi) <= 0.5 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) <= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let steps = (lo / dt + 1e-9).floor();
    if steps < 1.0 {
        return Err(Error::invalid(format!(
            "smallness horizon {lo:e} is below one step of {dt}"
        )));
    }
    Ok(steps * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{Constant, ConstantDiffusion, LinearDelay, Zero};
    use crate::monotone::Graph1d;

    fn halfline_cfg(grid: TimeGrid, scheme: Scheme) -> SolverConfig {
        SolverConfig::new(
            grid,
            scheme,
            MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn step_examples() {
        let grid = TimeGrid::new(0.1, 0.0, 1.0).unwrap();
        let zero = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero).unwrap();
        let (x, dk) = euler_step(&zero, &[1.0], &[2.0], &[0.5], &[0.2]).unwrap();
        assert_eq!(x, vec![1.0 + 2.0 * 0.1 + 0.5 * 0.2]);
        assert_eq!(dk, vec![0.0]);

        // p = -0.3 via x = 0, drift = -3, dt = 0.1
        let cone = halfline_cfg(grid, Scheme::ResolventStep);
        let (x, dk) = euler_step(&cone, &[0.0], &[-3.0], &[0.0], &[0.0]).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((dk[0] + 0.3).abs() < 1e-15);

        let sign = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::graph(Graph1d::sign())).unwrap();
        let (x, dk) = euler_step(&sign, &[0.0], &[0.5], &[0.0], &[0.0]).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((dk[0] - 0.05).abs() < 1e-15 && dk[0].abs() <= 0.1);
    }

    #[test]
    fn step_rejects_states_outside_domain() {
        let grid = TimeGrid::new(0.1, 0.0, 1.0).unwrap();
        let cone = halfline_cfg(grid, Scheme::ResolventStep);
        assert!(matches!(
            euler_step(&cone, &[-1.0], &[0.0], &[0.0], &[0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn scheme_operator_compatibility() {
        let grid = TimeGrid::new(0.1, 0.0, 1.0).unwrap();
        assert!(SolverConfig::new(grid, Scheme::ProjectThenStep, MonotoneOperator::graph(Graph1d::sign())).is_err());
        assert!(SolverConfig::new(grid, Scheme::ReflectedBridge, MonotoneOperator::Zero).is_err());
        let ball = MonotoneOperator::normal_cone(ConvexDomain::ball(vec![0.0], 1.0).unwrap());
        assert!(SolverConfig::new(grid, Scheme::ReflectedBridge, ball).is_err());
    }

    #[test]
    fn bridge_step_needs_uniforms() {
        let grid = TimeGrid::new(0.1, 0.0, 1.0).unwrap();
        let cfg = halfline_cfg(grid, Scheme::ReflectedBridge);
        assert!(euler_step(&cfg, &[0.1], &[0.0], &[1.0], &[0.05]).is_err());
        let (x, dk) = euler_step_with_bridge(&cfg, &[0.1], &[0.0], &[1.0], &[-0.5], Some(0.5)).unwrap();
        assert!(x[0] >= 0.0 && dk[0] <= 0.0);
        assert!((x[0] + dk[0] - (0.1 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients_freeze_the_state() {
        let grid = TimeGrid::new(0.1, 0.3, 1.0).unwrap();
        let cfg = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero).unwrap();
        let xi = Segment::from_fn(&grid, 1, |th| vec![2.0 + th]).unwrap();
        let noise = NoisePath::generate(&grid, 1, 1, 0);
        let traj = solve_path(&cfg, &xi, &Zero, &Zero, &noise).unwrap();
        for k in 0..=grid.steps() {
            assert_eq!(traj.state(k), &[2.0]);
            assert_eq!(traj.k(k), &[0.0]);
        }
    }

    #[test]
    fn brownian_reduction() {
        let grid = TimeGrid::new(0.01, 0.0, 1.0).unwrap();
        let cfg = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero).unwrap();
        let xi = Segment::constant(&grid, &[0.5]).unwrap();
        let noise = NoisePath::generate(&grid, 1, 9, 2);
        let g = ConstantDiffusion {
            sigma: 1.0,
            noise_dim: 1,
        };
        let traj = solve_path(&cfg, &xi, &Zero, &g, &noise).unwrap();
        let mut w = 0.5;
        for k in 0..grid.steps() {
            w = w + 0.0 * 0.01 + 1.0 * noise.increment(k)[0];
            assert_eq!(traj.state(k + 1)[0].to_bits(), w.to_bits());
        }
    }

    #[test]
    fn method_of_steps_for_frozen_linear_drift() {
        // f = -ζ(-r0), ξ ≡ 1: on [0, r0] the frozen segment reads ξ, so X(t) = 1 - t
        let grid = TimeGrid::new(0.01, 0.5, 1.0).unwrap();
        let cfg = SolverConfig::new(grid, Scheme::ResolventStep, MonotoneOperator::Zero).unwrap();
        let xi = Segment::constant(&grid, &[1.0]).unwrap();
        let noise = NoisePath::generate(&grid, 1, 0, 0);
        let f = LinearDelay { a: 0.0, b: -1.0 };
        let it = picard_iterate(&cfg, &xi, &f, &Zero, &noise, 3).unwrap();
        for k in 0..=grid.delay_steps() {
            let t = grid.time(k);
            assert!((it[0].state(k)[0] - (1.0 - t)).abs() < 1e-12);
            assert_eq!(it[0].state(k), it[1].state(k));
        }
        assert_ne!(it[0].state(grid.steps()), it[1].state(grid.steps()));
    }

    #[test]
    fn segment_free_coefficients_give_identical_iterates() {
        let grid = TimeGrid::new(0.01, 0.1, 0.5).unwrap();
        let cfg = halfline_cfg(grid, Scheme::ResolventStep);
        let xi = Segment::constant(&grid, &[0.2]).unwrap();
        let noise = NoisePath::generate(&grid, 1, 4, 0);
        let f = Constant { value: vec![-0.3] };
        let g = ConstantDiffusion {
            sigma: 0.7,
            noise_dim: 1,
        };
        let it = picard_iterate(&cfg, &xi, &f, &g, &noise, 4).unwrap();
        assert!(it.windows(2).all(|w| w[0] == w[1]));
        let report = contraction_report(&[it.clone(), it], None).unwrap();
        assert!(report.rows.iter().all(|r| r.estimate.mean == 0.0 && r.ratio.is_none()));
    }

    #[test]
    fn contraction_report_validates_inputs() {
        let grid = TimeGrid::new(0.1, 0.0, 1.0).unwrap();
        let xi = Segment::constant(&grid, &[0.0]).unwrap();
        let p = TrajectoryPair::initial_extension(&grid, &xi).unwrap();
        assert!(contraction_report(&[vec![p.clone(); 3]], None).is_err());
        assert!(contraction_report(&[vec![p.clone(); 2], vec![p.clone(); 2]], None).is_err());
        assert!(contraction_report(&[vec![p.clone(); 3], vec![p; 3]], Some(11)).is_err());
    }

    #[test]
    fn smallness_horizon_solves_the_inequality() {
        let t0 = smallness_horizon(0.625, 4.0, 1e-3).unwrap();
        let lhs = |t: f64| 2.0 * 5.0 * 0.625 * t * (2.0 * t).exp();
        assert!(lhs(t0) <= 0.5 && lhs(t0 + 1e-3) > 0.5);
    }

    #[test]
    fn coarsened_noise_sums_increments() {
        let grid = TimeGrid::new(0.01, 0.0, 0.1).unwrap();
        let noise = NoisePath::generate(&grid, 2, 3, 1);
        let coarse = noise.coarsen(2).unwrap();
        assert_eq!(coarse.steps(), 5);
        let expected = noise.increment(2)[1] + noise.increment(3)[1];
        assert_eq!(coarse.increment(1)[1], expected);
        assert!(noise.coarsen(3).is_err());
    }
}
