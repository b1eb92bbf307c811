//! Particle ensembles and the iteration on measure flows.
//!
//! Laws of segments are represented by `N` equally weighted particles. The
//! distribution iteration solves the ensemble against the frozen flow of the
//! previous iterate, always with the same noise paths, so it is a
//! deterministic map on flows. The self-consistent solver instead reads the
//! live empirical law at every step.

use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::MeanFieldCoefficient;
use crate::error::{Error, Result};
use crate::segments::{Segment, SegmentView, TimeGrid, TrajectoryBuilder, TrajectoryPair};
use crate::solver::{check_inputs, NoisePath, SolverConfig, Stepper};
use crate::stats::pairwise_sum;

/// Functionals of a segment averaged against a law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawFunctional {
    /// `η ↦ ‖η‖²_∞`
    SupSq,
    /// `η ↦ η(0)`
    EvalEnd,
    /// `η ↦ η(-r0)`
    EvalDelay,
}

impl LawFunctional {
    pub fn name(&self) -> &'static str {
        match self {
            LawFunctional::SupSq => "sup_sq",
            LawFunctional::EvalEnd => "eval_end",
            LawFunctional::EvalDelay => "eval_delay",
        }
    }
}

impl FromStr for LawFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup_sq" => Ok(LawFunctional::SupSq),
            "eval_end" => Ok(LawFunctional::EvalEnd),
            "eval_delay" => Ok(LawFunctional::EvalDelay),
            other => Err(Error::invalid(format!("unknown law functional `{other}`"))),
        }
    }
}

/// Value of [`empirical_moment`].
#[derive(Debug, Clone, PartialEq)]
pub enum Moment {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Uniform empirical law of `N ≥ 1` segments on a common grid.
#[derive(Debug)]
pub struct EmpiricalSegmentLaw<'a> {
    segments: Vec<SegmentView<'a>>,
    mean_end: OnceLock<Vec<f64>>,
    mean_delay: OnceLock<Vec<f64>>,
    second_moment: OnceLock<f64>,
}

impl<'a> EmpiricalSegmentLaw<'a> {
    pub fn new(segments: Vec<SegmentView<'a>>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::invalid("an empirical law needs at least one segment"))?;
        if segments
            .iter()
            .any(|s| s.dim() != first.dim() || s.len() != first.len() || s.dt() != first.dt())
        {
            return Err(Error::invalid("segments of an empirical law must share a grid"));
        }
        Ok(EmpiricalSegmentLaw {
            segments,
            mean_end: OnceLock::new(),
            mean_delay: OnceLock::new(),
            second_moment: OnceLock::new(),
        })
    }

    pub fn from_segments(segments: &'a [Segment]) -> Result<Self> {
        Self::new(segments.iter().map(Segment::view).collect())
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.segments[0].dim()
    }

    pub fn segments(&self) -> &[SegmentView<'a>] {
        &self.segments
    }

    pub fn segment(&self, i: usize) -> SegmentView<'a> {
        self.segments[i]
    }

    fn component_mean(&self, pick: impl Fn(&SegmentView<'a>) -> &'a [f64]) -> Vec<f64> {
        let n = self.len() as f64;
        let mut column = vec![0.0; self.len()];
        (0..self.dim())
            .map(|i| {
                for (c, s) in column.iter_mut().zip(&self.segments) {
                    *c = pick(s)[i];
                }
                pairwise_sum(&column) / n
            })
            .collect()
    }

    /// `μ(η ↦ η(0))`.
    pub fn mean_end(&self) -> &[f64] {
        self.mean_end.get_or_init(|| self.component_mean(|s| s.end()))
    }

    /// `μ(η ↦ η(-r0))`.
    pub fn mean_delay(&self) -> &[f64] {
        self.mean_delay.get_or_init(|| self.component_mean(|s| s.start()))
    }

    /// `μ(‖·‖²_∞)`.
    pub fn second_moment(&self) -> f64 {
        *self.second_moment.get_or_init(|| {
            let sq: Vec<f64> = self.segments.iter().map(|s| s.sup_norm().powi(2)).collect();
            pairwise_sum(&sq) / self.len() as f64
        })
    }

    fn check_pair(&self, other: &EmpiricalSegmentLaw<'_>) -> Result<()> {
        let (a, b) = (&self.segments[0], &other.segments[0]);
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "empirical laws have different sizes {} and {}",
                self.len(),
                other.len()
            )));
        }
        if a.dim() != b.dim() || a.len() != b.len() || a.dt() != b.dt() {
            return Err(Error::invalid("empirical laws live on different grids"));
        }
        Ok(())
    }
}

/// Uniform average of `functional` over the segments of `law`.
pub fn empirical_moment(law: &EmpiricalSegmentLaw<'_>, functional: LawFunctional) -> Moment {
    match functional {
        LawFunctional::SupSq => Moment::Scalar(law.second_moment()),
        LawFunctional::EvalEnd => Moment::Vector(law.mean_end().to_vec()),
        LawFunctional::EvalDelay => Moment::Vector(law.mean_delay().to_vec()),
    }
}

/// Controls the assignment solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct W2Options {
    /// Largest `N` solved exactly; above it a greedy upper bound is returned.
    pub exact_cap: usize,
}

impl Default for W2Options {
    fn default() -> Self {
        W2Options { exact_cap: 1024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct W2Value {
    pub value: f64,
    /// False when `value` is only an upper bound.
    pub exact: bool,
}

/// `W₂` between two equal-size empirical laws under the cost `‖ξ - η‖²_∞`.
pub fn wasserstein2(a: &EmpiricalSegmentLaw<'_>, b: &EmpiricalSegmentLaw<'_>) -> Result<f64> {
    Ok(wasserstein2_with(a, b, W2Options::default())?.value)
}

pub fn wasserstein2_with(a: &EmpiricalSegmentLaw<'_>, b: &EmpiricalSegmentLaw<'_>, opts: W2Options) -> Result<W2Value> {
    a.check_pair(b)?;
    let n = a.len();
    let row = |i: usize| -> Vec<f64> { b.segments.iter().map(|s| a.segments[i].sup_dist_sq(s)).collect() };
    if n <= opts.exact_cap {
        let cost: Vec<Vec<f64>> = if n >= 64 {
            (0..n).into_par_iter().map(row).collect()
        } else {
            (0..n).map(row).collect()
        };
        let assignment = hungarian(&cost);
        let mut picked: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
        // summing in sorted order makes the value depend only on the matched costs
        picked.sort_by(f64::total_cmp);
        Ok(W2Value {
            value: (pairwise_sum(&picked) / n as f64).sqrt(),
            exact: true,
        })
    } else {
        Ok(W2Value {
            value: greedy_bound(a, b).sqrt(),
            exact: false,
        })
    }
}

/// Minimum-cost perfect matching of a square matrix; returns the column of each row.
///
/// Shortest augmenting paths with row/column potentials, `O(n³)`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(cost.iter().all(|r| r.len() == n));
    // 1-based: column 0 is the virtual start of each augmenting path
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_to = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        min_to.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < min_to[j] {
                        min_to[j] = cur;
                        way[j] = j0;
                    }
                    if min_to[j] < delta {
                        delta = min_to[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// Mean cost of the better of the identity coupling and a nearest-free-partner
/// matching in index order. Memory `O(N)`, time `O(N²)`.
fn greedy_bound(a: &EmpiricalSegmentLaw<'_>, b: &EmpiricalSegmentLaw<'_>) -> f64 {
    let n = a.len();
    let identity: Vec<f64> = (0..n).map(|i| a.segments[i].sup_dist_sq(&b.segments[i])).collect();
    let mut free = vec![true; n];
    let mut greedy = Vec::with_capacity(n);
    for sa in &a.segments {
        let (j, c) = b
            .segments
            .iter()
            .enumerate()
            .filter(|(j, _)| free[*j])
            .map(|(j, sb)| (j, sa.sup_dist_sq(sb)))
            .fold(
                (usize::MAX, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        free[j] = false;
        greedy.push(c);
    }
    (pairwise_sum(&identity) / n as f64).min(pairwise_sum(&greedy) / n as f64)
}

/// Empirical segment laws `μ_t` at every grid time `t ∈ [0, T]`, stored as
/// the particle paths they are read from.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFlow {
    grid: TimeGrid,
    dim: usize,
    paths: Vec<TrajectoryPair>,
}

impl MeasureFlow {
    pub fn from_ensemble(paths: Vec<TrajectoryPair>) -> Result<Self> {
        let first = paths
            .first()
            .ok_or_else(|| Error::invalid("a measure flow needs at least one particle"))?;
        let (grid, dim) = (*first.grid(), first.dim());
        if paths.iter().any(|p| p.grid() != &grid || p.dim() != dim) {
            return Err(Error::invalid("particles of a measure flow must share a grid"));
        }
        Ok(MeasureFlow { grid, dim, paths })
    }

    /// The flow of the initial extensions `X^{(0)}_t(θ) = ξ(0 ∧ (t + θ))`.
    pub fn initial(grid: &TimeGrid, xi_law: &[Segment]) -> Result<Self> {
        let paths = xi_law
            .iter()
            .map(|xi| TrajectoryPair::initial_extension(grid, xi))
            .collect::<Result<Vec<_>>>()?;
        Self::from_ensemble(paths)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[TrajectoryPair] {
        &self.paths
    }

    pub fn into_paths(self) -> Vec<TrajectoryPair> {
        self.paths
    }

    /// `μ_{t_step}`.
    pub fn law_at(&self, step: usize) -> EmpiricalSegmentLaw<'_> {
        EmpiricalSegmentLaw::new(self.paths.iter().map(|p| p.segment_view(step)).collect())
            .expect("flow particles share a grid")
    }

    /// `μ_t(‖·‖²_∞)` at every grid time.
    pub fn second_moments(&self) -> Vec<f64> {
        (0..=self.grid.steps())
            .map(|k| self.law_at(k).second_moment())
            .collect()
    }

    /// `W₂(μ_t, ν_t)` at every grid time.
    pub fn w2_profile(&self, other: &MeasureFlow, opts: W2Options) -> Result<Vec<W2Value>> {
        if self.grid != other.grid || self.dim != other.dim || self.particles() != other.particles() {
            return Err(Error::invalid("measure flows differ in grid or particle count"));
        }
        (0..=self.grid.steps())
            .into_par_iter()
            .map(|k| wasserstein2_with(&self.law_at(k), &other.law_at(k), opts))
            .collect()
    }

    /// `sup_t W₂(μ_t, ν_t)`; the flag is false if any time used the greedy bound.
    pub fn sup_w2(&self, other: &MeasureFlow, opts: W2Options) -> Result<W2Value> {
        let profile = self.w2_profile(other, opts)?;
        Ok(W2Value {
            value: profile.iter().map(|w| w.value).fold(0.0, f64::max),
            exact: profile.iter().all(|w| w.exact),
        })
    }
}

fn check_ensemble(cfg: &SolverConfig, xi_law: &[Segment], noises: &[NoisePath]) -> Result<()> {
    if xi_law.is_empty() {
        return Err(Error::invalid("the ensemble needs at least one particle"));
    }
    if noises.len() != xi_law.len() {
        return Err(Error::invalid(format!(
            "{} particles but {} noise paths",
            xi_law.len(),
            noises.len()
        )));
    }
    for (i, (xi, noise)) in xi_law.iter().zip(noises).enumerate() {
        check_inputs(cfg, xi, noise).map_err(|e| e.at_particle(i))?;
    }
    Ok(())
}

/// Solves every particle against the frozen flow: the law argument at step
/// `k` is `flow.law_at(k)`. Particles do not interact.
pub fn solve_ensemble_frozen(
    cfg: &SolverConfig,
    xi_law: &[Segment],
    b: &dyn MeanFieldCoefficient,
    sigma: &dyn MeanFieldCoefficient,
    flow: &MeasureFlow,
    noises: &[NoisePath],
) -> Result<Vec<TrajectoryPair>> {
    check_ensemble(cfg, xi_law, noises)?;
    if flow.grid() != &cfg.grid {
        return Err(Error::invalid("measure flow does not match the grid"));
    }
    let laws: Vec<EmpiricalSegmentLaw<'_>> = (0..cfg.grid.steps()).map(|k| flow.law_at(k)).collect();
    xi_law
        .par_iter()
        .zip(noises.par_iter())
        .enumerate()
        .map(|(i, (xi, noise))| {
            let run = || -> Result<TrajectoryPair> {
                let mut builder = TrajectoryBuilder::new(&cfg.grid, xi)?;
                let mut stepper = Stepper::new(cfg, xi.dim(), noise.dim())?;
                for law in &laws {
                    stepper.advance(&mut builder, noise, None, |t, seg, drift, diffusion| {
                        b.eval(t, seg, law, drift)?;
                        sigma.eval(t, seg, law, diffusion)
                    })?;
                }
                Ok(builder.finish())
            };
            run().map_err(|e| e.at_particle(i))
        })
        .collect()
}

/// Output of [`distribution_iterate`].
#[derive(Debug, Clone)]
pub struct DistributionIteration {
    /// `flows[n]` is `μ^{(n)}`, starting from the initial-extension flow.
    pub flows: Vec<MeasureFlow>,
}

impl DistributionIteration {
    /// Ensemble of the last iterate.
    pub fn ensemble(&self) -> &[TrajectoryPair] {
        self.flows.last().expect("at least one iterate").paths()
    }

    /// `d_n = sup_t W₂(μ^{(n)}_t, μ^{(n+1)}_t)` for `n = 0, 1, …`.
    pub fn successive_distances(&self, opts: W2Options) -> Result<Vec<W2Value>> {
        self.flows.windows(2).map(|w| w[0].sup_w2(&w[1], opts)).collect()
    }

    /// `max_{n,t} μ^{(n)}_t(‖·‖²_∞)`.
    pub fn max_second_moment(&self) -> f64 {
        self.flows.iter().flat_map(|f| f.second_moments()).fold(0.0, f64::max)
    }

    /// One JSON line per iterate `n ≥ 1` and grid time:
    /// `{iter, t, w2_prev, sup_sq}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W, opts: W2Options) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            iter: usize,
            t: f64,
            w2_prev: f64,
            sup_sq: f64,
        }
        for n in 1..self.flows.len() {
            let profile = self.flows[n].w2_profile(&self.flows[n - 1], opts)?;
            let moments = self.flows[n].second_moments();
            for (k, (w, m)) in profile.iter().zip(&moments).enumerate() {
                let row = Row {
                    iter: n,
                    t: self.flows[n].grid().time(k),
                    w2_prev: w.value,
                    sup_sq: *m,
                };
                let line = serde_json::to_string(&row).map_err(|e| Error::Serialization(e.to_string()))?;
                writeln!(out, "{line}").map_err(|e| Error::Serialization(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Iterates `μ^{(n)} = law of the ensemble solved against μ^{(n-1)}` for
/// `n = 1..=n_iters`, reusing `noises` every time.
pub fn distribution_iterate(
    cfg: &SolverConfig,
    xi_law: &[Segment],
    b: &dyn MeanFieldCoefficient,
    sigma: &dyn MeanFieldCoefficient,
    n_iters: usize,
    noises: &[NoisePath],
) -> Result<DistributionIteration> {
    if n_iters == 0 {
        return Err(Error::invalid("need at least one distribution iterate"));
    }
    check_ensemble(cfg, xi_law, noises)?;
    let mut flows = vec![MeasureFlow::initial(&cfg.grid, xi_law)?];
    for _ in 0..n_iters {
        let prev = flows.last().expect("nonempty");
        let next = solve_ensemble_frozen(cfg, xi_law, b, sigma, prev, noises)?;
        flows.push(MeasureFlow::from_ensemble(next)?);
    }
    Ok(DistributionIteration { flows })
}

/// Interacting particle system: at step `k` every particle reads the empirical
/// law of all current segments. Returns the realised flow, whose paths are the ensemble.
pub fn self_consistent_solve(
    cfg: &SolverConfig,
    xi_law: &[Segment],
    b: &dyn MeanFieldCoefficient,
    sigma: &dyn MeanFieldCoefficient,
    noises: &[NoisePath],
) -> Result<MeasureFlow> {
    check_ensemble(cfg, xi_law, noises)?;
    let dim = xi_law[0].dim();
    let seg_size = cfg.grid.segment_len() * dim;
    let mut builders = xi_law
        .iter()
        .map(|xi| TrajectoryBuilder::new(&cfg.grid, xi))
        .collect::<Result<Vec<_>>>()?;
    let mut steppers = noises
        .iter()
        .map(|noise| Stepper::new(cfg, dim, noise.dim()))
        .collect::<Result<Vec<_>>>()?;
    let mut snapshot = vec![0.0; builders.len() * seg_size];
    for _ in 0..cfg.grid.steps() {
        snapshot
            .par_chunks_mut(seg_size)
            .zip(builders.par_iter())
            .for_each(|(dst, builder)| dst.copy_from_slice(builder.current_segment().values()));
        let law = EmpiricalSegmentLaw::new(
            snapshot
                .chunks_exact(seg_size)
                .map(|v| SegmentView::new(cfg.grid.dt(), dim, v))
                .collect(),
        )?;
        builders
            .par_iter_mut()
            .zip(steppers.par_iter_mut())
            .zip(noises.par_iter())
            .enumerate()
            .try_for_each(|(i, ((builder, stepper), noise))| {
                stepper
                    .advance(builder, noise, None, |t, seg, drift, diffusion| {
                        b.eval(t, seg, &law, drift)?;
                        sigma.eval(t, seg, &law, diffusion)
                    })
                    .map_err(|e| e.at_particle(i))
            })?;
    }
    MeasureFlow::from_ensemble(builders.into_iter().map(TrajectoryBuilder::finish).collect())
}
