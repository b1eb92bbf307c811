//! Delay segments and discretised solution pairs `(X, K)`.
//!
//! Everything lives on one uniform grid. A path is stored from `-r0` to `T`,
//! so the segment at step `k` is the contiguous window of grid points
//! `k ..= k + m` where `m = r0 / dt`. The regularising process `K` is stored
//! as per-step increments; its cumulative values and discrete variation are
//! derived from them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::dot;

const GRID_TOL: f64 = 1e-9;

fn steps_for(value: f64, dt: f64, field: &str) -> Result<usize> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::invalid(format!(
            "{field} must be finite and nonnegative, got {value}"
        )));
    }
    let k = (value / dt).round();
    if (k * dt - value).abs() > GRID_TOL * value.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "{field} = {value} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

/// Uniform grid with step `dt`, delay window `[-r0, 0]` and horizon `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    delay_steps: usize,
    steps: usize,
}

impl TimeGrid {
    /// Fails unless `r0` and `horizon` are integer multiples of `dt` and the horizon is positive.
    pub fn new(dt: f64, r0: f64, horizon: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let delay_steps = steps_for(r0, dt, "r0")?;
        let steps = steps_for(horizon, dt, "horizon")?;
        if steps == 0 {
            return Err(Error::invalid("horizon must span at least one step"));
        }
        Ok(TimeGrid { dt, delay_steps, steps })
    }

    pub fn from_steps(dt: f64, delay_steps: usize, steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || steps == 0 {
            return Err(Error::invalid("grid needs dt > 0 and at least one step"));
        }
        Ok(TimeGrid { dt, delay_steps, steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `m = r0 / dt`.
    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    /// `n = T / dt`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn r0(&self) -> f64 {
        self.delay_steps as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Number of points in a segment, `m + 1`.
    pub fn segment_len(&self) -> usize {
        self.delay_steps + 1
    }

    /// Number of points on `[-r0, T]`.
    pub fn path_len(&self) -> usize {
        self.delay_steps + self.steps + 1
    }

    /// The step index of grid time `t ∈ [0, T]`.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || t < -GRID_TOL {
            return Err(Error::invalid(format!("time {t} is outside [0, T]")));
        }
        let k = (t / self.dt).round();
        if (k * self.dt - t).abs() > GRID_TOL * t.abs().max(1.0) {
            return Err(Error::invalid(format!("time {t} is not on the grid")));
        }
        let k = k as usize;
        if k > self.steps {
            return Err(Error::invalid(format!(
                "time {t} exceeds the horizon {}",
                self.horizon()
            )));
        }
        Ok(k)
    }

    /// Same grid with a different horizon.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        TimeGrid::from_steps(self.dt, self.delay_steps, steps)
    }
}

/// Borrowed segment: `segment_len` points of dimension `dim`, row-major,
/// indexed by `θ_j = -r0 + j·dt`.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    dt: f64,
    dim: usize,
    values: &'a [f64],
}

impl<'a> SegmentView<'a> {
    pub fn new(dt: f64, dim: usize, values: &'a [f64]) -> Self {
        debug_assert!(dim > 0 && values.len().is_multiple_of(dim) && !values.is_empty());
        SegmentView { dt, dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn r0(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    /// Value at `θ_j`.
    pub fn point(&self, j: usize) -> &'a [f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// `ζ(0)`.
    pub fn end(&self) -> &'a [f64] {
        self.point(self.len() - 1)
    }

    /// `ζ(-r0)`.
    pub fn start(&self) -> &'a [f64] {
        self.point(0)
    }

    pub fn points(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.values.chunks_exact(self.dim)
    }

    /// `‖ζ‖_∞` over grid points.
    pub fn sup_norm(&self) -> f64 {
        self.points().map(|p| dot(p, p)).fold(0.0, f64::max).sqrt()
    }

    /// `‖ζ - η‖²_∞` over grid points.
    pub fn sup_dist_sq(&self, other: &SegmentView<'_>) -> f64 {
        self.points()
            .zip(other.points())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_segment(&self) -> Segment {
        Segment {
            dt: self.dt,
            dim: self.dim,
            values: self.values.to_vec(),
        }
    }
}

/// Owned delay segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    dt: f64,
    dim: usize,
    values: Vec<f64>,
}

impl Segment {
    /// `values` holds `grid.segment_len()` points of dimension `dim`, row-major.
    pub fn new(grid: &TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("segment dimension must be positive"));
        }
        if values.len() != grid.segment_len() * dim {
            return Err(Error::invalid(format!(
                "segment needs {} values, got {}",
                grid.segment_len() * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("segment has non-finite values"));
        }
        Ok(Segment {
            dt: grid.dt(),
            dim,
            values,
        })
    }

    pub fn constant(grid: &TimeGrid, c: &[f64]) -> Result<Self> {
        let values = c.iter().copied().cycle().take(c.len() * grid.segment_len()).collect();
        Segment::new(grid, c.len(), values)
    }

    /// Samples `f(θ_j)` at every grid point of the window.
    pub fn from_fn(grid: &TimeGrid, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.segment_len() * dim);
        for j in 0..grid.segment_len() {
            let theta = -grid.r0() + j as f64 * grid.dt();
            let v = f(theta);
            if v.len() != dim {
                return Err(Error::invalid("segment function returned the wrong dimension"));
            }
            values.extend(v);
        }
        Segment::new(grid, dim, values)
    }

    /// Linear interpolation of scattered samples `(θ, value)` onto the grid.
    /// Samples must be sorted by `θ` and cover `[-r0, 0]`.
    pub fn interpolated(grid: &TimeGrid, samples: &[(f64, Vec<f64>)]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::invalid("no samples"))?;
        let last = samples.last().expect("nonempty");
        let dim = first.1.len();
        if samples.windows(2).any(|w| w[0].0 >= w[1].0 || w[1].1.len() != dim) {
            return Err(Error::invalid(
                "samples must be strictly increasing in θ with a common dimension",
            ));
        }
        if first.0 > -grid.r0() + GRID_TOL || last.0 < -GRID_TOL {
            return Err(Error::invalid("samples must cover the delay window"));
        }
        Segment::from_fn(grid, dim, |theta| {
            let i = samples.partition_point(|s| s.0 <= theta).clamp(1, samples.len() - 1);
            let (t0, v0) = (&samples[i - 1].0, &samples[i - 1].1);
            let (t1, v1) = (&samples[i].0, &samples[i].1);
            let w = ((theta - t0) / (t1 - t0)).clamp(0.0, 1.0);
            v0.iter().zip(v1).map(|(a, b)| a + w * (b - a)).collect()
        })
    }

    pub fn view(&self) -> SegmentView<'_> {
        SegmentView::new(self.dt, self.dim, &self.values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn end(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn sup_norm(&self) -> f64 {
        self.view().sup_norm()
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Segment) -> Result<Segment> {
        self.check_compatible(other)?;
        Ok(Segment {
            dt: self.dt,
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// `‖self - other‖_∞`.
    pub fn sup_distance(&self, other: &Segment) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.view().sup_dist_sq(&other.view()).sqrt())
    }

    /// Pointwise shift by a constant vector.
    pub fn shifted(&self, by: &[f64]) -> Segment {
        let mut out = self.clone();
        for p in out.values.chunks_exact_mut(self.dim) {
            for (v, b) in p.iter_mut().zip(by) {
                *v += b;
            }
        }
        out
    }

    pub(crate) fn check_compatible(&self, other: &Segment) -> Result<()> {
        if self.dim != other.dim || self.values.len() != other.values.len() || self.dt != other.dt {
            return Err(Error::invalid("segments live on different grids"));
        }
        Ok(())
    }
}

/// `θ ↦ ξ(0 ∧ (t+θ))` at grid time `t = step·dt`.
pub fn initial_extension(xi: &Segment, step: usize) -> Segment {
    let m = xi.len() - 1;
    let mut values = Vec::with_capacity(xi.values.len());
    for j in 0..=m {
        values.extend_from_slice(xi.point((step + j).min(m)));
    }
    Segment {
        dt: xi.dt,
        dim: xi.dim,
        values,
    }
}

/// Discretised solution pair: `X` on `[-r0, T]` and `K` on `[0, T]` with `K(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    grid: TimeGrid,
    dim: usize,
    x: Vec<f64>,
    dk: Vec<f64>,
    k: Vec<f64>,
    variation: Vec<f64>,
}

impl TrajectoryPair {
    /// The frozen zeroth iterate: `ξ` on `[-r0, 0]`, constant `ξ(0)` afterwards, `K ≡ 0`.
    pub fn initial_extension(grid: &TimeGrid, xi: &Segment) -> Result<Self> {
        let mut b = TrajectoryBuilder::new(grid, xi)?;
        let end = xi.end().to_vec();
        let zero = vec![0.0; xi.dim()];
        for _ in 0..grid.steps() {
            b.push(&end, &zero);
        }
        Ok(b.finish())
    }

    /// A path with given `X` values on all `path_len` grid points and `K ≡ 0`.
    pub fn from_path(grid: &TimeGrid, dim: usize, x: Vec<f64>) -> Result<Self> {
        if x.len() != grid.path_len() * dim {
            return Err(Error::invalid("path has the wrong length"));
        }
        let n = grid.steps();
        Ok(TrajectoryPair {
            grid: *grid,
            dim,
            x,
            dk: vec![0.0; n * dim],
            k: vec![0.0; (n + 1) * dim],
            variation: vec![0.0; n + 1],
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `X` values on `[-r0, T]`, row-major.
    pub fn path(&self) -> &[f64] {
        &self.x
    }

    /// `X(t_k)` for `k ∈ 0..=n`.
    pub fn state(&self, step: usize) -> &[f64] {
        let i = step + self.grid.delay_steps();
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// `X` at global grid index `i` (time `-r0 + i·dt`).
    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// `ΔK_k = K(t_{k+1}) - K(t_k)`.
    pub fn increment(&self, step: usize) -> &[f64] {
        &self.dk[step * self.dim..(step + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.dk
    }

    /// `K(t_k)`.
    pub fn k(&self, step: usize) -> &[f64] {
        &self.k[step * self.dim..(step + 1) * self.dim]
    }

    /// Segment ending at step `k`, borrowed from the path.
    pub fn segment_view(&self, step: usize) -> SegmentView<'_> {
        segment_window(&self.x, self.dim, &self.grid, step)
    }

    /// `X_t` for grid time `t ∈ [0, T]`.
    pub fn segment_at(&self, t: f64) -> Result<Segment> {
        let step = self.grid.step_of(t)?;
        Ok(self.segment_view(step).to_segment())
    }

    /// `|K|` over `(t_s, t_t]` from step indices.
    pub fn variation_between(&self, from: usize, to: usize) -> Result<f64> {
        if from > to || to > self.grid.steps() {
            return Err(Error::invalid(format!("invalid variation window {from}..{to}")));
        }
        Ok(self.variation[to] - self.variation[from])
    }

    /// `|K|_s^t`, the sum of `|ΔK_k|` over steps ending in `(s, t]`.
    pub fn total_variation(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::invalid(format!("variation window has s = {s} > t = {t}")));
        }
        self.variation_between(self.grid.step_of(s)?, self.grid.step_of(t)?)
    }

    /// `max_k |X_a(t_k) - X_b(t_k)|` over `[-r0, t_upto]`.
    pub fn sup_distance(&self, other: &TrajectoryPair, upto_step: usize) -> f64 {
        self.sup_distance_sq(other, upto_step).sqrt()
    }

    pub fn sup_distance_sq(&self, other: &TrajectoryPair, upto_step: usize) -> f64 {
        let end = (upto_step + self.grid.delay_steps() + 1) * self.dim;
        self.x[..end]
            .chunks_exact(self.dim)
            .zip(other.x[..end].chunks_exact(self.dim))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Writes `t, x_*, k_*, k_var` rows; `K` columns are blank before `t = 0`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.dim).map(|i| format!("x{i}")));
        header.extend((0..self.dim).map(|i| format!("k{i}")));
        header.push("k_var".into());
        w.write_record(&header).map_err(csv_err)?;
        let m = self.grid.delay_steps();
        for i in 0..self.grid.path_len() {
            let t = (i as f64 - m as f64) * self.grid.dt();
            let mut row = vec![format!("{t}")];
            row.extend(self.point(i).iter().map(|v| format!("{v}")));
            if i >= m {
                let step = i - m;
                row.extend(self.k(step).iter().map(|v| format!("{v}")));
                row.push(format!("{}", self.variation[step]));
            } else {
                row.extend(std::iter::repeat_n(String::new(), self.dim + 1));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }

    /// One JSON object per step of `[0, T]`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            t: f64,
            x: &'a [f64],
            k: &'a [f64],
            k_var: f64,
        }
        for step in 0..=self.grid.steps() {
            let row = Row {
                t: self.grid.time(step),
                x: self.state(step),
                k: self.k(step),
                k_var: self.variation[step],
            };
            serde_json::to_writer(&mut out, &row).map_err(|e| Error::Serialization(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::Serialization(e.to_string()))?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub(crate) fn segment_window<'a>(x: &'a [f64], dim: usize, grid: &TimeGrid, step: usize) -> SegmentView<'a> {
    let len = grid.segment_len();
    SegmentView::new(grid.dt(), dim, &x[step * dim..(step + len) * dim])
}

/// Incremental construction of a [`TrajectoryPair`].
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder {
    grid: TimeGrid,
    dim: usize,
    x: Vec<f64>,
    dk: Vec<f64>,
}

impl TrajectoryBuilder {
    pub fn new(grid: &TimeGrid, xi: &Segment) -> Result<Self> {
        if xi.len() != grid.segment_len() || xi.dt() != grid.dt() {
            return Err(Error::invalid("initial segment does not match the grid"));
        }
        let dim = xi.dim();
        let mut x = Vec::with_capacity(grid.path_len() * dim);
        x.extend_from_slice(xi.values());
        Ok(TrajectoryBuilder {
            grid: *grid,
            dim,
            x,
            dk: Vec::with_capacity(grid.steps() * dim),
        })
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> usize {
        self.dk.len() / self.dim
    }

    pub fn current(&self) -> &[f64] {
        &self.x[self.x.len() - self.dim..]
    }

    /// Segment ending at the current state.
    pub fn current_segment(&self) -> SegmentView<'_> {
        segment_window(&self.x, self.dim, &self.grid, self.steps_done())
    }

    pub fn push(&mut self, x_next: &[f64], dk: &[f64]) {
        debug_assert!(self.steps_done() < self.grid.steps());
        self.x.extend_from_slice(x_next);
        self.dk.extend_from_slice(dk);
    }

    pub fn finish(self) -> TrajectoryPair {
        let n = self.grid.steps();
        assert_eq!(self.steps_done(), n, "trajectory finished early");
        let d = self.dim;
        let mut k = vec![0.0; (n + 1) * d];
        let mut variation = vec![0.0; n + 1];
        for step in 0..n {
            let inc = &self.dk[step * d..(step + 1) * d];
            for i in 0..d {
                k[(step + 1) * d + i] = k[step * d + i] + inc[i];
            }
            variation[step + 1] = variation[step] + dot(inc, inc).sqrt();
        }
        TrajectoryPair {
            grid: self.grid,
            dim: d,
            x: self.x,
            dk: self.dk,
            k,
            variation,
        }
    }
}

/// `Σ_k <X¹(t_{k+1}) - X²(t_{k+1}), ΔK¹_k - ΔK²_k>`, the discrete monotone coupling
/// of two regularising processes.
pub fn increment_coupling(a: &TrajectoryPair, b: &TrajectoryPair) -> Result<f64> {
    if a.grid != b.grid || a.dim != b.dim {
        return Err(Error::invalid("trajectories live on different grids"));
    }
    let mut total = 0.0;
    for step in 0..a.grid.steps() {
        let xa = a.state(step + 1);
        let xb = b.state(step + 1);
        let ka = a.increment(step);
        let kb = b.increment(step);
        total += xa
            .iter()
            .zip(xb)
            .zip(ka.iter().zip(kb))
            .map(|((p, q), (r, s))| (p - q) * (r - s))
            .sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp_traj() -> TrajectoryPair {
        // X(s) = s on [-0.2, 0.5], dt = 0.1
        let grid = TimeGrid::new(0.1, 0.2, 0.5).unwrap();
        let x: Vec<f64> = (0..grid.path_len()).map(|i| -0.2 + i as f64 * 0.1).collect();
        TrajectoryPair::from_path(&grid, 1, x).unwrap()
    }

    #[test]
    fn grid_rejects_non_multiples() {
        assert!(TimeGrid::new(0.1, 0.25, 1.0).is_err());
        assert!(TimeGrid::new(0.1, 0.2, 1.05).is_err());
        assert!(TimeGrid::new(0.1, 0.2, 0.0).is_err());
        let g = TimeGrid::new(1e-3, 0.0, 1.0).unwrap();
        assert_eq!((g.delay_steps(), g.steps()), (0, 1000));
    }

    #[test]
    fn segment_at_examples() {
        let traj = ramp_traj();
        let s = traj.segment_at(0.3).unwrap();
        let expected = [0.1, 0.2, 0.3];
        for (a, b) in s.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(traj.segment_at(0.35).is_err());
        assert!(traj.segment_at(0.6).is_err());

        let grid = TimeGrid::new(0.1, 0.2, 0.5).unwrap();
        let xi = Segment::new(&grid, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let t0 = TrajectoryPair::initial_extension(&grid, &xi).unwrap();
        assert_eq!(t0.segment_at(0.0).unwrap(), xi);
        let c = Segment::constant(&grid, &[4.0, -1.0]).unwrap();
        let tc = TrajectoryPair::initial_extension(&grid, &c).unwrap();
        for step in 0..=grid.steps() {
            assert_eq!(tc.segment_view(step).to_segment(), c);
        }
    }

    #[test]
    fn sup_norm_examples() {
        let g1 = TimeGrid::new(0.1, 0.1, 1.0).unwrap();
        assert_eq!(Segment::constant(&g1, &[0.0, 0.0]).unwrap().sup_norm(), 0.0);
        assert_eq!(Segment::new(&g1, 2, vec![3.0, 4.0, 0.0, 0.0]).unwrap().sup_norm(), 5.0);
        let g2 = TimeGrid::new(0.1, 0.2, 1.0).unwrap();
        assert_eq!(Segment::new(&g2, 1, vec![-1.0, 2.0, -3.0]).unwrap().sup_norm(), 3.0);
    }

    #[test]
    fn initial_extension_examples() {
        let grid = TimeGrid::new(0.1, 0.2, 1.0).unwrap();
        let xi = Segment::new(&grid, 1, vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(initial_extension(&xi, 0), xi);
        assert_eq!(initial_extension(&xi, 1).values(), &[6.0, 7.0, 7.0]);
        assert_eq!(initial_extension(&xi, 2).values(), &[7.0, 7.0, 7.0]);
        assert_eq!(initial_extension(&xi, 9).values(), &[7.0, 7.0, 7.0]);
    }

    #[test]
    fn interpolated_initial_data() {
        let grid = TimeGrid::new(0.1, 0.2, 1.0).unwrap();
        let s = Segment::interpolated(&grid, &[(-0.2, vec![0.0]), (0.0, vec![2.0])]).unwrap();
        for (a, b) in s.values().iter().zip([0.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn with_increments(incs: &[Vec<f64>]) -> TrajectoryPair {
        let dim = incs[0].len();
        let grid = TimeGrid::from_steps(0.1, 0, incs.len()).unwrap();
        let xi = Segment::constant(&grid, &vec![0.0; dim]).unwrap();
        let mut b = TrajectoryBuilder::new(&grid, &xi).unwrap();
        for inc in incs {
            b.push(&vec![0.0; dim], inc);
        }
        b.finish()
    }

    #[test]
    fn total_variation_examples() {
        let zero = with_increments(&[vec![0.0], vec![0.0]]);
        assert_eq!(zero.total_variation(0.0, 0.2).unwrap(), 0.0);

        let single = with_increments(&[vec![0.3, -0.4]]);
        assert!((single.total_variation(0.0, 0.1).unwrap() - 0.5).abs() < 1e-15);

        let back_forth = with_increments(&[vec![1.0], vec![-1.0]]);
        assert_eq!(back_forth.total_variation(0.0, 0.2).unwrap(), 2.0);
        assert_eq!(back_forth.k(2), &[0.0]);
        assert!(back_forth.total_variation(0.2, 0.1).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let traj = ramp_traj();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x0,k0,k_var");
        assert_eq!(lines.len(), 1 + traj.grid().path_len());
        assert!(lines[1].ends_with(",,"));
    }

    proptest! {
        #[test]
        fn shift_identity(step in 0usize..=5, j in 0usize..=2) {
            let traj = ramp_traj();
            let seg = traj.segment_view(step);
            let t = step as f64 * 0.1 + (j as f64 * 0.1 - 0.2);
            prop_assert!((seg.point(j)[0] - t).abs() < 1e-12);
        }

        #[test]
        fn sup_norm_triangle(
            a in proptest::collection::vec(-5.0..5.0f64, 6),
            b in proptest::collection::vec(-5.0..5.0f64, 6),
            c in proptest::collection::vec(-5.0..5.0f64, 6),
        ) {
            let g = TimeGrid::new(0.1, 0.2, 1.0).unwrap();
            let (a, b, c) = (
                Segment::new(&g, 2, a).unwrap(),
                Segment::new(&g, 2, b).unwrap(),
                Segment::new(&g, 2, c).unwrap(),
            );
            let ab = a.sub(&b).unwrap().sup_norm();
            let ac = a.sub(&c).unwrap().sup_norm();
            let cb = c.sub(&b).unwrap().sup_norm();
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn variation_is_additive(
            incs in proptest::collection::vec(-2.0..2.0f64, 10),
            s in 0usize..=10, t in 0usize..=10, u in 0usize..=10,
        ) {
            let mut idx = [s, t, u];
            idx.sort();
            let traj = with_increments(&incs.iter().map(|v| vec![*v]).collect::<Vec<_>>());
            let su = traj.variation_between(idx[0], idx[2]).unwrap();
            let st = traj.variation_between(idx[0], idx[1]).unwrap();
            let tu = traj.variation_between(idx[1], idx[2]).unwrap();
            prop_assert!((su - (st + tu)).abs() <= 1e-13 * (1.0 + su));
        }
    }
}
