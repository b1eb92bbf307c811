//! Maximal monotone operators and their resolvents.
//!
//! Three families are supported: the zero operator, normal cones of closed
//! convex sets with nonempty interior, and scalar monotone graphs built from
//! nondecreasing affine pieces with filled jumps. The resolvent
//! `J_λ = (I + λA)^{-1}` is the workhorse of the time-stepping scheme. For a
//! normal cone it is the metric projection, independent of `λ`.
//!
//! Membership tests use an absolute tolerance scaled by `1 + |magnitude|` of
//! the quantity being compared.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for membership and inequality tests.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_finite(x: &[f64], what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite entries")))
    }
}

fn check_dim(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} has dimension {got}, expected {expected}"
        )))
    }
}

/// A closed convex set with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexDomain {
    /// `{x : <normal, x> <= offset}` with a unit normal.
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Componentwise `lower <= x <= upper`; bounds may be infinite.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// One-dimensional `[lower, ∞)`.
    Halfline {
        lower: f64,
    },
}

impl ConvexDomain {
    /// Half-space `{x : <normal, x> <= offset}`. The normal is rescaled to unit length.
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let len = norm(&normal);
        if !(len.is_finite() && len > 0.0) || !offset.is_finite() {
            return Err(Error::invalid(
                "halfspace needs a finite nonzero normal and finite offset",
            ));
        }
        Ok(ConvexDomain::Halfspace {
            normal: normal.iter().map(|v| v / len).collect(),
            offset: offset / len,
        })
    }

    pub fn cuboid(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = ConvexDomain::Box { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = ConvexDomain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn halfline(lower: f64) -> Result<Self> {
        let d = ConvexDomain::Halfline { lower };
        d.validate()?;
        Ok(d)
    }

    /// Checks the nonempty-interior and shape invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexDomain::Halfspace { normal, offset } => {
                check_finite(normal, "halfspace normal")?;
                if normal.is_empty() || (norm(normal) - 1.0).abs() > 1e-12 || !offset.is_finite() {
                    return Err(Error::invalid("halfspace normal must be a finite unit vector"));
                }
            }
            ConvexDomain::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::invalid("box bounds must be nonempty and of equal length"));
                }
                for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if lo.is_nan() || hi.is_nan() || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                        return Err(Error::invalid(format!("box bound {i} is invalid")));
                    }
                    if lo >= hi {
                        return Err(Error::invalid(format!(
                            "box has empty interior in coordinate {i} ({lo} >= {hi})"
                        )));
                    }
                }
            }
            ConvexDomain::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(Error::invalid("ball center must be nonempty"));
                }
                check_finite(center, "ball center")?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid("ball radius must be positive and finite"));
                }
            }
            ConvexDomain::Halfline { lower } => {
                if !lower.is_finite() {
                    return Err(Error::invalid("halfline endpoint must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Halfspace { normal, .. } => normal.len(),
            ConvexDomain::Box { lower, .. } => lower.len(),
            ConvexDomain::Ball { center, .. } => center.len(),
            ConvexDomain::Halfline { .. } => 1,
        }
    }

    /// Metric projection, in place.
    pub fn project_in_place(&self, x: &mut [f64]) {
        match self {
            ConvexDomain::Halfspace { normal, offset } => {
                let excess = dot(normal, x) - offset;
                if excess > 0.0 {
                    for (xi, ni) in x.iter_mut().zip(normal) {
                        *xi -= excess * ni;
                    }
                }
            }
            ConvexDomain::Box { lower, upper } => {
                for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                    *xi = xi.clamp(*lo, *hi);
                }
            }
            ConvexDomain::Ball { center, radius } => {
                let dist = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                if dist > *radius {
                    let s = radius / dist;
                    for (xi, ci) in x.iter_mut().zip(center) {
                        *xi = ci + s * (*xi - ci);
                    }
                }
            }
            ConvexDomain::Halfline { lower } => {
                if x[0] < *lower {
                    x[0] = *lower;
                }
            }
        }
    }

    /// Metric projection onto the domain.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len(), "point")?;
        check_finite(x, "point")?;
        let mut p = x.to_vec();
        self.project_in_place(&mut p);
        Ok(p)
    }

    /// Euclidean distance from `x` to the domain.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ConvexDomain::Halfspace { normal, offset } => (dot(normal, x) - offset).max(0.0),
            ConvexDomain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(xi, (lo, hi))| {
                    let e = (lo - xi).max(xi - hi).max(0.0);
                    e * e
                })
                .sum::<f64>()
                .sqrt(),
            ConvexDomain::Ball { center, radius } => {
                let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                (r - radius).max(0.0)
            }
            ConvexDomain::Halfline { lower } => (lower - x[0]).max(0.0),
        }
    }

    /// A point at positive distance from the boundary.
    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            ConvexDomain::Halfspace { normal, offset } => normal.iter().map(|n| (offset - 1.0) * n).collect(),
            ConvexDomain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => 0.0,
                })
                .collect(),
            ConvexDomain::Ball { center, .. } => center.clone(),
            ConvexDomain::Halfline { lower } => vec![lower + 1.0],
        }
    }

    /// Whether `v` lies in the normal cone `N_D(x)`.
    ///
    /// Fails with a domain violation when `x` is farther than the tolerance
    /// from the domain.
    pub fn in_normal_cone(&self, x: &[f64], v: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len(), "point")?;
        check_dim(self.dim(), v.len(), "direction")?;
        check_finite(x, "point")?;
        check_finite(v, "direction")?;
        let dist = self.distance(x);
        if dist > tol * (1.0 + norm(x)) {
            return Err(Error::DomainViolation(format!(
                "point is at distance {dist:e} from the domain"
            )));
        }
        let vnorm = norm(v);
        let tol_v = tol * (1.0 + vnorm);
        if vnorm <= tol_v {
            return Ok(true);
        }
        let member = match self {
            ConvexDomain::Halfspace { normal, offset } => {
                let vn = dot(v, normal);
                let perp = v
                    .iter()
                    .zip(normal)
                    .map(|(a, n)| (a - vn * n).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let slack = offset - dot(normal, x);
                vn > 0.0 && perp <= tol_v && slack <= tol * (1.0 + norm(x))
            }
            ConvexDomain::Box { lower, upper } => {
                x.iter()
                    .zip(v)
                    .zip(lower.iter().zip(upper))
                    .all(|((xi, vi), (lo, hi))| {
                        let tol_x = tol * (1.0 + xi.abs());
                        if *vi > tol_v {
                            hi.is_finite() && *xi >= hi - tol_x
                        } else if *vi < -tol_v {
                            lo.is_finite() && *xi <= lo + tol_x
                        } else {
                            true
                        }
                    })
            }
            ConvexDomain::Ball { center, radius } => {
                let u: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let un = norm(&u);
                if (un - radius).abs() > tol * (1.0 + radius) {
                    false
                } else {
                    let vr = dot(v, &u) / un;
                    let perp = v
                        .iter()
                        .zip(&u)
                        .map(|(a, ui)| (a - vr * ui / un).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    vr > 0.0 && perp <= tol_v
                }
            }
            ConvexDomain::Halfline { lower } => v[0] < 0.0 && x[0] <= lower + tol * (1.0 + lower.abs()),
        };
        Ok(member)
    }
}

/// Affine piece `y ↦ intercept + slope·y` of a scalar monotone graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub intercept: f64,
    pub slope: f64,
}

impl AffinePiece {
    #[inline]
    fn at(&self, y: f64) -> f64 {
        self.intercept + self.slope * y
    }
}

/// Maximal monotone graph on the real line.
///
/// `pieces[i]` is active on the open interval between `breakpoints[i-1]` and
/// `breakpoints[i]` (unbounded at the ends). At each breakpoint the graph is
/// the closed vertical segment between the left and right limits, so the
/// graph is maximal by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Graph1dRaw")]
pub struct Graph1d {
    breakpoints: Vec<f64>,
    pieces: Vec<AffinePiece>,
}

#[derive(Deserialize)]
struct Graph1dRaw {
    breakpoints: Vec<f64>,
    pieces: Vec<AffinePiece>,
}

impl TryFrom<Graph1dRaw> for Graph1d {
    type Error = Error;
    fn try_from(raw: Graph1dRaw) -> Result<Self> {
        Graph1d::new(raw.breakpoints, raw.pieces)
    }
}

impl Graph1d {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::invalid("graph needs exactly one more piece than breakpoints"));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("graph breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("graph breakpoints must be strictly increasing"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.slope.is_finite() && p.intercept.is_finite()) || p.slope < 0.0 {
                return Err(Error::invalid(format!(
                    "graph piece {i} must have finite, nonnegative slope"
                )));
            }
        }
        for (i, &b) in breakpoints.iter().enumerate() {
            let left = pieces[i].at(b);
            let right = pieces[i + 1].at(b);
            if left > right {
                return Err(Error::invalid(format!(
                    "graph decreases at breakpoint {b} ({left} > {right})"
                )));
            }
        }
        Ok(Graph1d { breakpoints, pieces })
    }

    /// `A(y) = sign(y)` with `A(0) = [-1, 1]`.
    pub fn sign() -> Self {
        Graph1d {
            breakpoints: vec![0.0],
            pieces: vec![
                AffinePiece {
                    intercept: -1.0,
                    slope: 0.0,
                },
                AffinePiece {
                    intercept: 1.0,
                    slope: 0.0,
                },
            ],
        }
    }

    /// `A(y) = slope·y`.
    pub fn linear(slope: f64) -> Result<Self> {
        Graph1d::new(vec![], vec![AffinePiece { intercept: 0.0, slope }])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// Solves `y + λ a ∋ x` for `y`.
    pub fn resolvent(&self, lambda: f64, x: f64) -> Result<f64> {
        for (i, &b) in self.breakpoints.iter().enumerate() {
            let lo = b + lambda * self.pieces[i].at(b);
            let hi = b + lambda * self.pieces[i + 1].at(b);
            if x < lo {
                return Ok(self.solve_piece(i, lambda, x));
            }
            if x <= hi {
                return Ok(b);
            }
        }
        let last = self.pieces.len() - 1;
        let y = self.solve_piece(last, lambda, x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::InternalConsistency(format!(
                "graph resolvent produced {y} for x = {x}"
            )))
        }
    }

    fn solve_piece(&self, i: usize, lambda: f64, x: f64) -> f64 {
        let p = self.pieces[i];
        let y = (x - lambda * p.intercept) / (1.0 + lambda * p.slope);
        // keep the root inside the piece's open interval despite round-off
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.breakpoints[i - 1]
        };
        let hi = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
        y.clamp(lo, hi)
    }

    /// Whether `v ∈ A(y)` within tolerance.
    pub fn contains(&self, y: f64, v: f64, tol: f64) -> bool {
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if (y - b).abs() <= tol * (1.0 + b.abs()) {
                let left = self.pieces[i].at(b);
                let right = self.pieces[i + 1].at(b);
                return v >= left - tol * (1.0 + left.abs()) && v <= right + tol * (1.0 + right.abs());
            }
        }
        let i = self.breakpoints.partition_point(|&b| b < y);
        let value = self.pieces[i].at(y);
        (v - value).abs() <= tol * (1.0 + value.abs())
    }
}

/// The operator `A` in the inclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotoneOperator {
    /// `A ≡ 0` on all of ℝᵈ.
    Zero,
    NormalCone {
        domain: ConvexDomain,
    },
    Graph1d {
        graph: Graph1d,
    },
}

impl MonotoneOperator {
    pub fn normal_cone(domain: ConvexDomain) -> Self {
        MonotoneOperator::NormalCone { domain }
    }

    pub fn graph(graph: Graph1d) -> Self {
        MonotoneOperator::Graph1d { graph }
    }

    /// Dimension fixed by the operator, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            MonotoneOperator::Zero => None,
            MonotoneOperator::NormalCone { domain } => Some(domain.dim()),
            MonotoneOperator::Graph1d { .. } => Some(1),
        }
    }

    /// The closure of `D(A)` when it is not the whole space.
    pub fn domain(&self) -> Option<&ConvexDomain> {
        match self {
            MonotoneOperator::NormalCone { domain } => Some(domain),
            _ => None,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len(), "point")?;
        }
        check_finite(x, "point")
    }

    /// Writes `J_λ(x)` into `x`. Inputs are assumed checked.
    pub(crate) fn resolvent_in_place(&self, lambda: f64, x: &mut [f64]) -> Result<()> {
        match self {
            MonotoneOperator::Zero => {}
            MonotoneOperator::NormalCone { domain } => domain.project_in_place(x),
            MonotoneOperator::Graph1d { graph } => x[0] = graph.resolvent(lambda, x[0])?,
        }
        Ok(())
    }

    /// `J_λ(x) = (I + λA)^{-1}(x)`.
    pub fn resolvent(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "resolvent parameter must be positive, got {lambda}"
            )));
        }
        self.check_point(x)?;
        let mut y = x.to_vec();
        self.resolvent_in_place(lambda, &mut y)?;
        Ok(y)
    }

    /// Yosida approximation `(x - J_λ(x)) / λ`.
    pub fn yosida(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        let j = self.resolvent(lambda, x)?;
        Ok(x.iter().zip(&j).map(|(a, b)| (a - b) / lambda).collect())
    }

    /// Distance from `x` to the closure of `D(A)`.
    pub fn distance_to_domain(&self, x: &[f64]) -> f64 {
        self.domain().map_or(0.0, |d| d.distance(x))
    }

    /// Whether `v ∈ A(x)` within tolerance.
    pub fn contains(&self, x: &[f64], v: &[f64], tol: f64) -> Result<bool> {
        self.check_point(x)?;
        check_dim(x.len(), v.len(), "direction")?;
        match self {
            MonotoneOperator::Zero => Ok(norm(v) <= tol),
            MonotoneOperator::NormalCone { domain } => domain.in_normal_cone(x, v, tol),
            MonotoneOperator::Graph1d { graph } => Ok(graph.contains(x[0], v[0], tol)),
        }
    }

    /// A point of `Int(D(A))` in dimension `dim`.
    pub fn interior_point(&self, dim: usize) -> Vec<f64> {
        match self {
            MonotoneOperator::NormalCone { domain } => domain.interior_point(),
            _ => vec![0.0; dim],
        }
    }
}

/// A claimed element `(x, v)` of the graph of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorPoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl OperatorPoint {
    /// The pair `(J_λ(x), A_λ(x))`, which always lies on the graph.
    pub fn from_yosida(op: &MonotoneOperator, lambda: f64, x: &[f64]) -> Result<Self> {
        let j = op.resolvent(lambda, x)?;
        let v = x.iter().zip(&j).map(|(a, b)| (a - b) / lambda).collect();
        Ok(OperatorPoint { x: j, v })
    }

    pub fn is_member(&self, op: &MonotoneOperator, tol: f64) -> Result<bool> {
        op.contains(&self.x, &self.v, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box() -> ConvexDomain {
        ConvexDomain::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let zero = MonotoneOperator::Zero;
        assert_eq!(zero.resolvent(1.0, &[3.0, -2.0]).unwrap(), vec![3.0, -2.0]);

        let cone = MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0).unwrap());
        assert_eq!(cone.resolvent(0.5, &[-1.0]).unwrap(), vec![0.0]);

        let sign = MonotoneOperator::graph(Graph1d::sign());
        assert_eq!(sign.resolvent(1.0, &[0.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn sign_resolvent_matches_grid_scan() {
        // independent oracle: scan y for the smallest residual dist(x - y, λ·sign(y))
        let g = Graph1d::sign();
        for &(lambda, x) in &[(1.0, 0.5), (1.0, 3.0), (0.3, -2.0), (0.1, 0.05), (2.0, -1.5)] {
            let mut best = (f64::INFINITY, 0.0);
            for i in -40_000..=40_000 {
                let y = i as f64 * 1e-4;
                let a = (x - y) / lambda;
                let resid = if y > 0.0 {
                    (a - 1.0).abs()
                } else if y < 0.0 {
                    (a + 1.0).abs()
                } else {
                    (a.abs() - 1.0).max(0.0)
                };
                if resid < best.0 {
                    best = (resid, y);
                }
            }
            let y = g.resolvent(lambda, x).unwrap();
            assert!((y - best.1).abs() <= 2e-4, "λ={lambda} x={x}: {y} vs scan {}", best.1);
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(unit_box().project(&[2.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        let ball = ConvexDomain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ball.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        let hs = ConvexDomain::halfspace(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(hs.project(&[2.0, 5.0]).unwrap(), vec![0.0, 5.0]);
    }

    #[test]
    fn yosida_examples() {
        assert_eq!(MonotoneOperator::Zero.yosida(0.7, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        let cone = MonotoneOperator::normal_cone(ConvexDomain::halfline(0.0).unwrap());
        assert_eq!(cone.yosida(0.5, &[-1.0]).unwrap(), vec![-2.0]);
        let sign = MonotoneOperator::graph(Graph1d::sign());
        assert_eq!(sign.yosida(1.0, &[3.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn normal_cone_examples() {
        let b = unit_box();
        assert!(b.in_normal_cone(&[0.0, 0.5], &[-1.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(b.in_normal_cone(&[0.5, 0.5], &[0.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(!b.in_normal_cone(&[0.5, 0.5], &[0.1, 0.0], DEFAULT_TOL).unwrap());
        let ball = ConvexDomain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(ball.in_normal_cone(&[1.0, 0.0], &[2.0, 0.0], DEFAULT_TOL).unwrap());
        assert!(!ball.in_normal_cone(&[1.0, 0.0], &[0.0, 2.0], DEFAULT_TOL).unwrap());
        assert!(!ball.in_normal_cone(&[1.0, 0.0], &[-2.0, 0.0], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn normal_cone_rejects_far_points() {
        let b = unit_box();
        assert!(matches!(
            b.in_normal_cone(&[3.0, 0.5], &[1.0, 0.0], DEFAULT_TOL),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn interior_points() {
        assert_eq!(unit_box().interior_point(), vec![0.5, 0.5]);
        assert_eq!(ConvexDomain::halfline(0.0).unwrap().interior_point(), vec![1.0]);
        assert_eq!(
            ConvexDomain::ball(vec![2.0, -1.0], 0.5).unwrap().interior_point(),
            vec![2.0, -1.0]
        );
        let hs = ConvexDomain::halfspace(vec![0.0, 2.0], 4.0).unwrap();
        let p = hs.interior_point();
        assert!(hs.distance(&p) == 0.0 && p[1] < 2.0);
    }

    #[test]
    fn degenerate_domains_rejected() {
        assert!(ConvexDomain::ball(vec![0.0], 0.0).is_err());
        assert!(ConvexDomain::cuboid(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ConvexDomain::halfspace(vec![0.0, 0.0], 1.0).is_err());
        assert!(Graph1d::new(
            vec![0.0],
            vec![
                AffinePiece {
                    intercept: 1.0,
                    slope: 0.0
                },
                AffinePiece {
                    intercept: -1.0,
                    slope: 0.0
                },
            ]
        )
        .is_err());
    }

    #[test]
    fn invalid_resolvent_arguments() {
        let op = MonotoneOperator::Zero;
        assert!(op.resolvent(0.0, &[1.0]).is_err());
        assert!(op.resolvent(1.0, &[f64::NAN]).is_err());
        let cone = MonotoneOperator::normal_cone(unit_box());
        assert!(cone.resolvent(1.0, &[1.0]).is_err());
    }

    #[test]
    fn box_with_infinite_bounds() {
        let d = ConvexDomain::cuboid(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY, 1.0]).unwrap();
        assert_eq!(d.project(&[-3.0, 7.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(d.interior_point(), vec![1.0, 0.0]);
        assert!(!d.in_normal_cone(&[0.0, 0.0], &[0.0, -1.0], DEFAULT_TOL).unwrap());
    }

    fn piecewise_graph() -> Graph1d {
        Graph1d::new(
            vec![-1.0, 0.5],
            vec![
                AffinePiece {
                    intercept: -2.0,
                    slope: 0.5,
                },
                AffinePiece {
                    intercept: 0.0,
                    slope: 1.0,
                },
                AffinePiece {
                    intercept: 3.0,
                    slope: 0.0,
                },
            ],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn graph_resolvent_is_nonexpansive(x in -10.0..10.0f64, y in -10.0..10.0f64, lambda in 0.01..5.0f64) {
            let g = piecewise_graph();
            let jx = g.resolvent(lambda, x).unwrap();
            let jy = g.resolvent(lambda, y).unwrap();
            prop_assert!((jx - jy).abs() <= (x - y).abs() + 1e-12);
        }

        #[test]
        fn graph_yosida_is_member(x in -10.0..10.0f64, lambda in 0.01..5.0f64) {
            let op = MonotoneOperator::graph(piecewise_graph());
            let p = OperatorPoint::from_yosida(&op, lambda, &[x]).unwrap();
            prop_assert!(p.is_member(&op, DEFAULT_TOL).unwrap());
        }

        #[test]
        fn cone_resolvent_ignores_lambda(x in -5.0..5.0f64, y in -5.0..5.0f64, l1 in 0.01..10.0f64, l2 in 0.01..10.0f64) {
            let op = MonotoneOperator::normal_cone(ConvexDomain::ball(vec![0.0, 0.0], 1.5).unwrap());
            prop_assert_eq!(op.resolvent(l1, &[x, y]).unwrap(), op.resolvent(l2, &[x, y]).unwrap());
        }
    }
}
