//! Coefficients and their approximation machinery.
//!
//! Path coefficients map `(t, ζ)` to a drift vector or a row-major `d×m`
//! diffusion matrix. Mean-field coefficients additionally read an empirical
//! segment law. Evaluation writes into a caller-provided buffer, whose length
//! fixes the output shape.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{EmpiricalSegmentLaw, LawFunctional};
use crate::rng::standard_normal;
use crate::segments::{Segment, SegmentView, TimeGrid};

/// A concave modulus of continuity `κ` with `κ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusKappa {
    /// `κ(x) = L·x`.
    Linear { lipschitz: f64 },
    /// `κ(x) = x·ln(1/x)` on `[0, η]`, continued by its tangent line at `η`.
    LogLipschitz { eta: f64 },
}

impl ModulusKappa {
    pub fn linear(lipschitz: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::invalid("linear modulus needs L > 0"));
        }
        Ok(ModulusKappa::Linear { lipschitz })
    }

    /// `η ∈ (0, e⁻¹]`. At `η = e⁻¹` the tangent continuation is flat.
    pub fn log_lipschitz(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= (-1.0f64).exp()) {
            return Err(Error::invalid(format!(
                "log-Lipschitz modulus needs η in (0, 1/e], got {eta}"
            )));
        }
        Ok(ModulusKappa::LogLipschitz { eta })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!("κ is defined on [0, ∞), got {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match *self {
            ModulusKappa::Linear { lipschitz } => lipschitz * x,
            ModulusKappa::LogLipschitz { eta } => {
                if x == 0.0 {
                    0.0
                } else if x <= eta {
                    -x * x.ln()
                } else {
                    let slope = -eta.ln() - 1.0;
                    -eta * eta.ln() + slope * (x - eta)
                }
            }
        }
    }
}

/// Drift `f(t, ζ)` or diffusion `g(t, ζ)` of a path-dependent equation.
pub trait PathCoefficient: Send + Sync + Debug {
    /// Writes the value into `out` (length `d` for drifts, `d·m` for diffusions).
    fn eval(&self, t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()>;

    /// A bound on `|f|` when one is known.
    fn bound(&self) -> Option<f64> {
        None
    }

    /// A constant `L₂` with `|f(ζ) - f(η)|² ≤ L₂ ‖ζ - η‖²_∞`, when known.
    fn lipschitz_sq(&self) -> Option<f64> {
        None
    }

    /// False when the value never reads the segment.
    fn reads_segment(&self) -> bool {
        true
    }
}

/// Drift `b(t, ζ, μ)` or diffusion `σ(t, ζ, μ)` of a mean-field equation.
pub trait MeanFieldCoefficient: Send + Sync + Debug {
    fn eval(&self, t: f64, seg: &SegmentView<'_>, law: &EmpiricalSegmentLaw, out: &mut [f64]) -> Result<()>;

    /// False when the value never reads the law.
    fn reads_law(&self) -> bool {
        true
    }
}

pub type SharedPathCoefficient = Arc<dyn PathCoefficient>;
pub type SharedMeanFieldCoefficient = Arc<dyn MeanFieldCoefficient>;

fn expect_len(out: &[f64], n: usize, what: &str) -> Result<()> {
    if out.len() == n {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} writes {n} values, buffer holds {}",
            out.len()
        )))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl PathCoefficient for Zero {
    fn eval(&self, _t: f64, _seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }
    fn bound(&self) -> Option<f64> {
        Some(0.0)
    }
    fn lipschitz_sq(&self) -> Option<f64> {
        Some(0.0)
    }
    fn reads_segment(&self) -> bool {
        false
    }
}

/// Constant output; a single value is broadcast to every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub value: Vec<f64>,
}

impl PathCoefficient for Constant {
    fn eval(&self, _t: f64, _seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        if self.value.len() == 1 {
            out.fill(self.value[0]);
        } else {
            expect_len(out, self.value.len(), "constant coefficient")?;
            out.copy_from_slice(&self.value);
        }
        Ok(())
    }
    fn bound(&self) -> Option<f64> {
        Some(self.value.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
    fn lipschitz_sq(&self) -> Option<f64> {
        Some(0.0)
    }
    fn reads_segment(&self) -> bool {
        false
    }
}

/// `f(t, ζ) = -a·ζ(0) + b·ζ(-r0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDelay {
    pub a: f64,
    pub b: f64,
}

impl PathCoefficient for LinearDelay {
    fn eval(&self, _t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        expect_len(out, seg.dim(), "linear delay drift")?;
        for ((o, now), past) in out.iter_mut().zip(seg.end()).zip(seg.start()) {
            *o = -self.a * now + self.b * past;
        }
        Ok(())
    }
    fn lipschitz_sq(&self) -> Option<f64> {
        Some(2.0 * (self.a * self.a + self.b * self.b))
    }
}

/// `g ≡ σ·I` as a `d×m` matrix (ones on the leading diagonal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDiffusion {
    pub sigma: f64,
    pub noise_dim: usize,
}

impl PathCoefficient for ConstantDiffusion {
    fn eval(&self, _t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        let (d, m) = (seg.dim(), self.noise_dim);
        expect_len(out, d * m, "constant diffusion")?;
        out.fill(0.0);
        for i in 0..d.min(m) {
            out[i * m + i] = self.sigma;
        }
        Ok(())
    }
    fn lipschitz_sq(&self) -> Option<f64> {
        Some(0.0)
    }
    fn reads_segment(&self) -> bool {
        false
    }
}

/// `f(t, ζ) = -gain·sign(ζ(0))·κ(|ζ(0)| ∧ 1)`, componentwise.
///
/// `gain > 0` pulls towards the origin, `gain < 0` pushes away from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaDrift {
    pub kappa: ModulusKappa,
    pub gain: f64,
}

impl PathCoefficient for KappaDrift {
    fn eval(&self, _t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        expect_len(out, seg.dim(), "kappa drift")?;
        for (o, &x) in out.iter_mut().zip(seg.end()) {
            let mag = self.gain * self.kappa.eval_unchecked(x.abs().min(1.0));
            *o = if x > 0.0 {
                -mag
            } else if x < 0.0 {
                mag
            } else {
                0.0
            };
        }
        Ok(())
    }
    fn bound(&self) -> Option<f64> {
        Some(self.gain.abs() * self.kappa.eval_unchecked(1.0))
    }
}

/// Integral of the piecewise-linear interpolant of `seg` over `[a, b] ⊂ [-r0, 0]`,
/// accumulated into `acc`.
fn integrate_linear(seg: &SegmentView<'_>, a: f64, b: f64, acc: &mut [f64]) {
    if b <= a {
        return;
    }
    let dt = seg.dt();
    let r0 = seg.r0();
    let cells = seg.len() - 1;
    let value_at = |cell: usize, r: f64, i: usize| {
        let left = -r0 + cell as f64 * dt;
        let w = ((r - left) / dt).clamp(0.0, 1.0);
        let p = seg.point(cell)[i];
        let q = seg.point(cell + 1)[i];
        p + w * (q - p)
    };
    let first = (((a + r0) / dt).floor().max(0.0) as usize).min(cells.saturating_sub(1));
    for cell in first..cells {
        let left = -r0 + cell as f64 * dt;
        let right = left + dt;
        let lo = a.max(left);
        let hi = b.min(right);
        if hi > lo {
            for (i, slot) in acc.iter_mut().enumerate() {
                *slot += 0.5 * (hi - lo) * (value_at(cell, lo, i) + value_at(cell, hi, i));
            }
        }
        if right >= b {
            break;
        }
    }
}

/// The segment mollifier: a forward window average of width `1/n` of the
/// path frozen at `ζ(0)` past the window end, rescaled so its sup-norm stays
/// below `n`. The integral is exact for the piecewise-linear interpolant.
pub fn mollify_segment(zeta: &SegmentView<'_>, n: u32) -> Result<Segment> {
    if n == 0 {
        return Err(Error::invalid("mollifier index must be at least 1"));
    }
    let nf = n as f64;
    let width = 1.0 / nf;
    let norm = zeta.sup_norm();
    let scale = if norm == 0.0 { 1.0 } else { norm.min(nf) / norm };
    let dim = zeta.dim();
    let r0 = zeta.r0();
    let mut values = Vec::with_capacity(zeta.values().len());
    let mut acc = vec![0.0; dim];
    for j in 0..zeta.len() {
        let s = -r0 + j as f64 * zeta.dt();
        acc.fill(0.0);
        integrate_linear(zeta, s, (s + width).min(0.0), &mut acc);
        let frozen = (s + width).max(0.0) - s.max(0.0);
        for (a, end) in acc.iter_mut().zip(zeta.end()) {
            *a += frozen * end;
        }
        values.extend(acc.iter().map(|a| scale * nf * a));
    }
    let grid = TimeGrid::from_steps(zeta.dt(), zeta.len() - 1, 1)?;
    Segment::new(&grid, dim, values)
}

/// Monte Carlo smoothing `f_n(t, ζ) = E f(t, φ_n(ζ) + W̃(r0 + ·)/n)`.
///
/// The auxiliary Brownian paths are drawn once at construction, so the
/// result is a deterministic function of `(t, ζ)`.
#[derive(Debug, Clone)]
pub struct Smoothed {
    inner: SharedPathCoefficient,
    n: u32,
    dim: usize,
    aux: Vec<Vec<f64>>,
}

impl Smoothed {
    pub fn samples(&self) -> usize {
        self.aux.len()
    }
}

impl PathCoefficient for Smoothed {
    fn eval(&self, t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        if seg.dim() != self.dim || seg.values().len() != self.aux[0].len() {
            return Err(Error::invalid("smoothed coefficient evaluated on a foreign grid"));
        }
        let base = mollify_segment(seg, self.n)?;
        let inv_n = 1.0 / self.n as f64;
        let mut shifted = vec![0.0; base.values().len()];
        let mut tmp = vec![0.0; out.len()];
        let mut sum = vec![0.0; out.len()];
        for path in &self.aux {
            for ((s, b), w) in shifted.iter_mut().zip(base.values()).zip(path) {
                *s = b + inv_n * w;
            }
            self.inner
                .eval(t, &SegmentView::new(seg.dt(), self.dim, &shifted), &mut tmp)?;
            for (acc, v) in sum.iter_mut().zip(&tmp) {
                *acc += v;
            }
        }
        let count = self.aux.len() as f64;
        for (o, s) in out.iter_mut().zip(&sum) {
            *o = s / count;
        }
        Ok(())
    }
    fn bound(&self) -> Option<f64> {
        self.inner.bound()
    }
    fn reads_segment(&self) -> bool {
        self.inner.reads_segment()
    }
}

/// Builds the smoothed coefficient `f_n` with `mc_samples` auxiliary paths
/// on the segment grid of `grid`, in dimension `dim`.
pub fn smooth_coefficient<R: Rng + ?Sized>(
    f: SharedPathCoefficient,
    n: u32,
    mc_samples: usize,
    grid: &TimeGrid,
    dim: usize,
    rng: &mut R,
) -> Result<Smoothed> {
    if n == 0 || mc_samples == 0 || dim == 0 {
        return Err(Error::invalid("smoothing needs n >= 1, mc_samples >= 1 and dim >= 1"));
    }
    let len = grid.segment_len();
    let sd = grid.dt().sqrt();
    let aux = (0..mc_samples)
        .map(|_| {
            let mut path = vec![0.0; len * dim];
            for j in 1..len {
                for i in 0..dim {
                    path[j * dim + i] = path[(j - 1) * dim + i] + sd * standard_normal(rng);
                }
            }
            path
        })
        .collect();
    Ok(Smoothed { inner: f, n, dim, aux })
}

/// `h(ζ)·f(t, ζ)` with the cutoff `h = clamp(1 - (‖ζ‖_∞ - radius)/ramp, 0, 1)`.
#[derive(Debug, Clone)]
pub struct Truncated {
    inner: SharedPathCoefficient,
    radius: f64,
    ramp: f64,
}

impl Truncated {
    pub fn cutoff(&self, seg: &SegmentView<'_>) -> f64 {
        (1.0 - (seg.sup_norm() - self.radius) / self.ramp).clamp(0.0, 1.0)
    }
}

impl PathCoefficient for Truncated {
    fn eval(&self, t: f64, seg: &SegmentView<'_>, out: &mut [f64]) -> Result<()> {
        self.inner.eval(t, seg, out)?;
        let h = self.cutoff(seg);
        for o in out.iter_mut() {
            *o *= h;
        }
        Ok(())
    }
    fn bound(&self) -> Option<f64> {
        self.inner.bound()
    }
    fn reads_segment(&self) -> bool {
        true
    }
}

pub fn truncate_coefficient(f: SharedPathCoefficient, radius: f64, ramp: f64) -> Result<Truncated> {
    if !(radius > 0.0 && ramp > 0.0 && radius.is_finite() && ramp.is_finite()) {
        return Err(Error::invalid("cutoff needs positive radius and ramp"));
    }
    Ok(Truncated { inner: f, radius, ramp })
}

/// Adapts a path coefficient to the mean-field interface; the law is ignored.
#[derive(Debug, Clone)]
pub struct LawFree(pub SharedPathCoefficient);

impl MeanFieldCoefficient for LawFree {
    fn eval(&self, t: f64, seg: &SegmentView<'_>, _law: &EmpiricalSegmentLaw, out: &mut [f64]) -> Result<()> {
        self.0.eval(t, seg, out)
    }
    fn reads_law(&self) -> bool {
        false
    }
}

/// `b(t, ζ, μ) = -(ζ(0) - w·<μ, F>)` for `F` one of the point-evaluation functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldLinear {
    pub weight: f64,
    pub functional: LawFunctional,
}

impl MeanFieldCoefficient for MeanFieldLinear {
    fn eval(&self, _t: f64, seg: &SegmentView<'_>, law: &EmpiricalSegmentLaw, out: &mut [f64]) -> Result<()> {
        expect_len(out, seg.dim(), "mean-field linear drift")?;
        let m = match self.functional {
            LawFunctional::EvalEnd => law.mean_end(),
            LawFunctional::EvalDelay => law.mean_delay(),
            LawFunctional::SupSq => {
                return Err(Error::invalid("mean-field linear drift reads a point evaluation"));
            }
        };
        for ((o, x), mu) in out.iter_mut().zip(seg.end()).zip(m) {
            *o = -(x - self.weight * mu);
        }
        Ok(())
    }
}

/// `b(t, ζ, μ) = -ζ(0) / (1 + μ(‖·‖²_∞))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondMomentDrift;

impl MeanFieldCoefficient for SecondMomentDrift {
    fn eval(&self, _t: f64, seg: &SegmentView<'_>, law: &EmpiricalSegmentLaw, out: &mut [f64]) -> Result<()> {
        expect_len(out, seg.dim(), "second-moment drift")?;
        let damp = 1.0 / (1.0 + law.second_moment());
        for (o, x) in out.iter_mut().zip(seg.end()) {
            *o = -x * damp;
        }
        Ok(())
    }
}

/// A coefficient parameter from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

/// Catalogue selection: a coefficient name and its parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub name: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, ParamValue>,
}

impl CoefficientSpec {
    pub fn new(name: &str) -> Self {
        CoefficientSpec {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), ParamValue::Number(value));
        self
    }

    pub fn with_text(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.into(), ParamValue::Text(value.into()));
        self
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown parameter `{key}` for coefficient `{}`",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(*v),
            Some(_) => Err(Error::invalid(format!(
                "parameter `{key}` of `{}` must be a number",
                self.name
            ))),
        }
    }

    pub(crate) fn text<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Text(s)) => Ok(s),
            Some(_) => Err(Error::invalid(format!(
                "parameter `{key}` of `{}` must be a string",
                self.name
            ))),
        }
    }

    fn kappa(&self) -> Result<ModulusKappa> {
        match self.text("kappa", "log_lipschitz")? {
            "linear" => ModulusKappa::linear(self.number("lipschitz", 1.0)?),
            "log_lipschitz" => ModulusKappa::log_lipschitz(self.number("eta", (-2.0f64).exp())?),
            other => Err(Error::invalid(format!("unknown modulus `{other}`"))),
        }
    }
}

/// Names accepted by [`build_path_coefficient`].
pub const PATH_COEFFICIENTS: &[&str] = &[
    "zero",
    "constant",
    "linear_delay",
    "constant_diffusion",
    "kappa_drift",
    "log_lipschitz_drift",
];

/// Names accepted by [`build_mean_field_coefficient`] in addition to the path names.
pub const MEAN_FIELD_COEFFICIENTS: &[&str] = &["mf_linear", "mf_second_moment"];

/// Builds a catalogue path coefficient. `noise_dim` sizes diffusion matrices.
pub fn build_path_coefficient(spec: &CoefficientSpec, noise_dim: usize) -> Result<SharedPathCoefficient> {
    let c: SharedPathCoefficient = match spec.name.as_str() {
        "zero" => {
            spec.check_keys(&[])?;
            Arc::new(Zero)
        }
        "constant" => {
            spec.check_keys(&["value"])?;
            let value = match spec.params.get("value") {
                Some(ParamValue::Number(v)) => vec![*v],
                Some(ParamValue::List(v)) if !v.is_empty() => v.clone(),
                _ => return Err(Error::invalid("`constant` needs a numeric `value`")),
            };
            Arc::new(Constant { value })
        }
        "linear_delay" => {
            spec.check_keys(&["a", "b"])?;
            Arc::new(LinearDelay {
                a: spec.number("a", 1.0)?,
                b: spec.number("b", 0.5)?,
            })
        }
        "constant_diffusion" => {
            spec.check_keys(&["sigma"])?;
            Arc::new(ConstantDiffusion {
                sigma: spec.number("sigma", 1.0)?,
                noise_dim,
            })
        }
        "kappa_drift" => {
            spec.check_keys(&["kappa", "lipschitz", "eta", "gain"])?;
            Arc::new(KappaDrift {
                kappa: spec.kappa()?,
                gain: spec.number("gain", 1.0)?,
            })
        }
        "log_lipschitz_drift" => {
            spec.check_keys(&["eta", "gain"])?;
            Arc::new(KappaDrift {
                kappa: ModulusKappa::log_lipschitz(spec.number("eta", (-2.0f64).exp())?)?,
                gain: spec.number("gain", 1.0)?,
            })
        }
        other => return Err(Error::invalid(format!("unknown coefficient name `{other}`"))),
    };
    Ok(c)
}

/// Builds a catalogue mean-field coefficient; path coefficients are lifted law-free.
pub fn build_mean_field_coefficient(spec: &CoefficientSpec, noise_dim: usize) -> Result<SharedMeanFieldCoefficient> {
    match spec.name.as_str() {
        "mf_linear" => {
            spec.check_keys(&["weight", "reads"])?;
            let functional = match spec.text("reads", "delay")? {
                "delay" => LawFunctional::EvalDelay,
                "end" => LawFunctional::EvalEnd,
                other => {
                    return Err(Error::invalid(format!(
                        "`reads` must be `delay` or `end`, got `{other}`"
                    )))
                }
            };
            Ok(Arc::new(MeanFieldLinear {
                weight: spec.number("weight", 1.0)?,
                functional,
            }))
        }
        "mf_second_moment" => {
            spec.check_keys(&[])?;
            Ok(Arc::new(SecondMomentDrift))
        }
        _ => Ok(Arc::new(LawFree(build_path_coefficient(spec, noise_dim)?))),
    }
}
