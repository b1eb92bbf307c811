//! Experiment configuration files.
//!
//! A config file is TOML: `key = value` lines under `[section]` headers.
//! Only `[experiment] name` is required; every other key falls back to the
//! defaults of the named experiment. The `operator`, `drift`, `diffusion` and
//! `initial` sections replace the default section as a whole, the remaining
//! sections are merged key by key. Unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{build_mean_field_coefficient, CoefficientSpec};
use crate::error::{Error, Result};
use crate::monotone::{ConvexDomain, MonotoneOperator};
use crate::rng::{standard_normal, substream, Stream};
use crate::segments::{Segment, TimeGrid};
use crate::solver::{NoisePath, Scheme, SolverConfig};

use super::EXPERIMENTS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub seed: u64,
    /// Monte Carlo paths for single-path experiments.
    pub paths: usize,
    /// Particles for mean-field experiments.
    pub particles: usize,
    /// Picard or distribution iterates; the iteration cap for fixed points.
    pub n_iters: usize,
    pub scheme: Scheme,
    pub dim: usize,
    pub noise_dim: usize,
    /// Declared wall-clock budget in seconds.
    pub budget_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub r0: f64,
    pub horizon: f64,
}

/// Initial segments `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `ξ ≡ value` for every path.
    Constant { value: Vec<f64> },
    /// `ξ_i(θ) = a_i + slope·θ/r0` with `a_i ~ N(mean, sd²)` drawn per particle,
    /// the same offset in every component. `slope` is ignored when `r0 = 0`.
    RandomRamp { mean: f64, sd: f64, slope: f64 },
}

/// Pass/fail tolerances. Recorded in the manifest with everything else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Standard errors allowed on statistical targets.
    pub se_multiplier: f64,
    /// Bias allowance in units of `dt` for state moments.
    pub bias_dt: f64,
    /// Bias allowance in units of `dt` for the variation of `K`.
    pub variation_bias_dt: f64,
    /// Absolute tolerance on deterministic targets.
    pub deterministic: f64,
    /// Largest accepted contraction ratio `D_{n+1}/D_n`.
    pub ratio_max: f64,
    /// Largest accepted `W₂` at the end of an iteration or between two solvers.
    pub w2_max: f64,
    /// Largest accepted relative change of `E|K|` when `dt` is halved.
    pub variation_rel: f64,
    /// Required reduction factor between the largest and smallest perturbation.
    pub continuity_reduction: f64,
    /// Accepted deviation of the Lipschitz log-log slope from 2.
    pub slope_tol: f64,
    /// Ceiling on `μ_t(‖·‖²_∞)` over all iterates and times.
    pub moment_ceiling: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            se_multiplier: 3.0,
            bias_dt: 2.0,
            variation_bias_dt: 5.0,
            deterministic: 1e-8,
            ratio_max: 0.75,
            w2_max: 0.05,
            variation_rel: 0.1,
            continuity_reduction: 10.0,
            slope_tol: 0.25,
            moment_ceiling: 100.0,
        }
    }
}

/// Knobs used by individual experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    /// Contraction window; derived from the smallness condition when absent.
    pub t0: Option<f64>,
    /// Constant in the smallness condition `2(L₂ + C·L₂)·t0·e^{2 t0} <= 1/2`.
    pub bdg_constant: f64,
    /// Perturbation sizes of the continuity test, decreasing.
    pub deltas: Vec<f64>,
    /// Also run the continuity test with a Lipschitz modulus of the same gain.
    pub compare_linear: bool,
    /// Stop a fixed-point iteration once successive iterates are this close.
    pub fixed_point_tol: f64,
    /// Largest particle count for which `W₂` is solved exactly.
    pub w2_exact_cap: usize,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            t0: None,
            bdg_constant: 4.0,
            deltas: vec![1e-1, 1e-2, 1e-3],
            compare_linear: true,
            fixed_point_tol: 1e-15,
            w2_exact_cap: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; the CLI `--out` flag takes precedence.
    pub dir: Option<String>,
    /// Number of sample trajectories written as CSV.
    pub trajectories: usize,
    /// Write the flow JSONL of mean-field experiments.
    pub flows: bool,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: RunSection,
    pub grid: GridSection,
    pub operator: MonotoneOperator,
    pub drift: CoefficientSpec,
    pub diffusion: CoefficientSpec,
    pub initial: InitialSpec,
    pub tolerance: ToleranceSection,
    pub params: ParamsSection,
    pub output: OutputSection,
}

fn halfline() -> MonotoneOperator {
    MonotoneOperator::normal_cone(ConvexDomain::Halfline { lower: 0.0 })
}

fn run_section(name: &str, paths: usize, particles: usize, n_iters: usize, scheme: Scheme, budget: f64) -> RunSection {
    RunSection {
        name: name.into(),
        seed: 20_240_607,
        paths,
        particles,
        n_iters,
        scheme,
        dim: 1,
        noise_dim: 1,
        budget_seconds: budget,
    }
}

/// First key path present in `user` but absent from its parsed form.
fn stray_key(user: &toml::Value, parsed: &toml::Value) -> Option<String> {
    let (toml::Value::Table(u), toml::Value::Table(p)) = (user, parsed) else {
        return None;
    };
    u.iter().find_map(|(k, v)| match p.get(k) {
        None => Some(k.clone()),
        Some(pv) => stray_key(v, pv).map(|sub| format!("{k}.{sub}")),
    })
}

impl ExperimentConfig {
    /// The built-in configuration of a named experiment.
    pub fn defaults(name: &str) -> Result<Self> {
        let sigma = |s: f64| CoefficientSpec::new("constant_diffusion").with("sigma", s);
        let constant = |v: f64| InitialSpec::Constant { value: vec![v] };
        let mean_field = |particles, n_iters, budget| ExperimentConfig {
            experiment: run_section(name, 0, particles, n_iters, Scheme::ResolventStep, budget),
            grid: GridSection {
                dt: 0.01,
                r0: 0.1,
                horizon: 1.0,
            },
            operator: MonotoneOperator::Zero,
            drift: CoefficientSpec::new("mf_linear")
                .with("weight", 1.0)
                .with_text("reads", "delay"),
            diffusion: sigma(0.5),
            initial: InitialSpec::RandomRamp {
                mean: 1.0,
                sd: 0.5,
                slope: 1.0,
            },
            tolerance: ToleranceSection::default(),
            params: ParamsSection::default(),
            output: OutputSection::default(),
        };
        let base = |run: RunSection, grid: GridSection, operator, drift, diffusion, initial| ExperimentConfig {
            experiment: run,
            grid,
            operator,
            drift,
            diffusion,
            initial,
            tolerance: ToleranceSection::default(),
            params: ParamsSection::default(),
            output: OutputSection::default(),
        };
        let cfg = match name {
            "reflected_bm_oracle" => base(
                run_section(name, 100_000, 0, 0, Scheme::ReflectedBridge, 120.0),
                GridSection {
                    dt: 1e-3,
                    r0: 0.0,
                    horizon: 1.0,
                },
                halfline(),
                CoefficientSpec::new("zero"),
                sigma(1.0),
                constant(0.0),
            ),
            "k_variation_stability" => base(
                run_section(name, 20_000, 0, 0, Scheme::ResolventStep, 120.0),
                GridSection {
                    dt: 1e-3,
                    r0: 0.0,
                    horizon: 1.0,
                },
                halfline(),
                CoefficientSpec::new("zero"),
                sigma(1.0),
                constant(0.0),
            ),
            "delay_mean_oracle" => {
                let mut cfg = mean_field(10_000, 0, 120.0);
                cfg.grid = GridSection {
                    dt: 0.01,
                    r0: 1.0,
                    horizon: 1.0,
                };
                cfg.drift = CoefficientSpec::new("mf_linear")
                    .with("weight", 0.5)
                    .with_text("reads", "delay");
                cfg.initial = constant(1.0);
                cfg
            }
            "picard_contraction" => base(
                run_section(name, 1_000, 0, 8, Scheme::ResolventStep, 60.0),
                GridSection {
                    dt: 1e-3,
                    r0: 0.02,
                    horizon: 0.2,
                },
                halfline(),
                CoefficientSpec::new("linear_delay").with("a", 0.5).with("b", 0.25),
                sigma(1.0),
                constant(1.0),
            ),
            "uniqueness" => base(
                run_section(name, 100, 0, 60, Scheme::ResolventStep, 60.0),
                GridSection {
                    dt: 0.01,
                    r0: 0.1,
                    horizon: 1.0,
                },
                halfline(),
                CoefficientSpec::new("linear_delay").with("a", 0.5).with("b", 0.25),
                sigma(1.0),
                constant(1.0),
            ),
            "continuity" => base(
                run_section(name, 1_000, 0, 0, Scheme::ResolventStep, 60.0),
                GridSection {
                    dt: 0.01,
                    r0: 0.1,
                    horizon: 1.0,
                },
                MonotoneOperator::normal_cone(ConvexDomain::Box {
                    lower: vec![-2.0],
                    upper: vec![2.0],
                }),
                CoefficientSpec::new("kappa_drift")
                    .with_text("kappa", "log_lipschitz")
                    .with("gain", -1.0),
                sigma(1.0),
                constant(0.0),
            ),
            "distribution_iteration" => mean_field(256, 9, 120.0),
            "mean_field_cross_check" => mean_field(256, 12, 120.0),
            other => {
                return Err(Error::config(
                    "experiment.name",
                    format!("unknown experiment `{other}`; known: {}", EXPERIMENTS.join(", ")),
                ))
            }
        };
        Ok(cfg)
    }

    /// Parses a config file body, filling unspecified keys from the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("file", e.to_string()))?;
        let name = user
            .get("experiment")
            .and_then(|e| e.get("name"))
            .and_then(|n| n.as_str())
            .ok_or_else(|| Error::config("experiment.name", "missing experiment name"))?;
        let defaults = Self::defaults(name)?;
        let mut merged = toml::Table::try_from(&defaults).map_err(|e| Error::Serialization(e.to_string()))?;
        let user_operator = user.get("operator").cloned();
        for (section, value) in user {
            let replace = matches!(section.as_str(), "operator" | "drift" | "diffusion" | "initial");
            match (merged.get_mut(&section), value) {
                (Some(toml::Value::Table(dst)), toml::Value::Table(src)) if !replace => dst.extend(src),
                (_, value) => {
                    merged.insert(section, value);
                }
            }
        }
        let cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("file", e.message().to_string()))?;
        // serde lets unit variants such as `kind = "zero"` carry stray keys
        if let Some(user_operator) = user_operator {
            let parsed = toml::Value::try_from(&cfg.operator).map_err(|e| Error::Serialization(e.to_string()))?;
            if let Some(key) = stray_key(&user_operator, &parsed) {
                return Err(Error::config("operator", format!("unknown field `{key}`")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The manifest: this configuration as a complete, re-runnable config file.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let GridSection { dt, r0, horizon } = self.grid;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config("grid.dt", "must be positive and finite"));
        }
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::config("grid.r0", "must be nonnegative and finite"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config("grid.horizon", "must be positive and finite"));
        }
        let is_multiple = |x: f64| {
            let k = (x / dt).round();
            (x - k * dt).abs() <= 1e-9 * dt.max(x)
        };
        if !is_multiple(r0) {
            return Err(Error::config(
                "grid.r0",
                format!("r0 = {r0} is not a multiple of dt = {dt}"),
            ));
        }
        if !is_multiple(horizon) {
            return Err(Error::config(
                "grid.horizon",
                format!("horizon = {horizon} is not a multiple of dt = {dt}"),
            ));
        }
        TimeGrid::new(dt, r0, horizon).map_err(|e| Error::config("grid", e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.time_grid()?, self.experiment.scheme, self.operator.clone())
            .map_err(|e| Error::config("operator", e.to_string()))?;
        cfg.membership_tol = self.tolerance.deterministic.min(crate::monotone::DEFAULT_TOL);
        Ok(cfg)
    }

    /// Checks every constraint a run relies on; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let run = &self.experiment;
        if !EXPERIMENTS.contains(&run.name.as_str()) {
            return Err(Error::config(
                "experiment.name",
                format!("unknown experiment `{}`", run.name),
            ));
        }
        if run.seed > i64::MAX as u64 {
            return Err(Error::config("experiment.seed", "must fit in a signed 64-bit integer"));
        }
        if run.dim == 0 {
            return Err(Error::config("experiment.dim", "must be positive"));
        }
        if run.noise_dim == 0 {
            return Err(Error::config("experiment.noise_dim", "must be positive"));
        }
        let needs_particles = matches!(
            run.name.as_str(),
            "delay_mean_oracle" | "distribution_iteration" | "mean_field_cross_check"
        );
        if needs_particles && run.particles == 0 {
            return Err(Error::config(
                "experiment.particles",
                "particle count N must be positive",
            ));
        }
        if !needs_particles && run.paths < 2 {
            return Err(Error::config("experiment.paths", "need at least two Monte Carlo paths"));
        }
        self.time_grid()?;
        self.solver_config()?;
        if let Some(d) = self.operator.dim() {
            if d != run.dim {
                return Err(Error::config(
                    "operator",
                    format!("operator dimension {d} differs from experiment.dim = {}", run.dim),
                ));
            }
        }
        build_mean_field_coefficient(&self.drift, run.noise_dim).map_err(|e| Error::config("drift", e.to_string()))?;
        build_mean_field_coefficient(&self.diffusion, run.noise_dim)
            .map_err(|e| Error::config("diffusion", e.to_string()))?;
        match &self.initial {
            InitialSpec::Constant { value } if value.len() != run.dim => {
                return Err(Error::config("initial.value", "length must equal experiment.dim"));
            }
            InitialSpec::RandomRamp { sd, .. } if !(*sd >= 0.0) => {
                return Err(Error::config("initial.sd", "must be nonnegative"));
            }
            _ => {}
        }
        if self.params.deltas.is_empty() || self.params.deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::config(
                "params.deltas",
                "must be a nonempty list of positive numbers",
            ));
        }
        if let Some(t0) = self.params.t0 {
            if !(t0 > 0.0 && t0 <= self.grid.horizon) {
                return Err(Error::config("params.t0", "must lie in (0, horizon]"));
            }
        }
        if !(run.budget_seconds > 0.0) {
            return Err(Error::config("experiment.budget_seconds", "must be positive"));
        }
        Ok(())
    }

    /// The initial segment of path or particle `index`.
    pub fn initial_segment(&self, grid: &TimeGrid, index: u64) -> Result<Segment> {
        match &self.initial {
            InitialSpec::Constant { value } => Segment::constant(grid, value),
            InitialSpec::RandomRamp { mean, sd, slope } => {
                let mut rng = substream(self.experiment.seed, Stream::InitialLaw, index);
                let a = mean + sd * standard_normal(&mut rng);
                let r0 = grid.r0();
                let dim = self.experiment.dim;
                Segment::from_fn(grid, dim, |theta| {
                    let ramp = if r0 > 0.0 { slope * theta / r0 } else { 0.0 };
                    vec![a + ramp; dim]
                })
            }
        }
    }

    /// The noise path of path or particle `index`, with bridge uniforms when the scheme needs them.
    pub fn noise_path(&self, grid: &TimeGrid, index: u64) -> NoisePath {
        let noise = NoisePath::generate(grid, self.experiment.noise_dim, self.experiment.seed, index);
        if self.experiment.scheme == Scheme::ReflectedBridge {
            noise.with_bridge_uniforms(self.experiment.seed, index)
        } else {
            noise
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        for name in EXPERIMENTS {
            let cfg = ExperimentConfig::defaults(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn partial_file_merges_over_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "[experiment]\nname = \"uniqueness\"\nseed = 7\n\n[grid]\nhorizon = 0.5\n\n[drift]\nname = \"linear_delay\"\na = 1\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment.seed, 7);
        assert_eq!(cfg.experiment.paths, 100);
        assert_eq!(cfg.grid.horizon, 0.5);
        assert_eq!(cfg.grid.dt, 0.01);
        assert_eq!(cfg.drift, CoefficientSpec::new("linear_delay").with("a", 1.0));
    }

    fn field_of(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(Error::Config { field, message }) => format!("{field}: {message}"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn rejections_name_the_field() {
        let r0 = field_of("[experiment]\nname = \"uniqueness\"\n[grid]\nr0 = 0.015\n");
        let horizon = field_of("[experiment]\nname = \"uniqueness\"\n[grid]\nhorizon = 0.995\n");
        let particles = field_of("[experiment]\nname = \"distribution_iteration\"\nparticles = 0\n");
        let coefficient = field_of("[experiment]\nname = \"uniqueness\"\n[drift]\nname = \"mystery\"\n");
        assert!(r0.starts_with("grid.r0"));
        assert!(horizon.starts_with("grid.horizon"));
        assert!(particles.starts_with("experiment.particles"));
        assert!(coefficient.starts_with("drift") && coefficient.contains("mystery"));
        let all = [&r0, &horizon, &particles, &coefficient];
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn unknown_keys_and_names_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("[experiment]\nname = \"uniqueness\"\ncolour = 1\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[experiment]\nname = \"uniqueness\"\n[extra]\nx = 1\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[experiment]\nname = \"nope\"\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[grid]\ndt = 0.1\n").is_err());
        assert!(ExperimentConfig::from_toml_str(
            "[experiment]\nname = \"uniqueness\"\n[operator]\nkind = \"zero\"\nradius = 1\n"
        )
        .is_err());
    }

    #[test]
    fn random_ramp_is_reproducible_per_particle() {
        let cfg = ExperimentConfig::defaults("distribution_iteration").unwrap();
        let grid = cfg.time_grid().unwrap();
        let a = cfg.initial_segment(&grid, 3).unwrap();
        assert_eq!(a, cfg.initial_segment(&grid, 3).unwrap());
        assert_ne!(a, cfg.initial_segment(&grid, 4).unwrap());
        assert!((a.end()[0] - a.point(0)[0] - 1.0).abs() < 1e-12);
    }
}
