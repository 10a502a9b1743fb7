//! JSON run configuration. Parsing is strict: unknown keys are rejected and
//! physical parameters have no defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thermogas::fixedpoint::{PicardConfig, DEFAULT_M, DEFAULT_RADIUS};
use thermogas::integrator::{step_count, RunSpec, Scheme};
use thermogas::lp::BesovSpec;
use thermogas::model::{
    AState, Formulation, Kappa3Profile, ModelParams, PrimitiveState, State, TildeState,
};
use thermogas::random::random_field;
use thermogas::{snapshot, Error, Grid, RealField};

/// A configuration problem, tied to the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub initial: Option<InitialConfig>,
    pub time: Option<TimeConfig>,
    pub fixedpoint: Option<FixedPointConfig>,
    pub scaling: Option<ScalingConfig>,
    pub besov: Option<BesovConfig>,
    /// Seed for randomized corpora; `--seed` overrides it.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3_bar: f64,
    pub kappa3_profile: ProfileConfig,
    pub eps_a: Option<f64>,
    pub rho_bar: Option<f64>,
    pub theta_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    // an empty struct variant so extra keys are rejected
    Zero {},
    Tanh { alpha: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    First,
    Second,
    Both,
}

/// Initial perturbation in the stepping variables of the run's formulation:
/// `(a, θ̃)` for the a-form, `(ρ − ρ̄, θ − θ̄)` otherwise.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Zero {},
    /// `amplitude·cos(k·x)` with integer mode `k`.
    SingleMode {
        k: Vec<i64>,
        amplitude: f64,
        component: Component,
    },
    /// Random band-limited data, `max |·| = amplitude` per component.
    RandomBand {
        seed: u64,
        band: usize,
        amplitude: f64,
    },
    /// THGSNAP1 snapshots of the two components.
    File {
        first: PathBuf,
        second: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeConfig {
    Etd1,
    Etdrk2,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum FormulationConfig {
    #[default]
    AForm,
    Tilde,
    Primitive,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub dt: f64,
    pub scheme: SchemeConfig,
    /// Steps between stored snapshots.
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub formulation: FormulationConfig,
    /// Write field files for every this many stored snapshots.
    pub field_stride: Option<usize>,
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    50
}

fn default_c() -> f64 {
    DEFAULT_RADIUS
}

fn default_m() -> f64 {
    DEFAULT_M
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_m", rename = "M", alias = "m")]
    pub m: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            c: default_c(),
            m: default_m(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub lambda: usize,
}

fn first() -> Component {
    Component::First
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovConfig {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    #[serde(default = "first")]
    pub component: Component,
}

/// Parses a configuration; the error names the offending key where serde
/// reports one.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        // serde reports a missing key at its parent
        let missing = msg
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next());
        let key = match (missing, path.as_str()) {
            (Some(field), "." | "") => field.to_string(),
            (Some(field), parent) => format!("{parent}.{field}"),
            (None, "." | "") => "<document>".to_string(),
            (None, p) => p.to_string(),
        };
        ConfigError::new(key, msg)
    })
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::new("--config", format!("cannot read {}: {e}", path.display()))
    })?;
    parse(&text)
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn core_error(prefix: &str, e: Error) -> ConfigError {
    match e {
        Error::InvalidParameter {
            name: "alpha",
            reason,
        } => ConfigError::new(format!("{prefix}.kappa3_profile.alpha"), reason),
        Error::InvalidParameter { name, reason } => {
            ConfigError::new(format!("{prefix}.{name}"), reason)
        }
        other => ConfigError::new(prefix, other.to_string()),
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let g = &self.grid;
        if !(1..=3).contains(&g.dim) {
            return Err(ConfigError::new(
                "grid.dim",
                format!("must be 1, 2 or 3, got {}", g.dim),
            ));
        }
        if g.n < 8 || !g.n.is_power_of_two() {
            return Err(ConfigError::new(
                "grid.n",
                format!("must be a power of two >= 8, got {}", g.n),
            ));
        }
        positive("grid.length", g.length)?;
        Grid::new(g.dim, g.n, g.length).map_err(|e| core_error("grid", e))
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        let p = &self.params;
        for (key, v) in [
            ("kappa1", p.kappa1),
            ("kappa2", p.kappa2),
            ("kappa3_bar", p.kappa3_bar),
        ] {
            positive(&format!("params.{key}"), v)?;
        }
        let profile = match p.kappa3_profile {
            ProfileConfig::Zero {} => Kappa3Profile::Zero,
            ProfileConfig::Tanh { alpha } => Kappa3Profile::Tanh { alpha },
        };
        let mut params = ModelParams::new(p.kappa1, p.kappa2, p.kappa3_bar, profile)
            .map_err(|e| core_error("params", e))?;
        if let Some(eps) = p.eps_a {
            params = params
                .with_eps_a(eps)
                .map_err(|e| core_error("params", e))?;
        }
        if p.rho_bar.is_some() || p.theta_bar.is_some() {
            let rho = positive("params.rho_bar", p.rho_bar.unwrap_or(1.0))?;
            let theta = positive("params.theta_bar", p.theta_bar.unwrap_or(1.0))?;
            params = params
                .with_equilibrium(rho, theta)
                .map_err(|e| core_error("params", e))?;
        }
        Ok(params)
    }

    pub fn time(&self) -> Result<&TimeConfig, ConfigError> {
        let t = self
            .time
            .as_ref()
            .ok_or_else(|| ConfigError::new("time", "this task needs a `time` block"))?;
        positive("time.t_final", t.t_final)?;
        positive("time.dt", t.dt)?;
        let steps =
            step_count(t.t_final, t.dt).map_err(|e| ConfigError::new("time.dt", e.to_string()))?;
        if t.stride == 0 || steps % t.stride != 0 {
            return Err(ConfigError::new(
                "time.stride",
                format!(
                    "must be positive and divide the {steps} steps, got {}",
                    t.stride
                ),
            ));
        }
        if t.field_stride == Some(0) {
            return Err(ConfigError::new("time.field_stride", "must be at least 1"));
        }
        Ok(t)
    }

    pub fn run_spec(&self) -> Result<RunSpec, ConfigError> {
        let t = self.time()?;
        Ok(RunSpec {
            t_final: t.t_final,
            dt: t.dt,
            scheme: match t.scheme {
                SchemeConfig::Etd1 => Scheme::Etd1,
                SchemeConfig::Etdrk2 => Scheme::Etdrk2,
            },
            stride: t.stride,
            formulation: self.formulation(),
        })
    }

    pub fn formulation(&self) -> Formulation {
        match self
            .time
            .as_ref()
            .map(|t| t.formulation)
            .unwrap_or_default()
        {
            FormulationConfig::AForm => Formulation::AForm,
            FormulationConfig::Tilde => Formulation::Tilde,
            FormulationConfig::Primitive => Formulation::Primitive,
        }
    }

    /// The two initial perturbation fields.
    pub fn initial_fields(
        &self,
        grid: &Grid,
        seed: Option<u64>,
    ) -> Result<[RealField; 2], ConfigError> {
        let init = self
            .initial
            .as_ref()
            .ok_or_else(|| ConfigError::new("initial", "this task needs an `initial` block"))?;
        match init {
            InitialConfig::Zero {} => Ok([RealField::zeros(grid), RealField::zeros(grid)]),
            InitialConfig::SingleMode {
                k,
                amplitude,
                component,
            } => {
                if k.len() != grid.dim() {
                    return Err(ConfigError::new(
                        "initial.k",
                        format!("needs {} entries, got {}", grid.dim(), k.len()),
                    ));
                }
                let limit = (grid.n() / 2) as i64;
                if k.iter().any(|m| m.abs() >= limit) {
                    return Err(ConfigError::new(
                        "initial.k",
                        format!("entries must satisfy |k| < {limit}"),
                    ));
                }
                if !amplitude.is_finite() {
                    return Err(ConfigError::new("initial.amplitude", "must be finite"));
                }
                let dk = grid.dk();
                let m: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                let mode = RealField::from_fn(grid, |x| {
                    amplitude * (dk * m.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).cos()
                });
                let zero = RealField::zeros(grid);
                Ok(match component {
                    Component::First => [mode, zero],
                    Component::Second => [zero, mode],
                    Component::Both => [mode.clone(), mode],
                })
            }
            InitialConfig::RandomBand {
                seed: own,
                band,
                amplitude,
            } => {
                if *band == 0 || 3 * band > grid.n() {
                    return Err(ConfigError::new(
                        "initial.band",
                        format!("must be in 1..={} for n = {}", grid.n() / 3, grid.n()),
                    ));
                }
                if !amplitude.is_finite() {
                    return Err(ConfigError::new("initial.amplitude", "must be finite"));
                }
                let s = seed.unwrap_or(*own);
                Ok([
                    random_field(grid, 2 * s, *band, *amplitude),
                    random_field(grid, 2 * s + 1, *band, *amplitude),
                ])
            }
            InitialConfig::File { first, second } => {
                let read = |key: &str, path: &Path| {
                    let (f, _) =
                        snapshot::load(path).map_err(|e| ConfigError::new(key, e.to_string()))?;
                    if !f.grid().same_as(grid) {
                        return Err(ConfigError::new(
                            key,
                            "snapshot grid differs from the configured grid",
                        ));
                    }
                    Ok(f)
                };
                Ok([
                    read("initial.first", first)?,
                    read("initial.second", second)?,
                ])
            }
        }
    }

    /// The initial state in the run's formulation, checked for admissibility.
    pub fn initial_state(
        &self,
        grid: &Grid,
        params: &ModelParams,
        seed: Option<u64>,
    ) -> Result<State, ConfigError> {
        let [u, v] = self.initial_fields(grid, seed)?;
        let admissible =
            |e: Error| ConfigError::new("initial", format!("initial data not admissible: {e}"));
        let formulation = self.formulation();
        if formulation != Formulation::Primitive {
            params
                .require_unit_equilibrium()
                .map_err(|e| ConfigError::new("params.rho_bar", e.to_string()))?;
        }
        Ok(match formulation {
            Formulation::AForm => State::AForm(AState::new(u, v, params).map_err(admissible)?),
            Formulation::Tilde => {
                let t = TildeState { rho: u, theta: v };
                t.to_primitive(params).map_err(admissible)?;
                State::Tilde(t)
            }
            Formulation::Primitive => State::Primitive(
                PrimitiveState::new(
                    u.map(|r| r + params.rho_bar),
                    v.map(|t| t + params.theta_bar),
                )
                .map_err(admissible)?,
            ),
        })
    }

    pub fn picard(&self) -> Result<PicardConfig, ConfigError> {
        let t = self.time()?;
        let fp = self.fixedpoint.clone().unwrap_or_default();
        if self.formulation() != Formulation::AForm {
            return Err(ConfigError::new(
                "time.formulation",
                "the fixed-point solver runs in the a-form",
            ));
        }
        let config = PicardConfig {
            t_final: t.t_final,
            dt: t.dt,
            tol: fp.tol,
            max_iter: fp.max_iter,
            c_radius: fp.c,
            m_const: fp.m,
        };
        config.validate().map_err(|e| core_error("fixedpoint", e))?;
        Ok(config)
    }

    pub fn lambda(&self) -> Result<usize, ConfigError> {
        let s = self
            .scaling
            .as_ref()
            .ok_or_else(|| ConfigError::new("scaling", "this task needs a `scaling` block"))?;
        if s.lambda < 2 {
            return Err(ConfigError::new(
                "scaling.lambda",
                format!("must be an integer >= 2, got {}", s.lambda),
            ));
        }
        if self.grid.n % s.lambda != 0 {
            return Err(ConfigError::new("scaling.lambda", "must divide grid.n"));
        }
        Ok(s.lambda)
    }

    pub fn besov(&self) -> Result<(BesovSpec, Component), ConfigError> {
        let b = self
            .besov
            .as_ref()
            .ok_or_else(|| ConfigError::new("besov", "this task needs a `besov` block"))?;
        let spec =
            BesovSpec::new(b.s, b.p, b.r).map_err(|e| ConfigError::new("besov", e.to_string()))?;
        Ok((spec, b.component))
    }
}
