//! Run configuration: one scenario, its parameters, resolution settings,
//! and the output destination. Unknown keys are rejected everywhere.

use serde::Deserialize;
use std::path::PathBuf;

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    #[serde(default = "empty_table")]
    params: toml::Value,
    #[serde(default)]
    resolution: Resolution,
    #[serde(default)]
    output: Option<OutputSection>,
}

fn empty_table() -> toml::Value {
    toml::Value::Table(toml::map::Map::new())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<PathBuf>,
    format: Option<OutputFormat>,
}

/// Resolution knobs; every scenario reads the subset it needs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    /// Loop sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Integrator steps; derived from the period when omitted.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Ring sites for the Born-Oppenheimer solver.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Chart resolution per axis for surface integrals.
    #[serde(default = "default_surface_n")]
    pub surface_n: usize,
}

fn default_samples() -> usize {
    4001
}
fn default_grid_n() -> usize {
    192
}
fn default_surface_n() -> usize {
    200
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            steps: None,
            grid_n: default_grid_n(),
            surface_n: default_surface_n(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeParams {
    #[serde(default = "one")]
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    pub theta_re: f64,
    #[serde(default)]
    pub theta_im: f64,
    #[serde(default = "one")]
    pub period: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JonesParams {
    pub kappa_l: f64,
    pub rot_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelixParams {
    pub nu1_re: f64,
    #[serde(default)]
    pub nu1_im: f64,
    pub nu2_re: f64,
    #[serde(default)]
    pub nu2_im: f64,
    /// Circular birefringence; tilts the eigenpolarizations off the
    /// equator (a rotating purely linear medium has zero phase).
    #[serde(default)]
    pub circular: f64,
    /// Extra absorption along an axis rotated against the birefringent
    /// axes; a nonzero angle makes the generator non-normal, which is what
    /// produces the imaginary (decay) part of the phase.
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub dichroic_axis_deg: f64,
    #[serde(default = "one")]
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcParams {
    pub e1_re: f64,
    #[serde(default)]
    pub e1_im: f64,
    pub e2_re: f64,
    #[serde(default)]
    pub e2_im: f64,
    pub coupling: f64,
    pub rho: f64,
    pub windings: i32,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub branch: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoParams {
    #[serde(default = "one")]
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    pub theta_re: f64,
    #[serde(default)]
    pub theta_im: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticParams {
    #[serde(default = "one")]
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    pub theta_re: f64,
    #[serde(default)]
    pub theta_im: f64,
    pub periods: Vec<f64>,
    #[serde(default = "default_steps_per_unit")]
    pub steps_per_unit_time: f64,
}

fn one() -> f64 {
    1.0
}
fn default_steps_per_unit() -> f64 {
    250.0
}

/// Scenario selector with typed parameters.
#[derive(Debug, Clone)]
pub enum Scenario {
    Cone(ConeParams),
    Jones(JonesParams),
    Helix(HelixParams),
    Ac(AcParams),
    Bo(BoParams),
    Stokes(ConeParams),
    Adiabatic(AdiabaticParams),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Cone(_) => "cone",
            Scenario::Jones(_) => "jones",
            Scenario::Helix(_) => "helix",
            Scenario::Ac(_) => "ac",
            Scenario::Bo(_) => "bo",
            Scenario::Stokes(_) => "stokes",
            Scenario::Adiabatic(_) => "adiabatic",
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub resolution: Resolution,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let params = raw.params;
        let scenario = match raw.scenario.as_str() {
            "cone" => Scenario::Cone(parse_params(params)?),
            "jones" => Scenario::Jones(parse_params(params)?),
            "helix" => Scenario::Helix(parse_params(params)?),
            "ac" => Scenario::Ac(parse_params(params)?),
            "bo" => Scenario::Bo(parse_params(params)?),
            "stokes" => Scenario::Stokes(parse_params(params)?),
            "adiabatic" => Scenario::Adiabatic(parse_params(params)?),
            other => {
                return Err(CliError::Config(format!(
                    "unknown scenario `{other}`; see `gwphase list-scenarios`"
                )))
            }
        };
        let config = Self {
            scenario,
            resolution: raw.resolution,
            output_path: raw.output.as_ref().and_then(|o| o.path.clone()),
            output_format: raw
                .output
                .as_ref()
                .and_then(|o| o.format)
                .unwrap_or(OutputFormat::Csv),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let r = &self.resolution;
        if r.samples < 2 {
            return Err(CliError::Config("resolution.samples must be >= 2".into()));
        }
        if r.steps == Some(0) {
            return Err(CliError::Config("resolution.steps must be positive".into()));
        }
        if r.grid_n == 0 || r.surface_n == 0 {
            return Err(CliError::Config(
                "resolution.grid_n and resolution.surface_n must be positive".into(),
            ));
        }
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be finite")))
            }
        };
        match &self.scenario {
            Scenario::Cone(p) | Scenario::Stokes(p) => {
                finite(p.b_re, "params.b_re")?;
                finite(p.theta_re, "params.theta_re")?;
                if p.period <= 0.0 {
                    return Err(CliError::Config("params.period must be positive".into()));
                }
            }
            Scenario::Jones(p) => {
                if !(p.kappa_l.is_finite() && p.kappa_l >= 0.0) {
                    return Err(CliError::Config(
                        "params.kappa_l must be finite and >= 0".into(),
                    ));
                }
                finite(p.rot_deg, "params.rot_deg")?;
            }
            Scenario::Helix(p) => {
                finite(p.nu1_re, "params.nu1_re")?;
                finite(p.nu2_re, "params.nu2_re")?;
                finite(p.circular, "params.circular")?;
                if !(p.kappa.is_finite() && p.kappa >= 0.0) {
                    return Err(CliError::Config(
                        "params.kappa must be finite and >= 0".into(),
                    ));
                }
                finite(p.dichroic_axis_deg, "params.dichroic_axis_deg")?;
                if p.length <= 0.0 {
                    return Err(CliError::Config("params.length must be positive".into()));
                }
            }
            Scenario::Ac(p) => {
                finite(p.e1_re, "params.e1_re")?;
                finite(p.e2_re, "params.e2_re")?;
                finite(p.coupling, "params.coupling")?;
                finite(p.rho, "params.rho")?;
                if p.radius <= 0.0 {
                    return Err(CliError::Config("params.radius must be positive".into()));
                }
                if p.branch > 1 {
                    return Err(CliError::Config("params.branch must be 0 or 1".into()));
                }
            }
            Scenario::Bo(p) => {
                finite(p.theta_re, "params.theta_re")?;
                if p.mass <= 0.0 {
                    return Err(CliError::Config("params.mass must be positive".into()));
                }
                if self.resolution.grid_n > 512 {
                    return Err(CliError::Config(
                        "resolution.grid_n is capped at 512 for the ring solver".into(),
                    ));
                }
            }
            Scenario::Adiabatic(p) => {
                finite(p.theta_re, "params.theta_re")?;
                if p.periods.is_empty() {
                    return Err(CliError::Config(
                        "params.periods needs at least one entry".into(),
                    ));
                }
                if p.periods.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                    return Err(CliError::Config("params.periods must be positive".into()));
                }
                if p.steps_per_unit_time <= 0.0 {
                    return Err(CliError::Config(
                        "params.steps_per_unit_time must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(value: toml::Value) -> Result<T> {
    value
        .try_into()
        .map_err(|e| CliError::Config(format!("params: {e}")))
}
