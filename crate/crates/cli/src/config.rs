//! Scenario configuration files (TOML).

use std::path::{Path, PathBuf};

use funnelim::internal_model::{default_beta, InternalModelRealization, DEFAULT_BETA_SHIFT};
use funnelim::sim::{DEFAULT_STEP, DEFAULT_T_END};
use funnelim::{ControllerConfig, FunnelFunction, Polynomial, ReferenceSignal, Scenario, StateSpaceSystem, Term};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PRECISION: usize = 17;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub plant: PlantConfig,
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub internal_model: InternalModelConfig,
    pub controller: ControllerSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Ascending coefficients of the monic annihilator.
    pub alpha: Vec<f64>,
    /// One term list per output channel.
    pub channels: Vec<Vec<TermConfig>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermConfig {
    Constant {
        value: f64,
    },
    Poly {
        amplitude: f64,
        power: u32,
    },
    Sin {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Cos {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Exp {
        amplitude: f64,
        rate: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InternalModelConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default)]
    pub beta: BetaConfig,
    pub z0: Option<Vec<f64>>,
}

impl Default for InternalModelConfig {
    fn default() -> Self {
        Self { enabled: true, beta: BetaConfig::default(), z0: None }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `β(s) = (s + shift)^{deg α}`
    DefaultShift,
    /// Explicit ascending coefficients.
    Coefficients,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaConfig {
    pub mode: BetaMode,
    pub shift: Option<f64>,
    pub coefficients: Option<Vec<f64>>,
}

impl Default for BetaConfig {
    fn default() -> Self {
        Self { mode: BetaMode::DefaultShift, shift: Some(DEFAULT_BETA_SHIFT), coefficients: None }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default)]
    pub k: Vec<f64>,
    pub k_r: f64,
    pub funnels: Vec<FunnelConfig>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunnelConfig {
    #[serde(rename = "Lambda")]
    pub big_lambda: Option<f64>,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub t_const: f64,
    #[serde(default)]
    pub unbounded_initial: bool,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub t_end: f64,
    pub h: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { t_end: DEFAULT_T_END, h: DEFAULT_STEP }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
    pub precision: Option<usize>,
}

/// Parsed configuration plus the directory relative output paths refer to.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let config = ScenarioConfig::parse(&text).map_err(|message| ConfigError::Parse { path: path.into(), message })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base_dir })
    }

    pub fn csv_path(&self) -> Option<PathBuf> {
        self.config.output.csv_path.as_ref().map(|p| self.base_dir.join(p))
    }

    pub fn svg_path(&self) -> Option<PathBuf> {
        self.config.output.svg_path.as_ref().map(|p| self.base_dir.join(p))
    }
}

/// Scenario parts after schema checks. Internal-model synthesis can fail on
/// a well-formed file; that is a validation outcome, kept separately.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Without internal model when synthesis failed.
    pub scenario: Scenario<f64>,
    pub synthesis_error: Option<String>,
    pub internal_model_requested: bool,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn precision(&self) -> usize {
        self.output.precision.unwrap_or(DEFAULT_PRECISION)
    }

    pub fn plant(&self) -> Result<StateSpaceSystem<f64>, ConfigError> {
        let a = matrix("plant.A", &self.plant.a)?;
        let b = matrix("plant.B", &self.plant.b)?;
        let c = matrix("plant.C", &self.plant.c)?;
        StateSpaceSystem::new(a, b, c).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn alpha(&self) -> Result<Polynomial<f64>, ConfigError> {
        let alpha = Polynomial::new(self.reference.alpha.clone());
        if !alpha.is_monic() {
            return Err(ConfigError::Invalid(format!(
                "reference.alpha must be monic (leading coefficient 1), got {alpha}"
            )));
        }
        Ok(alpha)
    }

    pub fn reference(&self) -> Result<ReferenceSignal<f64>, ConfigError> {
        let channels = self
            .reference
            .channels
            .iter()
            .map(|terms| terms.iter().map(TermConfig::to_term).collect())
            .collect();
        ReferenceSignal::new(channels, self.alpha()?).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn beta(&self) -> Result<Polynomial<f64>, ConfigError> {
        let alpha = self.alpha()?;
        let beta = &self.internal_model.beta;
        match beta.mode {
            BetaMode::DefaultShift => {
                if beta.coefficients.is_some() {
                    return Err(ConfigError::Invalid(
                        "internal_model.beta: coefficients are only allowed with mode = \"coefficients\"".into(),
                    ));
                }
                let shift = beta.shift.unwrap_or(DEFAULT_BETA_SHIFT);
                if !(shift > 0.0) {
                    return Err(ConfigError::Invalid(format!("internal_model.beta.shift must be positive, got {shift}")));
                }
                default_beta(&alpha, shift).map_err(|e| ConfigError::Invalid(format!("internal_model.beta: {e}")))
            }
            BetaMode::Coefficients => {
                if beta.shift.is_some() {
                    return Err(ConfigError::Invalid(
                        "internal_model.beta: shift is only allowed with mode = \"default_shift\"".into(),
                    ));
                }
                let coeffs = beta.coefficients.clone().ok_or_else(|| {
                    ConfigError::Invalid("internal_model.beta.coefficients is required with mode = \"coefficients\"".into())
                })?;
                Ok(Polynomial::new(coeffs))
            }
        }
    }

    pub fn controller(&self) -> Result<ControllerConfig<f64>, ConfigError> {
        let funnels = self
            .controller
            .funnels
            .iter()
            .enumerate()
            .map(|(i, f)| f.to_funnel().map_err(|e| ConfigError::Invalid(format!("controller.funnels[{i}]: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        ControllerConfig::new(self.controller.k.clone(), self.controller.k_r, funnels)
            .map_err(|e| ConfigError::Invalid(format!("controller: {e}")))
    }

    /// Everything needed to validate and run.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let plant = self.plant()?;
        let reference = self.reference()?;
        let controller = self.controller()?;
        let x0 = DVector::from_vec(self.plant.x0.clone());
        let requested = self.internal_model.enabled;
        let (im, synthesis_error) = if requested {
            let beta = self.beta()?;
            match InternalModelRealization::realize(&self.alpha()?, &beta, plant.m()) {
                Ok(im) => (Some(im), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            if self.internal_model.z0.is_some() {
                return Err(ConfigError::Invalid("internal_model.z0 given but the internal model is disabled".into()));
            }
            (None, None)
        };
        let has_im = im.is_some();
        let mut scenario =
            Scenario::new(plant, im, reference, controller, x0).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let (true, Some(z0)) = (has_im, &self.internal_model.z0) {
            scenario = scenario
                .with_z0(DVector::from_vec(z0.clone()))
                .map_err(|e| ConfigError::Invalid(format!("internal_model.z0: {e}")))?;
        }
        let scenario = scenario
            .with_horizon(self.sim.t_end, self.sim.h)
            .map_err(|e| ConfigError::Invalid(format!("sim: {e}")))?;
        Ok(Prepared { scenario, synthesis_error, internal_model_requested: requested })
    }
}

impl TermConfig {
    pub fn to_term(&self) -> Term<f64> {
        match *self {
            Self::Constant { value } => Term::constant(value),
            Self::Poly { amplitude, power } => Term::poly(amplitude, power),
            Self::Sin { amplitude, omega, phase } => Term::sin(amplitude, omega, phase),
            Self::Cos { amplitude, omega, phase } => Term::cos(amplitude, omega, phase),
            Self::Exp { amplitude, rate } => Term::exp(amplitude, rate),
        }
    }
}

impl FunnelConfig {
    pub fn to_funnel(&self) -> funnelim::Result<FunnelFunction<f64>> {
        match (self.unbounded_initial, self.big_lambda) {
            (true, None) => FunnelFunction::unbounded_initial(self.lambda, self.t_const),
            (true, Some(_)) => Err(funnelim::Error::Domain(
                "Lambda must be omitted for an unbounded_initial funnel".into(),
            )),
            (false, Some(big)) => FunnelFunction::exponential(big, self.lambda, self.t_const),
            (false, None) => Err(funnelim::Error::Domain("Lambda is required for an exponential funnel".into())),
        }
    }
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, ConfigError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(ConfigError::Invalid(format!("{name} must be a non-empty matrix")));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(ConfigError::Invalid(format!(
            "{name}: row {i} has {} entries, row 0 has {ncols}",
            row.len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ConfigError::Invalid(format!("{name} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
