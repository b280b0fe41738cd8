//! Run configuration: a sectioned TOML document.
//!
//! ```toml
//! [geometry]
//! kind = "spheroid"        # or "strip" with nx, ny
//! n_lat = 16
//! n_lon = 128
//! half = true
//!
//! [material]
//! E = 1.0
//! nu = 0.3
//! t_b = 0.005
//! alpha = 1.0
//!
//! [load]
//! pressure = 10.0          # spheroid only
//! traction = 0.0           # strip only: force per length on the loaded edge
//! traction_direction = [0.0, -1.0, 0.0]
//!
//! [design]
//! volume = 0.01
//! lower = [0.0, 0.0]
//! upper = [0.004, 0.004]
//! init_direction = "axis-aligned"   # or "principal-from-unreinforced"
//!
//! [settings]               # every key optional, see OptimizationSettings
//! [output]                 # directory, formats = ["csv", "vtk", "json"]
//! ```
//!
//! Unknown keys are rejected. The effective configuration, with every
//! default filled in, is written next to the results.

use std::path::{Path, PathBuf};

use fibermem_core::material::MembraneMaterial;
use fibermem_core::optimizer::{InitDirection, OptimizationSettings, ThicknessBounds};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub load: LoadConfig,
    pub design: DesignConfig,
    #[serde(default)]
    pub settings: SettingsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometryConfig {
    Spheroid {
        n_lat: usize,
        n_lon: usize,
        #[serde(default)]
        half: bool,
    },
    Strip {
        nx: usize,
        ny: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(rename = "E")]
    pub young: f64,
    pub nu: f64,
    pub t_b: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    /// Internal pressure on a spheroid.
    pub pressure: f64,
    /// Force per unit length on the strip's loaded edge segment.
    pub traction: f64,
    pub traction_direction: [f64; 3],
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            pressure: 0.0,
            traction: 0.0,
            traction_direction: [0.0, -1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    #[default]
    AxisAligned,
    PrincipalFromUnreinforced,
}

impl From<InitMode> for InitDirection {
    fn from(m: InitMode) -> Self {
        match m {
            InitMode::AxisAligned => InitDirection::AxisAligned,
            InitMode::PrincipalFromUnreinforced => InitDirection::PrincipalFromUnreinforced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub volume: f64,
    #[serde(default)]
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    #[serde(default)]
    pub init_direction: InitMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SettingsConfig {
    pub eta: f64,
    pub obj_tol: f64,
    pub dir_tol: f64,
    pub max_oc_iters: usize,
    pub max_rotation_updates: usize,
    pub lambda_bracket: [f64; 2],
    pub tie_tol: f64,
    pub monotonicity_slack: f64,
    pub abort_on_increase: bool,
}

impl Default for SettingsConfig {
    fn default() -> Self {
        OptimizationSettings::default().into()
    }
}

impl From<OptimizationSettings> for SettingsConfig {
    fn from(s: OptimizationSettings) -> Self {
        Self {
            eta: s.eta,
            obj_tol: s.obj_tol,
            dir_tol: s.dir_tol,
            max_oc_iters: s.max_oc_iters,
            max_rotation_updates: s.max_rotation_updates,
            lambda_bracket: [s.lambda_bracket.0, s.lambda_bracket.1],
            tie_tol: s.tie_tol,
            monotonicity_slack: s.monotonicity_slack,
            abort_on_increase: s.abort_on_increase,
        }
    }
}

impl From<SettingsConfig> for OptimizationSettings {
    fn from(s: SettingsConfig) -> Self {
        Self {
            eta: s.eta,
            obj_tol: s.obj_tol,
            dir_tol: s.dir_tol,
            max_oc_iters: s.max_oc_iters,
            max_rotation_updates: s.max_rotation_updates,
            lambda_bracket: (s.lambda_bracket[0], s.lambda_bracket[1]),
            tie_tol: s.tie_tol,
            monotonicity_slack: s.monotonicity_slack,
            abort_on_increase: s.abort_on_increase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    /// History and per-element design tables.
    Csv,
    /// Legacy ASCII unstructured grid with cell data.
    Vtk,
    /// Run summary.
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![ExportFormat::Csv, ExportFormat::Vtk, ExportFormat::Json],
        }
    }
}

impl RunConfig {
    pub fn material(&self) -> Result<MembraneMaterial, CliError> {
        let m = &self.material;
        MembraneMaterial::new(m.young, m.nu, m.t_b, m.alpha).map_err(|e| invalid("material", e))
    }

    pub fn bounds(&self) -> Result<ThicknessBounds, CliError> {
        ThicknessBounds::new(self.design.lower, self.design.upper).map_err(|e| invalid("design", e))
    }

    pub fn settings(&self) -> OptimizationSettings {
        self.settings.into()
    }

    /// Checks every invariant that can be checked without building the mesh.
    pub fn validate(&self) -> Result<(), CliError> {
        self.material()?;
        self.bounds()?;
        self.settings()
            .validate()
            .map_err(|e| invalid("settings", e))?;
        if !(self.design.volume > 0.0 && self.design.volume.is_finite()) {
            return Err(CliError::Config(format!(
                "design.volume must be positive, got {}",
                self.design.volume
            )));
        }
        let load = &self.load;
        if !load.pressure.is_finite() || !load.traction.is_finite() {
            return Err(CliError::Config("load values must be finite".into()));
        }
        match self.geometry {
            GeometryConfig::Spheroid { .. } if load.traction != 0.0 => Err(CliError::Config(
                "load.traction applies to the strip; the spheroid takes load.pressure".into(),
            )),
            GeometryConfig::Strip { .. } if load.pressure != 0.0 => Err(CliError::Config(
                "load.pressure would act out of the strip's plane; use load.traction".into(),
            )),
            GeometryConfig::Strip { .. } if load.traction != 0.0 => {
                let d = load.traction_direction;
                let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(CliError::Config(
                        "load.traction_direction must be a non-zero vector".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The effective configuration as TOML, every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration always serializes")
    }
}

fn invalid(section: &str, e: fibermem_core::Error) -> CliError {
    CliError::Config(format!("[{section}] {e}"))
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
