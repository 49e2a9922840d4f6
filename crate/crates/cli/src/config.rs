//! Run configuration: a TOML file with dotted-key overrides from the command line.

use plasmon_core::conductivity::{DiracTwoPhoton, LinearModel, Material, Sigma3Model, Sigma3Table};
use plasmon_core::gate::{AdmissibilityPolicy, ContainmentForm, GateInputs, GateModel, Range, SweepGrid};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Error in a configuration file or override.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConductivityModel {
    #[default]
    Lrpa,
    Drude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    /// E_F, eV.
    pub fermi_energy: f64,
    /// ℏγ_D, eV.
    pub drude_rate: f64,
    pub eps_eff: f64,
    /// v_F, nm/fs.
    pub fermi_velocity: f64,
    pub model: ConductivityModel,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            fermi_energy: 0.1,
            drude_rate: 0.0,
            eps_eff: 1.0,
            fermi_velocity: 1.0,
            model: ConductivityModel::Lrpa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// W, nm.
    pub width: f64,
    /// Ribbon length, nm; optimized when absent.
    pub length: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { width: 20.0, length: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeConfig {
    pub n: usize,
    pub kw: f64,
    /// Branches written by `modes`.
    pub n_max: usize,
    /// kW range and sample count for branch tracing.
    pub kw_min: f64,
    pub kw_max: f64,
    pub samples: usize,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig { n: 2, kw: 1.0, n_max: 3, kw_min: 0.05, kw_max: 2.0, samples: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    /// Δk = W/σ.
    pub bandwidth: f64,
    /// ΔL, nm.
    pub delta_l: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig { bandwidth: 0.9, delta_l: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityConfig {
    pub q: f64,
    /// Quality factors scanned by `optimize`.
    pub q_list: Vec<f64>,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig { q: 1000.0, q_list: vec![50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 500.0, 750.0, 1000.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sigma3Kind {
    #[default]
    Dirac,
    Constant,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Sigma3Config {
    pub model: Sigma3Kind,
    /// Re σ⁽³⁾ for the constant model, e⁴·nm²/(ℏ·eV²).
    pub value: Option<f64>,
    /// CSV table `hw_eV,re_sigma3` for the table model.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeConfig {
    fn range(&self, field: &str) -> Result<Range, ConfigError> {
        Range::new(self.start, self.stop, self.step).map_err(|e| ConfigError::new(field, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub width: RangeConfig,
    pub fermi_energy: RangeConfig,
    pub modes: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            width: RangeConfig { start: 10.0, stop: 40.0, step: 1.0 },
            fermi_energy: RangeConfig { start: 0.05, stop: 0.2, step: 0.005 },
            modes: vec![2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    /// "symmetric" or "literal".
    pub containment: String,
    /// Reject points whose non-admissible pulse weight exceeds this value.
    pub max_flagged_weight: Option<f64>,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig { containment: "symmetric".into(), max_flagged_weight: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    /// Samples of (k, r, t) over the pulse support.
    pub samples: usize,
    /// Replace γ₂ so that λ_p/λ_a takes this value.
    pub ratio: Option<f64>,
    /// Replace γ₂ directly, nm/fs.
    pub gamma2: Option<f64>,
    /// Oracle pulse width in plasmon wavelengths.
    pub oracle_sigma: f64,
    /// Coarser oracle regularization width in plasmon wavelengths; the run
    /// repeats at half this width and extrapolates.
    pub oracle_width: f64,
    pub oracle_points_per_wavelength: f64,
    pub oracle_steps_per_period: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            samples: 201,
            ratio: None,
            gamma2: None,
            oracle_sigma: 4.0,
            oracle_width: 1.0 / 50.0,
            oracle_points_per_wavelength: 200.0,
            oracle_steps_per_period: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// ℏω range in units of E_F for the γ₁ diagnostic.
    pub omega_min: f64,
    pub omega_max: f64,
    pub samples: usize,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig { omega_min: 0.2, omega_max: 1.9, samples: 69 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("out") }
    }
}

/// Path and raw bytes of a σ⁽³⁾ table file.
pub type TableSource = (PathBuf, Vec<u8>);

/// Complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub material: MaterialConfig,
    pub grid: GridConfig,
    pub geometry: GeometryConfig,
    pub mode: ModeConfig,
    pub pulse: PulseConfig,
    pub quality: QualityConfig,
    pub sigma3: Sigma3Config,
    pub sweep: SweepConfig,
    pub gate: GateConfig,
    pub scatter: ScatterConfig,
    pub rates: RatesConfig,
    pub output: OutputConfig,
}

/// Parses a TOML document and applies `key.path=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let file: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("", e.to_string()))?;
    // Start from the defaults so partial tables and overrides fill in missing keys.
    let mut table = toml::Table::try_from(RunConfig::default()).map_err(|e| ConfigError::new("", e.to_string()))?;
    merge(&mut table, file);
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config: RunConfig = RunConfig::deserialize(toml::Value::Table(table))
        .map_err(|e| ConfigError::new("", e.to_string().trim().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Reads a configuration file (or the defaults when `path` is `None`).
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<(RunConfig, Option<String>), ConfigError> {
    let text = match path {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut config = parse_config(text.as_deref().unwrap_or(""), overrides)?;
    // Table paths are resolved relative to the configuration file.
    if let (Some(p), Some(table)) = (path, config.sigma3.path.as_mut()) {
        if table.is_relative() {
            if let Some(dir) = p.parent() {
                *table = dir.join(&*table);
            }
        }
    }
    if let Some(table) = &config.sigma3.path {
        if config.sigma3.model == Sigma3Kind::Table && !table.is_file() {
            return Err(ConfigError::new("sigma3.path", format!("{} does not exist", table.display())));
        }
    }
    Ok((config, text))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn apply_override(table: &mut toml::Table, text: &str) -> Result<(), ConfigError> {
    let (key, raw) =
        text.split_once('=').ok_or_else(|| ConfigError::new("--set", format!("expected key=value, got '{text}'")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new("--set", format!("invalid key '{key}'")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| ConfigError::new(key, format!("'{part}' is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("material.fermi_energy", self.material.fermi_energy)?;
        positive("material.eps_eff", self.material.eps_eff)?;
        positive("material.fermi_velocity", self.material.fermi_velocity)?;
        if !(self.material.drude_rate >= 0.0) {
            return Err(ConfigError::new("material.drude_rate", "must be non-negative"));
        }
        if self.grid.points < plasmon_core::ribbon::MIN_POINTS {
            return Err(ConfigError::new(
                "grid.points",
                format!("must be at least {}", plasmon_core::ribbon::MIN_POINTS),
            ));
        }
        positive("geometry.width", self.geometry.width)?;
        if let Some(l) = self.geometry.length {
            positive("geometry.length", l)?;
        }
        let max = plasmon_core::ribbon::MAX_MODES;
        if self.mode.n == 0 || self.mode.n > max {
            return Err(ConfigError::new("mode.n", format!("must be between 1 and {max}")));
        }
        if self.mode.n_max == 0 || self.mode.n_max > max {
            return Err(ConfigError::new("mode.n_max", format!("must be between 1 and {max}")));
        }
        positive("mode.kw", self.mode.kw)?;
        positive("mode.kw_min", self.mode.kw_min)?;
        if !(self.mode.kw_max > self.mode.kw_min) {
            return Err(ConfigError::new("mode.kw_max", "must exceed mode.kw_min"));
        }
        if self.mode.samples < 8 {
            return Err(ConfigError::new("mode.samples", "must be at least 8"));
        }
        positive("pulse.bandwidth", self.pulse.bandwidth)?;
        if !self.pulse.delta_l.is_finite() {
            return Err(ConfigError::new("pulse.delta_l", "must be finite"));
        }
        positive("quality.q", self.quality.q)?;
        if self.quality.q_list.is_empty() {
            return Err(ConfigError::new("quality.q_list", "must not be empty"));
        }
        for (i, q) in self.quality.q_list.iter().enumerate() {
            positive(&format!("quality.q_list[{i}]"), *q)?;
        }
        match self.sigma3.model {
            Sigma3Kind::Constant => {
                let v = self
                    .sigma3
                    .value
                    .ok_or_else(|| ConfigError::new("sigma3.value", "required for the constant model"))?;
                if !(v >= 0.0) {
                    return Err(ConfigError::new("sigma3.value", "must be non-negative"));
                }
            }
            Sigma3Kind::Table if self.sigma3.path.is_none() => {
                return Err(ConfigError::new("sigma3.path", "required for the table model"));
            }
            _ => {}
        }
        self.sweep.width.range("sweep.width")?;
        self.sweep.fermi_energy.range("sweep.fermi_energy")?;
        if self.sweep.modes.is_empty() || self.sweep.modes.iter().any(|&n| n == 0 || n > max) {
            return Err(ConfigError::new("sweep.modes", format!("must list modes between 1 and {max}")));
        }
        self.containment()?;
        if let Some(w) = self.gate.max_flagged_weight {
            if !(w >= 0.0) {
                return Err(ConfigError::new("gate.max_flagged_weight", "must be non-negative"));
            }
        }
        if self.scatter.samples < 2 {
            return Err(ConfigError::new("scatter.samples", "must be at least 2"));
        }
        if let Some(r) = self.scatter.ratio {
            positive("scatter.ratio", r)?;
        }
        if let Some(g) = self.scatter.gamma2 {
            if !(g >= 0.0) {
                return Err(ConfigError::new("scatter.gamma2", "must be non-negative"));
            }
        }
        positive("scatter.oracle_sigma", self.scatter.oracle_sigma)?;
        positive("scatter.oracle_width", self.scatter.oracle_width)?;
        positive("scatter.oracle_points_per_wavelength", self.scatter.oracle_points_per_wavelength)?;
        positive("scatter.oracle_steps_per_period", self.scatter.oracle_steps_per_period)?;
        positive("rates.omega_min", self.rates.omega_min)?;
        if !(self.rates.omega_max > self.rates.omega_min) {
            return Err(ConfigError::new("rates.omega_max", "must exceed rates.omega_min"));
        }
        if self.rates.samples < 2 {
            return Err(ConfigError::new("rates.samples", "must be at least 2"));
        }
        Ok(())
    }

    pub fn linear_model(&self) -> LinearModel {
        match self.material.model {
            ConductivityModel::Lrpa => LinearModel::Lrpa,
            ConductivityModel::Drude => LinearModel::Drude,
        }
    }

    pub fn material(&self) -> Result<Material, ConfigError> {
        let m = Material {
            fermi_energy: self.material.fermi_energy,
            drude_rate: self.material.drude_rate,
            fermi_velocity: self.material.fermi_velocity,
            eps_eff: self.material.eps_eff,
        };
        m.validate().map_err(|e| ConfigError::new("material", e.to_string()))?;
        Ok(m)
    }

    pub fn containment(&self) -> Result<ContainmentForm, ConfigError> {
        match self.gate.containment.as_str() {
            "symmetric" => Ok(ContainmentForm::Symmetric),
            "literal" => Ok(ContainmentForm::Literal),
            other => {
                Err(ConfigError::new("gate.containment", format!("expected 'symmetric' or 'literal', got '{other}'")))
            }
        }
    }

    /// Builds the σ⁽³⁾ model, reading the table file if needed.
    pub fn sigma3_model(&self) -> Result<(Sigma3Model, Option<TableSource>), ConfigError> {
        match self.sigma3.model {
            Sigma3Kind::Dirac => Ok((Sigma3Model::Plugin(Arc::new(DiracTwoPhoton)), None)),
            Sigma3Kind::Constant => Ok((Sigma3Model::Constant(self.sigma3.value.unwrap_or(0.0)), None)),
            Sigma3Kind::Table => {
                let path = self.sigma3.path.clone().ok_or_else(|| ConfigError::new("sigma3.path", "missing"))?;
                let bytes = std::fs::read(&path)
                    .map_err(|e| ConfigError::new("sigma3.path", format!("cannot read {}: {e}", path.display())))?;
                let text = String::from_utf8_lossy(&bytes);
                let table = Sigma3Table::from_csv_str(&text, path.display().to_string())
                    .map_err(|e| ConfigError::new("sigma3.path", e.to_string()))?;
                Ok((Sigma3Model::Tabulated(table), Some((path, bytes))))
            }
        }
    }

    pub fn gate_model(&self) -> Result<GateModel, ConfigError> {
        let mut model = GateModel::new(self.grid.points).map_err(|e| ConfigError::new("grid.points", e.to_string()))?;
        model.material = self.material()?;
        model.linear_model = self.linear_model();
        model.sigma3 = self.sigma3_model()?.0;
        model.admissibility = AdmissibilityPolicy { max_flagged_weight: self.gate.max_flagged_weight };
        model.containment = self.containment()?;
        Ok(model)
    }

    /// Gate inputs at the configured operating point.
    pub fn gate_inputs(&self, mode: usize) -> GateInputs {
        GateInputs {
            width: self.geometry.width,
            fermi_energy: self.material.fermi_energy,
            mode,
            kw: self.mode.kw,
            bandwidth: self.pulse.bandwidth,
            quality: self.quality.q,
            delta_l: self.pulse.delta_l,
            length: self.geometry.length,
        }
    }

    pub fn sweep_grid(&self, mode: usize) -> Result<SweepGrid, ConfigError> {
        Ok(SweepGrid {
            widths: self.sweep.width.range("sweep.width")?,
            energies: self.sweep.fermi_energy.range("sweep.fermi_energy")?,
            fixed: self.gate_inputs(mode),
        })
    }

    pub fn width_range(&self) -> Result<Range, ConfigError> {
        self.sweep.width.range("sweep.width")
    }
}
