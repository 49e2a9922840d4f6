//! Linear and third-order optical response of extended graphene.
//!
//! Linear conductivities are reduced by e²/ℏ; frequencies are photon
//! energies ℏω in eV.

use crate::error::{Error, Result};
use crate::numerics::{find_root_bisect, Tolerance};
use crate::units::FERMI_VELOCITY;
use crate::units::HBAR;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Distance from the interband threshold 2E_F below which results are flagged singular.
pub const SINGULAR_WINDOW: f64 = 1e-6;

/// Doped graphene sheet and its dielectric environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Fermi energy E_F, eV.
    pub fermi_energy: f64,
    /// Drude damping ℏγ_D, eV.
    pub drude_rate: f64,
    /// Fermi velocity v_F, nm/fs.
    pub fermi_velocity: f64,
    /// Effective permittivity (ε₁ + ε₂)/2.
    pub eps_eff: f64,
}

impl Material {
    /// Lossless sheet in vacuum with the standard Fermi velocity.
    pub fn new(fermi_energy: f64) -> Result<Self> {
        let m = Material { fermi_energy, drude_rate: 0.0, fermi_velocity: FERMI_VELOCITY, eps_eff: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn with_drude_rate(mut self, drude_rate: f64) -> Result<Self> {
        self.drude_rate = drude_rate;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_eff(mut self, eps_eff: f64) -> Result<Self> {
        self.eps_eff = eps_eff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_fermi_velocity(mut self, fermi_velocity: f64) -> Result<Self> {
        self.fermi_velocity = fermi_velocity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fermi_energy > 0.0) || !self.fermi_energy.is_finite() {
            return Err(Error::InvalidInput(format!("fermi_energy must be positive, got {}", self.fermi_energy)));
        }
        if !(self.drude_rate >= 0.0) || self.drude_rate >= self.fermi_energy {
            return Err(Error::InvalidInput(format!(
                "drude_rate must lie in [0, fermi_energy), got {}",
                self.drude_rate
            )));
        }
        if !(self.fermi_velocity > 0.0) || !self.fermi_velocity.is_finite() {
            return Err(Error::InvalidInput(format!("fermi_velocity must be positive, got {}", self.fermi_velocity)));
        }
        if !(self.eps_eff >= 1.0) || !self.eps_eff.is_finite() {
            return Err(Error::InvalidInput(format!("eps_eff must be at least 1, got {}", self.eps_eff)));
        }
        Ok(())
    }

    /// Same sheet with ℏγ_D = 0.
    pub fn lossless(&self) -> Material {
        Material { drude_rate: 0.0, ..*self }
    }

    /// ℏv_F in eV·nm.
    pub fn hbar_vf(&self) -> f64 {
        HBAR * self.fermi_velocity
    }
}

/// Reduced conductivity (or its ω-derivative) with a flag for evaluations at
/// the logarithmic singularity ℏω = 2E_F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma1 {
    pub value: Complex64,
    pub singular: bool,
}

/// Which linear-response model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearModel {
    /// Intraband term only.
    Drude,
    /// Intraband plus interband terms in the local limit of the RPA.
    #[default]
    Lrpa,
}

impl LinearModel {
    pub fn sigma(self, hw: f64, m: &Material) -> Result<Sigma1> {
        match self {
            LinearModel::Drude => sigma1_drude(hw, m),
            LinearModel::Lrpa => sigma1_lrpa(hw, m),
        }
    }

    pub fn derivative(self, hw: f64, m: &Material) -> Result<Sigma1> {
        match self {
            LinearModel::Drude => drude_derivative(hw, m),
            LinearModel::Lrpa => sigma1_omega_derivative(hw, m),
        }
    }
}

fn check_frequency(hw: f64) -> Result<()> {
    if hw > 0.0 && hw.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "photon energy", value: hw })
    }
}

/// σ̃ = (i/π)·E_F/(ℏω + iℏγ_D).
pub fn sigma1_drude(hw: f64, m: &Material) -> Result<Sigma1> {
    check_frequency(hw)?;
    let value = Complex64::new(0.0, m.fermi_energy / PI) / Complex64::new(hw, m.drude_rate);
    Ok(Sigma1 { value, singular: false })
}

/// (1/4)[Θ(ℏω − 2E_F) + (i/π) ln|(ℏω − 2E_F)/(ℏω + 2E_F)|].
pub fn sigma1_interband(hw: f64, m: &Material) -> Result<Sigma1> {
    check_frequency(hw)?;
    let two_ef = 2.0 * m.fermi_energy;
    let step = if hw > two_ef { 1.0 } else { 0.0 };
    let log = ((hw - two_ef) / (hw + two_ef)).abs().ln();
    Ok(Sigma1 { value: Complex64::new(0.25 * step, 0.25 * log / PI), singular: (hw - two_ef).abs() < SINGULAR_WINDOW })
}

/// Local-RPA conductivity: Drude plus interband terms.
pub fn sigma1_lrpa(hw: f64, m: &Material) -> Result<Sigma1> {
    let intra = sigma1_drude(hw, m)?;
    let inter = sigma1_interband(hw, m)?;
    Ok(Sigma1 { value: intra.value + inter.value, singular: inter.singular })
}

/// dσ̃/d(ℏω) for the Drude term.
pub fn drude_derivative(hw: f64, m: &Material) -> Result<Sigma1> {
    check_frequency(hw)?;
    let z = Complex64::new(hw, m.drude_rate);
    let value = -Complex64::new(0.0, m.fermi_energy / PI) / (z * z);
    Ok(Sigma1 { value, singular: false })
}

/// dσ̃/d(ℏω) of the local-RPA conductivity, in reduced units per eV.
pub fn sigma1_omega_derivative(hw: f64, m: &Material) -> Result<Sigma1> {
    let intra = drude_derivative(hw, m)?;
    let two_ef = 2.0 * m.fermi_energy;
    // d/dw ln|(w − a)/(w + a)| = 2a/(w² − a²)
    let inter = Complex64::new(0.0, 0.25 / PI * 2.0 * two_ef / (hw * hw - two_ef * two_ef));
    Ok(Sigma1 { value: intra.value + inter, singular: (hw - two_ef).abs() < SINGULAR_WINDOW })
}

/// σ̃ − ℏω·dσ̃/d(ℏω), the combination entering the mode normalization.
pub fn normalization_term(model: LinearModel, hw: f64, m: &Material) -> Result<Sigma1> {
    let s = model.sigma(hw, m)?;
    let d = model.derivative(hw, m)?;
    Ok(Sigma1 { value: s.value - hw * d.value, singular: s.singular || d.singular })
}

/// Plasma energy ℏω_plasma where Im σ̃_LRPA changes sign (lossless), in eV.
pub fn plasma_frequency(m: &Material) -> Result<f64> {
    let lossless = m.lossless();
    let ef = m.fermi_energy;
    let tol = Tolerance::new(0.0, 1e-15, 200)?;
    find_root_bisect(
        |hw| sigma1_lrpa(hw, &lossless).map(|s| s.value.im).unwrap_or(f64::NAN),
        ef,
        2.0 * ef - SINGULAR_WINDOW * ef,
        tol,
    )
}

/// A third-order response value together with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma3Value {
    /// Re σ⁽³⁾ in units of e⁴·nm²/(ℏ·eV²).
    pub value: f64,
    /// Set when a tabulated model clamped the frequency to its range.
    pub out_of_range: bool,
}

/// Source of an externally supplied closed form for Re σ⁽³⁾.
pub trait Sigma3Plugin: Send + Sync {
    /// Re σ⁽³⁾(ω) in units of e⁴·nm²/(ℏ·eV²).
    fn evaluate(&self, hw: f64, m: &Material) -> f64;
    /// Human-readable description of where the formula comes from.
    fn provenance(&self) -> String;
    /// True when Re σ⁽³⁾ depends on (ω, E_F) only through ω/E_F up to an
    /// overall power of ω, which makes the fidelity a function of ω_p/E_F.
    fn scale_invariant(&self) -> bool;
}

/// T = 0 golden-rule two-photon absorption of massless Dirac electrons:
/// Re σ⁽³⁾ = e⁴ℏv_F²/(ℏω)⁴ for ℏω above E_F (Pauli blocking below).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiracTwoPhoton;

impl Sigma3Plugin for DiracTwoPhoton {
    fn evaluate(&self, hw: f64, m: &Material) -> f64 {
        if hw > m.fermi_energy {
            m.hbar_vf().powi(2) / hw.powi(4)
        } else {
            0.0
        }
    }

    fn provenance(&self) -> String {
        "two-band massless Dirac model, zero temperature, golden-rule two-photon interband absorption: \
         Re sigma3(w) = e^4 hbar v_F^2 / (hbar w)^4 * Theta(hbar w - E_F)"
            .to_string()
    }

    fn scale_invariant(&self) -> bool {
        true
    }
}

/// Linear interpolation table of (ℏω, Re σ⁽³⁾) with clamped ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma3Table {
    points: Vec<(f64, f64)>,
    source: String,
}

impl Sigma3Table {
    pub fn new(points: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("sigma3 table needs at least two rows".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput(format!(
                    "sigma3 table frequencies must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInput("sigma3 table has non-finite entries".into()));
        }
        Ok(Sigma3Table { points, source: source.into() })
    }

    /// Parses two comma-separated columns after a mandatory header line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_csv_str(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut lines =
            text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::InvalidInput("sigma3 table is empty".into()))?;
        if header.split(',').next().is_some_and(|c| c.trim().parse::<f64>().is_ok()) {
            return Err(Error::InvalidInput("sigma3 table must start with a header line".into()));
        }
        let mut points = Vec::new();
        for (idx, line) in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "sigma3 table line {}: expected 2 columns, found {}",
                    idx + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("sigma3 table line {}: bad number {s:?}", idx + 1)))
            };
            points.push((parse(cols[0])?, parse(cols[1])?));
        }
        Sigma3Table::new(points, source)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn evaluate(&self, hw: f64) -> Sigma3Value {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if hw <= first.0 {
            return Sigma3Value { value: first.1, out_of_range: hw < first.0 };
        }
        if hw >= last.0 {
            return Sigma3Value { value: last.1, out_of_range: hw > last.0 };
        }
        let i = self.points.partition_point(|p| p.0 <= hw);
        let (x0, y0) = self.points[i - 1];
        let (x1, y1) = self.points[i];
        let t = (hw - x0) / (x1 - x0);
        Sigma3Value { value: y0 + t * (y1 - y0), out_of_range: false }
    }
}

/// Third-order response model used for the two-plasmon absorption rate.
#[derive(Clone)]
pub enum Sigma3Model {
    Constant(f64),
    Tabulated(Sigma3Table),
    Plugin(Arc<dyn Sigma3Plugin>),
}

impl Default for Sigma3Model {
    fn default() -> Self {
        Sigma3Model::Plugin(Arc::new(DiracTwoPhoton))
    }
}

impl fmt::Debug for Sigma3Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sigma3Model::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Sigma3Model::Tabulated(t) => f.debug_tuple("Tabulated").field(&t.source).finish(),
            Sigma3Model::Plugin(p) => f.debug_tuple("Plugin").field(&p.provenance()).finish(),
        }
    }
}

impl Sigma3Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Sigma3Model::Constant(_) => "constant",
            Sigma3Model::Tabulated(_) => "tabulated",
            Sigma3Model::Plugin(_) => "analytic-plugin",
        }
    }

    pub fn provenance(&self) -> String {
        match self {
            Sigma3Model::Constant(v) => format!("constant Re sigma3 = {v:e} e^4 nm^2/(hbar eV^2)"),
            Sigma3Model::Tabulated(t) => format!("tabulated Re sigma3 from {}", t.source),
            Sigma3Model::Plugin(p) => p.provenance(),
        }
    }

    pub fn scale_invariant(&self) -> bool {
        match self {
            Sigma3Model::Plugin(p) => p.scale_invariant(),
            _ => false,
        }
    }

    pub fn evaluate(&self, hw: f64, m: &Material) -> Result<Sigma3Value> {
        check_frequency(hw)?;
        let v = match self {
            Sigma3Model::Constant(v) => Sigma3Value { value: *v, out_of_range: false },
            Sigma3Model::Tabulated(t) => t.evaluate(hw),
            Sigma3Model::Plugin(p) => Sigma3Value { value: p.evaluate(hw, m), out_of_range: false },
        };
        if !v.value.is_finite() {
            return Err(Error::Domain { what: "sigma3", value: hw });
        }
        Ok(v)
    }
}

/// Re σ⁽³⁾(ω) for the configured model.
pub fn sigma3_re(hw: f64, model: &Sigma3Model, m: &Material) -> Result<Sigma3Value> {
    model.evaluate(hw, m)
}
