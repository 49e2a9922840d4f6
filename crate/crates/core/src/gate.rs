//! Gate figures of merit: containment, success probability, sweeps over
//! (W, E_F) and quality-factor optimization.

use crate::conductivity::{LinearModel, Material, Sigma3Model};
use crate::dispersion::{DampingFlags, DispersionSolver, LocalExpansion};
use crate::error::{Error, Result};
use crate::numerics::{erf, golden_section_max};
use crate::rates::{gamma1_from_q, gamma2_with_model};
use crate::ribbon::{ModeCache, RibbonGrid};
use crate::scattering::{fidelity, GaussianPulse, ScatterParams, DEFAULT_BANDWIDTH};
use crate::units::{HBAR, PHONON_LINE};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// Golden-section iterations for the ribbon length.
pub const LENGTH_ITERATIONS: usize = 80;
/// Golden-section iterations for the width refinement.
pub const WIDTH_ITERATIONS: usize = 40;
/// Ribbon-length search interval in units of σ.
pub const LENGTH_RANGE: (f64, f64) = (0.2, 10.0);
/// Samples used by the unimodality check of P_succ(L).
pub const UNIMODAL_SAMPLES: usize = 41;

/// How the containment probability is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContainmentForm {
    /// ½[erf((ΔL + L/2)/(2σ)) − erf((ΔL − L/2)/(2σ))].
    #[default]
    Symmetric,
    /// erf((ΔL + L/2)/(2σ)) − (ΔL − L/2)/(2σ), the expression as printed.
    Literal,
}

impl ContainmentForm {
    pub fn name(self) -> &'static str {
        match self {
            ContainmentForm::Symmetric => "symmetric",
            ContainmentForm::Literal => "literal",
        }
    }
}

/// Probability that a pulse of width σ displaced by ΔL lies within a ribbon of length L.
pub fn containment_probability(length: f64, sigma: f64, delta_l: f64) -> Result<f64> {
    containment_probability_with(ContainmentForm::Symmetric, length, sigma, delta_l)
}

pub fn containment_probability_with(form: ContainmentForm, length: f64, sigma: f64, delta_l: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::Domain { what: "ribbon length", value: length });
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain { what: "pulse width", value: sigma });
    }
    let upper = (delta_l + 0.5 * length) / (2.0 * sigma);
    let lower = (delta_l - 0.5 * length) / (2.0 * sigma);
    Ok(match form {
        ContainmentForm::Symmetric => 0.5 * (erf(upper) - erf(lower)),
        ContainmentForm::Literal => erf(upper) - lower,
    })
}

/// P_succ = F·e^{−2γ₁τ}·P_p with ℏγ₁ in eV and τ in fs.
pub fn success_probability(fidelity: f64, gamma1: f64, tau: f64, p_p: f64) -> f64 {
    fidelity * (-2.0 * gamma1 / HBAR * tau).exp() * p_p
}

/// Reason a gate point carries no success probability, in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaskReason {
    /// The mode has no solution or could not be resolved.
    NoSolution,
    /// Numerical failure upstream (normalization, quadrature).
    Numeric,
    /// Inside the electron-hole continuum.
    Landau,
    NegativeMass,
    /// Pulse centre outside the validity range of the contact model, or too
    /// much weight outside it under a strict policy.
    NonAdmissible,
    /// Group velocity not positive, so the propagation time is undefined.
    NoPropagation,
    /// Above the optical phonon energy.
    Phonon,
}

impl MaskReason {
    pub fn code(self) -> &'static str {
        match self {
            MaskReason::NoSolution => "no_solution",
            MaskReason::Numeric => "numeric",
            MaskReason::Landau => "landau",
            MaskReason::NegativeMass => "negative_mass",
            MaskReason::NonAdmissible => "non_admissible",
            MaskReason::NoPropagation => "no_propagation",
            MaskReason::Phonon => "phonon",
        }
    }
}

impl fmt::Display for MaskReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Validity flags of a gate point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateFlags {
    pub landau: bool,
    pub phonon: bool,
    pub negative_mass: bool,
    pub non_admissible: bool,
}

/// Rule deciding when non-admissible pulse components reject a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdmissibilityPolicy {
    /// Reject when the non-admissible weight exceeds this value. Without a
    /// limit only a non-admissible pulse centre (λ_a < 0) rejects the point.
    pub max_flagged_weight: Option<f64>,
}

/// Inputs of one gate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInputs {
    /// Ribbon width, nm.
    pub width: f64,
    /// Fermi energy, eV.
    pub fermi_energy: f64,
    /// Mode index (1-based).
    pub mode: usize,
    /// Pulse wavevector times width.
    pub kw: f64,
    /// Pulse bandwidth Δk = W/σ.
    pub bandwidth: f64,
    /// Quality factor.
    pub quality: f64,
    /// Collision offset from the ribbon centre, nm.
    pub delta_l: f64,
    /// Ribbon length, nm; optimized when absent.
    pub length: Option<f64>,
}

impl GateInputs {
    pub fn new(width: f64, fermi_energy: f64, mode: usize) -> Self {
        GateInputs {
            width,
            fermi_energy,
            mode,
            kw: 1.0,
            bandwidth: DEFAULT_BANDWIDTH,
            quality: 1000.0,
            delta_l: 0.0,
            length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("width", self.width),
            ("fermi_energy", self.fermi_energy),
            ("kw", self.kw),
            ("bandwidth", self.bandwidth),
            ("quality", self.quality),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mode == 0 {
            return Err(Error::InvalidInput("mode index starts at 1".into()));
        }
        if !self.delta_l.is_finite() {
            return Err(Error::InvalidInput("delta_l must be finite".into()));
        }
        if let Some(l) = self.length {
            if !(l > 0.0) {
                return Err(Error::InvalidInput(format!("length must be positive, got {l}")));
            }
        }
        Ok(())
    }

    /// Pulse width σ = W/Δk, nm.
    pub fn sigma(&self) -> f64 {
        self.width / self.bandwidth
    }
}

/// Shared configuration of the gate pipeline.
#[derive(Debug, Clone)]
pub struct GateModel {
    /// Grid points across the ribbon.
    pub points: usize,
    /// Material template; the Fermi energy is taken from each point.
    pub material: Material,
    pub linear_model: LinearModel,
    pub sigma3: Sigma3Model,
    pub admissibility: AdmissibilityPolicy,
    pub containment: ContainmentForm,
    pub cache: Arc<ModeCache>,
}

impl GateModel {
    pub fn new(points: usize) -> Result<Self> {
        RibbonGrid::solid(points, 1.0)?;
        Ok(GateModel {
            points,
            material: Material::new(0.1)?,
            linear_model: LinearModel::Lrpa,
            sigma3: Sigma3Model::default(),
            admissibility: AdmissibilityPolicy::default(),
            containment: ContainmentForm::Symmetric,
            cache: Arc::new(ModeCache::new()),
        })
    }

    fn material_for(&self, fermi_energy: f64) -> Result<Material> {
        let m = Material { fermi_energy, ..self.material };
        m.validate()?;
        Ok(m)
    }
}

/// Q-independent part of a gate point.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCore {
    pub inputs: GateInputs,
    pub sigma: f64,
    pub expansion: Option<LocalExpansion>,
    pub gamma2: Option<f64>,
    pub lambda_a: Option<f64>,
    pub fidelity: Option<f64>,
    pub flagged_weight: Option<f64>,
    pub flags: GateFlags,
    pub mask: Option<MaskReason>,
    pub sigma3_out_of_range: bool,
}

/// A fully evaluated gate point.
#[derive(Debug, Clone, PartialEq)]
pub struct GatePoint {
    pub core: GateCore,
    /// Ribbon length used, nm.
    pub length: Option<f64>,
    /// ℏγ₁ = ℏω_p/Q, eV.
    pub gamma1: Option<f64>,
    /// Propagation time L/v_g, fs.
    pub tau: Option<f64>,
    pub p_p: Option<f64>,
    /// Absent whenever the point is masked.
    pub p_succ: Option<f64>,
    /// Whether sampled P_succ(L) has a single maximum over the search range.
    pub unimodal: Option<bool>,
}

impl GatePoint {
    pub fn inputs(&self) -> &GateInputs {
        &self.core.inputs
    }

    pub fn mask(&self) -> Option<MaskReason> {
        self.core.mask
    }

    pub fn fidelity(&self) -> Option<f64> {
        self.core.fidelity
    }

    pub fn omega_p(&self) -> Option<f64> {
        self.core.expansion.map(|e| e.omega_p)
    }

    /// Fermi length 2πℏv_F/E_F, nm (diagnostic only).
    pub fn fermi_length(&self, m: &Material) -> f64 {
        2.0 * std::f64::consts::PI * m.hbar_vf() / self.core.inputs.fermi_energy
    }
}

fn upstream_reason(e: &Error) -> MaskReason {
    match e {
        Error::NoSolution { .. } | Error::InsufficientModes { .. } | Error::Bracket { .. } => MaskReason::NoSolution,
        _ => MaskReason::Numeric,
    }
}

/// Dispersion, interaction strength and fidelity of one (W, E_F, n, kW) point.
pub fn evaluate_core(model: &GateModel, inputs: GateInputs) -> Result<GateCore> {
    inputs.validate()?;
    let material = model.material_for(inputs.fermi_energy)?;
    let grid = RibbonGrid::solid(model.points, inputs.width)?;
    let solver = DispersionSolver::with_cache(&grid, material, model.cache.clone())
        .with_model(model.linear_model)
        .with_mode_count(inputs.mode.max(3));
    let mut core = GateCore {
        inputs,
        sigma: inputs.sigma(),
        expansion: None,
        gamma2: None,
        lambda_a: None,
        fidelity: None,
        flagged_weight: None,
        flags: GateFlags::default(),
        mask: None,
        sigma3_out_of_range: false,
    };
    let k_p = inputs.kw / inputs.width;
    let le = match solver.local_expansion(inputs.mode, k_p) {
        Ok(le) => le,
        Err(e) => {
            core.mask = Some(upstream_reason(&e));
            return Ok(core);
        }
    };
    core.expansion = Some(le);
    let damping = DampingFlags::classify(k_p, le.omega_p, &material);
    core.flags.landau = damping.landau();
    core.flags.phonon = le.omega_p > PHONON_LINE;
    core.flags.negative_mass = le.negative_mass;

    let modes = solver.modes(k_p)?;
    let (g2, out_of_range) =
        match gamma2_with_model(&modes, inputs.mode, le.omega_p, &material, &model.sigma3, model.linear_model) {
            Ok(v) => v,
            Err(e) => {
                core.mask = Some(primary_reason(&core.flags, false).unwrap_or(upstream_reason(&e)));
                return Ok(core);
            }
        };
    core.gamma2 = Some(g2);
    core.sigma3_out_of_range = out_of_range;

    if !le.negative_mass {
        let sp = ScatterParams::from_expansion(&le, g2)?;
        core.lambda_a = Some(sp.lambda_a);
        let pulse = GaussianPulse::for_ribbon(inputs.width, inputs.kw, inputs.bandwidth)?;
        match fidelity(&pulse, &sp) {
            Ok(f) => {
                core.fidelity = Some(f.value);
                core.flagged_weight = Some(f.flagged_weight);
                let centre_bad = !(sp.denominator(k_p) >= 0.0);
                let weight_bad = model.admissibility.max_flagged_weight.is_some_and(|lim| f.flagged_weight > lim);
                core.flags.non_admissible = centre_bad || weight_bad;
            }
            Err(e) => {
                core.mask = Some(upstream_reason(&e));
                return Ok(core);
            }
        }
    }
    core.mask = primary_reason(&core.flags, le.v_g > 0.0);
    Ok(core)
}

fn primary_reason(flags: &GateFlags, propagating: bool) -> Option<MaskReason> {
    if flags.landau {
        Some(MaskReason::Landau)
    } else if flags.negative_mass {
        Some(MaskReason::NegativeMass)
    } else if flags.non_admissible {
        Some(MaskReason::NonAdmissible)
    } else if !propagating {
        Some(MaskReason::NoPropagation)
    } else if flags.phonon {
        Some(MaskReason::Phonon)
    } else {
        None
    }
}

/// P_succ for an unmasked core at ribbon length `length`.
pub fn success_at_length(model: &GateModel, core: &GateCore, quality: f64, delta_l: f64, length: f64) -> Result<f64> {
    let le = core.expansion.ok_or(Error::InvalidInput("point has no dispersion data".into()))?;
    let f = core.fidelity.ok_or(Error::InvalidInput("point has no fidelity".into()))?;
    let gamma1 = gamma1_from_q(le.omega_p, quality)?;
    let p_p = containment_probability_with(model.containment, length, core.sigma, delta_l)?;
    Ok(success_probability(f, gamma1, length / le.v_g, p_p))
}

/// Completes a core with the quality factor, offset and (possibly optimized) length.
pub fn finish_point(
    model: &GateModel,
    core: GateCore,
    quality: f64,
    delta_l: f64,
    length: Option<f64>,
) -> Result<GatePoint> {
    let mut point = GatePoint { core, length: None, gamma1: None, tau: None, p_p: None, p_succ: None, unimodal: None };
    if let Some(le) = point.core.expansion {
        if le.omega_p > 0.0 {
            point.gamma1 = Some(gamma1_from_q(le.omega_p, quality)?);
        }
    }
    if point.core.mask.is_some() {
        return Ok(point);
    }
    let sigma = point.core.sigma;
    let (lo, hi) = (LENGTH_RANGE.0 * sigma, LENGTH_RANGE.1 * sigma);
    let objective = |l: f64| success_at_length(model, &point.core, quality, delta_l, l).unwrap_or(f64::NEG_INFINITY);
    let l = match length {
        Some(l) => l,
        None => golden_section_max(objective, lo, hi, LENGTH_ITERATIONS).0,
    };
    let samples: Vec<f64> =
        (0..UNIMODAL_SAMPLES).map(|i| objective(lo + (hi - lo) * i as f64 / (UNIMODAL_SAMPLES - 1) as f64)).collect();
    point.unimodal = Some(is_unimodal(&samples));
    let le = point.core.expansion.expect("unmasked points carry an expansion");
    point.length = Some(l);
    point.tau = Some(l / le.v_g);
    point.p_p = Some(containment_probability_with(model.containment, l, sigma, delta_l)?);
    point.p_succ = Some(success_at_length(model, &point.core, quality, delta_l, l)?);
    Ok(point)
}

/// True when the samples rise and then fall, with no rise after a fall.
pub fn is_unimodal(samples: &[f64]) -> bool {
    let mut falling = false;
    for w in samples.windows(2) {
        if w[1] < w[0] {
            falling = true;
        } else if w[1] > w[0] && falling {
            return false;
        }
    }
    true
}

/// Full evaluation of one point.
pub fn evaluate_gate_point(model: &GateModel, inputs: GateInputs) -> Result<GatePoint> {
    let core = evaluate_core(model, inputs)?;
    finish_point(model, core, inputs.quality, inputs.delta_l, inputs.length)
}

/// Inclusive arithmetic range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = Range { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.start.is_finite() || !(self.stop >= self.start) {
            return Err(Error::InvalidInput(format!(
                "range [{}, {}] with step {} is empty or invalid",
                self.start, self.stop, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// (W, E_F) sweep with the remaining inputs fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub widths: Range,
    pub energies: Range,
    /// Template for the fixed inputs; its width and Fermi energy are ignored.
    pub fixed: GateInputs,
}

impl SweepGrid {
    /// W ∈ [10, 40] nm in steps of 1, E_F ∈ [0.05, 0.2] eV in steps of 0.005.
    pub fn default_for_mode(mode: usize) -> Self {
        SweepGrid {
            widths: Range { start: 10.0, stop: 40.0, step: 1.0 },
            energies: Range { start: 0.05, stop: 0.2, step: 0.005 },
            fixed: GateInputs::new(20.0, 0.1, mode),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.widths.validate()?;
        self.energies.validate()?;
        GateInputs { width: 1.0, fermi_energy: 1.0, ..self.fixed }.validate()
    }

    /// Points in output order: E_F outer, W inner.
    pub fn inputs(&self) -> Vec<GateInputs> {
        let widths = self.widths.values();
        self.energies
            .values()
            .into_iter()
            .flat_map(|ef| widths.iter().map(move |&w| GateInputs { width: w, fermi_energy: ef, ..self.fixed }))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.widths.len() * self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn sweep_map(model: &GateModel, grid: &SweepGrid) -> Result<Vec<GatePoint>> {
    grid.validate()?;
    grid.inputs().into_par_iter().map(|p| evaluate_gate_point(model, p)).collect()
}

/// Optimum of P_succ over width and length at one quality factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOptimum {
    pub quality: f64,
    pub p_succ: Option<f64>,
    pub width: Option<f64>,
    pub length: Option<f64>,
    pub sigma: Option<f64>,
    pub fidelity: Option<f64>,
}

impl QOptimum {
    pub fn length_over_sigma(&self) -> Option<f64> {
        Some(self.length? / self.sigma?)
    }
}

/// Result of [`optimize_q_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct QCurve {
    pub mode: usize,
    pub fermi_energy: f64,
    pub optima: Vec<QOptimum>,
    /// P_succ* is nondecreasing over the feasible entries.
    pub monotone: bool,
}

/// For each Q maximizes P_succ over W (grid scan plus golden-section
/// refinement within one grid step) and L.
pub fn optimize_q_curve(
    model: &GateModel,
    qualities: &[f64],
    fermi_energy: f64,
    mode: usize,
    widths: Range,
    template: GateInputs,
) -> Result<QCurve> {
    if qualities.is_empty() {
        return Err(Error::InvalidInput("quality list is empty".into()));
    }
    widths.validate()?;
    let base = GateInputs { fermi_energy, mode, length: None, ..template };
    let cores: Vec<GateCore> = widths
        .values()
        .into_par_iter()
        .map(|w| evaluate_core(model, GateInputs { width: w, ..base }))
        .collect::<Result<_>>()?;
    let optima: Vec<QOptimum> =
        qualities.par_iter().map(|&q| optimize_one(model, &cores, &base, q, &widths)).collect::<Result<_>>()?;
    let feasible: Vec<f64> = optima.iter().filter_map(|o| o.p_succ).collect();
    let monotone = feasible.windows(2).all(|w| w[1] >= w[0]);
    Ok(QCurve { mode, fermi_energy, optima, monotone })
}

fn optimize_one(
    model: &GateModel,
    cores: &[GateCore],
    base: &GateInputs,
    quality: f64,
    widths: &Range,
) -> Result<QOptimum> {
    let empty = QOptimum { quality, p_succ: None, width: None, length: None, sigma: None, fidelity: None };
    if !(quality > 0.0) {
        return Err(Error::Domain { what: "quality factor", value: quality });
    }
    let mut best: Option<GatePoint> = None;
    for core in cores {
        let p = finish_point(model, core.clone(), quality, base.delta_l, None)?;
        if p.p_succ.is_some() && best.as_ref().is_none_or(|b| p.p_succ > b.p_succ) {
            best = Some(p);
        }
    }
    let Some(best) = best else { return Ok(empty) };
    let w0 = best.core.inputs.width;
    let eval = |w: f64| -> Option<GatePoint> {
        let core = evaluate_core(model, GateInputs { width: w, ..*base }).ok()?;
        finish_point(model, core, quality, base.delta_l, None).ok().filter(|p| p.p_succ.is_some())
    };
    let (w_star, _) = golden_section_max(
        |w| eval(w).and_then(|p| p.p_succ).unwrap_or(f64::NEG_INFINITY),
        (w0 - widths.step).max(widths.start),
        (w0 + widths.step).min(widths.values().last().copied().unwrap_or(widths.stop)),
        WIDTH_ITERATIONS,
    );
    let refined = eval(w_star).filter(|p| p.p_succ >= best.p_succ).unwrap_or(best);
    Ok(QOptimum {
        quality,
        p_succ: refined.p_succ,
        width: Some(refined.core.inputs.width),
        length: refined.length,
        sigma: Some(refined.core.sigma),
        fidelity: refined.core.fidelity,
    })
}
