//! Single-plasmon and two-plasmon absorption rates.

use crate::conductivity::{normalization_term, sigma3_re, LinearModel, Material, Sigma3Model};
use crate::error::{Error, Result};
use crate::ribbon::RibbonModeSet;
use crate::units::HBAR;

/// Absorption rates at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// ℏγ₁ from the conductivity, eV.
    pub gamma1_intrinsic: f64,
    /// ℏγ₁ = ℏω_p/Q, eV.
    pub gamma1_q: f64,
    /// Contact interaction strength γ₂, nm/fs.
    pub gamma2: f64,
    /// Set when the σ⁽³⁾ model had to clamp ω_p to its tabulated range.
    pub sigma3_out_of_range: bool,
}

/// Im(σ̃ − ℏω ∂σ̃/∂(ℏω)), the mode-normalization factor (reduced units).
///
/// The alternative form Im[2σ̃ − ∂(ωσ̃)/∂ω] is algebraically the same quantity.
pub fn normalization_factor(hw: f64, m: &Material, model: LinearModel) -> Result<f64> {
    let value = normalization_term(model, hw, m)?.value.im;
    if !(value > 0.0) {
        return Err(Error::InvalidNormalization { value });
    }
    Ok(value)
}

/// ℏγ₁ = 2ℏω·Re σ̃ / Im(σ̃ − ω∂_ωσ̃), in eV.
pub fn gamma1_intrinsic(hw: f64, m: &Material, model: LinearModel) -> Result<f64> {
    let re = model.sigma(hw, m)?.value.re;
    let norm = normalization_factor(hw, m, model)?;
    Ok(2.0 * hw * re / norm)
}

/// ℏγ₁ = ℏω_p/Q, in eV.
pub fn gamma1_from_q(omega_p: f64, quality: f64) -> Result<f64> {
    if !(quality > 0.0) {
        return Err(Error::Domain { what: "quality factor", value: quality });
    }
    if !(omega_p > 0.0) || !omega_p.is_finite() {
        return Err(Error::Domain { what: "plasmon energy", value: omega_p });
    }
    Ok(omega_p / quality)
}

/// Two-plasmon absorption strength γ₂ for given field integrals, nm/fs.
///
/// `s3` is Re σ⁽³⁾ in e⁴·nm²/(ℏ·eV²); the linear normalization always uses
/// the lossless conductivity.
pub fn gamma2_from_integrals(hw: f64, s3: f64, xi1: f64, xi3: f64, m: &Material, model: LinearModel) -> Result<f64> {
    if !(xi1 > 0.0) || !(xi3 >= 0.0) {
        return Err(Error::InvalidInput(format!("field integrals must be positive (xi1 = {xi1}, xi3 = {xi3})")));
    }
    let norm = normalization_factor(hw, &m.lossless(), model)?;
    Ok(hw.powi(3) * s3 * xi3 / (HBAR * (norm * xi1).powi(2)))
}

/// γ₂ for mode `n` (1-based) of a mode set at plasmon energy `omega_p` (eV).
pub fn gamma2(modes: &RibbonModeSet, n: usize, omega_p: f64, m: &Material, s3: &Sigma3Model) -> Result<(f64, bool)> {
    gamma2_with_model(modes, n, omega_p, m, s3, LinearModel::Lrpa)
}

/// As [`gamma2`] with an explicit linear conductivity model.
pub fn gamma2_with_model(
    modes: &RibbonModeSet,
    n: usize,
    omega_p: f64,
    m: &Material,
    s3: &Sigma3Model,
    model: LinearModel,
) -> Result<(f64, bool)> {
    let (xi1, xi3) = modes.xi(n)?;
    let s = sigma3_re(omega_p, s3, m)?;
    let g = gamma2_from_integrals(omega_p, s.value, xi1, xi3, m, model)?;
    Ok((g, s.out_of_range))
}

/// All rates for mode `n` at `omega_p`.
pub fn rate_set(
    modes: &RibbonModeSet,
    n: usize,
    omega_p: f64,
    m: &Material,
    s3: &Sigma3Model,
    quality: f64,
) -> Result<RateSet> {
    let (gamma2, sigma3_out_of_range) = gamma2(modes, n, omega_p, m, s3)?;
    Ok(RateSet {
        gamma1_intrinsic: gamma1_intrinsic(omega_p, m, LinearModel::Lrpa)?,
        gamma1_q: gamma1_from_q(omega_p, quality)?,
        gamma2,
        sigma3_out_of_range,
    })
}

/// γ₂·ℏ/(λ_p·E_F), the dimensionless diagnostic used for rate plots.
pub fn normalized_gamma2(gamma2: f64, k: f64, m: &Material) -> f64 {
    let lambda_p = 2.0 * std::f64::consts::PI / k.abs();
    gamma2 * HBAR / (lambda_p * m.fermi_energy)
}
