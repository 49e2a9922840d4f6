//! Two-plasmon collision in the relative coordinate: absorption length,
//! reflection/transmission amplitudes and Gaussian-pulse fidelity.

pub mod oracle;

use crate::dispersion::LocalExpansion;
use crate::error::{Error, Result};
use crate::numerics::quad::integrate_adaptive;
use crate::units::HBAR;
use std::f64::consts::PI;

pub use oracle::{wavepacket_oracle, OracleGrid, OracleResult, OracleSample};

/// Pulses are truncated at k₀ ± `PULSE_SUPPORT`/σ.
pub const PULSE_SUPPORT: f64 = 6.0;
/// Absolute tolerance of the fidelity quadrature.
pub const FIDELITY_TOLERANCE: f64 = 1e-8;
/// Default pulse bandwidth Δk = W/σ.
pub const DEFAULT_BANDWIDTH: f64 = 0.9;

/// Parameters of the contact-interaction scattering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterParams {
    /// Central wavevector k_p, nm⁻¹.
    pub k_p: f64,
    /// λ_p = 2π/|k_p|, nm.
    pub lambda_p: f64,
    /// Group velocity at k_p, nm/fs.
    pub v_g: f64,
    /// v̄_g = v_g − ℏk_p/m, nm/fs.
    pub v_bar: f64,
    /// Effective mass, eV·fs²/nm².
    pub mass: f64,
    /// Contact interaction strength γ₂, nm/fs.
    pub gamma2: f64,
    /// Absorption length λ_a, nm (infinite without interaction).
    pub lambda_a: f64,
}

impl ScatterParams {
    pub fn new(k_p: f64, v_g: f64, mass: f64, gamma2: f64) -> Result<Self> {
        if !(k_p != 0.0) || !k_p.is_finite() {
            return Err(Error::Domain { what: "central wavevector", value: k_p });
        }
        if !mass.is_finite() || mass == 0.0 {
            return Err(Error::Domain { what: "effective mass", value: mass });
        }
        if !v_g.is_finite() {
            return Err(Error::Domain { what: "group velocity", value: v_g });
        }
        let lambda_a = absorption_length_raw(k_p, v_g, mass, gamma2)?;
        Ok(ScatterParams {
            k_p,
            lambda_p: 2.0 * PI / k_p.abs(),
            v_g,
            v_bar: v_g - HBAR * k_p / mass,
            mass,
            gamma2,
            lambda_a,
        })
    }

    pub fn from_expansion(le: &LocalExpansion, gamma2: f64) -> Result<Self> {
        Self::new(le.k_p, le.v_g, le.mass, gamma2)
    }

    /// Parameters with v̄ = 0 (a parabola centred at k = 0) and a prescribed λ_p/λ_a.
    pub fn with_ratio(k_p: f64, mass: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::Domain { what: "length ratio", value: ratio });
        }
        let v_g = HBAR * k_p / mass;
        let lambda_a = 2.0 * PI / k_p.abs() / ratio;
        // λ_a = 2ℏ/(mγ₂) when v̄ = 0.
        let gamma2 = 2.0 * HBAR / (mass * lambda_a);
        Self::new(k_p, v_g, mass, gamma2)
    }

    /// 4v̄_g + 2ℏk/m, the kinetic term competing with γ₂.
    pub fn denominator(&self, k: f64) -> f64 {
        4.0 * self.v_bar + 2.0 * HBAR * k / self.mass
    }

    pub fn is_admissible(&self, k: f64) -> bool {
        self.denominator(k) > 0.0
    }

    /// Wavevector where the kinetic term changes sign.
    pub fn admissibility_edge(&self) -> f64 {
        -2.0 * self.v_bar * self.mass / HBAR
    }

    /// λ_p/λ_a.
    pub fn ratio(&self) -> f64 {
        self.lambda_p / self.lambda_a
    }
}

fn absorption_length_raw(k_p: f64, v_g: f64, mass: f64, gamma2: f64) -> Result<f64> {
    if !(gamma2 >= 0.0) || !gamma2.is_finite() {
        return Err(Error::Domain { what: "two-plasmon absorption strength", value: gamma2 });
    }
    if gamma2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 / gamma2 * (2.0 * v_g / k_p.abs() - HBAR / mass))
}

/// λ_a = (2/γ₂)(2v_g/|k_p| − ℏ/m), nm. Infinite when γ₂ = 0.
pub fn absorption_length(le: &LocalExpansion, gamma2: f64) -> Result<f64> {
    absorption_length_raw(le.k_p, le.v_g, le.mass, gamma2)
}

/// The same length written through v̄_g: 4v̄_g/(k_pγ₂) + 2ℏ/(mγ₂).
pub fn absorption_length_relative(k_p: f64, v_bar: f64, mass: f64, gamma2: f64) -> f64 {
    4.0 * v_bar / (k_p * gamma2) + 2.0 * HBAR / (mass * gamma2)
}

/// Reflection amplitude −γ₂/(γ₂ + 4v̄_g + 2ℏk/m).
///
/// A vanishing kinetic term is accepted as the perfect-mirror limit.
pub fn r_coeff(k: f64, sp: &ScatterParams) -> Result<f64> {
    let d = sp.denominator(k);
    if !(d > 0.0 || (d == 0.0 && sp.gamma2 > 0.0)) {
        return Err(Error::NonAdmissible { k });
    }
    Ok(-sp.gamma2 / (sp.gamma2 + d))
}

/// Transmission amplitude t = 1 + r.
pub fn t_coeff(k: f64, sp: &ScatterParams) -> Result<f64> {
    r_coeff(k, sp).map(|r| 1.0 + r)
}

/// Reflection amplitude at k_p from λ_p/λ_a alone: −1/(1 + 2πλ_a/λ_p).
pub fn reflection_from_ratio(ratio: f64) -> f64 {
    -1.0 / (1.0 + 2.0 * PI / ratio)
}

/// Amplitudes at one wavevector, with non-admissible components mapped to a
/// perfect mirror (or to no scattering when γ₂ = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub k: f64,
    pub r: f64,
    pub t: f64,
    pub admissible: bool,
}

impl Amplitudes {
    pub fn reflectance(&self) -> f64 {
        self.r * self.r
    }

    pub fn transmittance(&self) -> f64 {
        self.t * self.t
    }
}

pub fn amplitudes(k: f64, sp: &ScatterParams) -> Amplitudes {
    let admissible = sp.is_admissible(k);
    let r = if sp.gamma2 == 0.0 {
        0.0
    } else if admissible {
        -sp.gamma2 / (sp.gamma2 + sp.denominator(k))
    } else {
        -1.0
    };
    Amplitudes { k, r, t: 1.0 + r, admissible }
}

/// Gaussian wavepacket ψ(k) = (σ/√π)^{1/2} e^{−(k−k₀)²σ²/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    /// Central wavevector, nm⁻¹.
    pub k0: f64,
    /// Real-space width, nm.
    pub sigma: f64,
}

impl GaussianPulse {
    pub fn new(k0: f64, sigma: f64) -> Result<Self> {
        if !k0.is_finite() {
            return Err(Error::Domain { what: "pulse wavevector", value: k0 });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain { what: "pulse width", value: sigma });
        }
        Ok(GaussianPulse { k0, sigma })
    }

    /// Pulse for a ribbon of width W: k₀ = kW/W and σ = W/Δk.
    pub fn for_ribbon(width: f64, kw: f64, bandwidth: f64) -> Result<Self> {
        if !(width > 0.0) || !(bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!("width {width} and bandwidth {bandwidth} must be positive")));
        }
        Self::new(kw / width, width / bandwidth)
    }

    pub fn amplitude(&self, k: f64) -> f64 {
        (self.sigma / PI.sqrt()).sqrt() * (-0.5 * ((k - self.k0) * self.sigma).powi(2)).exp()
    }

    /// |ψ(k)|².
    pub fn density(&self, k: f64) -> f64 {
        self.sigma / PI.sqrt() * (-((k - self.k0) * self.sigma).powi(2)).exp()
    }

    /// Truncated support k₀ ± 6/σ.
    pub fn support(&self) -> (f64, f64) {
        let half = PULSE_SUPPORT / self.sigma;
        (self.k0 - half, self.k0 + half)
    }
}

/// Fidelity together with admissibility diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    /// F = |∫dk r(k)|ψ(k)|²|².
    pub value: f64,
    /// ∫dk r(k)|ψ(k)|².
    pub amplitude: f64,
    /// Pulse weight carried by non-admissible wavevectors.
    pub flagged_weight: f64,
    /// ∫dk |ψ(k)|² over the truncated support.
    pub norm: f64,
}

fn integrate_split<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, split: Option<f64>) -> Result<f64> {
    let run = |a: f64, b: f64| integrate_adaptive(&f, a, b, FIDELITY_TOLERANCE, 0.0, 4000).map(|r| r.value);
    match split {
        Some(s) if s > lo && s < hi => Ok(run(lo, s)? + run(s, hi)?),
        _ => run(lo, hi),
    }
}

/// Ideal-state fidelity of the reflected pulse.
pub fn fidelity(pulse: &GaussianPulse, sp: &ScatterParams) -> Result<Fidelity> {
    let (lo, hi) = pulse.support();
    let edge = Some(sp.admissibility_edge());
    let amplitude = integrate_split(|k| amplitudes(k, sp).r * pulse.density(k), lo, hi, edge)?;
    let flagged_weight = integrate_split(|k| if sp.is_admissible(k) { 0.0 } else { pulse.density(k) }, lo, hi, edge)?;
    let norm = integrate_split(|k| pulse.density(k), lo, hi, None)?;
    Ok(Fidelity { value: amplitude * amplitude, amplitude, flagged_weight, norm })
}

/// Pulse-averaged reflection and transmission probabilities ∫|r|²|ψ|², ∫|t|²|ψ|².
pub fn averaged_probabilities(pulse: &GaussianPulse, sp: &ScatterParams) -> Result<(f64, f64)> {
    let (lo, hi) = pulse.support();
    let edge = Some(sp.admissibility_edge());
    let r = integrate_split(|k| amplitudes(k, sp).reflectance() * pulse.density(k), lo, hi, edge)?;
    let t = integrate_split(|k| amplitudes(k, sp).transmittance() * pulse.density(k), lo, hi, edge)?;
    Ok((r, t))
}

/// Samples of (k, r, t, R, T) over the pulse support.
pub fn coefficient_table(pulse: &GaussianPulse, sp: &ScatterParams, points: usize) -> Vec<Amplitudes> {
    let (lo, hi) = pulse.support();
    let n = points.max(2);
    (0..n).map(|i| amplitudes(lo + (hi - lo) * i as f64 / (n - 1) as f64, sp)).collect()
}
