//! Plasmon dispersion ω_{n}(k) of a ribbon, its local quadratic expansion
//! and the damping windows.
//!
//! A mode exists at (k, ω) when −η_n(kW) = Im σ̃(ω)·e²/(ε ℏω W).

use crate::conductivity::{plasma_frequency, LinearModel, Material};
use crate::error::{Error, Result};
use crate::numerics::{find_root_bisect, Tolerance};
use crate::ribbon::{ModeCache, RibbonGrid};
use crate::units::{E_SQUARED, HBAR, MASS_UNIT_KG, PHONON_LINE};
use std::sync::Arc;

/// Lower end of every frequency bracket, eV.
pub const OMEGA_FLOOR: f64 = 1e-4;
/// Distance kept from the plasma energy at the top of the bracket, eV.
pub const PLASMA_MARGIN: f64 = 1e-6;
/// Relative stencil step for the local expansion.
pub const STENCIL_STEP: f64 = 1e-3;

/// Damping classification of a point (k, ℏω).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DampingFlags {
    pub landau_intraband: bool,
    pub landau_interband: bool,
    pub above_phonon: bool,
}

impl DampingFlags {
    pub fn classify(k: f64, hw: f64, m: &Material) -> Self {
        let kinetic = m.hbar_vf() * k;
        DampingFlags {
            landau_intraband: hw <= kinetic,
            landau_interband: hw >= 2.0 * m.fermi_energy - kinetic,
            above_phonon: hw > PHONON_LINE,
        }
    }

    pub fn landau(&self) -> bool {
        self.landau_intraband || self.landau_interband
    }

    pub fn any(&self) -> bool {
        self.landau() || self.above_phonon
    }
}

/// Sampled branch ω_n(k).
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionBranch {
    pub n: usize,
    /// Wavevectors, nm⁻¹.
    pub k_grid: Vec<f64>,
    /// ℏω, eV.
    pub omega: Vec<f64>,
    pub flags: Vec<DampingFlags>,
    /// Index of the first requested k without a solution, if the branch is cut off.
    pub termination: Option<usize>,
}

impl DispersionBranch {
    /// True when ω never decreases along k.
    pub fn is_monotone(&self) -> bool {
        self.omega.windows(2).all(|w| w[1] >= w[0])
    }

    /// Central-difference group velocity of the sampled data, nm/fs
    /// (one-sided at the ends).
    pub fn sampled_group_velocity(&self) -> Vec<f64> {
        let n = self.omega.len();
        if n < 2 {
            return vec![f64::NAN; n];
        }
        (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                (self.omega[b] - self.omega[a]) / (self.k_grid[b] - self.k_grid[a]) / HBAR
            })
            .collect()
    }
}

/// Quadratic expansion ℏω ≈ ℏω_p + ℏv_g(k − k_p) + ℏ²(k − k_p)²/(2m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalExpansion {
    /// nm⁻¹
    pub k_p: f64,
    /// ℏω_p, eV
    pub omega_p: f64,
    /// nm/fs
    pub v_g: f64,
    /// Effective mass, eV·fs²/nm² (infinite or negative when curvature ≤ 0).
    pub mass: f64,
    /// v_g − ℏk_p/m, nm/fs
    pub v_bar: f64,
    /// d²(ℏω)/dk², eV·nm²
    pub curvature: f64,
    pub negative_mass: bool,
}

impl LocalExpansion {
    /// Builds the expansion from ℏω_p and the first two k-derivatives of ℏω.
    pub fn from_derivatives(k_p: f64, omega_p: f64, slope: f64, curvature: f64) -> Self {
        let v_g = slope / HBAR;
        let mass = HBAR * HBAR / curvature;
        let v_bar = v_g - HBAR * k_p / mass;
        LocalExpansion { k_p, omega_p, v_g, mass, v_bar, curvature, negative_mass: !(curvature > 0.0) }
    }

    /// Group velocity predicted by the expansion at k, nm/fs.
    pub fn group_velocity_at(&self, k: f64) -> f64 {
        self.v_g + HBAR * (k - self.k_p) / self.mass
    }

    /// ℏω predicted by the expansion at k, eV.
    pub fn omega_at(&self, k: f64) -> f64 {
        let dk = k - self.k_p;
        self.omega_p + HBAR * self.v_g * dk + 0.5 * self.curvature * dk * dk
    }
}

/// Five-point stencil expansion of an arbitrary ℏω(k) around `k_p`.
pub fn stencil_expansion<F>(k_p: f64, delta: f64, mut omega: F) -> Result<LocalExpansion>
where
    F: FnMut(f64) -> Result<f64>,
{
    let e0 = omega(k_p)?;
    let ep1 = omega(k_p + delta)?;
    let em1 = omega(k_p - delta)?;
    let ep2 = omega(k_p + 2.0 * delta)?;
    let em2 = omega(k_p - 2.0 * delta)?;
    let slope = (-ep2 + 8.0 * ep1 - 8.0 * em1 + em2) / (12.0 * delta);
    let curvature = (-ep2 + 16.0 * ep1 - 30.0 * e0 + 16.0 * em1 - em2) / (12.0 * delta * delta);
    Ok(LocalExpansion::from_derivatives(k_p, e0, slope, curvature))
}

/// Effective mass in kg.
pub fn effective_mass_kg(le: &LocalExpansion) -> f64 {
    le.mass * MASS_UNIT_KG
}

/// Dispersion-condition residual −η − Im σ̃·e²/(ε ℏω W).
pub fn dispersion_residual(hw: f64, eta: f64, width: f64, m: &Material, model: LinearModel) -> Result<f64> {
    let s = model.sigma(hw, &m.lossless())?;
    Ok(-eta - s.value.im * E_SQUARED / (m.eps_eff * hw * width))
}

/// Closed-form Drude root ℏω = √(E_F e²/(π ε W (−η))).
pub fn drude_omega(eta: f64, width: f64, m: &Material) -> f64 {
    (m.fermi_energy * E_SQUARED / (std::f64::consts::PI * m.eps_eff * width * (-eta))).sqrt()
}

/// Solves the dispersion condition for a given eigenvalue by bisection.
pub fn omega_for_eta(eta: f64, width: f64, m: &Material, model: LinearModel, mode: usize, k: f64) -> Result<f64> {
    if !(eta < 0.0) {
        return Err(Error::NoSolution { mode, k });
    }
    let upper = match model {
        LinearModel::Lrpa => plasma_frequency(m)? - PLASMA_MARGIN,
        LinearModel::Drude => 1e3 * m.fermi_energy,
    };
    let f = |hw: f64| dispersion_residual(hw, eta, width, m, model).unwrap_or(f64::NAN);
    let tol = Tolerance::new(0.0, 4.0 * f64::EPSILON, 400)?;
    match find_root_bisect(f, OMEGA_FLOOR, upper, tol) {
        Ok(hw) => Ok(hw),
        Err(Error::Bracket { .. }) => Err(Error::NoSolution { mode, k }),
        Err(e) => Err(e),
    }
}

/// Mode data and material needed to solve the dispersion of one ribbon.
#[derive(Debug, Clone)]
pub struct DispersionSolver {
    pub points: usize,
    pub width: f64,
    pub material: Material,
    pub model: LinearModel,
    /// Modes computed per eigen solve.
    pub n_max: usize,
    cache: Arc<ModeCache>,
}

impl DispersionSolver {
    pub fn new(grid: &RibbonGrid, material: Material) -> Self {
        DispersionSolver::with_cache(grid, material, Arc::new(ModeCache::new()))
    }

    pub fn with_cache(grid: &RibbonGrid, material: Material, cache: Arc<ModeCache>) -> Self {
        DispersionSolver {
            points: grid.points(),
            width: grid.width(),
            material,
            model: LinearModel::Lrpa,
            n_max: 3,
            cache,
        }
    }

    pub fn with_model(mut self, model: LinearModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_mode_count(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn cache(&self) -> &Arc<ModeCache> {
        &self.cache
    }

    /// Ribbon modes at wavevector k (nm⁻¹).
    pub fn modes(&self, k: f64) -> Result<crate::ribbon::RibbonModeSet> {
        self.cache.get(self.points, k * self.width, self.n_max.max(3), self.width)
    }

    /// ℏω of mode `n` (1-based) at wavevector k, eV.
    pub fn solve_omega(&self, n: usize, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::Domain { what: "wavevector", value: k });
        }
        let eta = self.modes(k)?.eta(n)?;
        omega_for_eta(eta, self.width, &self.material, self.model, n, k)
    }

    /// Samples branch `n` on `n_points` equally spaced wavevectors.
    pub fn trace_branch(&self, n: usize, k_min: f64, k_max: f64, n_points: usize) -> Result<DispersionBranch> {
        if n_points < 8 {
            return Err(Error::InvalidInput(format!("a branch needs at least 8 points, got {n_points}")));
        }
        if !(k_min > 0.0) || !(k_max > k_min) {
            return Err(Error::InvalidInput(format!("invalid wavevector range [{k_min}, {k_max}]")));
        }
        let mut branch =
            DispersionBranch { n, k_grid: Vec::new(), omega: Vec::new(), flags: Vec::new(), termination: None };
        for i in 0..n_points {
            let k = k_min + (k_max - k_min) * i as f64 / (n_points - 1) as f64;
            match self.solve_omega(n, k) {
                Ok(hw) => {
                    branch.k_grid.push(k);
                    branch.omega.push(hw);
                    branch.flags.push(DampingFlags::classify(k, hw, &self.material));
                }
                Err(Error::NoSolution { .. }) => {
                    branch.termination = Some(i);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(branch)
    }

    /// Quadratic expansion of branch `n` around k_p from re-solved frequencies.
    pub fn local_expansion(&self, n: usize, k_p: f64) -> Result<LocalExpansion> {
        stencil_expansion(k_p, STENCIL_STEP * k_p, |k| self.solve_omega(n, k))
    }

    /// Residual of the dispersion condition at a solved point.
    pub fn residual(&self, n: usize, k: f64, hw: f64) -> Result<f64> {
        let eta = self.modes(k)?.eta(n)?;
        dispersion_residual(hw, eta, self.width, &self.material, self.model)
    }
}
