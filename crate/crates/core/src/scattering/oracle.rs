//! Time-domain check of the contact-interaction amplitudes.
//!
//! Propagates i∂_tψ = [−(ℏ/m)∂²_ρ − 2iv̄∂_ρ − iγ₂δ_s(ρ)]ψ with Crank–Nicolson
//! on a uniform grid, where δ_s is a normalized Gaussian of width `s`.

use super::{GaussianPulse, ScatterParams};
use crate::error::{Error, Result};
use crate::numerics::TridiagonalLu;
use crate::units::HBAR;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{self, Write};

/// Resolution controls for [`wavepacket_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    /// Grid points per regularization width.
    pub points_per_width: f64,
    /// Grid points per plasmon wavelength.
    pub points_per_wavelength: f64,
    /// Time steps per period of the central frequency.
    pub steps_per_period: f64,
    /// Initial and final distance of the packets from the origin, in pulse widths.
    pub clearance: f64,
    /// Upper bound on grid points.
    pub max_points: usize,
    /// Record a diagnostic sample every this many steps (0: start and end only).
    pub sample_every: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            points_per_width: 8.0,
            points_per_wavelength: 200.0,
            steps_per_period: 60.0,
            clearance: 7.0,
            max_points: 2_000_000,
            sample_every: 0,
        }
    }
}

/// One row of the run dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    /// Time, fs.
    pub t: f64,
    /// ∫|ψ|².
    pub norm: f64,
    /// ∫_{ρ<0}|ψ|².
    pub reflected: f64,
    /// ∫_{ρ>0}|ψ|².
    pub transmitted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub reflected: f64,
    pub transmitted: f64,
    /// Phase of the reflected packet relative to the mirrored free packet, in [0, 2π).
    pub reflected_phase: f64,
    /// Overlap of the reflected packet with the mirrored free packet.
    pub mirror_overlap: Complex64,
    /// Probability left within a few regularization widths of the origin.
    pub residual_near_origin: f64,
    /// Probability within the outermost grid cells at the end of the run.
    pub boundary_weight: f64,
    pub dx: f64,
    pub dt: f64,
    pub points: usize,
    pub steps: usize,
    pub samples: Vec<OracleSample>,
}

impl OracleResult {
    /// Writes the (t, norm, R, T) history as CSV.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# schema: plasmon-oracle-dump/1")?;
        writeln!(out, "t_fs,norm,reflected,transmitted")?;
        for s in &self.samples {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.norm, s.reflected, s.transmitted)?;
        }
        Ok(())
    }
}

struct Propagator {
    lu: TridiagonalLu,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl Propagator {
    fn new(a: f64, v_bar: f64, potential: &[f64], dx: f64, dt: f64) -> Result<Self> {
        let n = potential.len();
        let off = a / (dx * dx);
        let drift = v_bar / dx;
        let half = Complex64::new(0.0, 0.5 * dt);
        // H row: (−a/dx² + iv̄/dx, 2a/dx² − iV_j, −a/dx² − iv̄/dx).
        let h_lower = Complex64::new(-off, drift);
        let h_upper = Complex64::new(-off, -drift);
        let h_diag: Vec<Complex64> = potential.iter().map(|&v| Complex64::new(2.0 * off, -v)).collect();
        let one = Complex64::new(1.0, 0.0);
        let a_lower = vec![half * h_lower; n];
        let a_upper = vec![half * h_upper; n];
        let a_diag: Vec<Complex64> = h_diag.iter().map(|&d| one + half * d).collect();
        let lu = TridiagonalLu::new(&a_lower, &a_diag, &a_upper)?;
        Ok(Propagator {
            lu,
            lower: vec![-half * h_lower; n],
            diag: h_diag.iter().map(|&d| one - half * d).collect(),
            upper: vec![-half * h_upper; n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    fn step(&mut self, psi: &mut [Complex64]) {
        let n = psi.len();
        for j in 0..n {
            let mut v = self.diag[j] * psi[j];
            if j > 0 {
                v += self.lower[j] * psi[j - 1];
            }
            if j + 1 < n {
                v += self.upper[j] * psi[j + 1];
            }
            self.rhs[j] = v;
        }
        self.lu.solve_in_place(&mut self.rhs);
        psi.copy_from_slice(&self.rhs);
    }
}

fn split_weights(psi: &[Complex64], dx: f64, center: usize) -> (f64, f64, f64) {
    let left: f64 = psi[..center].iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    let right: f64 = psi[center + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    let mid = psi[center].norm_sqr() * dx;
    (left + 0.5 * mid, right + 0.5 * mid, left + right + mid)
}

/// Runs the scattering and free propagations and compares their outputs.
pub fn wavepacket_oracle(
    sp: &ScatterParams,
    pulse: &GaussianPulse,
    regularization_width: f64,
    grid: OracleGrid,
) -> Result<OracleResult> {
    let s = regularization_width;
    if !(s > 0.0) || !(s < pulse.sigma) {
        return Err(Error::Resolution(format!(
            "regularization width {s} nm must be positive and below the pulse width {} nm",
            pulse.sigma
        )));
    }
    if sp.lambda_a.is_finite() && sp.lambda_a > 0.0 && s >= sp.lambda_a {
        return Err(Error::Resolution(format!(
            "regularization width {s} nm is not below the absorption length {} nm",
            sp.lambda_a
        )));
    }
    let a = HBAR / sp.mass;
    let k0 = pulse.k0;
    let speed = 2.0 * a * k0 + 2.0 * sp.v_bar;
    if !(speed > 0.0) {
        return Err(Error::NonAdmissible { k: k0 });
    }

    // Distance travelled before and after the collision, allowing for spreading.
    let sigma = pulse.sigma;
    let mut width = sigma;
    let mut distance = grid.clearance * width;
    for _ in 0..4 {
        let total = 2.0 * distance / speed;
        width = sigma * (1.0 + (2.0 * a * total / (sigma * sigma)).powi(2)).sqrt();
        distance = grid.clearance * width;
    }
    let duration = 2.0 * distance / speed;
    let half_domain = distance + grid.clearance * width;

    let lambda = 2.0 * PI / k0.abs();
    let dx = (s / grid.points_per_width).min(lambda / grid.points_per_wavelength);
    let half_points = (half_domain / dx).ceil() as usize;
    let points = 2 * half_points + 1;
    if points > grid.max_points {
        return Err(Error::Resolution(format!("{points} grid points exceed the budget of {}", grid.max_points)));
    }
    let omega = a * k0 * k0 + 2.0 * sp.v_bar.abs() * k0.abs();
    let steps = ((duration * omega / (2.0 * PI)) * grid.steps_per_period).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;

    let x: Vec<f64> = (0..points).map(|j| (j as f64 - half_points as f64) * dx).collect();
    let bump: Vec<f64> = x.iter().map(|&xi| (-0.5 * (xi / s).powi(2)).exp()).collect();
    let bump_norm: f64 = bump.iter().sum::<f64>() * dx;
    let potential: Vec<f64> = bump.iter().map(|b| sp.gamma2 * b / bump_norm).collect();
    let free_potential = vec![0.0; points];

    let start = -distance;
    let mut psi: Vec<Complex64> = x
        .iter()
        .map(|&xi| {
            let y = xi - start;
            Complex64::from_polar((-0.5 * (y / sigma).powi(2)).exp(), k0 * y)
        })
        .collect();
    let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    let scale = 1.0 / norm0.sqrt();
    psi.iter_mut().for_each(|z| *z *= scale);
    let mut free = psi.clone();

    let mut scatter = Propagator::new(a, sp.v_bar, &potential, dx, dt)?;
    let mut reference = Propagator::new(a, sp.v_bar, &free_potential, dx, dt)?;
    let record = |t: f64, psi: &[Complex64]| {
        let (r, tr, n) = split_weights(psi, dx, half_points);
        OracleSample { t, norm: n, reflected: r, transmitted: tr }
    };
    let mut samples = vec![record(0.0, &psi)];
    for i in 1..=steps {
        scatter.step(&mut psi);
        reference.step(&mut free);
        if grid.sample_every > 0 && i % grid.sample_every == 0 && i != steps {
            samples.push(record(i as f64 * dt, &psi));
        }
    }
    samples.push(record(duration, &psi));

    let (reflected, transmitted, _) = split_weights(&psi, dx, half_points);
    let mirror_overlap: Complex64 =
        (0..half_points).map(|j| free[points - 1 - j].conj() * psi[j]).sum::<Complex64>() * dx;
    let near = (4.0 * s / dx).ceil() as usize;
    let residual_near_origin: f64 = psi[half_points.saturating_sub(near)..(half_points + near + 1).min(points)]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        * dx;
    let edge = (points / 100).max(1);
    let boundary_weight: f64 = psi[..edge]
        .iter()
        .chain(&psi[points - edge..])
        .chain(&free[..edge])
        .chain(&free[points - edge..])
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        * dx;
    if boundary_weight > 1e-8 {
        return Err(Error::Resolution(format!("packet reached the domain boundary (weight {boundary_weight:e})")));
    }
    Ok(OracleResult {
        reflected,
        transmitted,
        reflected_phase: mirror_overlap.arg().rem_euclid(2.0 * PI),
        mirror_overlap,
        residual_near_origin,
        boundary_weight,
        dx,
        dt,
        points,
        steps,
        samples,
    })
}

/// Oracle probabilities extrapolated to zero regularization width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolatedOracle {
    pub reflected: f64,
    pub transmitted: f64,
    pub reflected_phase: f64,
    /// Results at widths `s` and `s/2`.
    pub coarse: (f64, f64),
    pub fine: (f64, f64),
}

/// Runs the oracle at widths `s` and `s/2` and removes the O(s²) term.
pub fn extrapolated_oracle(
    sp: &ScatterParams,
    pulse: &GaussianPulse,
    regularization_width: f64,
    grid: OracleGrid,
) -> Result<ExtrapolatedOracle> {
    let a = wavepacket_oracle(sp, pulse, regularization_width, grid)?;
    let b = wavepacket_oracle(sp, pulse, 0.5 * regularization_width, grid)?;
    let extrapolate = |c: f64, f: f64| f + (f - c) / 3.0;
    let overlap = b.mirror_overlap + (b.mirror_overlap - a.mirror_overlap) / 3.0;
    Ok(ExtrapolatedOracle {
        reflected: extrapolate(a.reflected, b.reflected),
        transmitted: extrapolate(a.transmitted, b.transmitted),
        reflected_phase: overlap.arg().rem_euclid(2.0 * PI),
        coarse: (a.reflected, a.transmitted),
        fine: (b.reflected, b.transmitted),
    })
}
