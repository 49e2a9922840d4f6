//! Internal unit system: energies in eV, lengths in nm, times in fs.
//!
//! Conductivities are carried in reduced form (linear response in units of
//! e²/ℏ, third-order response in units of e⁴·nm²/(ℏ·eV²)), which keeps the
//! quasistatic eigenvalue η = iσ/(ε ω W) manifestly dimensionless.

/// Reduced Planck constant, eV·fs.
pub const HBAR: f64 = 0.658_211_956_9;

/// Squared elementary charge in Gaussian units, eV·nm.
pub const E_SQUARED: f64 = 1.439_96;

/// Graphene Fermi velocity, nm/fs.
pub const FERMI_VELOCITY: f64 = 1.0;

/// Optical phonon energy of graphene, eV.
pub const PHONON_LINE: f64 = 0.2;

/// One eV·fs²/nm² expressed in kilograms.
pub const MASS_UNIT_KG: f64 = 1.602_176_634e-31;

/// Free electron mass, kg.
pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
