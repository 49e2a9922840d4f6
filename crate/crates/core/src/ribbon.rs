//! Quasistatic eigenmodes of a nanoribbon.
//!
//! The potential profile φ(θ) on θ = x/W ∈ [0, 1] satisfies
//! M φ = η⁻¹ φ with M = V·D, where D is the finite-difference form of
//! ∂θ f ∂θ − q² f and V the cell-integrated 2K₀(q|θ − θ'|) kernel.

use crate::error::{Error, Result};
use crate::numerics::eigen::{eigenvalues, eigenvector};
use crate::numerics::linalg::RealLu;
use crate::numerics::quad::{simpson, trapezoid};
use crate::numerics::special::k0_cell_antiderivative;
use crate::numerics::Matrix;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Below this q the logarithmic kernel replaces K₀.
pub const Q_MIN: f64 = 1e-6;
/// Smallest supported number of grid points.
pub const MIN_POINTS: usize = 50;
/// Largest supported number of modes per solve.
pub const MAX_MODES: usize = 5;
/// Entries below this magnitude are ignored when counting sign changes.
pub const NODE_THRESHOLD: f64 = 1e-9;
/// Relative imaginary part above which an eigenvalue is treated as complex.
pub const REAL_TOLERANCE: f64 = 1e-8;

const EXTRA_CANDIDATES: usize = 6;

/// Uniform grid across the ribbon.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonGrid {
    points: usize,
    width: f64,
    occupation: Vec<f64>,
}

impl RibbonGrid {
    /// Fully occupied ribbon (f ≡ 1) of the given width in nm.
    pub fn solid(points: usize, width: f64) -> Result<Self> {
        RibbonGrid::with_occupation(vec![1.0; points], width)
    }

    pub fn with_occupation(occupation: Vec<f64>, width: f64) -> Result<Self> {
        let points = occupation.len();
        if points < MIN_POINTS {
            return Err(Error::InvalidInput(format!("grid needs at least {MIN_POINTS} points, got {points}")));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidInput(format!("ribbon width must be positive, got {width}")));
        }
        if occupation.iter().any(|&f| f != 0.0 && f != 1.0) {
            return Err(Error::InvalidInput("occupation entries must be 0 or 1".into()));
        }
        Ok(RibbonGrid { points, width, occupation })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.points - 1) as f64
    }

    pub fn occupation(&self) -> &[f64] {
        &self.occupation
    }

    pub fn is_solid(&self) -> bool {
        self.occupation.iter().all(|&f| f == 1.0)
    }

    pub fn theta(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| i as f64 * h).collect()
    }

    pub fn with_width(&self, width: f64) -> Result<Self> {
        RibbonGrid::with_occupation(self.occupation.clone(), width)
    }
}

/// Discretized ∂θ f ∂θ − q² f with zero normal current at both edges.
pub fn build_d(grid: &RibbonGrid, q: f64) -> Matrix {
    let n = grid.points;
    let f = &grid.occupation;
    let h = grid.spacing();
    let c = 1.0 / (2.0 * h * h);
    let q2 = q * q;
    let mut d = Matrix::zeros(n, n);
    let edge = c * (f[0] + f[1]);
    d[(0, 0)] = -edge - q2 * f[0];
    d[(0, 1)] = edge;
    for l in 1..n - 1 {
        d[(l, l - 1)] = c * (f[l - 1] + f[l]);
        d[(l, l)] = -c * (f[l - 1] + 2.0 * f[l] + f[l + 1]) - q2 * f[l];
        d[(l, l + 1)] = c * (f[l] + f[l + 1]);
    }
    let edge = c * (f[n - 2] + f[n - 1]);
    d[(n - 1, n - 2)] = edge;
    d[(n - 1, n - 1)] = -edge - q2 * f[n - 1];
    d
}

/// Kernel entry for index distance `offset`: 2∫ K₀(q|θ − θ'|) over one cell.
pub fn v_element(offset: usize, h: f64, q: f64) -> f64 {
    let theta = offset as f64 * h;
    let upper = theta + 0.5 * h;
    let lower = theta - 0.5 * h;
    if q <= Q_MIN {
        let g = |a: f64| if a == 0.0 { 0.0 } else { a * (1.0 - a.abs().ln()) };
        2.0 * (g(upper) - g(lower))
    } else {
        2.0 * (k0_cell_antiderivative(q, upper) - k0_cell_antiderivative(q, lower))
    }
}

/// Symmetric Toeplitz kernel matrix.
pub fn build_v(grid: &RibbonGrid, q: f64) -> Matrix {
    let n = grid.points;
    let h = grid.spacing();
    let row: Vec<f64> = (0..n).map(|d| v_element(d, h, q)).collect();
    Matrix::from_fn(n, n, |i, j| row[i.abs_diff(j)])
}

/// The operator M = V·D.
pub fn build_m(grid: &RibbonGrid, q: f64) -> Matrix {
    build_v(grid, q).matmul(&build_d(grid, q))
}

/// Number of sign changes, skipping entries below [`NODE_THRESHOLD`].
pub fn count_nodes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &x in v {
        if x.abs() < NODE_THRESHOLD {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            nodes += 1;
        }
        last = x;
    }
    nodes
}

/// Quadrature rule used for the field integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldRule {
    #[default]
    Trapezoid,
    Simpson,
}

fn theta_derivative(phi: &[f64], h: f64) -> Vec<f64> {
    let n = phi.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) / (2.0 * h)
            } else {
                (phi[i + 1] - phi[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// ξ⁽¹⁾ = ∫dx |u|² and ξ⁽³⁾ = ∫dx |u|⁴ (both in nm) for the profile `phi`
/// sampled on the grid, with the dimensionless field u = (∂θφ, iqφ).
pub fn field_integrals(phi: &[f64], q: f64, width: f64, rule: FieldRule) -> (f64, f64) {
    let h = 1.0 / (phi.len() - 1) as f64;
    let dphi = theta_derivative(phi, h);
    let u2: Vec<f64> = phi.iter().zip(&dphi).map(|(p, d)| d * d + q * q * p * p).collect();
    let u4: Vec<f64> = u2.iter().map(|v| v * v).collect();
    let integrate = |s: &[f64]| match rule {
        FieldRule::Trapezoid => trapezoid(s, h),
        FieldRule::Simpson => simpson(s, h),
    };
    (width * integrate(&u2), width * integrate(&u4))
}

/// Rescales a unit-norm eigenvector to ∫₀¹ φ² dθ = 1 so field integrals do
/// not depend on the number of grid points.
pub fn continuum_normalized(phi: &[f64]) -> Vec<f64> {
    let h = 1.0 / (phi.len() - 1) as f64;
    let sq: Vec<f64> = phi.iter().map(|p| p * p).collect();
    let norm = trapezoid(&sq, h).sqrt();
    phi.iter().map(|p| p / norm).collect()
}

/// Physical modes of the ribbon at one normalized wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonModeSet {
    /// Normalized wavevector kW.
    pub q: f64,
    /// Ribbon width the field integrals refer to, nm.
    pub width: f64,
    /// Eigenvalues η_n (negative).
    pub etas: Vec<f64>,
    /// Unit-norm potentials φ_n sampled on the grid.
    pub potentials: Vec<Vec<f64>>,
    /// Interior sign changes of each potential.
    pub node_counts: Vec<usize>,
    /// ξ⁽¹⁾ per mode, nm.
    pub xi1: Vec<f64>,
    /// ξ⁽³⁾ per mode, nm.
    pub xi3: Vec<f64>,
}

impl RibbonModeSet {
    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    /// Eigenvalue of the 1-based mode `n`.
    pub fn eta(&self, n: usize) -> Result<f64> {
        self.index(n).map(|i| self.etas[i])
    }

    fn index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.len() {
            return Err(Error::InsufficientModes { found: self.len(), wanted: n });
        }
        Ok(n - 1)
    }

    /// (ξ⁽¹⁾, ξ⁽³⁾) of the 1-based mode `n`.
    pub fn xi(&self, n: usize) -> Result<(f64, f64)> {
        self.index(n).map(|i| (self.xi1[i], self.xi3[i]))
    }

    /// Same modes with field integrals for another width (they scale linearly).
    pub fn with_width(&self, width: f64) -> RibbonModeSet {
        let s = width / self.width;
        RibbonModeSet {
            width,
            xi1: self.xi1.iter().map(|x| x * s).collect(),
            xi3: self.xi3.iter().map(|x| x * s).collect(),
            ..self.clone()
        }
    }
}

/// Solves M φ = η⁻¹ φ and returns the `n_max` physical modes with the
/// fewest nodes, ordered by node count.
pub fn solve_modes(grid: &RibbonGrid, q: f64, n_max: usize) -> Result<RibbonModeSet> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Domain { what: "normalized wavevector", value: q });
    }
    if n_max == 0 || n_max > MAX_MODES {
        return Err(Error::InvalidInput(format!("n_max must lie in 1..={MAX_MODES}, got {n_max}")));
    }
    let v = build_v(grid, q);
    let d = build_d(grid, q);
    let m = v.matmul(&d);
    let mut physical: Vec<f64> = eigenvalues(&m)?
        .into_iter()
        .filter(|l| l.re < 0.0 && l.im.abs() <= REAL_TOLERANCE * l.norm())
        .map(|l| l.re)
        .collect();
    // Largest |η| first: these are the smooth, low-order profiles.
    physical.sort_by(|a, b| b.total_cmp(a));
    // V D φ = λ φ is the symmetric pencil D φ = λ V⁻¹ φ, whose Rayleigh
    // quotient squares the error of the QR eigenvalue.
    let v_lu = RealLu::shifted(&v, 0.0)?;
    let mut candidates = Vec::new();
    for &lambda in physical.iter().take(n_max + EXTRA_CANDIDATES) {
        let vector: Vec<f64> = eigenvector(&m, lambda.into())?.iter().map(|c| c.re).collect();
        let dv = d.mul_vec(&vector);
        let vinv = v_lu.solve(&vector);
        let num: f64 = vector.iter().zip(&dv).map(|(a, b)| a * b).sum();
        let den: f64 = vector.iter().zip(&vinv).map(|(a, b)| a * b).sum();
        let refined = if den != 0.0 && (num / den) < 0.0 { num / den } else { lambda };
        candidates.push((count_nodes(&vector), 1.0 / refined, vector));
    }
    candidates.sort_by_key(|c| c.0);
    if candidates.len() < n_max {
        return Err(Error::InsufficientModes { found: candidates.len(), wanted: n_max });
    }
    candidates.truncate(n_max);
    let mut set = RibbonModeSet {
        q,
        width: grid.width,
        etas: Vec::with_capacity(n_max),
        potentials: Vec::with_capacity(n_max),
        node_counts: Vec::with_capacity(n_max),
        xi1: Vec::with_capacity(n_max),
        xi3: Vec::with_capacity(n_max),
    };
    for (nodes, eta, vector) in candidates {
        let (xi1, xi3) = field_integrals(&continuum_normalized(&vector), q, grid.width, FieldRule::Trapezoid);
        set.etas.push(eta);
        set.node_counts.push(nodes);
        set.potentials.push(vector);
        set.xi1.push(xi1);
        set.xi3.push(xi3);
    }
    Ok(set)
}

/// (ξ⁽¹⁾, ξ⁽³⁾) per mode for a mode set, recomputed on the given grid.
pub fn mode_fields_and_integrals(modes: &RibbonModeSet, grid: &RibbonGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    if modes.potentials.iter().any(|p| p.len() != grid.points) {
        return Err(Error::InvalidInput("mode set was computed on a different grid".into()));
    }
    Ok(modes
        .potentials
        .iter()
        .map(|p| field_integrals(&continuum_normalized(p), modes.q, grid.width, FieldRule::Trapezoid))
        .unzip())
}

/// Memoizes width-independent mode sets by (grid points, q).
///
/// Entries are computed for unit width and rescaled on lookup. Concurrent
/// callers may compute the same entry twice; both results are identical.
#[derive(Debug, Default)]
pub struct ModeCache {
    entries: Mutex<HashMap<(usize, u64, usize), Arc<RibbonModeSet>>>,
}

impl ModeCache {
    pub fn new() -> Self {
        ModeCache::default()
    }

    pub fn get(&self, points: usize, q: f64, n_max: usize, width: f64) -> Result<RibbonModeSet> {
        let key = (points, q.to_bits(), n_max);
        let hit = self.entries.lock().map_err(|_| poisoned())?.get(&key).cloned();
        let unit = match hit {
            Some(set) => set,
            None => {
                let grid = RibbonGrid::solid(points, 1.0)?;
                let set = Arc::new(solve_modes(&grid, q, n_max)?);
                self.entries.lock().map_err(|_| poisoned())?.entry(key).or_insert(set).clone()
            }
        };
        Ok(unit.with_width(width))
    }

    pub fn len(&self) -> usize {
        self.entries.lock().map(|e| e.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn poisoned() -> Error {
    Error::InvalidInput("mode cache lock poisoned".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::EULER_GAMMA;

    fn grid(n: usize) -> RibbonGrid {
        RibbonGrid::solid(n, 20.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(RibbonGrid::solid(49, 20.0).is_err());
        assert!(RibbonGrid::solid(60, -1.0).is_err());
        let g = grid(200);
        assert_eq!(g.spacing() * 199.0, 1.0);
        assert!(g.is_solid());
    }

    #[test]
    fn d_row_sums() {
        let g = grid(60);
        for q in [0.0, 1.0, 2.5] {
            let d = build_d(&g, q);
            for row in 0..60 {
                let s: f64 = d.row(row).iter().sum();
                assert!((s + q * q).abs() < 1e-9, "q={q} row={row} sum={s}");
            }
        }
    }

    #[test]
    fn d_boundary_row() {
        let g = grid(60);
        let h = g.spacing();
        let d = build_d(&g, 1.0);
        let c = 2.0 / (2.0 * h * h);
        assert_eq!(d[(0, 0)], -c - 1.0);
        assert_eq!(d[(0, 1)], c);
        assert!(d.row(0)[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn v_symmetric_toeplitz_positive_diagonal() {
        let g = grid(80);
        for q in [0.0, 0.3, 1.0, 4.0] {
            let v = build_v(&g, q);
            assert_eq!(v, v.transpose());
            for i in 1..80 {
                assert_eq!(v[(i, i - 1)], v[(1, 0)]);
                assert!(v[(i, i)] > 0.0);
            }
        }
    }

    #[test]
    fn v_small_q_matches_log_kernel_up_to_constant() {
        // K₀(qs) = −ln s − ln(q/2) − γ + O(q²s² ln s); the constant shift
        // drops out against the neutral charge produced by D at q → 0.
        let g = grid(100);
        let h = g.spacing();
        let q = 1e-5;
        let a = build_v(&g, q);
        let b = build_v(&g, 0.0);
        let shift = 2.0 * h * (-(q / 2.0).ln() - EULER_GAMMA);
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            for j in 0..100 {
                worst = worst.max((a[(i, j)] - shift - b[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-4, "max deviation {worst}");
    }

    #[test]
    fn v_matches_direct_cell_quadrature() {
        let h = 0.01;
        let q = 1.3;
        for offset in [0usize, 1, 2, 17] {
            // Midpoint rule with many sub-cells, singularity excluded analytically
            // for the diagonal cell by symmetric log substitution.
            let centre = offset as f64 * h;
            let sub = 200_000;
            let mut acc = 0.0;
            let w = h / sub as f64;
            for k in 0..sub {
                let s = centre - 0.5 * h + (k as f64 + 0.5) * w;
                acc += crate::numerics::special::k0_k1(q * s.abs()).0 * w;
            }
            let got = v_element(offset, h, q);
            assert!(((got - 2.0 * acc) / got).abs() < 2e-4, "offset {offset}: {got} vs {}", 2.0 * acc);
        }
    }

    #[test]
    fn node_counting() {
        assert_eq!(count_nodes(&[1.0, 0.5, -0.5, -1.0]), 1);
        assert_eq!(count_nodes(&[1.0, 1e-12, -1e-12, 1.0]), 0);
        assert_eq!(count_nodes(&[1.0, 1e-12, -1.0]), 1);
        assert_eq!(count_nodes(&[0.0, -1.0, 1.0, -1.0]), 2);
    }

    #[test]
    fn first_modes_at_unit_q() {
        let g = grid(100);
        let set = solve_modes(&g, 1.0, 3).unwrap();
        assert_eq!(set.node_counts, vec![0, 1, 2]);
        assert!(set.etas.iter().all(|&e| e < 0.0));
        assert!(set.xi1.iter().chain(&set.xi3).all(|&x| x > 0.0));
        for p in &set.potentials {
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn field_integral_homogeneity() {
        let g = grid(100);
        let set = solve_modes(&g, 1.0, 2).unwrap();
        let phi = &set.potentials[1];
        let (a1, a3) = field_integrals(phi, 1.0, 20.0, FieldRule::Trapezoid);
        let scaled: Vec<f64> = phi.iter().map(|x| 3.0 * x).collect();
        let (b1, b3) = field_integrals(&scaled, 1.0, 20.0, FieldRule::Trapezoid);
        assert!((b1 / a1 - 9.0).abs() < 1e-12);
        assert!((b3 / a3 - 81.0).abs() < 1e-12);
        assert!((b3 / (b1 * b1) - a3 / (a1 * a1)).abs() < 1e-12 * a3 / (a1 * a1));
        let (c1, c3) = field_integrals(phi, 1.0, 40.0, FieldRule::Trapezoid);
        assert!((c1 / a1 - 2.0).abs() < 1e-12 && (c3 / a3 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_and_simpson_agree() {
        let g = grid(200);
        let set = solve_modes(&g, 1.0, 3).unwrap();
        for p in &set.potentials {
            let phi = continuum_normalized(p);
            let (t1, _) = field_integrals(&phi, 1.0, 20.0, FieldRule::Trapezoid);
            let (s1, _) = field_integrals(&phi, 1.0, 20.0, FieldRule::Simpson);
            assert!(((t1 - s1) / s1).abs() < 1e-4, "{t1} vs {s1}");
        }
    }

    #[test]
    fn mode_integrals_consistent_with_solver() {
        let g = grid(80);
        let set = solve_modes(&g, 0.7, 2).unwrap();
        let (xi1, xi3) = mode_fields_and_integrals(&set, &g).unwrap();
        assert_eq!(xi1, set.xi1);
        assert_eq!(xi3, set.xi3);
        assert!(mode_fields_and_integrals(&set, &grid(90)).is_err());
    }

    #[test]
    fn cache_rescales_width() {
        let cache = ModeCache::new();
        let a = cache.get(80, 1.0, 3, 20.0).unwrap();
        let b = cache.get(80, 1.0, 3, 10.0).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(a.etas, b.etas);
        assert!((a.xi1[1] / b.xi1[1] - 2.0).abs() < 1e-12);
        let direct = solve_modes(&RibbonGrid::solid(80, 20.0).unwrap(), 1.0, 3).unwrap();
        for (x, y) in direct.xi1.iter().zip(&a.xi1) {
            assert!((x - y).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let g = grid(60);
        assert!(solve_modes(&g, 1.0, 0).is_err());
        assert!(solve_modes(&g, 1.0, 6).is_err());
        assert!(solve_modes(&g, -1.0, 2).is_err());
    }
}
