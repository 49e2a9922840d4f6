//! Benchmark fixtures.

use plasmon_core::dispersion::DispersionSolver;
use plasmon_core::gate::{GateInputs, GateModel};
use plasmon_core::{Material, RibbonGrid};

/// Grid points used by the reference configuration.
pub const POINTS: usize = 100;

/// Solver for the W = 20 nm, E_F = 0.1 eV ribbon.
pub fn reference_solver() -> DispersionSolver {
    let grid = RibbonGrid::solid(POINTS, 20.0).expect("valid grid");
    DispersionSolver::new(&grid, Material::new(0.1).expect("valid material")).with_mode_count(3)
}

/// Gate model with an empty mode cache.
pub fn cold_model() -> GateModel {
    GateModel::new(POINTS).expect("valid model")
}

pub fn reference_inputs() -> GateInputs {
    GateInputs::new(20.0, 0.1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_evaluate() {
        let p = plasmon_core::evaluate_gate_point(&cold_model(), reference_inputs()).unwrap();
        assert!(p.p_succ.is_some());
        assert!(reference_solver().solve_omega(2, 0.05).unwrap() > 0.1);
    }
}
