//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use plasmon_core::conductivity::{plasma_frequency, LinearModel, Material, Sigma3Model};
use plasmon_core::dispersion::{DispersionSolver, LocalExpansion};
use plasmon_core::gate::{containment_probability, evaluate_gate_point, GateInputs, GateModel};
use plasmon_core::rates::gamma1_intrinsic;
use plasmon_core::ribbon::{solve_modes, RibbonGrid};
use plasmon_core::scattering::oracle::{extrapolated_oracle, OracleGrid};
use plasmon_core::scattering::{
    absorption_length, absorption_length_relative, amplitudes, reflection_from_ratio, GaussianPulse, ScatterParams,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn reference_solver(points: usize) -> DispersionSolver {
    let grid = RibbonGrid::solid(points, 20.0).unwrap();
    DispersionSolver::new(&grid, Material::new(0.1).unwrap()).with_mode_count(3)
}

fn plasma_zero() -> Outcome {
    let mut worst: f64 = 0.0;
    for ef in [0.05, 0.1, 0.2] {
        let hw = plasma_frequency(&Material::new(ef).unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max(rel(hw, 5.0 / 3.0 * ef));
    }
    ensure(worst < 0.01, format!("max deviation from 5/3 E_F is {:.3}%", 100.0 * worst))?;
    Ok(format!("max deviation from 5/3 E_F {:.3}%", 100.0 * worst))
}

fn drude_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(hw, g) in &[(0.1, 1e-3), (0.13, 0.02), (0.05, 0.05), (0.15, 1.5e-3)] {
        let m = Material::new(0.1).unwrap().with_drude_rate(g).unwrap();
        let got = gamma1_intrinsic(hw, &m, LinearModel::Drude).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got, g * (1.0 + (g / hw).powi(2))));
    }
    ensure(worst < 1e-10, format!("relative error {worst:.2e}"))?;
    let m = Material::new(0.1).unwrap().with_drude_rate(0.0013).unwrap();
    let near = rel(gamma1_intrinsic(0.13, &m, LinearModel::Drude).unwrap(), 0.0013);
    ensure(near < 1.1e-4, format!("gamma_D = omega/100 deviates by {near:.2e}"))?;
    Ok(format!("max relative error {worst:.1e}; at gamma_D = omega/100 gamma1/gamma_D - 1 = {near:.1e}"))
}

fn reflection_benchmark() -> Outcome {
    let r_closed = reflection_from_ratio(1e3).powi(2);
    let sp = ScatterParams::with_ratio(0.05, 0.3, 1e3).map_err(|e| e.to_string())?;
    let r_amp = amplitudes(0.05, &sp).reflectance();
    for r in [r_closed, r_amp] {
        ensure((r - 0.98755).abs() <= 1e-5, format!("R = {r:.7}"))?;
    }
    Ok(format!("R = {r_closed:.7}"))
}

fn oracle_equivalence() -> Outcome {
    // Narrowband pulses at the reference wavevector and effective mass.
    let le = reference_solver(100).local_expansion(2, 0.05).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for ratio in [0.1, 1.0, 10.0] {
        let sp = ScatterParams::with_ratio(0.05, le.mass, ratio).map_err(|e| e.to_string())?;
        let pulse = GaussianPulse::new(sp.k_p, 4.0 * sp.lambda_p).unwrap();
        let res =
            extrapolated_oracle(&sp, &pulse, sp.lambda_p / 50.0, OracleGrid::default()).map_err(|e| e.to_string())?;
        let a = amplitudes(sp.k_p, &sp);
        let (dr, dt) = (rel(res.reflected, a.reflectance()), rel(res.transmitted, a.transmittance()));
        ensure(
            dr < 0.01 && dt < 0.01,
            format!("ratio {ratio}: R off by {:.3}%, T off by {:.3}%", 100.0 * dr, 100.0 * dt),
        )?;
        if ratio == 10.0 {
            let dphi = (res.reflected_phase - PI).abs();
            ensure(dphi <= 0.05, format!("reflected phase {:.4} rad", res.reflected_phase))?;
            parts.push(format!("phase - pi = {:+.4}", res.reflected_phase - PI));
        }
        parts.push(format!("ratio {ratio}: dR {:.3}% dT {:.3}%", 100.0 * dr, 100.0 * dt));
    }
    Ok(parts.join(", "))
}

fn identity_suite() -> Outcome {
    let config = Config { cases: 100, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (0.01f64..1.0, 0.05f64..1.0, -1.0f64..0.4, 0.0f64..5.0);
    runner
        .run(&strategy, |(k_p, mass, v_frac, g2)| {
            // v̄ = −c·ℏk_p/m with c < 1/2 keeps the pulse centre admissible.
            let hk = plasmon_core::units::HBAR * k_p / mass;
            let v_bar = -v_frac * hk;
            let curvature = plasmon_core::units::HBAR.powi(2) / mass;
            let le = LocalExpansion::from_derivatives(k_p, 0.1, plasmon_core::units::HBAR * (v_bar + hk), curvature);
            let sp = ScatterParams::from_expansion(&le, g2).unwrap();
            prop_assume!(sp.is_admissible(k_p));
            let a = amplitudes(k_p, &sp);
            prop_assert!(a.t - a.r == 1.0);
            let sum = a.reflectance() + a.transmittance();
            if g2 == 0.0 {
                prop_assert!(sum == 1.0);
            } else {
                prop_assert!(sum < 1.0);
            }
            let main = absorption_length(&le, g2).unwrap();
            let alt = absorption_length_relative(k_p, le.v_bar, le.mass, g2);
            if main.is_finite() {
                prop_assert!((main - alt).abs() <= 1e-12 * main.abs(), "{} {}", main, alt);
            } else {
                prop_assert!(alt.is_infinite());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let sp = ScatterParams::new(0.05, 0.1, 0.3, 0.0).map_err(|e| e.to_string())?;
    let a = amplitudes(0.05, &sp);
    ensure(a.reflectance() + a.transmittance() == 1.0, "gamma2 = 0 does not conserve R + T")?;
    Ok("100 admissible draws: t - r = 1 exactly, R + T < 1, absorption-length forms agree".into())
}

fn eigensolver_convergence() -> Outcome {
    let coarse = solve_modes(&RibbonGrid::solid(100, 1.0).unwrap(), 1.0, 3).map_err(|e| e.to_string())?;
    let fine = solve_modes(&RibbonGrid::solid(200, 1.0).unwrap(), 1.0, 3).map_err(|e| e.to_string())?;
    ensure(coarse.node_counts == vec![0, 1, 2], format!("node counts {:?}", coarse.node_counts))?;
    ensure(fine.node_counts == vec![0, 1, 2], format!("node counts {:?}", fine.node_counts))?;
    let mut worst = (0.0, String::new());
    for n in 1..=3 {
        let (c1, c3) = coarse.xi(n).unwrap();
        let (f1, f3) = fine.xi(n).unwrap();
        for (name, a, b) in [("eta", coarse.eta(n).unwrap(), fine.eta(n).unwrap()), ("xi1", c1, f1), ("xi3", c3, f3)] {
            let d = rel(b, a);
            if d > worst.0 {
                worst = (d, format!("{name} of mode {n}"));
            }
        }
    }
    let msg = format!("node counts 0, 1, 2; largest change {:.3}% ({})", 100.0 * worst.0, worst.1);
    ensure(worst.0 < 0.01, msg.clone())?;
    Ok(msg)
}

fn dispersion_structure() -> Outcome {
    let solver = reference_solver(100);
    let width = 20.0;
    let plasma = plasma_frequency(&Material::new(0.1).unwrap()).unwrap();
    let mut issues = Vec::new();
    for n in 1..=3 {
        let b = solver.trace_branch(n, 0.05 / width, 2.0 / width, 40).map_err(|e| e.to_string())?;
        if b.termination.is_some() || b.omega.len() != 40 {
            issues.push(format!("branch {n} is cut off"));
        }
        if b.omega.iter().any(|&w| w >= plasma) {
            issues.push(format!("branch {n} reaches the plasma energy"));
        }
        if !b.is_monotone() {
            let (i, drop) = b.omega.windows(2).enumerate().map(|(i, w)| (i, w[0] - w[1])).fold((0, 0.0), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            });
            issues.push(format!(
                "branch {n} not monotone on kW in [0.05, 2] (decrease of {drop:.2e} eV near kW = {:.2})",
                b.k_grid[i] * width
            ));
        }
    }
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let reference = solver.local_expansion(n, 1.0 / width).map_err(|e| e.to_string())?;
        for i in 0..=8 {
            let kw = 0.8 + 0.05 * i as f64;
            let k = kw / width;
            let solved = solver.local_expansion(n, k).map_err(|e| e.to_string())?.v_g;
            worst = worst.max(rel(reference.group_velocity_at(k), solved));
        }
    }
    if worst >= 0.05 {
        issues.push(format!("quadratic expansion misses v_g by {:.2}%", 100.0 * worst));
    }
    let msg = format!("three branches below {plasma:.5} eV; quadratic v_g within {:.2}%", 100.0 * worst);
    if issues.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", issues.join("; ")))
    }
}

type Rows = Vec<HashMap<String, String>>;

fn read_csv(path: &Path) -> Rows {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> Option<f64> {
    row.get(key).filter(|s| !s.is_empty()).map(|s| s.parse().unwrap())
}

fn plasmon(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_plasmon")).args(args).status().map_err(|e| e.to_string())?;
    ensure(status.success(), format!("plasmon {args:?} exited with {status}"))
}

fn gate_map_properties(dir: &Path) -> Outcome {
    ensure(Sigma3Model::default().scale_invariant(), "default sigma3 model is not scale invariant")?;
    let out = dir.join("map");
    plasmon(&["gate-map", "--out", out.to_str().unwrap()])?;
    let mut notes = Vec::new();
    for n in [2, 3] {
        let rows = read_csv(&out.join(format!("gate_map_n{n}.csv")));
        ensure(rows.len() == 31 * 31, format!("mode {n}: {} rows", rows.len()))?;
        // (c) reconstruction identity on every unmasked row.
        let mut unmasked = 0;
        for r in rows.iter().filter(|r| r["mask"].is_empty()) {
            unmasked += 1;
            let (f, g1, tau, pp, ps) = (
                num(r, "fidelity").unwrap(),
                num(r, "gamma1_ev").unwrap(),
                num(r, "tau_fs").unwrap(),
                num(r, "p_containment").unwrap(),
                num(r, "p_success").unwrap(),
            );
            let rebuilt = f * (-2.0 * g1 / plasmon_core::units::HBAR * tau).exp() * pp;
            ensure(
                (rebuilt - ps).abs() <= 1e-12 * ps.abs().max(1e-300),
                format!("mode {n}: P_succ {ps} vs {rebuilt}"),
            )?;
        }
        // (a) F is constant along iso-(ħω_p/E_F) lines, i.e. along E_F·W = const.
        let mut by_product: HashMap<i64, Vec<(f64, f64)>> = HashMap::new();
        for r in rows.iter().filter(|r| r["mask"].is_empty()) {
            let w = num(r, "width_nm").unwrap();
            let ef = num(r, "fermi_energy_ev").unwrap();
            let key = (w * ef * 1e6).round() as i64;
            by_product.entry(key).or_default().push((num(r, "fidelity").unwrap(), num(r, "hw_p_over_ef").unwrap()));
        }
        let mut pairs = 0;
        let mut worst: f64 = 0.0;
        for group in by_product.values().filter(|g| g.len() > 1) {
            for p in &group[1..] {
                pairs += 1;
                worst = worst.max((p.0 - group[0].0).abs()).max(rel(p.1, group[0].1));
            }
        }
        ensure(pairs > 50 && worst < 1e-6, format!("mode {n}: {pairs} iso pairs, spread {worst:.2e}"))?;
        // (b) high-fidelity region for n = 2.
        let high = rows.iter().filter(|r| r["mask"].is_empty() && num(r, "fidelity").unwrap() > 0.9).count();
        if n == 2 {
            ensure(high > 0, "no unmasked point with F > 0.9 for n = 2")?;
        }
        notes.push(format!(
            "n={n}: {unmasked} unmasked, {high} with F > 0.9, iso spread {worst:.1e} over {pairs} pairs"
        ));
    }
    // (d) optimum versus Q.
    let opt = dir.join("opt");
    plasmon(&["optimize", "--out", opt.to_str().unwrap()])?;
    let rows = read_csv(&opt.join("optimize_n2.csv"));
    let ps: Vec<(f64, f64)> = rows.iter().map(|r| (num(r, "quality").unwrap(), num(r, "p_success").unwrap())).collect();
    ensure(ps.windows(2).all(|w| w[1].1 >= w[0].1), "P_succ* decreases along Q")?;
    let at = |q: f64| ps.iter().find(|p| p.0 == q).map(|p| p.1).unwrap();
    let ratio = at(1000.0) / at(150.0);
    ensure(ratio > 1.5, format!("P_succ*(1000)/P_succ*(150) = {ratio:.3}"))?;
    notes.push(format!("P_succ*(1000)/P_succ*(150) = {ratio:.2}"));
    Ok(notes.join("; "))
}

fn containment_limits() -> Outcome {
    let far = containment_probability(1e9, 1.0, 0.0).map_err(|e| e.to_string())?;
    ensure((far - 1.0).abs() < 1e-12, format!("P_p(L -> inf) = {far}"))?;
    let p = containment_probability(4.0, 1.0, 0.0).unwrap();
    ensure((p - libm_erf_one()).abs() <= 1e-12, format!("P_p(0, 4 sigma) = {p}"))?;
    let model = GateModel::new(100).map_err(|e| e.to_string())?;
    let base = GateInputs::new(20.0, 0.1, 2);
    let sigma = base.sigma();
    let at = |dl: f64| {
        evaluate_gate_point(&model, GateInputs { length: Some(sigma), delta_l: dl, ..base })
            .map_err(|e| e.to_string())
            .and_then(|p| p.p_succ.ok_or_else(|| format!("masked: {:?}", p.mask())))
    };
    let (p0, p1) = (at(0.0)?, at(0.1 * sigma)?);
    let change = rel(p1, p0);
    ensure(change < 0.01, format!("Delta L = 0.1 L changes P_succ by {:.3}%", 100.0 * change))?;
    Ok(format!(
        "P_p(0, 4 sigma) - erf(1) = {:.1e}; Delta L = 0.1 L changes P_succ by {:.3}%",
        p - libm_erf_one(),
        100.0 * change
    ))
}

fn libm_erf_one() -> f64 {
    plasmon_core::numerics::erf(1.0)
}

fn determinism(dir: &Path) -> Outcome {
    let a = dir.join("threads1");
    let b = dir.join("threads4");
    plasmon(&["gate-map", "--threads", "1", "--seedless", "--out", a.to_str().unwrap()])?;
    plasmon(&["gate-map", "--threads", "4", "--seedless", "--out", b.to_str().unwrap()])?;
    for n in [2, 3] {
        let name = format!("gate_map_n{n}.csv");
        let (x, y) = (std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
        ensure(x == y, format!("{name} differs between thread counts"))?;
    }
    Ok("gate-map CSVs byte-identical for 1 and 4 threads".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        (1, "plasma-frequency zero", Box::new(plasma_zero)),
        (2, "Drude absorption identity", Box::new(drude_identity)),
        (3, "reflection benchmark", Box::new(reflection_benchmark)),
        (4, "oracle equivalence", Box::new(oracle_equivalence)),
        (5, "identity suite", Box::new(identity_suite)),
        (6, "eigensolver convergence", Box::new(eigensolver_convergence)),
        (7, "dispersion structure", Box::new(dispersion_structure)),
        (8, "gate-map properties", Box::new(|| gate_map_properties(dir.path()))),
        (9, "containment and limits", Box::new(containment_limits)),
        (10, "determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("acceptance {id:>2} PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                println!("acceptance {id:>2} FAIL {name} ({secs:.1}s): {detail}");
                failed.push(*id);
            }
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} of {} criteria failed: {failed:?}", failed.len(), criteria.len());
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", criteria.len());
}
