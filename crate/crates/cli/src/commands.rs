//! The five pipelines behind the `plasmon` subcommands.

use crate::config::{ConfigError, RunConfig};
use crate::output::{Cell, OutputSet, Table};
use plasmon_core::conductivity::plasma_frequency;
use plasmon_core::dispersion::DispersionSolver;
use plasmon_core::gate::{optimize_q_curve, sweep_map, GatePoint};
use plasmon_core::rates::{gamma1_from_q, gamma1_intrinsic, gamma2_with_model, normalized_gamma2};
use plasmon_core::scattering::oracle::{extrapolated_oracle, OracleGrid};
use plasmon_core::scattering::{
    amplitudes, averaged_probabilities, coefficient_table, fidelity, GaussianPulse, ScatterParams,
};
use plasmon_core::{Error, LinearModel, Material, RibbonGrid};
use std::collections::BTreeMap;
use std::fmt;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Physics(Error),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Numeric(_) | CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Physics(e) => write!(f, "infeasible operating point: {e}"),
            CliError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoSolution { .. }
            | Error::NonAdmissible { .. }
            | Error::InsufficientModes { .. }
            | Error::InvalidNormalization { .. } => CliError::Physics(e),
            _ => CliError::Numeric(e),
        }
    }
}

/// Files and bookkeeping produced by one command.
#[derive(Debug)]
pub struct Outcome {
    pub outputs: OutputSet,
    pub counters: BTreeMap<String, u64>,
    pub notes: Vec<String>,
    /// Set when the run completed but produced nothing usable.
    pub warning: Option<String>,
}

impl Outcome {
    fn new(cfg: &RunConfig) -> Self {
        Outcome {
            outputs: OutputSet::new(cfg.output.directory.clone()),
            counters: BTreeMap::new(),
            notes: Vec::new(),
            warning: None,
        }
    }

    fn count(&mut self, key: &str, by: u64) {
        *self.counters.entry(key.to_string()).or_insert(0) += by;
    }
}

fn solver(cfg: &RunConfig, width: f64, modes: usize) -> Result<DispersionSolver, CliError> {
    let grid = RibbonGrid::solid(cfg.grid.points, width)?;
    Ok(DispersionSolver::new(&grid, cfg.material()?).with_model(cfg.linear_model()).with_mode_count(modes))
}

fn kw_samples(cfg: &RunConfig) -> Vec<f64> {
    let (a, b, n) = (cfg.mode.kw_min, cfg.mode.kw_max, cfg.mode.samples);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Dispersion branches n = 1..n_max and their group velocities.
pub fn cmd_modes(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(cfg);
    let width = cfg.geometry.width;
    let material = cfg.material()?;
    let solver = solver(cfg, width, cfg.mode.n_max)?;
    let plasma = plasma_frequency(&material)?;
    let mut velocity = Table::new(
        "group_velocity",
        &["n", "k_nm_inv", "kw", "v_g_solved_nm_fs", "v_g_sampled_nm_fs", "v_g_quadratic_nm_fs"],
    );
    for n in 1..=cfg.mode.n_max {
        let branch = solver.trace_branch(n, cfg.mode.kw_min / width, cfg.mode.kw_max / width, cfg.mode.samples)?;
        let mut table = Table::new("branch", &["n", "k_nm_inv", "kw", "hw_ev", "hw_over_ef", "landau", "above_phonon"]);
        for ((&k, &hw), flags) in branch.k_grid.iter().zip(&branch.omega).zip(&branch.flags) {
            table.push(vec![
                n.into(),
                k.into(),
                (k * width).into(),
                hw.into(),
                (hw / material.fermi_energy).into(),
                flags.landau().into(),
                flags.above_phonon.into(),
            ]);
        }
        out.count("branch_points", table.rows() as u64);
        if let Some(i) = branch.termination {
            out.notes.push(format!("branch {n} is cut off at kW = {:.6}", kw_samples(cfg)[i]));
            out.count("cut_off_branches", 1);
        }
        if !branch.is_monotone() {
            let worst = branch.omega.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            out.notes.push(format!("branch {n} is not monotone in k (largest decrease {worst:.3e} eV)"));
            out.count("non_monotone_branches", 1);
        }
        if branch.omega.iter().any(|&hw| hw >= plasma) {
            out.notes.push(format!("branch {n} reaches the plasma energy {plasma:.6} eV"));
        }
        let reference = solver.local_expansion(n, cfg.mode.kw / width).ok();
        let sampled = branch.sampled_group_velocity();
        for (i, &k) in branch.k_grid.iter().enumerate() {
            let solved = solver.local_expansion(n, k).ok().map(|le| le.v_g);
            velocity.push(vec![
                n.into(),
                k.into(),
                (k * width).into(),
                solved.into(),
                sampled[i].into(),
                reference.map(|le| le.group_velocity_at(k)).into(),
            ]);
        }
        out.outputs.add_table(&format!("branch_n{n}.csv"), &table);
    }
    out.outputs.add_table("group_velocity.csv", &velocity);
    out.notes.push(format!("plasma energy {plasma:.10} eV"));
    Ok(out)
}

/// Single-plasmon rate diagnostic and two-plasmon strength along each branch.
pub fn cmd_rates(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(cfg);
    let material = cfg.material()?;
    let ef = material.fermi_energy;
    let mut g1 =
        Table::new("rates_gamma1", &["hw_ev", "hw_over_ef", "gamma1_drude_ev", "gamma1_lrpa_ev", "gamma1_q_ev"]);
    let r = &cfg.rates;
    for i in 0..r.samples {
        let x = r.omega_min + (r.omega_max - r.omega_min) * i as f64 / (r.samples - 1) as f64;
        let hw = x * ef;
        g1.push(vec![
            hw.into(),
            x.into(),
            gamma1_intrinsic(hw, &material, LinearModel::Drude).ok().into(),
            gamma1_intrinsic(hw, &material, LinearModel::Lrpa).ok().into(),
            gamma1_from_q(hw, cfg.quality.q).ok().into(),
        ]);
    }
    out.outputs.add_table("rates_gamma1.csv", &g1);

    let width = cfg.geometry.width;
    let solver = solver(cfg, width, cfg.mode.n_max)?;
    let (sigma3, _) = cfg.sigma3_model()?;
    let mut g2 = Table::new(
        "rates_gamma2",
        &[
            "n",
            "kw",
            "k_nm_inv",
            "hw_ev",
            "xi1_nm",
            "xi3_nm",
            "gamma2_nm_fs",
            "gamma2_normalized",
            "lambda_a_nm",
            "sigma3_out_of_range",
        ],
    );
    for n in 1..=cfg.mode.n_max {
        for kw in kw_samples(cfg) {
            let k = kw / width;
            let Ok(hw) = solver.solve_omega(n, k) else {
                out.count("rates_unsolved", 1);
                continue;
            };
            let modes = solver.modes(k)?;
            let (xi1, xi3) = modes.xi(n)?;
            let rate = gamma2_with_model(&modes, n, hw, &material, &sigma3, cfg.linear_model()).ok();
            let lambda_a = match (rate, solver.local_expansion(n, k)) {
                (Some((g, _)), Ok(le)) if !le.negative_mass => {
                    ScatterParams::from_expansion(&le, g).ok().map(|s| s.lambda_a)
                }
                _ => None,
            };
            g2.push(vec![
                n.into(),
                kw.into(),
                k.into(),
                hw.into(),
                xi1.into(),
                xi3.into(),
                rate.map(|r| r.0).into(),
                rate.map(|r| normalized_gamma2(r.0, k, &material)).into(),
                lambda_a.into(),
                rate.is_some_and(|r| r.1).into(),
            ]);
        }
    }
    out.count("gamma2_rows", g2.rows() as u64);
    out.outputs.add_table("rates_gamma2.csv", &g2);
    Ok(out)
}

/// Contact-interaction parameters at the configured operating point.
pub fn scatter_params(cfg: &RunConfig) -> Result<ScatterParams, CliError> {
    let width = cfg.geometry.width;
    let n = cfg.mode.n;
    let solver = solver(cfg, width, n.max(3))?;
    let k_p = cfg.mode.kw / width;
    let le = solver.local_expansion(n, k_p)?;
    if le.negative_mass {
        return Err(CliError::Physics(Error::NonAdmissible { k: k_p }));
    }
    if let Some(ratio) = cfg.scatter.ratio {
        return Ok(ScatterParams::with_ratio(k_p, le.mass, ratio)?);
    }
    let g2 = match cfg.scatter.gamma2 {
        Some(g) => g,
        None => {
            let (sigma3, _) = cfg.sigma3_model()?;
            let modes = solver.modes(k_p)?;
            gamma2_with_model(&modes, n, le.omega_p, &cfg.material()?, &sigma3, cfg.linear_model())?.0
        }
    };
    Ok(ScatterParams::from_expansion(&le, g2)?)
}

/// Coefficient table over the pulse support and a fidelity summary.
pub fn cmd_scatter(cfg: &RunConfig, oracle: bool) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(cfg);
    let sp = scatter_params(cfg)?;
    if sp.gamma2 > 0.0 && !(sp.denominator(sp.k_p) >= 0.0) {
        return Err(CliError::Physics(Error::NonAdmissible { k: sp.k_p }));
    }
    let pulse = GaussianPulse::for_ribbon(cfg.geometry.width, cfg.mode.kw, cfg.pulse.bandwidth)?;
    let mut table =
        Table::new("scatter_coefficients", &["k_nm_inv", "r", "t", "reflectance", "transmittance", "admissible"]);
    for a in coefficient_table(&pulse, &sp, cfg.scatter.samples) {
        table.push(vec![
            a.k.into(),
            a.r.into(),
            a.t.into(),
            a.reflectance().into(),
            a.transmittance().into(),
            a.admissible.into(),
        ]);
        if !a.admissible {
            out.count("flagged_samples", 1);
        }
    }
    out.outputs.add_table("scatter_coefficients.csv", &table);

    let centre = amplitudes(sp.k_p, &sp);
    let fid = fidelity(&pulse, &sp)?;
    let (r_avg, t_avg) = averaged_probabilities(&pulse, &sp)?;
    let (r_num, t_num, phase) = if oracle {
        let lp = sp.lambda_p;
        let narrow = GaussianPulse::new(sp.k_p, cfg.scatter.oracle_sigma * lp)?;
        let grid = OracleGrid {
            points_per_wavelength: cfg.scatter.oracle_points_per_wavelength,
            steps_per_period: cfg.scatter.oracle_steps_per_period,
            ..OracleGrid::default()
        };
        let res = extrapolated_oracle(&sp, &narrow, cfg.scatter.oracle_width * lp, grid)?;
        if sp.v_bar != 0.0 {
            out.notes.push(format!(
                "v_bar = {:.6e} nm/fs is nonzero; the wavepacket equation then reflects with -g/(g + 2 hbar k/m + 2 v_bar)",
                sp.v_bar
            ));
        }
        out.count("oracle_runs", 2);
        (Some(res.reflected), Some(res.transmitted), Some(res.reflected_phase))
    } else {
        (None, None, None)
    };
    let mut summary = Table::new(
        "scatter_summary",
        &[
            "k_p_nm_inv",
            "lambda_p_nm",
            "v_g_nm_fs",
            "v_bar_nm_fs",
            "mass_ev_fs2_nm2",
            "gamma2_nm_fs",
            "lambda_a_nm",
            "lambda_p_over_lambda_a",
            "r",
            "t",
            "reflectance",
            "transmittance",
            "reflectance_avg",
            "transmittance_avg",
            "fidelity",
            "flagged_weight",
            "reflectance_num",
            "transmittance_num",
            "reflected_phase_rad",
        ],
    );
    summary.push(vec![
        sp.k_p.into(),
        sp.lambda_p.into(),
        sp.v_g.into(),
        sp.v_bar.into(),
        sp.mass.into(),
        sp.gamma2.into(),
        sp.lambda_a.into(),
        sp.ratio().into(),
        centre.r.into(),
        centre.t.into(),
        centre.reflectance().into(),
        centre.transmittance().into(),
        r_avg.into(),
        t_avg.into(),
        fid.value.into(),
        fid.flagged_weight.into(),
        r_num.into(),
        t_num.into(),
        phase.into(),
    ]);
    out.outputs.add_table("scatter_summary.csv", &summary);
    Ok(out)
}

fn gate_table(points: &[GatePoint], material: &Material) -> Table {
    let mut t = Table::new(
        "gate_map",
        &[
            "width_nm",
            "fermi_energy_ev",
            "mode",
            "kw",
            "hw_p_ev",
            "hw_p_over_ef",
            "v_g_nm_fs",
            "mass_ev_fs2_nm2",
            "v_bar_nm_fs",
            "gamma2_nm_fs",
            "lambda_a_nm",
            "sigma_nm",
            "fidelity",
            "flagged_weight",
            "gamma1_ev",
            "length_nm",
            "tau_fs",
            "p_containment",
            "p_success",
            "unimodal",
            "landau",
            "phonon",
            "negative_mass",
            "non_admissible",
            "sigma3_out_of_range",
            "fermi_length_nm",
            "mask",
        ],
    );
    for p in points {
        let c = &p.core;
        let le = c.expansion;
        t.push(vec![
            c.inputs.width.into(),
            c.inputs.fermi_energy.into(),
            c.inputs.mode.into(),
            c.inputs.kw.into(),
            le.map(|e| e.omega_p).into(),
            le.map(|e| e.omega_p / c.inputs.fermi_energy).into(),
            le.map(|e| e.v_g).into(),
            le.map(|e| e.mass).into(),
            le.map(|e| e.v_bar).into(),
            c.gamma2.into(),
            c.lambda_a.into(),
            c.sigma.into(),
            c.fidelity.into(),
            c.flagged_weight.into(),
            p.gamma1.into(),
            p.length.into(),
            p.tau.into(),
            p.p_p.into(),
            p.p_succ.into(),
            match p.unimodal {
                Some(u) => Cell::Bool(u),
                None => Cell::Text(String::new()),
            },
            c.flags.landau.into(),
            c.flags.phonon.into(),
            c.flags.negative_mass.into(),
            c.flags.non_admissible.into(),
            c.sigma3_out_of_range.into(),
            p.fermi_length(material).into(),
            c.mask.map(|m| m.code()).unwrap_or("").into(),
        ]);
    }
    t
}

/// Fidelity and success-probability map over the (E_F, W) sweep.
pub fn cmd_gate_map(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(cfg);
    let model = cfg.gate_model()?;
    let mut unmasked = 0u64;
    for &n in &cfg.sweep.modes {
        let grid = cfg.sweep_grid(n)?;
        let points = sweep_map(&model, &grid)?;
        for p in &points {
            match p.mask() {
                Some(m) => out.count(&format!("mask_{}", m.code()), 1),
                None => unmasked += 1,
            }
            if p.unimodal == Some(false) {
                out.count("non_unimodal_length_scans", 1);
            }
        }
        out.count("rows", points.len() as u64);
        out.outputs.add_table(&format!("gate_map_n{n}.csv"), &gate_table(&points, &model.material));
    }
    out.count("unmasked", unmasked);
    if unmasked == 0 {
        out.warning = Some("every grid point is masked".into());
    }
    Ok(out)
}

/// Optimal success probability as a function of the quality factor.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(cfg);
    let q = &cfg.quality.q_list;
    if q.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Config(ConfigError {
            field: "quality.q_list".into(),
            message: "must be strictly increasing".into(),
        }));
    }
    let model = cfg.gate_model()?;
    let widths = cfg.width_range()?;
    for &n in &cfg.sweep.modes {
        let curve = optimize_q_curve(&model, q, cfg.material.fermi_energy, n, widths, cfg.gate_inputs(n))?;
        let mut t = Table::new(
            "optimize",
            &["quality", "p_success", "width_nm", "length_nm", "length_over_sigma", "fidelity", "status"],
        );
        for o in &curve.optima {
            t.push(vec![
                o.quality.into(),
                o.p_succ.into(),
                o.width.into(),
                o.length.into(),
                o.length_over_sigma().into(),
                o.fidelity.into(),
                if o.p_succ.is_some() { "ok" } else { "infeasible" }.into(),
            ]);
            if o.p_succ.is_none() {
                out.count("infeasible_quality_factors", 1);
            }
        }
        if !curve.monotone {
            out.notes.push(format!("mode {n}: optimal success probability decreases somewhere along Q"));
        }
        out.outputs.add_table(&format!("optimize_n{n}.csv"), &t);
    }
    Ok(out)
}
