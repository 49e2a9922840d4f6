//! Command-line front end: configuration, pipelines and file emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, Outcome};
use config::{load_config, RunConfig};
use output::{FileDigest, RunManifest, UnitSystem};
use std::path::PathBuf;
use std::time::Instant;

/// Exit code for a run that finished but left every result masked.
pub const EXIT_EMPTY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "plasmon", version, about = "Graphene nanoribbon plasmon modes and two-plasmon gate maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Assert that no random number generator is consulted.
    #[arg(long, global = true)]
    pub seedless: bool,
    /// Override a configuration value, e.g. `--set geometry.width=25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Dispersion branches and group velocities.
    Modes,
    /// Absorption rates along the branches.
    Rates,
    /// Reflection and transmission at the configured operating point.
    Scatter {
        /// Also run the time-domain wavepacket comparison.
        #[arg(long)]
        oracle: bool,
    },
    /// Fidelity and success probability over the (E_F, W) sweep.
    GateMap,
    /// Optimal success probability versus quality factor.
    Optimize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Rates => "rates",
            Command::Scatter { .. } => "scatter",
            Command::GateMap => "gate-map",
            Command::Optimize => "optimize",
        }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Modes => commands::cmd_modes(cfg),
        Command::Rates => commands::cmd_rates(cfg),
        Command::Scatter { oracle } => commands::cmd_scatter(cfg, *oracle),
        Command::GateMap => commands::cmd_gate_map(cfg),
        Command::Optimize => commands::cmd_optimize(cfg),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, arguments: Vec<String>) -> i32 {
    let start = Instant::now();
    let (mut cfg, text) = match load_config(cli.config.as_deref(), &cli.overrides) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("plasmon: configuration error: {e}");
            return 2;
        }
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    let threads = match cli.threads {
        Some(0) => {
            eprintln!("plasmon: configuration error: --threads must be at least 1");
            return 2;
        }
        Some(n) => n,
        None => rayon::current_num_threads(),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("plasmon: cannot start worker threads: {e}");
            return 4;
        }
    };
    let result = pool.install(|| dispatch(&cli.command, &cfg));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("plasmon {}: {e}", cli.command.name());
            return e.exit_code();
        }
    };
    let outputs = match outcome.outputs.write() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("plasmon: cannot write to {}: {e}", outcome.outputs.directory().display());
            return 4;
        }
    };
    for note in &outcome.notes {
        eprintln!("plasmon {}: note: {note}", cli.command.name());
    }
    let exit_code = match &outcome.warning {
        Some(w) => {
            eprintln!("plasmon {}: warning: {w}", cli.command.name());
            EXIT_EMPTY
        }
        None => 0,
    };
    let mut inputs = Vec::new();
    if let (Some(path), Some(text)) = (&cli.config, &text) {
        inputs.push(FileDigest::of(path.display().to_string(), text.as_bytes()));
    }
    let sigma3 = match cfg.sigma3_model() {
        Ok((model, table)) => {
            if let Some((path, bytes)) = table {
                inputs.push(FileDigest::of(path.display().to_string(), &bytes));
            }
            model
        }
        Err(e) => {
            eprintln!("plasmon: configuration error: {e}");
            return 2;
        }
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        arguments,
        units: UnitSystem::default(),
        sigma3_kind: sigma3.kind().to_string(),
        sigma3_provenance: sigma3.provenance(),
        containment: cfg.gate.containment.clone(),
        pulse_convention: output::PULSE_CONVENTION,
        threads,
        rng_consulted: false,
        inputs,
        outputs,
        counters: outcome.counters,
        notes: outcome.notes,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        exit_code,
        config: cfg,
    };
    if let Err(e) = outcome.outputs.write_manifest(&manifest) {
        eprintln!("plasmon: cannot write manifest: {e}");
        return 4;
    }
    exit_code
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let arguments = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match Cli::try_parse_from(&args) {
        Ok(cli) => run(cli, arguments),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
