//! Command-line front end: configuration, engine dispatch, run manifests and
//! cross-engine comparison reports.
//!
//! Precedence: command-line flags override fields of the `--config`
//! document, which override built-in defaults. A run manifest can be passed
//! as `--config` to repeat that run.

pub mod compare;
pub mod config;
pub mod error;
pub mod manifest;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use compare::{compare_report, overlay_svg, CompareReport, CompareTolerances};
pub use config::{Engine, ExperimentConfig, Overrides, RatesSource};
pub use error::{exit, CliError, CliResult};
pub use manifest::{OutputRecord, RunManifest, MANIFEST_FILE};
pub use run::run;

#[derive(Debug, Parser)]
#[command(name = "crsos", version, about = "Conserved restricted solid-on-solid surface engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every configuration of the (n, K) state space.
    Enumerate(Flags),
    /// Integrate the forward equation over the full state space.
    Exact(Flags),
    /// Kinetic Monte Carlo ensemble.
    Kmc(Flags),
    /// Factorized one-site dynamics.
    Meanfield(Flags),
    /// Geometric stationary law of the factorized dynamics.
    Stationary(Flags),
    /// Self-similar profile checks and exponent report.
    Selfsim(Flags),
    /// Exact, KMC and mean-field one-site laws side by side.
    Compare(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON experiment config, or a run manifest to repeat.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// JSON rate table file.
    #[arg(long)]
    rates: Option<PathBuf>,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    /// Number of particles.
    #[arg(long)]
    k: Option<u64>,
}

impl Command {
    fn split(self) -> (Engine, Flags) {
        match self {
            Command::Enumerate(f) => (Engine::Enumerate, f),
            Command::Exact(f) => (Engine::Exact, f),
            Command::Kmc(f) => (Engine::Kmc, f),
            Command::Meanfield(f) => (Engine::Meanfield, f),
            Command::Stationary(f) => (Engine::Stationary, f),
            Command::Selfsim(f) => (Engine::Selfsim, f),
            Command::Compare(f) => (Engine::Compare, f),
        }
    }
}

fn execute(engine: Engine, flags: Flags) -> CliResult<RunManifest> {
    let mut config = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        seed: flags.seed,
        out: flags.out,
        replicas: flags.replicas,
        t_end: flags.t_end,
        rates: flags.rates,
    });
    if flags.n.is_some() {
        config.n = flags.n;
    }
    if flags.k.is_some() {
        config.k = flags.k;
    }
    let manifest = run(engine, config)?;
    if manifest.summary.get("pass") == Some(&serde_json::Value::Bool(false)) {
        let s = &manifest.summary;
        return Err(CliError::Tolerance {
            tv: s["tv_exact_kmc"].as_f64().unwrap_or(f64::NAN),
            tolerance: s["tolerances"]["kmc"].as_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(manifest)
}

/// Parses `args`, runs the engine and returns the process exit status.
/// Diagnostics go to stderr; the manifest path goes to stdout.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    let (engine, flags) = cli.command.split();
    match execute(engine, flags) {
        Ok(m) => {
            println!("{}", m.config.out.join(MANIFEST_FILE).display());
            exit::OK
        }
        Err(e) => {
            eprintln!("crsos {engine}: {e}");
            e.exit_code()
        }
    }
}
