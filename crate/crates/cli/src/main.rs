//! `snnland`: evolve spiking landing controllers, fly them, and compare backends.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, CommandFactory, Parser, Subcommand, ValueEnum};

/// Worker threads for episode batches; defaults to all cores.
pub const THREADS_ENV: &str = "SNNLAND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "snnland", version, about = "Spiking neural landing-controller workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Reference,
    Loihi,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a controller and write the best genome, the evolution log and a manifest.
    Evolve(EvolveArgs),
    /// Fly closed-loop landings and write one trace CSV per run.
    Land(LandArgs),
    /// Replay landings through both backends and write the gap report.
    Compare(CompareArgs),
    /// Time single network steps on both backends.
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, clap::Args)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 200)]
    pub generations: usize,
    /// Population size; must be even and positive.
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.3)]
    pub p_mut: f64,
    /// Best-genome output file.
    #[arg(long, default_value = "best_genome.json")]
    pub out: PathBuf,
    /// Evolution log CSV; defaults to `<out stem>.log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Clone, Debug, clap::Args)]
pub struct LandArgs {
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendChoice::Reference)]
    pub backend: BackendChoice,
    #[arg(long, default_value_t = 4.0)]
    pub h0: f64,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disable divergence noise (lag and delay are still randomized).
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long, default_value = "land_out")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, clap::Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 4.0)]
    pub h0: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "compare_out")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, clap::Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: usize,
}

#[derive(Clone, Debug, clap::Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

fn usage_error(msg: String) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn validate(command: &Command) {
    match command {
        Command::Evolve(a) => {
            if a.pop == 0 || a.pop % 2 != 0 {
                usage_error(format!("--pop must be a positive even number, got {}", a.pop));
            }
            if !(0.0..=1.0).contains(&a.p_mut) {
                usage_error(format!("--p-mut must lie in [0, 1], got {}", a.p_mut));
            }
        }
        Command::Land(a) => {
            check_h0(a.h0);
            check_runs(a.runs);
        }
        Command::Compare(a) => {
            check_h0(a.h0);
            check_runs(a.runs);
        }
        Command::Bench(a) => {
            if a.steps == 0 {
                usage_error("--steps must be positive".into());
            }
        }
        Command::Replay(_) => {}
    }
}

fn check_h0(h0: f64) {
    if !(h0.is_finite() && h0 > snn_landing::env::LANDED_HEIGHT) {
        usage_error(format!(
            "--h0 must exceed the {} m landing height, got {h0}",
            snn_landing::env::LANDED_HEIGHT
        ));
    }
}

fn check_runs(runs: usize) {
    if runs == 0 {
        usage_error("--runs must be at least 1".into());
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(command: Command) -> Result<(), commands::CliError> {
    match command {
        Command::Evolve(a) => commands::evolve(&a),
        Command::Land(a) => commands::land(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Replay(a) => {
            let m = manifest::RunManifest::load(&a.manifest)?;
            let argv = std::iter::once("snnland".to_string()).chain(m.argv);
            let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
            if matches!(cli.command, Command::Replay(_)) {
                usage_error("a manifest cannot replay another replay".into());
            }
            validate(&cli.command);
            dispatch(cli.command)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    validate(&cli.command);
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
