//! `ghostbound`: command-line driver for the verification, Ehrenfest, grid
//! and spectrum pipelines.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ehrenfest, evolve, scan, spectrum, verify};

pub const SUBCOMMANDS: &[&str] = &["verify", "ehrenfest", "evolve", "scan", "spectrum"];

#[derive(Debug, Parser)]
#[command(name = "ghostbound", version, about = "Ghost-coupled oscillator laboratory")]
struct Cli {
    /// TOML file with parameters; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Where outputs and the run manifest go (falls back to $GHOSTBOUND_OUTPUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random-sweep checks of the commutator coefficient functions and the Poisson bracket.
    Verify(verify::Flags),
    /// RK4 orbit with conservation monitors.
    Ehrenfest(ehrenfest::Flags),
    /// Wavepacket evolution with moment-bound monitors.
    Evolve(evolve::Flags),
    /// Coupling scan of the maximal wavepacket extent.
    Scan(scan::Flags),
    /// Fock-basis diagonalization and spacing statistics.
    Spectrum(spectrum::Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Ehrenfest(_) => "ehrenfest",
            Command::Evolve(_) => "evolve",
            Command::Scan(_) => "scan",
            Command::Spectrum(_) => "spectrum",
        }
    }
}

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, config or parameters: exit status 2.
    Usage(String),
    Runtime(String),
    Core(ghostbound::Error),
}

impl AppError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        AppError::Runtime(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) | AppError::Core(ghostbound::Error::Precondition(_)) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Runtime(m) => write!(f, "error: {m}"),
            AppError::Core(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<ghostbound::Error> for AppError {
    fn from(e: ghostbound::Error) -> Self {
        AppError::Core(e)
    }
}

/// Resolved settings shared by every subcommand.
pub struct Context {
    pub output_dir: PathBuf,
    pub threads: usize,
    pub preset: Option<String>,
    pub file_section: toml::Table,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version print to stdout and succeed
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more invariant checks failed; see the manifest");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<bool, AppError> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(path) => config::FileConfig::load(path, name)?,
        None => config::FileConfig::default(),
    };
    let threads = cli
        .threads
        .map(|t| t as usize)
        .or(file.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AppError::Runtime(format!("thread pool: {e}")))?;

    let output_dir = config::output_dir(cli.output_dir, file.output_dir);
    std::fs::create_dir_all(&output_dir).map_err(|e| AppError::io(&output_dir, e))?;
    let preset_flag = match &cli.command {
        Command::Verify(f) => f.preset.clone(),
        Command::Ehrenfest(f) => f.preset.clone(),
        Command::Evolve(f) => f.preset.clone(),
        Command::Scan(f) => f.preset.clone(),
        Command::Spectrum(f) => f.preset.clone(),
    };
    let ctx = Context { output_dir, threads, preset: preset_flag.or(file.preset), file_section: file.section };

    match cli.command {
        Command::Verify(flags) => verify::run(&ctx, &flags),
        Command::Ehrenfest(flags) => ehrenfest::run(&ctx, &flags),
        Command::Evolve(flags) => evolve::run(&ctx, &flags),
        Command::Scan(flags) => scan::run(&ctx, &flags),
        Command::Spectrum(flags) => spectrum::run(&ctx, &flags),
    }
}
