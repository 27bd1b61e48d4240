mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{EynardCheckArgs, FileConfig, KernelArgs, SimulateArgs, VerifyArgs};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SPACELIKE_OUT";

#[derive(Debug, Parser)]
#[command(name = "spacelike", version, about = "Space-like correlation kernels, exact simulators and verification suites")]
struct Cli {
    /// TOML file with per-command settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Falls back to the config file, then $SPACELIKE_OUT, then the working directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a correlation kernel on a grid of positions.
    Kernel(KernelArgs),
    /// Sample minor eigenvalues or interlaced particle configurations.
    Simulate(SimulateArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Compare kernel correlations of a weight spec file against enumeration.
    EynardCheck(EynardCheckArgs),
}

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<spacelike::Error> for Failure {
    fn from(e: spacelike::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

pub type CmdResult = Result<bool, Failure>;

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
}

fn run(cli: Cli) -> CmdResult {
    let file = load_config(cli.config.as_deref())?;
    let out = cli
        .out
        .or(file.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| Failure::Runtime(format!("cannot create output directory {}: {e}", out.display())))?;
    match cli.command {
        Command::Kernel(a) => commands::kernel(a.overlay(file.kernel), &out),
        Command::Simulate(a) => commands::simulate(a.overlay(file.simulate), &out),
        Command::Verify(a) => commands::verify(a.overlay(file.verify), &out),
        Command::EynardCheck(a) => commands::eynard_check(a.overlay(file.eynard_check), &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
