//! `gilsim` command line: mesh export, scenario runs and parameter sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 mesh failure, 4 solver
//! non-convergence, 5 io error. Logging level via the `GILSIM_LOG`
//! environment variable (error, warn, info, debug).

use clap::{Args, Parser, Subcommand};
use gilsim::config::{default_config, Config};
use gilsim::runner::{cmd_mesh, cmd_run, cmd_sweep, resolve_out};
use gilsim::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gilsim", version, about = "Axisymmetric HVDC GIL electro-quasistatic field simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: ./gilsim_out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel workers for sweep points.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Uniform mesh refinement factor (> 0; 2 halves every element size).
    #[arg(long, default_value_t = 1.0)]
    refine: f64,
    /// Print the shipped default configuration to stdout and exit.
    #[arg(long)]
    print_default_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build and export the mesh only.
    Mesh(Common),
    /// Run the configured scenario and write all artifacts.
    Run(Common),
    /// Sweep a numeric config parameter over a list of values.
    Sweep(Common),
}

fn load(common: &Common) -> Result<(Config, String, String), CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required (or use --print-default-config)".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = Config::from_str(&text)?;
    Ok((config, text, path.display().to_string()))
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let common = match command {
        Command::Mesh(c) | Command::Run(c) | Command::Sweep(c) => c,
    };
    if common.print_default_config {
        let text = serde_json::to_string_pretty(&default_config())
            .map_err(|e| CliError::Io(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let (config, text, path) = load(common)?;
    let out = resolve_out(common.out.clone());
    match command {
        Command::Mesh(_) => cmd_mesh(&config, &out, common.refine),
        Command::Run(_) => cmd_run(&config, &text, &path, &out, common.refine).map(|_| ()),
        Command::Sweep(_) => cmd_sweep(&config, &out, common.refine, common.jobs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GILSIM_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gilsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
