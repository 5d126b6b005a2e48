use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use lambda_phase::config::{preset, RunConfig, PRESET_NAMES};
use lambda_phase::scenario::{run_scenario, write_csv_file, write_svg_file};
use lambda_phase::verify::{self, Suite};

const THREADS_VAR: &str = "LAMBDA_PHASE_THREADS";

/// Relative-phase dynamics of a three-level Λ atom in two quantized modes.
#[derive(Parser)]
#[command(name = "lambda-phase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario over its τ grid and write CSV (and optionally SVG).
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Simulate {
        /// JSON run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in scenario.
        #[arg(long, value_parser = PRESET_NAMES)]
        preset: Option<String>,
        /// CSV destination; overrides the config. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG plot destination; overrides the config.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run invariant checks and print their residuals.
    Verify {
        #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn simulate(config: Option<PathBuf>, preset_name: Option<String>, out: Option<PathBuf>, svg: Option<PathBuf>) -> lambda_phase::Result<()> {
    let mut cfg = match (config, preset_name) {
        (Some(path), _) => RunConfig::from_file(&path)?,
        (None, Some(name)) => preset(&name)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    if out.is_some() {
        cfg.csv = out;
    }
    if svg.is_some() {
        cfg.svg = svg;
    }
    let series = run_scenario(&cfg)?;
    match &cfg.csv {
        Some(path) => write_csv_file(&series, path)?,
        None => series
            .write_csv(io::stdout().lock())
            .map_err(|source| lambda_phase::Error::Io { path: PathBuf::from("<stdout>"), source })?,
    }
    if let Some(path) = &cfg.svg {
        write_svg_file(&series, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Simulate { config, preset, out, svg } => match simulate(config, preset, out, svg) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Verify { suite } => {
            let result = suite.parse::<Suite>().and_then(verify::run);
            match result {
                Ok(report) => {
                    println!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
