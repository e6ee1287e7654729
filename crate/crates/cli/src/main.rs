//! `vperc`: run experiment configs, the acceptance suites, and geometry dumps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vperc_core::experiment::{first_environment, run, verify, ConfigError, ExperimentConfig, RunError, Suite};
use vperc_core::geom::dump::ComplexDump;

#[derive(Parser)]
#[command(name = "vperc", version, about = "Critical planar Voronoi percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its JSON record and CSV.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the acceptance criteria; exit 4 when a hard gate fails.
    Verify {
        #[arg(long, default_value = "fast")]
        suite: String,
    },
    /// Print the Voronoi complex of the config's first environment as JSON.
    DumpComplex { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => report(load(&config).and_then(|c| {
            let record = run(&c)?;
            let (json, csv) = record.write(&out).map_err(|e| RunError::Io(e.to_string()))?;
            eprintln!("wrote {} and {}", json.display(), csv.display());
            println!("{}", serde_json::to_string_pretty(&record.summary).expect("summary serializes"));
            Ok(())
        })),
        Command::Verify { suite } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(message) => {
                    return report(Err(RunError::Config(ConfigError {
                        path: "--suite".into(),
                        message,
                    })))
                }
            };
            let workers = workers_override().unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let r = verify(suite, workers, |c| println!("{c}"));
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Command::DumpComplex { config } => report(load(&config).and_then(|c| {
            let cx = first_environment(&c)?;
            println!("{}", serde_json::to_string(&ComplexDump::new(&cx)).expect("dump serializes"));
            Ok(())
        })),
    }
}

fn workers_override() -> Option<usize> {
    std::env::var("VPERC_WORKERS").ok()?.parse().ok().filter(|&w| w > 0)
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(w) = workers_override() {
        config.workers = w;
    }
    Ok(config)
}

fn report(r: Result<(), RunError>) -> ExitCode {
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
