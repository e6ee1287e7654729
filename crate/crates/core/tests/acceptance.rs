//! Acceptance criteria, one line each. `VPERC_SUITE=full` selects the full
//! budgets; `VPERC_WORKERS` sets the worker count.

use std::process::ExitCode;

use vperc_core::experiment::{verify, Suite};

fn main() -> ExitCode {
    let suite: Suite = match std::env::var("VPERC_SUITE") {
        Ok(s) => match s.parse() {
            Ok(s) => s,
            Err(e) => {
                eprintln!("VPERC_SUITE: {e}");
                return ExitCode::from(2);
            }
        },
        Err(_) => Suite::Fast,
    };
    let workers = std::env::var("VPERC_WORKERS")
        .ok()
        .and_then(|w| w.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    println!("acceptance suite {suite:?}, {workers} worker(s)");
    let report = verify(suite, workers, |c| println!("{c}"));
    if report.passed() {
        println!("acceptance: all hard gates passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: hard gate failure");
        ExitCode::FAILURE
    }
}
