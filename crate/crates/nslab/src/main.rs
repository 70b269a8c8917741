use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use nslab::{run_experiment, write_report, ExperimentConfig, RuleStatus, Scenario};

/// Numerical laboratory for the weak-L^p solution theory of incompressible
/// flow on a periodic box. Runs one scenario from a JSON config and writes a
/// deterministic report plus series CSVs.
#[derive(Parser)]
#[command(name = "nslab", version, about)]
struct Cli {
    /// Scenario to run; must match the `scenario` field of the config.
    scenario: Scenario,
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and series CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed (and any datum seed derived from it).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<bool, nslab::LabError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| nslab::LabError::io(cli.config.display().to_string(), e))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if config.scenario != cli.scenario {
        return Err(nslab::LabError::Config(format!(
            "config declares scenario '{}', command line asked for '{}'",
            config.scenario, cli.scenario
        )));
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.datum.seed = None;
    }
    let start = Instant::now();
    let mut report = run_experiment(&config)?;
    report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    let paths = write_report(&report, &cli.out)?;
    for rule in &report.rules {
        let verdict = match rule.status {
            RuleStatus::Pass => "pass",
            RuleStatus::Fail => "FAIL",
            RuleStatus::Degenerate => "degenerate",
            RuleStatus::Diagnostic => "diagnostic",
        };
        match rule.measured {
            Some(m) => println!("[{verdict}] {} (measured {m:.6e})", rule.rule),
            None => println!("[{verdict}] {}", rule.rule),
        }
    }
    eprintln!(
        "{}: {} artifacts in {} ({:.2}s)",
        config.scenario,
        paths.len(),
        cli.out.display(),
        report.wall_clock_seconds.unwrap_or(0.0)
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
