//! `wpme` — scenario harness for weighted porous-medium / fast-diffusion
//! flows: runs gradient-bound, entropy and operator-identity checks and
//! writes deterministic CSV/JSON reports.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 the scenario or
//! invocation could not be evaluated.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wpme_core::report::{sweep_csv, RunReport};
use wpme_core::run::{identities, run_scenario, sweep, SweepAxis, DEFAULT_SEED};
use wpme_core::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "wpme",
    version,
    about = "Check harness for weighted porous-medium and fast-diffusion flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for CSV and JSON outputs (created if missing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for randomized initial data and identity fields.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario file.
    Run {
        /// Scenario TOML file.
        scenario: PathBuf,
    },
    /// Operator identity and convergence suites on seeded fields.
    Identities,
    /// Re-run a scenario while varying one parameter.
    Sweep {
        /// Base scenario TOML file.
        scenario: PathBuf,
        /// Parameter to vary: p, m or alpha.
        #[arg(long)]
        axis: String,
        /// Comma-separated list of values to visit.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn write_report_files(report: &RunReport, out: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    for (i, check) in report.checks.iter().enumerate() {
        if check.csv.is_empty() {
            continue;
        }
        std::fs::write(out.join(format!("{i:02}-{}.csv", check.id)), &check.csv)?;
    }
    std::fs::write(out.join("summary.json"), report.to_json())
}

fn execute(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Run { scenario } => {
            let sc = Scenario::load(scenario)?;
            let report = run_scenario(&sc, cli.seed)?;
            print!("{}", report.text_summary());
            if let Some(out) = &cli.out {
                write_report_files(&report, out)?;
            }
            Ok(report.pass)
        }
        Command::Identities => {
            let report = identities(cli.seed.unwrap_or(DEFAULT_SEED))?;
            print!("{}", report.text_summary());
            if let Some(out) = &cli.out {
                write_report_files(&report, out)?;
            }
            Ok(report.pass)
        }
        Command::Sweep {
            scenario,
            axis,
            values,
        } => {
            let sc = Scenario::load(scenario)?;
            let axis: SweepAxis = axis.parse()?;
            let report = sweep(&sc, axis, values, cli.seed)?;
            for row in &report.rows {
                match &row.check {
                    Some(id) => println!(
                        "{axis} = {:<8} {id:<20} {}  min margin {:+.6e}",
                        row.value,
                        if row.pass == Some(true) { "pass" } else { "FAIL" },
                        row.min_margin.unwrap_or(f64::NAN)
                    ),
                    None => println!("{axis} = {:<8} {}", row.value, row.note),
                }
            }
            println!(
                "sweep over {axis}: {}",
                if report.pass { "PASS" } else { "FAIL" }
            );
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out)?;
                std::fs::write(
                    out.join(format!("sweep-{axis}.csv")),
                    sweep_csv(&axis.to_string(), &report.rows),
                )?;
                for (value, point) in &report.reports {
                    write_report_files(point, &out.join(format!("{axis}-{value}")))?;
                }
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
