//! `spinfront` command-line runner.
//!
//! Exit status: 0 when every assertion of the scenario holds, 2 when one
//! fails or the numerics abort (see `failures.json`), 1 for configuration
//! errors, in which case nothing is written.

mod artifacts;
mod config;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::artifacts::Run;
use crate::config::{Overrides, ScenarioName};
use crate::scenarios::Abort;

#[derive(Parser)]
#[command(
    name = "spinfront",
    version,
    about = "Scenario runner for spin-front experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        /// Grid points per axis (odd).
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scenario names.
    List,
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for failed assertions
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::List => {
            for name in ScenarioName::ALL {
                println!("{:<18} {}", name.as_str(), name.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            epsilon,
            grid_n,
            delta,
            out,
        } => {
            let overrides = Overrides {
                epsilon,
                grid_n,
                delta,
                out,
            };
            run(&config, &overrides)
        }
    }
}

fn run(path: &std::path::Path, overrides: &Overrides) -> ExitCode {
    let scenario = match config::load(path, overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut out = match Run::create(&scenario.output_dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cannot create {}: {e}", scenario.output_dir.display());
            return ExitCode::from(1);
        }
    };

    let error = match scenarios::run(&scenario, &mut out) {
        Ok(()) => None,
        Err(Abort::Numeric(e)) => Some(e.to_string()),
        Err(Abort::Io(e)) => Some(format!("i/o: {e}")),
    };
    let failed = error.is_some() || out.failures().next().is_some();

    let written = out.write_summary().and_then(|_| {
        if failed {
            out.write_failures(&scenario, error.as_deref())?;
        }
        out.write_manifest(&scenario)
    });
    if let Err(e) = written {
        eprintln!("cannot write artifacts: {e}");
        return ExitCode::from(2);
    }

    for row in out.rows() {
        let verdict = match row.verdict {
            artifacts::Verdict::Pass => "pass",
            artifacts::Verdict::Fail => "FAIL",
            artifacts::Verdict::Record => "    ",
        };
        println!(
            "{verdict}  {:<44} {:<24e} {}",
            row.name, row.measured, row.bound
        );
    }
    if let Some(e) = &error {
        eprintln!("aborted: {e}");
    }
    if failed {
        eprintln!(
            "{}: FAIL, see {}",
            scenario.name.as_str(),
            scenario.output_dir.join("failures.json").display()
        );
        ExitCode::from(2)
    } else {
        println!("{}: PASS", scenario.name.as_str());
        ExitCode::SUCCESS
    }
}
