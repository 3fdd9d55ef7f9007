//! `nav` — scenario-driven runs of the potential-field / wall-following
//! planner with CSV and SVG output.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use nav_cli::commands;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "nav",
    version,
    about = "Deterministic 2D navigation runs: potential fields, wall following, and their supervisor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under one policy
    Simulate {
        /// Scenario: a file path, a name under $NAV_SCENARIO_DIR, or a bundled name
        scenario: String,
        /// Arbitration policy: full, memoryless, wfm-memory, or apf-only
        #[arg(long)]
        policy: String,
        /// Seed for the sensor-noise stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trajectory CSV here
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Write an SVG plot here
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Override a scenario parameter by dotted path, e.g. apf.rho=0.25
        #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
        sets: Vec<String>,
    },
    /// Run several policies on one scenario and tabulate the results
    Compare {
        /// Scenario: a file path, a name under $NAV_SCENARIO_DIR, or a bundled name
        scenario: String,
        /// Comma-separated policies (at least two)
        #[arg(long, value_delimiter = ',', value_name = "POLICY,...")]
        policies: Vec<String>,
        /// Seed for the sensor-noise stream
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the comparison table and overlay plot
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
        /// Override a scenario parameter by dotted path, e.g. apf.rho=0.25
        #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
        sets: Vec<String>,
    },
    /// Parse a scenario and check every invariant without running it
    Validate {
        /// Scenario: a file path, a name under $NAV_SCENARIO_DIR, or a bundled name
        scenario: String,
    },
    /// List the bundled scenarios
    ListScenarios,
}

fn main() {
    // A bad command line is a configuration error (exit 1); clap's default
    // exit code for usage errors collides with the "step budget exhausted"
    // run outcome, so parse manually.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let code = match cli.command {
        Command::Simulate {
            scenario,
            policy,
            seed,
            csv,
            svg,
            sets,
        } => commands::cmd_simulate(
            &scenario,
            &policy,
            seed,
            csv.as_deref(),
            svg.as_deref(),
            &sets,
        ),
        Command::Compare {
            scenario,
            policies,
            seed,
            out_dir,
            sets,
        } => commands::cmd_compare(&scenario, &policies, seed, &out_dir, &sets),
        Command::Validate { scenario } => commands::cmd_validate(&scenario),
        Command::ListScenarios => commands::cmd_list_scenarios(),
    };
    std::process::exit(code);
}
