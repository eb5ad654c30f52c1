use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irs_cli::{oracle_check, parse_config, run_experiment, with_threads, CliError};
use irs_core::parallel::Execution;

#[derive(Parser)]
#[command(
    name = "irs-sim",
    version,
    about = "Monte-Carlo runner for IRS-assisted link designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep point, trial and variant of a config and write CSV.
    Run {
        config: PathBuf,
        /// Output path; overrides the config's `output` (default results.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        threads: Option<usize>,
        /// Master seed; overrides `mc.master_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare branch-and-bound with exhaustive enumeration on every SWIPT
    /// instance of a config. Exits with 3 on any mismatch.
    OracleCheck {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => {
            let mut spec = parse_config(&config)?;
            if let Some(s) = seed {
                spec.mc.master_seed = s;
            }
            let path = out
                .or_else(|| spec.output.clone())
                .unwrap_or_else(|| "results.csv".into());
            let table = with_threads(threads, || run_experiment(&spec, Execution::Auto))??;
            table.write_csv(&path)?;
            let failed = table.rows.iter().filter(|r| r.objective.is_nan()).count();
            eprintln!(
                "wrote {} rows to {} ({failed} solver errors)",
                table.rows.len(),
                path.display()
            );
            Ok(())
        }
        Command::OracleCheck { config, threads } => {
            let spec = parse_config(&config)?;
            let report = with_threads(threads, || oracle_check(&spec, Execution::Auto))??;
            for c in &report.cases {
                println!(
                    "point {} trial {} {}N={} M={}: exhaustive {:.9e} bnb {:.9e} nodes {}/{} evaluations {}/{} {}",
                    c.sweep_index,
                    c.trial,
                    c.variant.as_ref().map_or(String::new(), |v| format!("{v} ")),
                    c.tiles,
                    c.modes,
                    c.exhaustive,
                    c.bnb,
                    c.bnb_nodes,
                    c.tree_nodes,
                    c.bnb_evaluations,
                    c.enumerated,
                    if c.passes() { "ok" } else { "MISMATCH" }
                );
            }
            let bad = report.failures().len();
            if bad > 0 {
                return Err(CliError::Mismatch(format!("{bad} of {} instances", report.cases.len())));
            }
            println!("all {} instances agree", report.cases.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irs-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
