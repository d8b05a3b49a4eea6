//! Command-line front end for the line structure-from-motion simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
//! failure (including runs that aborted mid-simulation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linesfm::config::{PartialConfig, RunConfig};
use linesfm::output;
use linesfm::sim;
use linesfm::Error;

#[derive(Parser)]
#[command(
    name = "linesfm",
    version,
    about = "Active structure-from-motion simulator for 3D straight lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one closed-loop run and write timeseries.csv / summary.json.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory (created if missing).
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
        /// Also write per-panel plot-data CSV files.
        #[arg(long)]
        plot_data: bool,
    },
    /// Run a seeded batch and write aggregate statistics to JSON.
    Montecarlo {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of runs; run r uses seed + r.
        #[arg(long, short = 'n', default_value_t = 50)]
        runs: usize,
        /// Output JSON file.
        #[arg(long, short, default_value = "montecarlo.json")]
        out: PathBuf,
    },
    /// Parse and validate a configuration, then print the resolved TOML.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; flags below override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simultaneously tracked lines.
    #[arg(long)]
    lines: Option<usize>,
    /// Observer innovation gain α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Eigenvalue-regulation gain k₁.
    #[arg(long)]
    k1: Option<f64>,
    /// Null-space gain k₂.
    #[arg(long)]
    k2: Option<f64>,
    /// Integration step (seconds).
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time span (seconds).
    #[arg(long)]
    duration: Option<f64>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_toml_file(path)?,
            None => PartialConfig::default(),
        };
        let overrides = PartialConfig {
            seed: self.seed,
            lines: self.lines,
            alpha: self.alpha,
            k1: self.k1,
            k2: self.k2,
            dt: self.dt,
            duration: self.duration,
            ..Default::default()
        };
        base.merge(overrides).resolve()
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            common,
            out,
            plot_data,
        } => {
            let config = common.resolve()?;
            log::info!("resolved config: {config:?}");
            let scenario = sim::generate_scenario(&config.to_scenario_config())?;
            let record = sim::run(&scenario)?;
            output::write_run(&out, &record, &config, plot_data)?;
            for (i, line) in record.summary.lines.iter().enumerate() {
                let conv = line
                    .convergence_time
                    .map(|t| format!("{t:.3} s"))
                    .unwrap_or_else(|| "not reached".into());
                println!(
                    "line {}: final error {:.3e}, convergence {conv}",
                    i + 1,
                    line.final_error
                );
            }
            println!("wrote {}", out.display());
            if let Some(reason) = record.summary.aborted {
                return Err(Error::InvalidLine(format!("run aborted: {reason}")));
            }
            Ok(())
        }
        Command::Montecarlo { common, runs, out } => {
            let config = common.resolve()?;
            if runs == 0 {
                return Err(Error::Config("runs must be at least 1".into()));
            }
            log::info!("resolved config: {config:?}");
            let summary = sim::monte_carlo(&config.to_scenario_config(), runs)?;
            std::fs::write(&out, output::monte_carlo_json(&summary, &config))?;
            println!(
                "{} runs, {} failures, median final error {:.3e}",
                summary.n_runs, summary.failures, summary.median_final_error
            );
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Validate { common } => {
            let config = common.resolve()?;
            let text =
                toml::to_string_pretty(&config).map_err(|e| Error::Config(e.to_string()))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LINESFM_LOG")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
