use std::path::PathBuf;
use std::process::ExitCode;

use bikegrow::config::{ConfigArgs, RunConfig};
use bikegrow::pipeline::{self, CmdResult, Failure};
use clap::{Parser, Subcommand};

/// Grow a bicycle network from crash and trip data.
#[derive(Parser)]
#[command(name = "bikegrow", version)]
struct Cli {
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean OD records out of a vehicle snapshot log.
    ExtractTrips {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Grow the network and write snapshots per alpha.
    Grow {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write metrics.csv next to the snapshots.
        #[arg(long)]
        evaluate: bool,
    },
    /// Coverage and component metrics of a run directory.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run directory with manifest.json; omit for the baseline only.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Metrics over the alpha x delta grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Trade-off alpha from metrics tables of several alphas.
    Tradeoff {
        /// `ALPHA:PATH` to a metrics CSV; repeat per alpha.
        #[arg(long = "curve", value_parser = parse_curve, required = true)]
        curves: Vec<(f64, PathBuf)>,
        /// Budget at which to compare, km.
        #[arg(long)]
        d_km: f64,
        /// Trip coverage column to use.
        #[arg(long, default_value = "trip_cov_d0")]
        trip_column: String,
        /// Output JSON file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Greedy against Delaunay candidates on the same inputs.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        /// Budget reported separately in the summary, km.
        #[arg(long, default_value_t = 80.0)]
        at_d: f64,
    },
}

fn parse_curve(s: &str) -> Result<(f64, PathBuf), String> {
    let (a, p) = s.split_once(':').ok_or("expected ALPHA:PATH")?;
    let alpha: f64 = a.parse().map_err(|_| format!("bad alpha '{a}'"))?;
    Ok((alpha, PathBuf::from(p)))
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Input(e.into()))?;
    }
    match cli.command {
        Command::ExtractTrips { config } => {
            pipeline::cmd_extract_trips(&RunConfig::resolve(config)?)?;
        }
        Command::Grow { config, evaluate } => {
            pipeline::cmd_grow(&RunConfig::resolve(config)?, evaluate)?
        }
        Command::Evaluate { config, snapshots } => {
            pipeline::cmd_evaluate(&RunConfig::resolve(config)?, snapshots.as_deref())?
        }
        Command::Sweep { config } => pipeline::cmd_sweep(&RunConfig::resolve(config)?)?,
        Command::Tradeoff {
            curves,
            d_km,
            trip_column,
            output,
        } => {
            let value = pipeline::cmd_tradeoff(&curves, d_km, &trip_column)?;
            match output {
                Some(path) => bikegrow::output::write_json(&path, &value)?,
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("json value")
                ),
            }
        }
        Command::Compare { config, at_d } => {
            pipeline::cmd_compare(&RunConfig::resolve(config)?, at_d)?
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
