//! `hybrid-esn`: generate Kuramoto data, train and forecast reservoirs, and
//! run the sweep and grid experiments from a JSON config.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_esn::evaluation::ModelKind;

use commands::{ForecastArgs, GenerateArgs, ReportArgs, RunArgs, TrainArgs};

#[derive(Parser)]
#[command(name = "hybrid-esn", version, about = "Hybrid reservoir computing experiments on Kuramoto networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one ground-truth record as CSV plus a metadata sidecar.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        regime: String,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// Overrides HYBRID_ESN_SEED and the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one reservoir instantiation and write its weights.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        regime: String,
        /// standard or hybrid.
        #[arg(long, default_value = "hybrid")]
        kind: ModelKind,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        #[arg(long, default_value_t = 0)]
        instantiation: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forecast one test span with a trained reservoir.
    Forecast {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        regime: String,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        #[arg(long, default_value_t = 0)]
        span: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the one-parameter sweep given in the config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides output_dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the eight-corner grid search.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a config with every default filled in.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Aggregate metric CSVs into summary.csv and optionally plot them.
    Report {
        /// Metric CSV files or directories containing them.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Defaults to the first input directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            config,
            regime,
            realization,
            seed,
            out,
        } => commands::generate(&GenerateArgs {
            config,
            regime,
            realization,
            seed,
            out,
        }),
        Command::Train {
            config,
            regime,
            kind,
            realization,
            instantiation,
            seed,
            out,
        } => commands::train(&TrainArgs {
            config,
            regime,
            kind,
            realization,
            instantiation,
            seed,
            out,
        }),
        Command::Forecast {
            config,
            model,
            regime,
            realization,
            span,
            seed,
            out,
        } => commands::forecast(&ForecastArgs {
            config,
            model,
            regime,
            realization,
            span,
            seed,
            out,
        }),
        Command::Sweep {
            config,
            threads,
            out,
            seed,
        } => commands::sweep(&RunArgs {
            config,
            threads,
            out,
            seed,
        }),
        Command::Grid {
            config,
            threads,
            out,
            seed,
        } => commands::grid(&RunArgs {
            config,
            threads,
            out,
            seed,
        }),
        Command::Config { config } => commands::print_config(config.as_deref()),
        Command::Report { inputs, out, plot } => commands::report(&ReportArgs { inputs, out, plot }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
