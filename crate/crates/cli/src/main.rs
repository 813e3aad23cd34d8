//! Command-line front end: stationarity tests, model fitting, rolling
//! evaluation and benchmark simulation.

mod commands;
mod config;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "hybridcast", version, about = "Hybrid ARIMA-GARCH and LSTM forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ADF and KPSS tests on the series and its first difference.
    Stationarity(Settings),
    /// Fit ARIMA-GARCH on the whole series and check its residuals.
    Fit(Settings),
    /// Rolling one-step comparison of the configured models.
    Evaluate(Settings),
    /// Write a seeded hybrid benchmark series as CSV.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "benchmark.csv")]
        out: PathBuf,
    },
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct Settings {
    /// Flat key=value file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    /// Date column; pass an empty string when there is none.
    #[arg(long)]
    date_col: Option<String>,
    #[arg(long)]
    value_col: Option<String>,
    /// Training fraction.
    #[arg(long)]
    split: Option<String>,
    /// Test prefix lengths, e.g. 7,14,21.
    #[arg(long)]
    subsets: Option<String>,
    /// ARIMA order p,d,q; selected automatically when absent.
    #[arg(long)]
    order: Option<String>,
    /// GARCH order P,Q, `auto` or `none`.
    #[arg(long)]
    garch: Option<String>,
    #[arg(long)]
    lookback: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated subset of ag, lstm, ag-lstm, lstm-garch.
    #[arg(long)]
    models: Option<String>,
    /// Optimizer iteration cap for order search and `fit`.
    #[arg(long)]
    max_iter: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        let flags = [
            ("input", &self.input),
            ("date_col", &self.date_col),
            ("value_col", &self.value_col),
            ("split", &self.split),
            ("subsets", &self.subsets),
            ("order", &self.order),
            ("garch", &self.garch),
            ("lookback", &self.lookback),
            ("hidden", &self.hidden),
            ("epochs", &self.epochs),
            ("lr", &self.lr),
            ("seed", &self.seed),
            ("models", &self.models),
            ("max_iter", &self.max_iter),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Stationarity(s) => commands::stationarity(&s.resolve()?),
        Command::Fit(s) => commands::fit(&s.resolve()?),
        Command::Evaluate(s) => commands::evaluate(&s.resolve()?),
        Command::Simulate { n, seed, out } => commands::simulate(n, seed, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
