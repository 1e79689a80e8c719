//! Command-line front end: wires data files, censoring schemes, and config
//! files into reproducible runs with manifested outputs.
//!
//! Exit codes: 0 success, 1 usage, 2 data or I/O, 3 numeric or model.

mod args;
mod bayes;
mod fit;
mod gof;
mod output;
mod sample;
mod simulate;

use clap::Parser;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lexp",
    version,
    about = "Logistic-exponential lifetime inference under progressive type-I hybrid censoring"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Subcommand)]
enum Cmd {
    /// Maximum likelihood fit with confidence intervals
    Fit(fit::FitArgs),
    /// Bayes point estimates and credible intervals
    Bayes(bayes::BayesArgs),
    /// Monte Carlo study from a config file
    Simulate(simulate::SimulateArgs),
    /// Model comparison and plot data on complete samples
    Gof(gof::GofArgs),
    /// Draw censored samples as JSON lines
    Sample(sample::SampleArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let wants_out = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if wants_out { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.cmd {
        Cmd::Fit(a) => fit::run(a),
        Cmd::Bayes(a) => bayes::run(a),
        Cmd::Simulate(a) => simulate::run(a),
        Cmd::Gof(a) => gof::run(a),
        Cmd::Sample(a) => sample::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}
