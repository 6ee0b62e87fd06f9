// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
#[cfg(test)]
mod e2e;
mod output;
mod plot;

#[derive(Debug, Parser)]
#[command(name = "windfreq", version, about = "Grid frequency response with de-loaded wind support")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write timeseries.csv, metrics.json and manifest.json.
    Run(RunArgs),
    /// Run MPPT, both traditional gain sets and the proposed scheme on one case.
    Compare(CompareArgs),
    /// Refit the de-loaded curve constants and the pitch compensation law.
    Fit(FitArgs),
    /// Render one or more time-series CSVs as a four-panel SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Mppt,
    Traditional,
    Proposed,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Override the integration step, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Override the simulated horizon, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Curve table written by `fit`.
    #[arg(long, value_name = "PATH")]
    pub curves: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "WINDFREQ_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Case preset: 1 (or 1a), 1b, 2, 3, 4, 5, 6.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub case: Option<String>,
    /// Scenario config file (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub controller: Option<ControllerArg>,
    /// Inertial gain of the traditional scheme, pu/s.
    #[arg(long)]
    pub kv: Option<f64>,
    /// Droop gain 1/R of the traditional scheme, pu.
    #[arg(long = "inv-r")]
    pub inv_r: Option<f64>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub case: String,
    /// Large-gain set as K_v,1/R.
    #[arg(long, value_name = "KV,INV_R", default_value = "30,24")]
    pub large: String,
    /// Small-gain set as K_v,1/R.
    #[arg(long, value_name = "KV,INV_R", default_value = "15,7")]
    pub small: String,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Power reserve of the de-loaded curve; the lower curve uses twice this.
    #[arg(long, default_value_t = 0.1)]
    pub reserve: f64,
    /// Curve table to write.
    #[arg(long, default_value = "curves.toml")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Time-series CSV; repeat to overlay runs.
    #[arg(long = "csv", required = true, value_name = "PATH")]
    pub csv: Vec<PathBuf>,
    /// Legend label per CSV, in the same order.
    #[arg(long = "label")]
    pub label: Vec<String>,
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
}

fn dispatch(command: &Command) -> Result<(), commands::CliError> {
    match command {
        Command::Run(a) => commands::run(a),
        Command::Compare(a) => commands::compare(a),
        Command::Fit(a) => commands::fit(a),
        Command::Plot(a) => commands::plot(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn case_and_config_conflict() {
        let r = Cli::try_parse_from(["windfreq", "run", "--case", "1", "--config", "x.toml"]);
        assert!(r.is_err());
        let r = Cli::try_parse_from(["windfreq", "run"]);
        assert!(r.is_err());
    }
}
