use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rgpo_track::cli::{cmd_loe, cmd_plot, cmd_run, Overrides};
use rgpo_track::metrics::TrackerKind;

/// Monte Carlo experiments for tracking under range-gate pull-off jamming.
#[derive(Parser)]
#[command(name = "rgpo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write metrics.csv, config_used.txt and charts.
    Run(RunArgs),
    /// Attack-free run with zero process noise, compared with the PCRB.
    Loe(RunArgs),
    /// Redraw the charts of an existing metrics CSV.
    Plot {
        csv: PathBuf,
        /// Output directory; defaults to the CSV's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<u8>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Repeatable: adaptive, nonadaptive, naive, clairvoyant.
    #[arg(long = "tracker")]
    trackers: Vec<TrackerKind>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario,
            runs: self.runs,
            seed: self.seed,
            trackers: self.trackers.clone(),
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a.config.as_deref(), &a.overrides()),
        Command::Loe(a) => cmd_loe(a.config.as_deref(), &a.overrides()),
        Command::Plot { csv, out } => cmd_plot(csv, out.as_deref())
            .map(|paths| paths.iter().map(|p| format!("wrote {}", p.display())).collect()),
    };
    match result {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
