use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use janus_cpi_cli::commands::{pipeline, simulate, validate};
use janus_cpi_cli::manifest::OutputFormat;

/// Dual-radio proximity toolkit: simulate a discovery+ranging wearable
/// system and analyze close-proximity interactions.
#[derive(Parser)]
#[command(name = "janus-cpi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulator: emits measurements.csv, ground_truth.csv and
    /// summary.json.
    Simulate {
        /// Config file with a [sim] section.
        #[arg(long)]
        config: PathBuf,
        /// Roster CSV (device_id,role,group_id,camp_id).
        #[arg(long)]
        roster: PathBuf,
        /// Schedule CSV (camp_id,group_id,activity,location,start,end,excluded).
        #[arg(long)]
        schedule: PathBuf,
        /// Mobility script (TOML).
        #[arg(long)]
        mobility: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run preprocess → contacts → risk analyses over a measurement log.
    Pipeline {
        /// Measurement CSV (device_a,device_b,timestamp,distance_m).
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        roster: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Exemption CSV (device_a,device_b); contacts of these pairs are dropped.
        #[arg(long)]
        exemptions: Option<PathBuf>,
        /// Active-window CSV (camp_id,start,end); samples outside are dropped.
        #[arg(long)]
        active_windows: Option<PathBuf>,
        /// Absence CSV (device_id,start,end).
        #[arg(long)]
        absences: Option<PathBuf>,
        /// Config file ([preprocess], [contacts], [risk] sections).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Temporal gap threshold, seconds.
        #[arg(long)]
        tau_time: Option<i64>,
        /// Spatial spread threshold, meters.
        #[arg(long)]
        tau_space: Option<f64>,
        /// Minimum measurements per contact.
        #[arg(long)]
        tau_len: Option<usize>,
        /// Sensitivity sweep, e.g. tau_time=60,90,120.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Check input files for schema and referential-integrity problems.
    Validate {
        #[arg(long)]
        roster: Option<PathBuf>,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        exemptions: Option<PathBuf>,
        #[arg(long)]
        measurements: Option<PathBuf>,
        #[arg(long)]
        active_windows: Option<PathBuf>,
        #[arg(long)]
        absences: Option<PathBuf>,
        #[arg(long)]
        mobility: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            roster,
            schedule,
            mobility,
            out,
            seed,
        } => simulate::run(&simulate::SimulateArgs {
            config,
            roster,
            schedule,
            mobility,
            out,
            seed,
        })
        .map(|outcome| {
            println!(
                "wrote {} measurements to {}",
                outcome.measurements,
                outcome.measurements_path.display()
            );
        }),
        Command::Pipeline {
            measurements,
            roster,
            schedule,
            exemptions,
            active_windows,
            absences,
            config,
            out,
            tau_time,
            tau_space,
            tau_len,
            sweep,
            format,
        } => pipeline::run(&pipeline::PipelineArgs {
            measurements,
            roster,
            schedule,
            exemptions,
            active_windows,
            absences,
            config,
            out,
            tau_time,
            tau_space,
            tau_len,
            sweep,
            format,
        })
        .map(|outcome| {
            println!(
                "{} contacts; reports in {}",
                outcome.contacts,
                outcome.summary_path.parent().unwrap_or(&outcome.summary_path).display()
            );
        }),
        Command::Validate {
            roster,
            schedule,
            exemptions,
            measurements,
            active_windows,
            absences,
            mobility,
            config,
            format,
        } => validate::run(&validate::ValidateArgs {
            roster,
            schedule,
            exemptions,
            measurements,
            active_windows,
            absences,
            mobility,
            config,
            format,
        })
        .map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(janus_cpi_cli::exit_code_for(&e) as u8)
        }
    }
}
