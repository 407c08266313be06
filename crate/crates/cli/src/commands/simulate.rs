//! `janus-cpi simulate`: run the dual-radio simulator and write the
//! measurement log, the ground-truth trace and the run summary.

use std::path::{Path, PathBuf};

use janus_cpi_core::sim::{run_simulation, write_ground_truth};
use janus_cpi_core::{io, Error, MobilityScript, Result, SimConfig};

use crate::manifest::{ensure_out_dir, require_file, write_json, ToolConfig};

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub roster: PathBuf,
    pub schedule: PathBuf,
    pub mobility: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

pub struct SimulateOutcome {
    pub measurements_path: PathBuf,
    pub ground_truth_path: PathBuf,
    pub summary_path: PathBuf,
    pub measurements: usize,
}

pub fn run(args: &SimulateArgs) -> Result<SimulateOutcome> {
    require_file(&args.config, "config")?;
    require_file(&args.roster, "roster")?;
    require_file(&args.schedule, "schedule")?;
    require_file(&args.mobility, "mobility script")?;
    ensure_out_dir(&args.out)?;

    let tool = ToolConfig::load(&args.config)?;
    let mut sim: SimConfig = tool.sim.ok_or_else(|| {
        Error::Config(format!(
            "config {} has no [sim] section",
            args.config.display()
        ))
    })?;
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }

    let roster = io::load_roster(&args.roster)?;
    let schedule = io::load_schedule(&args.schedule, &roster)?;
    let mobility = MobilityScript::load(&args.mobility)?;

    let output = run_simulation(&sim, &roster, &schedule, &mobility)?;

    let measurements_path = args.out.join("measurements.csv");
    io::save_measurements(&measurements_path, &output.measurements)?;
    let ground_truth_path = args.out.join("ground_truth.csv");
    write_ground_truth(
        create(&ground_truth_path)?,
        &output.ground_truth,
    )?;
    let summary_path = args.out.join("summary.json");
    write_json(&summary_path, &output.summary)?;

    Ok(SimulateOutcome {
        measurements_path,
        ground_truth_path,
        summary_path,
        measurements: output.measurements.len(),
    })
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })
}
