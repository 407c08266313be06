//! `janus-cpi pipeline`: preprocess → contacts → risk analyses → reports,
//! with optional sensitivity sweeps over the aggregation thresholds.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use janus_cpi_core::contacts::{contacts_report, extract_contacts, split_by_camp, Contact};
use janus_cpi_core::preprocess::{preprocess, preprocess_report};
use janus_cpi_core::report as text_tables;
use janus_cpi_core::risk::{
    activity_profiles, group_role_breakdown, pair_views, time_share_by_risk,
};
use janus_cpi_core::{
    io, Absences, ActiveWindows, ContactParams, Error, ExemptionSet, PreprocessParams,
    RawMeasurement, Result, RiskThresholds, Roster, Schedule,
};

use crate::manifest::{
    ensure_out_dir, require_file, worker_count, write_json, OutputFormat, SweepSpec, ToolConfig,
};
use crate::reports::{
    self, ActivityCampRow, ActivityProfileRow, ActivityReport, GroupRoleReport, GroupRoleRow,
    TimeShareReport, TimeShareRow,
};

#[derive(Debug, Clone)]
pub struct PipelineArgs {
    pub measurements: PathBuf,
    pub roster: PathBuf,
    pub schedule: PathBuf,
    pub exemptions: Option<PathBuf>,
    pub active_windows: Option<PathBuf>,
    pub absences: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub tau_time: Option<i64>,
    pub tau_space: Option<f64>,
    pub tau_len: Option<usize>,
    pub sweep: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Serialize)]
pub struct PipelineSummary {
    pub raw_measurements: usize,
    pub dropped_over_range: usize,
    pub filtered_measurements: usize,
    pub contacts: usize,
    pub contact_params: ContactParams,
    pub preprocess_params: PreprocessParams,
    pub warnings: Vec<String>,
}

pub struct PipelineOutcome {
    pub contacts: usize,
    pub summary_path: PathBuf,
}

/// Prefixes the stage name, preserving the config-vs-data error kind.
fn in_stage(name: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("stage {name}: {m}")),
        other => Error::Invalid(format!("stage {name}: {other}")),
    }
}

struct Inputs {
    roster: Roster,
    schedule: Schedule,
    exemptions: ExemptionSet,
    windows: Option<ActiveWindows>,
    absences: Option<Absences>,
    raw: Vec<RawMeasurement>,
    dropped_over_range: usize,
}

fn load_inputs(args: &PipelineArgs, cfg: &ToolConfig) -> Result<Inputs> {
    require_file(&args.measurements, "measurements")?;
    require_file(&args.roster, "roster")?;
    require_file(&args.schedule, "schedule")?;
    for (path, what) in [
        (&args.exemptions, "exemptions"),
        (&args.active_windows, "active windows"),
        (&args.absences, "absences"),
    ] {
        if let Some(p) = path {
            require_file(p, what)?;
        }
    }

    let roster = io::load_roster(&args.roster).map_err(|e| in_stage("load", e))?;
    let schedule =
        io::load_schedule(&args.schedule, &roster).map_err(|e| in_stage("load", e))?;
    let exemptions = match &args.exemptions {
        Some(p) => io::load_exemptions(p, &roster).map_err(|e| in_stage("load", e))?,
        None => ExemptionSet::default(),
    };
    let windows = match &args.active_windows {
        Some(p) => Some(io::load_active_windows(p).map_err(|e| in_stage("load", e))?),
        None => None,
    };
    let absences = match &args.absences {
        Some(p) => Some(io::load_absences(p, &roster).map_err(|e| in_stage("load", e))?),
        None => None,
    };
    let load = io::load_measurements(&args.measurements, cfg.max_range_m)
        .map_err(|e| in_stage("load", e))?;
    Ok(Inputs {
        roster,
        schedule,
        exemptions,
        windows,
        absences,
        raw: load.measurements,
        dropped_over_range: load.dropped_over_range,
    })
}

pub fn run(args: &PipelineArgs) -> Result<PipelineOutcome> {
    let cfg = match &args.config {
        Some(p) => {
            require_file(p, "config")?;
            ToolConfig::load(p)?
        }
        None => ToolConfig::default(),
    };
    let mut contact_params = cfg.contacts;
    if let Some(t) = args.tau_time {
        contact_params.tau_time_s = t;
    }
    if let Some(s) = args.tau_space {
        contact_params.tau_space_m = s;
    }
    if let Some(l) = args.tau_len {
        contact_params.tau_len = l;
    }
    contact_params.validate()?;
    ensure_out_dir(&args.out)?;

    let inputs = load_inputs(args, &cfg)?;
    if inputs.raw.is_empty() {
        eprintln!(
            "warning: measurement file {} is empty; reports will be empty",
            args.measurements.display()
        );
    }

    // Preprocessing is independent of the contact thresholds: run it once
    // and share the cleaned stream across sweep points.
    let before = inputs.raw.clone();
    let outcome = preprocess(
        inputs.raw.clone(),
        inputs.windows.as_ref(),
        inputs.absences.as_ref(),
        &cfg.preprocess,
        &inputs.roster,
    )
    .map_err(|e| in_stage("preprocess", e))?;
    for w in &outcome.stats.warnings {
        eprintln!("warning: {w}");
    }
    let pre_report = preprocess_report(&before, &outcome.measurements, &outcome.stats, &inputs.roster);
    write_json(&args.out.join("preprocess_report.json"), &pre_report)?;
    if args.format == OutputFormat::Table {
        let table = text_tables::render_preprocess_table(&pre_report);
        reports::write_text(&args.out.join("preprocess_report.txt"), &table)?;
        print!("{table}");
    }

    let sweep = match &args.sweep {
        Some(text) => Some(SweepSpec::parse(text)?),
        None => None,
    };

    let Some(sweep) = sweep else {
        let stats = run_analyses(
            &outcome.measurements,
            &inputs,
            &contact_params,
            &cfg.risk,
            &args.out,
            args.format,
        )?;
        let summary_path = args.out.join("pipeline_summary.json");
        write_json(
            &summary_path,
            &PipelineSummary {
                raw_measurements: before.len(),
                dropped_over_range: inputs.dropped_over_range,
                filtered_measurements: outcome.measurements.len(),
                contacts: stats.contacts,
                contact_params,
                preprocess_params: cfg.preprocess,
                warnings: outcome.stats.warnings.clone(),
            },
        )?;
        return Ok(PipelineOutcome {
            contacts: stats.contacts,
            summary_path,
        });
    };

    // Sweep mode: one report set per value, plus a sweep summary.
    let points: Vec<(usize, f64, ContactParams, PathBuf)> = sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let params = sweep.apply(&contact_params, v)?;
            let dir = args.out.join("sweep").join(sweep.label(v));
            Ok((i, v, params, dir))
        })
        .collect::<Result<_>>()?;

    let workers = worker_count()?.min(points.len().max(1));
    let results: Mutex<Vec<(usize, f64, String, usize)>> = Mutex::new(Vec::new());
    let queue: Mutex<std::collections::VecDeque<&(usize, f64, ContactParams, PathBuf)>> =
        Mutex::new(points.iter().collect());
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let Some(point) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let (idx, value, params, dir) = point;
                let run_one = || -> Result<usize> {
                    ensure_out_dir(dir)?;
                    let stats = run_analyses(
                        &outcome.measurements,
                        &inputs,
                        params,
                        &cfg.risk,
                        dir,
                        args.format,
                    )?;
                    Ok(stats.contacts)
                };
                match run_one() {
                    Ok(contacts) => results.lock().unwrap().push((
                        *idx,
                        *value,
                        sweep.label(*value),
                        contacts,
                    )),
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e);
                        queue.lock().unwrap().clear();
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    #[derive(Serialize)]
    struct SweepPoint {
        value: f64,
        label: String,
        contacts: usize,
    }
    #[derive(Serialize)]
    struct SweepSummary {
        param: &'static str,
        points: Vec<SweepPoint>,
    }
    let mut rows = results.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    let total_last = rows.last().map_or(0, |r| r.3);
    let summary = SweepSummary {
        param: sweep.param.key(),
        points: rows
            .into_iter()
            .map(|(_, value, label, contacts)| SweepPoint {
                value,
                label,
                contacts,
            })
            .collect(),
    };
    let summary_path = args.out.join("sweep_summary.json");
    write_json(&summary_path, &summary)?;
    Ok(PipelineOutcome {
        contacts: total_last,
        summary_path,
    })
}

struct AnalysisStats {
    contacts: usize,
}

/// Contacts + every risk analysis for one parameter set, written to `out`.
fn run_analyses(
    measurements: &[RawMeasurement],
    inputs: &Inputs,
    contact_params: &ContactParams,
    thresholds: &RiskThresholds,
    out: &Path,
    format: OutputFormat,
) -> Result<AnalysisStats> {
    let (contacts, extract_stats) = extract_contacts(
        measurements,
        contact_params,
        &inputs.roster,
        &inputs.schedule,
        &inputs.exemptions,
    )
    .map_err(|e| in_stage("contacts", e))?;

    reports::write_contacts_csv(&out.join("contacts.csv"), &contacts)?;
    let table4 = contacts_report(&contacts, &inputs.roster, &inputs.schedule);
    write_json(&out.join("contacts_report.json"), &table4)?;
    write_json(&out.join("extract_stats.json"), &extract_stats)?;

    let by_camp = split_by_camp(&contacts, &inputs.roster);
    let camp_ids: Vec<String> = inputs
        .roster
        .camps()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let empty: Vec<&Contact> = Vec::new();

    // Fig 4: time per risk level.
    let shares: Vec<(String, _)> = camp_ids
        .iter()
        .map(|camp| {
            let list = by_camp.get(camp).unwrap_or(&empty);
            (
                camp.clone(),
                time_share_by_risk(list.iter().copied(), thresholds),
            )
        })
        .collect();
    let fig4 = TimeShareReport {
        camps: shares
            .iter()
            .map(|(camp, s)| TimeShareRow::new(camp, s))
            .collect(),
    };
    write_json(&out.join("risk_time_share.json"), &fig4)?;
    reports::write_time_share_csv(&out.join("risk_time_share.csv"), &shares)?;

    // Fig 5: per-pair aggregation views.
    let views: Vec<(String, _)> = camp_ids
        .iter()
        .map(|camp| {
            let list = by_camp.get(camp).unwrap_or(&empty);
            (camp.clone(), pair_views(list.iter().copied(), thresholds))
        })
        .collect();
    reports::write_pair_views_csv(&out.join("pair_views.csv"), &views)?;

    // Fig 6 / group-role table.
    let breakdowns: Vec<(String, _)> = camp_ids
        .iter()
        .map(|camp| {
            let list = by_camp.get(camp).unwrap_or(&empty);
            let n_groups = inputs.roster.groups_of_camp(camp).len();
            (
                camp.clone(),
                group_role_breakdown(list, n_groups, thresholds),
            )
        })
        .collect();
    let fig6 = GroupRoleReport {
        camps: breakdowns
            .iter()
            .map(|(camp, b)| GroupRoleRow::new(camp, b))
            .collect(),
    };
    write_json(&out.join("group_role.json"), &fig6)?;
    reports::write_group_role_csv(&out.join("group_role.csv"), &breakdowns)?;

    // Fig 7: per-activity risk profiles.
    let profiles: Vec<(String, _)> = camp_ids
        .iter()
        .map(|camp| {
            let list = by_camp.get(camp).unwrap_or(&empty);
            let p = activity_profiles(list, &inputs.schedule, camp, thresholds)
                .map_err(|e| in_stage("risk", e))?;
            Ok((camp.clone(), p))
        })
        .collect::<Result<_>>()?;
    let fig7 = ActivityReport {
        camps: profiles
            .iter()
            .map(|(camp, p)| ActivityCampRow {
                camp_id: camp.clone(),
                activities: p.iter().map(ActivityProfileRow::new).collect(),
            })
            .collect(),
    };
    write_json(&out.join("activity_profiles.json"), &fig7)?;
    reports::write_activity_csv(&out.join("activity_profiles.csv"), &profiles)?;

    if format == OutputFormat::Table {
        let mut tables = String::new();
        tables.push_str(&text_tables::render_contacts_table(&table4));
        tables.push('\n');
        for (camp, share) in &shares {
            tables.push_str(&text_tables::render_time_share(camp, share));
        }
        tables.push('\n');
        for (camp, b) in &breakdowns {
            tables.push_str(&text_tables::render_group_role_table(camp, b));
        }
        reports::write_text(&out.join("tables.txt"), &tables)?;
        print!("{tables}");
    }

    Ok(AnalysisStats {
        contacts: contacts.len(),
    })
}
