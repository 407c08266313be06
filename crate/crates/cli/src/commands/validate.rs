//! `janus-cpi validate`: schema and referential-integrity diagnostics for
//! input files. Findings are the command's output, not errors; the exit code
//! stays 0 so scripted checks can consume the report.

use std::path::PathBuf;

use serde::Serialize;

use janus_cpi_core::{io, Error, MobilityScript, Result, Roster, DEFAULT_MAX_RANGE_M};

use crate::manifest::{OutputFormat, ToolConfig};

#[derive(Debug, Clone)]
pub struct ValidateArgs {
    pub roster: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub exemptions: Option<PathBuf>,
    pub measurements: Option<PathBuf>,
    pub active_windows: Option<PathBuf>,
    pub absences: Option<PathBuf>,
    pub mobility: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Serialize)]
pub struct Finding {
    pub file: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub findings: Vec<Finding>,
    pub files_checked: usize,
}

impl Diagnostics {
    fn add(&mut self, file: &std::path::Path, message: impl Into<String>) {
        self.findings.push(Finding {
            file: file.display().to_string(),
            message: message.into(),
        });
    }
}

pub fn run(args: &ValidateArgs) -> Result<Diagnostics> {
    let mut diag = Diagnostics {
        findings: Vec::new(),
        files_checked: 0,
    };
    let provided = [
        &args.roster,
        &args.schedule,
        &args.exemptions,
        &args.measurements,
        &args.active_windows,
        &args.absences,
        &args.mobility,
        &args.config,
    ]
    .iter()
    .filter(|p| p.is_some())
    .count();
    if provided == 0 {
        return Err(Error::Config(
            "validate: no input files given (pass --roster, --schedule, ...)".into(),
        ));
    }

    let max_range = match &args.config {
        Some(p) => {
            diag.files_checked += 1;
            match ToolConfig::load(p) {
                Ok(cfg) => cfg.max_range_m,
                Err(e) => {
                    diag.add(p, e.to_string());
                    DEFAULT_MAX_RANGE_M
                }
            }
        }
        None => DEFAULT_MAX_RANGE_M,
    };

    let roster: Option<Roster> = match &args.roster {
        Some(p) => {
            diag.files_checked += 1;
            match io::load_roster(p) {
                Ok(r) => Some(r),
                Err(e) => {
                    diag.add(p, e.to_string());
                    None
                }
            }
        }
        None => None,
    };

    // Everything referencing the roster needs one; report its absence as a
    // finding rather than failing.
    let need_roster = |diag: &mut Diagnostics, path: &std::path::Path| -> bool {
        if args.roster.is_none() {
            diag.add(path, "cannot check referential integrity without --roster");
            return false;
        }
        roster.is_some()
    };

    if let Some(p) = &args.schedule {
        diag.files_checked += 1;
        if need_roster(&mut diag, p) {
            if let Err(e) = io::load_schedule(p, roster.as_ref().unwrap()) {
                diag.add(p, e.to_string());
            }
        }
    }
    if let Some(p) = &args.exemptions {
        diag.files_checked += 1;
        if need_roster(&mut diag, p) {
            if let Err(e) = io::load_exemptions(p, roster.as_ref().unwrap()) {
                diag.add(p, e.to_string());
            }
        }
    }
    if let Some(p) = &args.absences {
        diag.files_checked += 1;
        if need_roster(&mut diag, p) {
            if let Err(e) = io::load_absences(p, roster.as_ref().unwrap()) {
                diag.add(p, e.to_string());
            }
        }
    }
    if let Some(p) = &args.active_windows {
        diag.files_checked += 1;
        if let Err(e) = io::load_active_windows(p) {
            diag.add(p, e.to_string());
        }
    }
    if let Some(p) = &args.measurements {
        diag.files_checked += 1;
        match io::load_measurements(p, max_range) {
            Ok(load) => {
                if let Some(r) = &roster {
                    let mut unknown: std::collections::BTreeSet<&str> =
                        std::collections::BTreeSet::new();
                    for m in &load.measurements {
                        for d in [m.pair.a(), m.pair.b()] {
                            if !r.contains(d) {
                                unknown.insert(d.as_str());
                            }
                        }
                    }
                    for d in unknown {
                        diag.add(p, format!("device {d} not present in the roster"));
                    }
                }
            }
            Err(e) => diag.add(p, e.to_string()),
        }
    }
    if let Some(p) = &args.mobility {
        diag.files_checked += 1;
        match MobilityScript::load(p) {
            Ok(script) => {
                if let Some(r) = &roster {
                    // Resolve over the script's own extent to surface
                    // unknown devices and same-level overlaps.
                    let lo = script.entries.iter().map(|e| e.start).min().unwrap_or(0);
                    let hi = script.entries.iter().map(|e| e.end).max().unwrap_or(1);
                    if let Err(e) = script.resolve(r, lo, hi.max(lo + 1)) {
                        diag.add(p, e.to_string());
                    }
                }
            }
            Err(e) => diag.add(p, e.to_string()),
        }
    }

    match args.format {
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&diag).unwrap());
        }
        _ => {
            for f in &diag.findings {
                println!("{}: {}", f.file, f.message);
            }
            println!(
                "{} issues across {} files",
                diag.findings.len(),
                diag.files_checked
            );
        }
    }
    Ok(diag)
}
