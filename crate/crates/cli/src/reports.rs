//! JSON/CSV report shapes written by the pipeline command. JSON uses named
//! per-risk keys so the committed schemas can pin the structure; CSVs are
//! plot-ready mirrors of the figure axes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use janus_cpi_core::contacts::Contact;
use janus_cpi_core::risk::{GroupRoleBreakdown, GroupScope, PairViews, RolePairClass, TimeShare};
use janus_cpi_core::risk::ActivityProfile;
use janus_cpi_core::{Error, Result, RiskLevel};

/// One value per risk level, High first, with stable JSON keys.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerRisk<T> {
    pub high: T,
    pub medium_high: T,
    pub medium_low: T,
    pub low: T,
}

impl<T: Copy> From<[T; 4]> for PerRisk<T> {
    fn from(v: [T; 4]) -> Self {
        PerRisk {
            high: v[RiskLevel::High.index()],
            medium_high: v[RiskLevel::MediumHigh.index()],
            medium_low: v[RiskLevel::MediumLow.index()],
            low: v[RiskLevel::Low.index()],
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TimeShareReport {
    pub camps: Vec<TimeShareRow>,
}

#[derive(Debug, Serialize)]
pub struct TimeShareRow {
    pub camp_id: String,
    pub total_contact_seconds: i64,
    pub empty: bool,
    pub share_pct: PerRisk<f64>,
    pub counts: PerRisk<usize>,
}

impl TimeShareRow {
    pub fn new(camp_id: &str, share: &TimeShare) -> Self {
        TimeShareRow {
            camp_id: camp_id.to_owned(),
            total_contact_seconds: share.total_contact_seconds,
            empty: share.empty,
            share_pct: share.share_pct.into(),
            counts: share.counts.into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GroupRoleReport {
    pub camps: Vec<GroupRoleRow>,
}

#[derive(Debug, Serialize)]
pub struct GroupRoleRow {
    pub camp_id: String,
    pub n_groups: usize,
    pub total_minutes: f64,
    pub total_contacts: usize,
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Serialize)]
pub struct CellReport {
    pub scope: &'static str,
    pub roles: &'static str,
    /// False for inter cells of a single-group camp (a dash in the table).
    pub applicable: bool,
    pub contact_minutes: Option<f64>,
    pub contacts: Option<usize>,
    pub risk_minutes: Option<PerRisk<f64>>,
    pub risk_share_pct: Option<PerRisk<f64>>,
}

impl GroupRoleRow {
    pub fn new(camp_id: &str, breakdown: &GroupRoleBreakdown) -> Self {
        let mut cells = Vec::with_capacity(6);
        for scope in GroupScope::ALL {
            for roles in RolePairClass::ALL {
                let cell = breakdown.cell(scope, roles);
                let applicable = scope == GroupScope::Intra || breakdown.n_groups > 1;
                cells.push(CellReport {
                    scope: scope.key(),
                    roles: roles.key(),
                    applicable,
                    contact_minutes: applicable.then_some(cell.contact_minutes),
                    contacts: applicable.then_some(cell.contacts),
                    risk_minutes: applicable.then(|| cell.risk_minutes.into()),
                    risk_share_pct: cell.risk_shares_pct().map(Into::into),
                });
            }
        }
        GroupRoleRow {
            camp_id: camp_id.to_owned(),
            n_groups: breakdown.n_groups,
            total_minutes: breakdown.total_minutes(),
            total_contacts: breakdown.total_contacts(),
            cells,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ActivityReport {
    pub camps: Vec<ActivityCampRow>,
}

#[derive(Debug, Serialize)]
pub struct ActivityCampRow {
    pub camp_id: String,
    pub activities: Vec<ActivityProfileRow>,
}

#[derive(Debug, Serialize)]
pub struct ActivityProfileRow {
    pub activity: String,
    pub scheduled_minutes: f64,
    pub contact_minutes: f64,
    pub bars: PerRisk<f64>,
    pub share_pct: Option<PerRisk<f64>>,
    pub counts: PerRisk<usize>,
}

impl ActivityProfileRow {
    pub fn new(p: &ActivityProfile) -> Self {
        ActivityProfileRow {
            activity: p.activity.clone(),
            scheduled_minutes: p.scheduled_minutes,
            contact_minutes: p.contact_minutes,
            bars: p.bars.into(),
            share_pct: p.share_pct.map(Into::into),
            counts: p.counts.into(),
        }
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_owned(),
            source: e,
        })?,
    ))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source: e,
    }
}

pub const CONTACTS_CSV_HEADER: &str = "device_a,device_b,start,duration_s,distance_m,\
n_measurements,group_a,group_b,role_a,role_b,activity,intra_group";

/// Writes the contacts CSV in the documented column order.
pub fn write_contacts_csv(path: &Path, contacts: &[Contact]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "{CONTACTS_CSV_HEADER}")?;
        for c in contacts {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.pair.a(),
                c.pair.b(),
                c.start,
                c.duration_s,
                c.distance_m,
                c.n_measurements,
                c.group_a,
                c.group_b,
                c.role_a,
                c.role_b,
                c.activity.as_deref().unwrap_or(""),
                c.intra_group
            )?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Fig-4-shaped CSV: one row per camp and risk level.
pub fn write_time_share_csv(path: &Path, rows: &[(String, TimeShare)]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "camp_id,risk,share_pct,contact_count,contact_seconds")?;
        for (camp, share) in rows {
            for level in RiskLevel::ALL {
                let i = level.index();
                let seconds: i64 = if share.total_contact_seconds > 0 {
                    (share.share_pct[i] / 100.0 * share.total_contact_seconds as f64).round()
                        as i64
                } else {
                    0
                };
                writeln!(
                    w,
                    "{camp},{},{},{},{seconds}",
                    level.key(),
                    share.share_pct[i],
                    share.counts[i]
                )?;
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Fig-5-shaped CSV: one aggregated point per pair per view.
pub fn write_pair_views_csv(path: &Path, rows: &[(String, PairViews)]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "camp_id,view,device_a,device_b,duration_s,distance_m,risk,n_contacts"
        )?;
        for (camp, views) in rows {
            for (view, points) in [
                ("mean", &views.mean),
                ("max_duration", &views.max_duration),
                ("min_distance", &views.min_distance),
            ] {
                for p in points {
                    writeln!(
                        w,
                        "{camp},{view},{},{},{},{},{},{}",
                        p.pair.a(),
                        p.pair.b(),
                        p.duration_s,
                        p.distance_m,
                        p.level.key(),
                        p.n_contacts
                    )?;
                }
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Fig-6-shaped CSV: per camp, cell and risk level. Inapplicable cells
/// (inter cells of single-group camps) are omitted.
pub fn write_group_role_csv(path: &Path, rows: &[(String, GroupRoleBreakdown)]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "camp_id,scope,roles,cell_minutes,cell_contacts,risk,risk_minutes,risk_share_pct"
        )?;
        for (camp, breakdown) in rows {
            for scope in GroupScope::ALL {
                if scope == GroupScope::Inter && breakdown.n_groups <= 1 {
                    continue;
                }
                for roles in RolePairClass::ALL {
                    let cell = breakdown.cell(scope, roles);
                    let shares = cell.risk_shares_pct();
                    for level in RiskLevel::ALL {
                        let i = level.index();
                        let share = shares.map_or(String::new(), |s| s[i].to_string());
                        writeln!(
                            w,
                            "{camp},{},{},{},{},{},{},{share}",
                            scope.key(),
                            roles.key(),
                            cell.contact_minutes,
                            cell.contacts,
                            level.key(),
                            cell.risk_minutes[i]
                        )?;
                    }
                }
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Fig-7-shaped CSV: per camp, activity and risk level.
pub fn write_activity_csv(path: &Path, rows: &[(String, Vec<ActivityProfile>)]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "camp_id,activity,scheduled_minutes,risk,bar,share_pct,contact_count"
        )?;
        for (camp, profiles) in rows {
            for p in profiles {
                for level in RiskLevel::ALL {
                    let i = level.index();
                    let share = p.share_pct.map_or(String::new(), |s| s[i].to_string());
                    writeln!(
                        w,
                        "{camp},{},{},{},{},{share},{}",
                        p.activity,
                        p.scheduled_minutes,
                        level.key(),
                        p.bars[i],
                        p.counts[i]
                    )?;
                }
            }
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Writes a plain-text report file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
