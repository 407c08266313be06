//! Human-readable text tables mirroring the JSON/CSV reports. Cells that do
//! not apply (single-group camps, empty camps) are rendered as a dash.

use std::fmt::Write;

use crate::contacts::ContactsReport;
use crate::model::RiskLevel;
use crate::preprocess::PreprocessReport;
use crate::risk::{GroupRoleBreakdown, GroupScope, RolePairClass, TimeShare};

const DASH: &str = "-";

fn fmt_opt(value: Option<f64>, decimals: usize) -> String {
    match value {
        Some(v) => format!("{v:.decimals$}"),
        None => DASH.to_owned(),
    }
}

pub fn render_contacts_table(report: &ContactsReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>9} {:>14} {:>7} {:>11} {:>22}",
        "camp", "contacts", "avg meas/ctc", "groups", "activities", "activity-tagged"
    )
    .unwrap();
    for row in &report.camps {
        let tagged = match row.activity_tagged_pct {
            Some(pct) => format!("{} ({pct:.2}%)", row.activity_tagged),
            None => DASH.to_owned(),
        };
        let activities = if row.activities_analyzed == row.activities {
            format!("{}", row.activities)
        } else {
            format!("{} ({})", row.activities, row.activities_analyzed)
        };
        writeln!(
            out,
            "{:<12} {:>9} {:>14} {:>7} {:>11} {:>22}",
            row.camp_id,
            row.contacts,
            fmt_opt(row.mean_measurements_per_contact, 2),
            row.groups,
            activities,
            tagged
        )
        .unwrap();
    }
    out
}

pub fn render_preprocess_table(report: &PreprocessReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "camp", "initial day", "final day", "users", "raw", "filtered"
    )
    .unwrap();
    for row in &report.camps {
        writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12}",
            row.camp_id,
            row.initial_day.as_deref().unwrap_or(DASH),
            row.final_day.as_deref().unwrap_or(DASH),
            row.unique_users,
            row.raw_measures,
            row.filtered_measures
        )
        .unwrap();
    }
    writeln!(
        out,
        "drops: active-window {}, absence {}, constant-run {}",
        report.drops.active_window, report.drops.absence, report.drops.constant_run
    )
    .unwrap();
    out
}

/// One camp's six-cell breakdown in the layout of the group/role summary
/// table: a time row and a count row, intra cells then inter cells.
pub fn render_group_role_table(camp_id: &str, breakdown: &GroupRoleBreakdown) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        camp_id, "intra c-c", "intra c-e", "intra e-e", "inter c-c", "inter c-e", "inter e-e"
    )
    .unwrap();
    // Single-group camps cannot have inter-group contacts: dash them out.
    let inter_possible = breakdown.n_groups > 1;
    let mut time_cells = Vec::new();
    let mut count_cells = Vec::new();
    for scope in GroupScope::ALL {
        for roles in RolePairClass::ALL {
            let cell = breakdown.cell(scope, roles);
            if scope == GroupScope::Inter && !inter_possible {
                time_cells.push(DASH.to_owned());
                count_cells.push(DASH.to_owned());
            } else {
                time_cells.push(format!("{:.2}", cell.contact_minutes));
                count_cells.push(format!("{}", cell.contacts));
            }
        }
    }
    write!(out, "{:<12}", "time [min]").unwrap();
    for cell in &time_cells {
        write!(out, " {cell:>12}").unwrap();
    }
    writeln!(out).unwrap();
    write!(out, "{:<12}", "number").unwrap();
    for cell in &count_cells {
        write!(out, " {cell:>12}").unwrap();
    }
    writeln!(out).unwrap();
    out
}

pub fn render_time_share(camp_id: &str, share: &TimeShare) -> String {
    let mut out = String::new();
    writeln!(out, "{camp_id}: time per risk level").unwrap();
    for level in RiskLevel::ALL {
        let idx = level.index();
        let pct = if share.empty {
            DASH.to_owned()
        } else {
            format!("{:.2}%", share.share_pct[idx])
        };
        writeln!(
            out,
            "  {:<12} {:>8}  ({} contacts)",
            level.label(),
            pct,
            share.counts[idx]
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::BreakdownCell;

    #[test]
    fn single_group_camp_renders_dashes() {
        let mut b = GroupRoleBreakdown {
            n_groups: 1,
            ..GroupRoleBreakdown::default()
        };
        b.cells[0][0] = BreakdownCell {
            contact_minutes: 128.9,
            contacts: 2004,
            risk_minutes: [0.0, 0.0, 0.0, 128.9],
        };
        let table = render_group_role_table("camp-c", &b);
        let time_line: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(time_line, vec!["time", "[min]", "128.90", "0.00", "0.00", "-", "-", "-"]);
        let count_line: Vec<&str> = table.lines().nth(2).unwrap().split_whitespace().collect();
        assert_eq!(count_line, vec!["number", "2004", "0", "0", "-", "-", "-"]);
    }

    #[test]
    fn empty_time_share_renders_dash() {
        let share = TimeShare {
            total_contact_seconds: 0,
            share_pct: [0.0; 4],
            counts: [0; 4],
            empty: true,
        };
        let text = render_time_share("camp-a", &share);
        assert!(text.contains('-'));
    }
}
