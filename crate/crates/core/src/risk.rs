//! Four-level contagion-risk classification and the derived analyses:
//! time share per risk level, per-pair aggregation views, group/role
//! breakdowns and per-activity risk-per-unit-time profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contacts::Contact;
use crate::error::{Error, Result};
use crate::model::{DevicePair, RiskLevel, Role, Schedule};

/// One rung of the risk ladder: a contact qualifies when its duration is at
/// least `min_duration_s` AND its distance is at most `max_distance_m`
/// (boundaries inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBand {
    pub min_duration_s: f64,
    pub max_distance_m: f64,
}

/// The three upper rungs; everything that matches none of them is Low risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds {
    #[serde(default = "default_high")]
    pub high: RiskBand,
    #[serde(default = "default_medium_high")]
    pub medium_high: RiskBand,
    #[serde(default = "default_medium_low")]
    pub medium_low: RiskBand,
}

fn default_high() -> RiskBand {
    RiskBand {
        min_duration_s: 15.0 * 60.0,
        max_distance_m: 1.0,
    }
}
fn default_medium_high() -> RiskBand {
    RiskBand {
        min_duration_s: 10.0 * 60.0,
        max_distance_m: 2.0,
    }
}
fn default_medium_low() -> RiskBand {
    RiskBand {
        min_duration_s: 5.0 * 60.0,
        max_distance_m: 4.0,
    }
}

impl Default for RiskThresholds {
    fn default() -> Self {
        RiskThresholds {
            high: default_high(),
            medium_high: default_medium_high(),
            medium_low: default_medium_low(),
        }
    }
}

impl RiskThresholds {
    /// Durations must strictly decrease and distances strictly increase down
    /// the ladder, otherwise a rung could never match.
    pub fn validate(&self) -> Result<()> {
        let d = [
            self.high.min_duration_s,
            self.medium_high.min_duration_s,
            self.medium_low.min_duration_s,
        ];
        let r = [
            self.high.max_distance_m,
            self.medium_high.max_distance_m,
            self.medium_low.max_distance_m,
        ];
        if !(d[0] > d[1] && d[1] > d[2] && d[2] > 0.0) {
            return Err(Error::Config(format!(
                "risk duration floors must strictly decrease: {d:?}"
            )));
        }
        if !(r[0] < r[1] && r[1] < r[2] && r[0] > 0.0) {
            return Err(Error::Config(format!(
                "risk distance ceilings must strictly increase: {r:?}"
            )));
        }
        Ok(())
    }
}

/// Classifies a (duration, distance) point. Exactly one level is returned:
/// the ladder is checked from High down and everything left over is Low —
/// even points that are close but brief, or long but distant.
pub fn classify(duration_s: f64, distance_m: f64, thresholds: &RiskThresholds) -> RiskLevel {
    let fits = |band: &RiskBand| {
        duration_s >= band.min_duration_s && distance_m <= band.max_distance_m
    };
    if fits(&thresholds.high) {
        RiskLevel::High
    } else if fits(&thresholds.medium_high) {
        RiskLevel::MediumHigh
    } else if fits(&thresholds.medium_low) {
        RiskLevel::MediumLow
    } else {
        RiskLevel::Low
    }
}

/// Classifies a contact on its aggregated duration and median distance.
pub fn classify_contact(contact: &Contact, thresholds: &RiskThresholds) -> RiskLevel {
    classify(contact.duration_s as f64, contact.distance_m, thresholds)
}

/// Percentage of total contact time (and, for transparency, contact counts)
/// per risk level. Arrays are indexed by [`RiskLevel::index`] (High first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeShare {
    pub total_contact_seconds: i64,
    pub share_pct: [f64; 4],
    pub counts: [usize; 4],
    /// True when there were no contacts (all shares are zero).
    pub empty: bool,
}

pub fn time_share_by_risk<'c>(
    contacts: impl IntoIterator<Item = &'c Contact>,
    thresholds: &RiskThresholds,
) -> TimeShare {
    let mut seconds = [0i64; 4];
    let mut counts = [0usize; 4];
    for c in contacts {
        let idx = classify_contact(c, thresholds).index();
        seconds[idx] += c.duration_s;
        counts[idx] += 1;
    }
    let total: i64 = seconds.iter().sum();
    let share_pct = if total > 0 {
        seconds.map(|s| s as f64 / total as f64 * 100.0)
    } else {
        [0.0; 4]
    };
    TimeShare {
        total_contact_seconds: total,
        share_pct,
        counts,
        empty: total == 0,
    }
}

/// One aggregated point in a per-pair view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPoint {
    pub pair: DevicePair,
    pub duration_s: f64,
    pub distance_m: f64,
    pub level: RiskLevel,
    pub n_contacts: usize,
}

/// The three per-pair views: mean (duration, distance) over all of the
/// pair's contacts, the single longest contact, and the single closest one.
#[derive(Debug, Clone, Serialize)]
pub struct PairViews {
    pub mean: Vec<PairPoint>,
    pub max_duration: Vec<PairPoint>,
    pub min_distance: Vec<PairPoint>,
}

pub fn pair_views<'c>(
    contacts: impl IntoIterator<Item = &'c Contact>,
    thresholds: &RiskThresholds,
) -> PairViews {
    let mut by_pair: BTreeMap<&DevicePair, Vec<&Contact>> = BTreeMap::new();
    for c in contacts {
        by_pair.entry(&c.pair).or_default().push(c);
    }

    let mut mean = Vec::with_capacity(by_pair.len());
    let mut max_duration = Vec::with_capacity(by_pair.len());
    let mut min_distance = Vec::with_capacity(by_pair.len());
    for (pair, list) in by_pair {
        let n = list.len();
        let mean_duration =
            list.iter().map(|c| c.duration_s as f64).sum::<f64>() / n as f64;
        let mean_distance = list.iter().map(|c| c.distance_m).sum::<f64>() / n as f64;
        mean.push(PairPoint {
            pair: pair.clone(),
            duration_s: mean_duration,
            distance_m: mean_distance,
            level: classify(mean_duration, mean_distance, thresholds),
            n_contacts: n,
        });

        // Longest contact; ties broken by smaller distance.
        let longest = list
            .iter()
            .max_by(|x, y| {
                x.duration_s
                    .cmp(&y.duration_s)
                    .then(y.distance_m.total_cmp(&x.distance_m))
            })
            .expect("non-empty pair group");
        max_duration.push(PairPoint {
            pair: pair.clone(),
            duration_s: longest.duration_s as f64,
            distance_m: longest.distance_m,
            level: classify_contact(longest, thresholds),
            n_contacts: n,
        });

        // Closest contact; ties broken by longer duration.
        let closest = list
            .iter()
            .min_by(|x, y| {
                x.distance_m
                    .total_cmp(&y.distance_m)
                    .then(y.duration_s.cmp(&x.duration_s))
            })
            .expect("non-empty pair group");
        min_distance.push(PairPoint {
            pair: pair.clone(),
            duration_s: closest.duration_s as f64,
            distance_m: closest.distance_m,
            level: classify_contact(closest, thresholds),
            n_contacts: n,
        });
    }
    PairViews {
        mean,
        max_duration,
        min_distance,
    }
}

/// Whether a contact stays inside one bubble or bridges two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupScope {
    Intra,
    Inter,
}

impl GroupScope {
    pub const ALL: [GroupScope; 2] = [GroupScope::Intra, GroupScope::Inter];

    pub fn key(&self) -> &'static str {
        match self {
            GroupScope::Intra => "intra",
            GroupScope::Inter => "inter",
        }
    }
}

/// Unordered role pair of a contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RolePairClass {
    ChildChild,
    ChildEducator,
    EducatorEducator,
}

impl RolePairClass {
    pub const ALL: [RolePairClass; 3] = [
        RolePairClass::ChildChild,
        RolePairClass::ChildEducator,
        RolePairClass::EducatorEducator,
    ];

    pub fn of(a: Role, b: Role) -> Self {
        match (a, b) {
            (Role::Child, Role::Child) => RolePairClass::ChildChild,
            (Role::Educator, Role::Educator) => RolePairClass::EducatorEducator,
            _ => RolePairClass::ChildEducator,
        }
    }

    pub fn key(&self) -> &'static str {
        match self {
            RolePairClass::ChildChild => "child_child",
            RolePairClass::ChildEducator => "child_educator",
            RolePairClass::EducatorEducator => "educator_educator",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RolePairClass::ChildChild => "child-child",
            RolePairClass::ChildEducator => "child-educator",
            RolePairClass::EducatorEducator => "educator-educator",
        }
    }
}

/// One of the six {intra, inter} × role-pair cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BreakdownCell {
    pub contact_minutes: f64,
    pub contacts: usize,
    /// Contact minutes per risk level (High first).
    pub risk_minutes: [f64; 4],
}

impl BreakdownCell {
    /// Percentage of the cell's contact time per risk level, or `None` when
    /// the cell is empty.
    pub fn risk_shares_pct(&self) -> Option<[f64; 4]> {
        let total: f64 = self.risk_minutes.iter().sum();
        (total > 0.0).then(|| self.risk_minutes.map(|m| m / total * 100.0))
    }
}

/// Six-cell contact-time/count breakdown for one camp.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GroupRoleBreakdown {
    /// Indexed by [GroupScope][RolePairClass] in declaration order.
    pub cells: [[BreakdownCell; 3]; 2],
    /// Groups in the camp; single-group camps cannot have inter cells.
    pub n_groups: usize,
}

impl GroupRoleBreakdown {
    pub fn cell(&self, scope: GroupScope, roles: RolePairClass) -> &BreakdownCell {
        let s = match scope {
            GroupScope::Intra => 0,
            GroupScope::Inter => 1,
        };
        let r = match roles {
            RolePairClass::ChildChild => 0,
            RolePairClass::ChildEducator => 1,
            RolePairClass::EducatorEducator => 2,
        };
        &self.cells[s][r]
    }

    pub fn total_minutes(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .map(|c| c.contact_minutes)
            .sum()
    }

    pub fn total_contacts(&self) -> usize {
        self.cells.iter().flatten().map(|c| c.contacts).sum()
    }
}

/// Builds the six-cell breakdown for one camp's contacts. Every contact
/// lands in exactly one cell.
pub fn group_role_breakdown(
    contacts: &[&Contact],
    n_groups: usize,
    thresholds: &RiskThresholds,
) -> GroupRoleBreakdown {
    let mut breakdown = GroupRoleBreakdown {
        n_groups,
        ..GroupRoleBreakdown::default()
    };
    for c in contacts {
        let s = if c.intra_group { 0 } else { 1 };
        let r = match RolePairClass::of(c.role_a, c.role_b) {
            RolePairClass::ChildChild => 0,
            RolePairClass::ChildEducator => 1,
            RolePairClass::EducatorEducator => 2,
        };
        let cell = &mut breakdown.cells[s][r];
        let minutes = c.duration_s as f64 / 60.0;
        cell.contact_minutes += minutes;
        cell.contacts += 1;
        cell.risk_minutes[classify_contact(c, thresholds).index()] += minutes;
    }
    breakdown
}

/// Per-activity risk profile: contact time per unit of scheduled time, split
/// by risk level, plus the percentage composition of the contact time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityProfile {
    pub activity: String,
    /// Total scheduled duration over all groups and days, minutes. Excluded
    /// blocks do not count: their contacts are dropped by construction.
    pub scheduled_minutes: f64,
    pub contact_minutes: f64,
    /// (Contact time at level) / (scheduled time), High first.
    pub bars: [f64; 4],
    /// Percentage of contact time per level; `None` without contact time.
    pub share_pct: Option<[f64; 4]>,
    pub counts: [usize; 4],
}

/// Profiles every non-excluded activity of one camp. Activities without
/// tagged contacts get zero bars; a contact tagged with an activity missing
/// from the schedule is a hard error.
pub fn activity_profiles(
    contacts: &[&Contact],
    schedule: &Schedule,
    camp_id: &str,
    thresholds: &RiskThresholds,
) -> Result<Vec<ActivityProfile>> {
    let mut scheduled_minutes: BTreeMap<&str, f64> = BTreeMap::new();
    for block in schedule
        .blocks()
        .iter()
        .filter(|b| b.camp_id == camp_id && !b.excluded)
    {
        *scheduled_minutes.entry(block.activity.as_str()).or_default() +=
            block.duration_s() as f64 / 60.0;
    }

    let mut risk_minutes: BTreeMap<&str, [f64; 4]> = BTreeMap::new();
    let mut counts: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
    for c in contacts {
        let Some(activity) = c.activity.as_deref() else {
            continue;
        };
        if !scheduled_minutes.contains_key(activity) {
            return Err(Error::Invalid(format!(
                "contact tagged with activity {activity:?} absent from the schedule of camp {camp_id}"
            )));
        }
        let idx = classify_contact(c, thresholds).index();
        risk_minutes.entry(activity).or_default()[idx] += c.duration_s as f64 / 60.0;
        counts.entry(activity).or_default()[idx] += 1;
    }

    Ok(scheduled_minutes
        .into_iter()
        .map(|(activity, sched)| {
            let minutes = risk_minutes.get(activity).copied().unwrap_or_default();
            let total: f64 = minutes.iter().sum();
            ActivityProfile {
                activity: activity.to_owned(),
                scheduled_minutes: sched,
                contact_minutes: total,
                bars: minutes.map(|m| m / sched),
                share_pct: (total > 0.0).then(|| minutes.map(|m| m / total * 100.0)),
                counts: counts.get(activity).copied().unwrap_or_default(),
            }
        })
        .collect())
}
