//! Cleaning of raw measurement logs: restriction to declared active windows,
//! removal of day-start constant-distance runs (devices still in storage),
//! and removal of samples from declared absences.
//!
//! The filters only ever remove rows; they never modify or invent samples.
//! They are applied in a fixed order — active window, absence, constant run —
//! and each removed row is attributed to exactly one rule. Running the full
//! pass twice yields the same result as running it once.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DeviceId, RawMeasurement, Roster};

/// Per-camp list of time intervals during which activities took place.
/// Intervals are half-open `[start, end)`.
#[derive(Debug, Clone, Default)]
pub struct ActiveWindows {
    by_camp: BTreeMap<String, Vec<(i64, i64)>>,
    n_windows: usize,
}

impl ActiveWindows {
    /// Validates interval bounds and per-camp disjointness.
    pub fn new(windows: Vec<(String, i64, i64)>) -> Result<Self> {
        let mut by_camp: BTreeMap<String, Vec<(i64, i64)>> = BTreeMap::new();
        let n_windows = windows.len();
        for (camp, start, end) in windows {
            if start >= end {
                return Err(Error::Invalid(format!(
                    "active window for camp {camp} has start {start} >= end {end}"
                )));
            }
            by_camp.entry(camp).or_default().push((start, end));
        }
        for (camp, intervals) in &mut by_camp {
            intervals.sort_unstable();
            for w in intervals.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(Error::Invalid(format!(
                        "overlapping active windows for camp {camp}: [{}, {}) and [{}, {})",
                        w[0].0, w[0].1, w[1].0, w[1].1
                    )));
                }
            }
        }
        Ok(ActiveWindows { by_camp, n_windows })
    }

    pub fn is_empty(&self) -> bool {
        self.n_windows == 0
    }

    pub fn len(&self) -> usize {
        self.n_windows
    }

    /// True if `timestamp` lies inside an active interval of `camp_id`.
    pub fn contains(&self, camp_id: &str, timestamp: i64) -> bool {
        let Some(intervals) = self.by_camp.get(camp_id) else {
            return false;
        };
        let pos = intervals.partition_point(|&(start, _)| start <= timestamp);
        pos > 0 && timestamp < intervals[pos - 1].1
    }

    pub fn camps(&self) -> impl Iterator<Item = &str> {
        self.by_camp.keys().map(String::as_str)
    }
}

/// Declared per-device absence intervals (half-open).
#[derive(Debug, Clone, Default)]
pub struct Absences {
    by_device: BTreeMap<DeviceId, Vec<(i64, i64)>>,
}

impl Absences {
    /// Validates bounds and roster membership; overlapping or touching
    /// intervals for one device are merged.
    pub fn new(records: Vec<(DeviceId, i64, i64)>, roster: &Roster) -> Result<Self> {
        let mut by_device: BTreeMap<DeviceId, Vec<(i64, i64)>> = BTreeMap::new();
        for (device, start, end) in records {
            if start >= end {
                return Err(Error::Invalid(format!(
                    "absence for device {device} has start {start} >= end {end}"
                )));
            }
            if !roster.contains(&device) {
                return Err(Error::Invalid(format!(
                    "absence references device {device} not present in the roster"
                )));
            }
            by_device.entry(device).or_default().push((start, end));
        }
        for intervals in by_device.values_mut() {
            intervals.sort_unstable();
            let mut merged: Vec<(i64, i64)> = Vec::with_capacity(intervals.len());
            for &(start, end) in intervals.iter() {
                match merged.last_mut() {
                    Some(last) if start <= last.1 => last.1 = last.1.max(end),
                    _ => merged.push((start, end)),
                }
            }
            *intervals = merged;
        }
        Ok(Absences { by_device })
    }

    pub fn is_absent(&self, device: &DeviceId, timestamp: i64) -> bool {
        let Some(intervals) = self.by_device.get(device) else {
            return false;
        };
        let pos = intervals.partition_point(|&(start, _)| start <= timestamp);
        pos > 0 && timestamp < intervals[pos - 1].1
    }

    pub fn is_empty(&self) -> bool {
        self.by_device.is_empty()
    }

    pub fn devices(&self) -> impl Iterator<Item = &DeviceId> {
        self.by_device.keys()
    }
}

/// Knobs of the constant-run rule. The thresholds are this toolkit's own
/// defaults; the underlying criterion (constant distances at the beginning of
/// the day mean the devices are still in storage) is parameterized so studies
/// can tune them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct PreprocessParams {
    /// Minimum length of a constant prefix before it is considered spurious.
    #[serde(default = "default_min_run")]
    pub min_run: usize,
    /// Band around the run's first distance that still counts as "constant".
    #[serde(default = "default_epsilon")]
    pub epsilon_m: f64,
    /// How far after the day's first sample a prefix may start and still be
    /// attributed to storage.
    #[serde(default = "default_margin")]
    pub margin_s: i64,
}

fn default_min_run() -> usize {
    5
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_margin() -> i64 {
    900
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            min_run: default_min_run(),
            epsilon_m: default_epsilon(),
            margin_s: default_margin(),
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_run < 2 {
            return Err(Error::Config(format!(
                "min_run must be at least 2, got {}",
                self.min_run
            )));
        }
        if !self.epsilon_m.is_finite() || self.epsilon_m < 0.0 {
            return Err(Error::Config(format!(
                "epsilon_m must be non-negative, got {}",
                self.epsilon_m
            )));
        }
        if self.margin_s < 0 {
            return Err(Error::Config(format!(
                "margin_s must be non-negative, got {}",
                self.margin_s
            )));
        }
        Ok(())
    }
}

/// Per-rule drop accounting for one preprocessing pass.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DropStats {
    pub active_window: usize,
    pub absence: usize,
    pub constant_run: usize,
    /// Active-window drops per UTC day (days since epoch → count).
    pub active_window_by_day: BTreeMap<i64, usize>,
    pub warnings: Vec<String>,
}

impl DropStats {
    pub fn total(&self) -> usize {
        self.active_window + self.absence + self.constant_run
    }
}

/// Keeps only measurements whose timestamp falls inside an active interval of
/// the camp the pair belongs to (resolved through `roster` via the first
/// device of the canonical pair). An empty window list drops everything and
/// records a warning.
pub fn filter_active(
    measurements: Vec<RawMeasurement>,
    windows: &ActiveWindows,
    roster: &Roster,
    stats: &mut DropStats,
) -> Vec<RawMeasurement> {
    if windows.is_empty() {
        if !measurements.is_empty() {
            stats.warnings.push(format!(
                "active-window list is empty: all {} measurements dropped",
                measurements.len()
            ));
        }
        for m in &measurements {
            stats.active_window += 1;
            *stats.active_window_by_day.entry(m.day()).or_default() += 1;
        }
        return Vec::new();
    }
    measurements
        .into_iter()
        .filter(|m| {
            let camp = roster
                .get(m.pair.a())
                .or_else(|| roster.get(m.pair.b()))
                .map(|p| p.camp_id.as_str());
            let keep = camp.is_some_and(|c| windows.contains(c, m.timestamp));
            if !keep {
                stats.active_window += 1;
                *stats.active_window_by_day.entry(m.day()).or_default() += 1;
            }
            keep
        })
        .collect()
}

/// Removes measurements involving a device inside one of its declared absence
/// intervals. A row with both endpoints absent is removed (and counted) once.
pub fn drop_absences(
    measurements: Vec<RawMeasurement>,
    absences: &Absences,
    stats: &mut DropStats,
) -> Vec<RawMeasurement> {
    measurements
        .into_iter()
        .filter(|m| {
            let drop = absences.is_absent(m.pair.a(), m.timestamp)
                || absences.is_absent(m.pair.b(), m.timestamp);
            if drop {
                stats.absence += 1;
            }
            !drop
        })
        .collect()
}

/// Removes spurious constant-distance prefixes.
///
/// For each pair and each UTC day, the maximal prefix of the pair's samples
/// whose distances all lie within `epsilon_m` of the prefix's first distance
/// is removed when it is at least `min_run` samples long and starts within
/// `margin_s` of the day's first sample (taken over the whole data set, so a
/// run beginning mid-day never qualifies). Removal repeats until nothing more
/// qualifies, which makes the rule idempotent: the surviving set is a fixed
/// point. Interior runs are never touched — children can be still.
pub fn drop_constant_runs(
    measurements: Vec<RawMeasurement>,
    params: &PreprocessParams,
    stats: &mut DropStats,
) -> Vec<RawMeasurement> {
    let mut measurements = measurements;
    crate::model::sort_measurements(&mut measurements);
    let mut alive: Vec<bool> = vec![true; measurements.len()];

    loop {
        // Anchor: first surviving sample of each day, over all pairs.
        let mut day_start: BTreeMap<i64, i64> = BTreeMap::new();
        for (i, m) in measurements.iter().enumerate() {
            if alive[i] {
                let entry = day_start.entry(m.day()).or_insert(m.timestamp);
                *entry = (*entry).min(m.timestamp);
            }
        }

        let mut removed_any = false;
        let mut i = 0;
        while i < measurements.len() {
            // One (pair, day) segment of surviving samples.
            let pair = &measurements[i].pair;
            let day = measurements[i].day();
            let mut segment: Vec<usize> = Vec::new();
            let mut j = i;
            while j < measurements.len()
                && measurements[j].pair == *pair
                && measurements[j].day() == day
            {
                if alive[j] {
                    segment.push(j);
                }
                j += 1;
            }
            i = j;

            let Some(&first) = segment.first() else {
                continue;
            };
            let anchor = day_start[&day];
            if measurements[first].timestamp > anchor + params.margin_s {
                continue;
            }
            let base = measurements[first].distance;
            let run_len = segment
                .iter()
                .take_while(|&&k| (measurements[k].distance - base).abs() <= params.epsilon_m)
                .count();
            if run_len >= params.min_run {
                for &k in &segment[..run_len] {
                    alive[k] = false;
                }
                stats.constant_run += run_len;
                removed_any = true;
            }
        }

        if !removed_any {
            break;
        }
    }

    measurements
        .into_iter()
        .zip(alive)
        .filter_map(|(m, keep)| keep.then_some(m))
        .collect()
}

/// Outcome of one full preprocessing pass.
#[derive(Debug, Clone)]
pub struct PreprocessOutcome {
    pub measurements: Vec<RawMeasurement>,
    pub stats: DropStats,
}

/// Runs the three filters in the documented order. `windows` and `absences`
/// are optional stages; the constant-run rule always runs.
pub fn preprocess(
    measurements: Vec<RawMeasurement>,
    windows: Option<&ActiveWindows>,
    absences: Option<&Absences>,
    params: &PreprocessParams,
    roster: &Roster,
) -> Result<PreprocessOutcome> {
    params.validate()?;
    let mut stats = DropStats::default();
    let mut measurements = measurements;
    crate::model::sort_measurements(&mut measurements);
    if let Some(w) = windows {
        measurements = filter_active(measurements, w, roster, &mut stats);
    }
    if let Some(a) = absences {
        measurements = drop_absences(measurements, a, &mut stats);
    }
    let measurements = drop_constant_runs(measurements, params, &mut stats);
    Ok(PreprocessOutcome {
        measurements,
        stats,
    })
}

/// Per-camp raw-vs-filtered statistics with per-rule drop counts.
#[derive(Debug, Clone, Serialize)]
pub struct PreprocessReport {
    pub camps: Vec<CampPreprocessRow>,
    pub drops: DropStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampPreprocessRow {
    pub camp_id: String,
    /// First and final UTC day with raw data, as YYYY-MM-DD.
    pub initial_day: Option<String>,
    pub final_day: Option<String>,
    /// Devices appearing in the raw data.
    pub unique_users: usize,
    pub raw_measures: usize,
    pub filtered_measures: usize,
}

fn day_string(timestamp: i64) -> String {
    chrono::DateTime::from_timestamp(timestamp, 0)
        .map(|dt| dt.date_naive().to_string())
        .unwrap_or_else(|| format!("day {}", timestamp.div_euclid(86_400)))
}

/// Builds the per-camp before/after summary. Measurements whose devices are
/// missing from the roster are grouped under a `(unknown)` camp so the totals
/// still add up.
pub fn preprocess_report(
    before: &[RawMeasurement],
    after: &[RawMeasurement],
    stats: &DropStats,
    roster: &Roster,
) -> PreprocessReport {
    #[derive(Default)]
    struct Acc {
        first: Option<i64>,
        last: Option<i64>,
        devices: std::collections::BTreeSet<DeviceId>,
        raw: usize,
        filtered: usize,
    }
    let camp_of = |m: &RawMeasurement| -> String {
        roster
            .get(m.pair.a())
            .or_else(|| roster.get(m.pair.b()))
            .map(|p| p.camp_id.clone())
            .unwrap_or_else(|| "(unknown)".to_owned())
    };
    let mut acc: BTreeMap<String, Acc> = BTreeMap::new();
    for m in before {
        let entry = acc.entry(camp_of(m)).or_default();
        entry.raw += 1;
        entry.first = Some(entry.first.map_or(m.timestamp, |t| t.min(m.timestamp)));
        entry.last = Some(entry.last.map_or(m.timestamp, |t| t.max(m.timestamp)));
        entry.devices.insert(m.pair.a().clone());
        entry.devices.insert(m.pair.b().clone());
    }
    for m in after {
        acc.entry(camp_of(m)).or_default().filtered += 1;
    }
    PreprocessReport {
        camps: acc
            .into_iter()
            .map(|(camp_id, a)| CampPreprocessRow {
                camp_id,
                initial_day: a.first.map(day_string),
                final_day: a.last.map(day_string),
                unique_users: a.devices.len(),
                raw_measures: a.raw,
                filtered_measures: a.filtered,
            })
            .collect(),
        drops: stats.clone(),
    }
}
