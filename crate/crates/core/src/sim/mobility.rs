//! Zone/waypoint mobility scripts driving the simulated devices.
//!
//! A script is a list of entries, each binding a device, a group, or
//! everyone to a rectangular zone for a time window. Device entries override
//! group entries, which override `all` entries. Within a window a device is
//! either parked at one spot (`static`) or walks between random waypoints
//! (`waypoint`); pair-affinity weights bias waypoint choice toward a
//! partner's current position to create realistic contact clusters.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{DeviceId, Roster};

/// Axis-aligned rectangle with positive area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || [x0, y0, x1, y1].iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "zone [{x0}, {y0}, {x1}, {y1}] must have positive area"
            )));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        self.x0 <= p.0 && p.0 <= self.x1 && self.y0 <= p.1 && p.1 <= self.y1
    }

    pub fn clamp(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0.clamp(self.x0, self.x1), p.1.clamp(self.y0, self.y1))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        (
            rng.random_range(self.x0..=self.x1),
            rng.random_range(self.y0..=self.y1),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Movement {
    Static,
    Waypoint,
}

/// Who an entry applies to, from most to least specific.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MobilityTarget {
    Device(DeviceId),
    Group(String),
    All,
}

#[derive(Debug, Clone)]
pub struct MobilityEntry {
    pub target: MobilityTarget,
    pub start: i64,
    pub end: i64,
    pub zone: Rect,
    pub movement: Movement,
    /// Walking speed for waypoint movement, m/s.
    pub speed_mps: f64,
    /// Dwell time range drawn on arrival at a waypoint, seconds. Long
    /// pauses model seated activities, short ones free running.
    pub pause_s: (i64, i64),
    /// Fixed spot for static entries; sampled from the zone when absent.
    pub position: Option<(f64, f64)>,
    /// (partner, weight): bias waypoint targets toward the partner.
    pub affinity: Vec<(DeviceId, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct MobilityScript {
    pub entries: Vec<MobilityEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    device: Option<String>,
    group: Option<String>,
    #[serde(default)]
    all: bool,
    start: i64,
    end: i64,
    zone: [f64; 4],
    movement: Movement,
    speed: Option<f64>,
    pause: Option<[i64; 2]>,
    position: Option<[f64; 2]>,
    affinity: Option<Vec<(String, f64)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    #[serde(default)]
    entry: Vec<RawEntry>,
}

impl MobilityScript {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawScript =
            toml::from_str(text).map_err(|e| Error::Config(format!("mobility script: {e}")))?;
        let mut entries = Vec::with_capacity(raw.entry.len());
        for (i, e) in raw.entry.into_iter().enumerate() {
            let label = format!("mobility entry #{}", i + 1);
            let target = match (&e.device, &e.group, e.all) {
                (Some(d), None, false) => MobilityTarget::Device(DeviceId::new(d.clone())),
                (None, Some(g), false) => MobilityTarget::Group(g.clone()),
                (None, None, true) => MobilityTarget::All,
                _ => {
                    return Err(Error::Config(format!(
                        "{label}: exactly one of device, group, all must be set"
                    )));
                }
            };
            if e.start >= e.end {
                return Err(Error::Config(format!(
                    "{label}: start {} >= end {}",
                    e.start, e.end
                )));
            }
            let zone = Rect::new(e.zone[0], e.zone[1], e.zone[2], e.zone[3])
                .map_err(|err| Error::Config(format!("{label}: {err}")))?;
            let speed = e.speed.unwrap_or(1.0);
            if !(speed > 0.0 && speed.is_finite()) {
                return Err(Error::Config(format!("{label}: speed must be positive")));
            }
            let pause_s = match e.pause {
                Some([lo, hi]) => {
                    if lo < 0 || hi < lo {
                        return Err(Error::Config(format!(
                            "{label}: pause range [{lo}, {hi}] is invalid"
                        )));
                    }
                    (lo, hi)
                }
                None => (10, 120),
            };
            let position = e.position.map(|p| (p[0], p[1]));
            if let Some(p) = position {
                if e.movement != Movement::Static {
                    return Err(Error::Config(format!(
                        "{label}: a fixed position requires static movement"
                    )));
                }
                if !zone.contains(p) {
                    return Err(Error::Config(format!(
                        "{label}: position ({}, {}) lies outside the zone",
                        p.0, p.1
                    )));
                }
            }
            let affinity = e
                .affinity
                .unwrap_or_default()
                .into_iter()
                .map(|(d, w)| {
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::Config(format!(
                            "{label}: affinity weight for {d} must be non-negative"
                        )));
                    }
                    Ok((DeviceId::new(d), w))
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(MobilityEntry {
                target,
                start: e.start,
                end: e.end,
                zone,
                movement: e.movement,
                speed_mps: speed,
                pause_s,
                position,
                affinity,
            });
        }
        Ok(MobilityScript { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Resolves the script for every roster device over `[start, end)`.
    ///
    /// Device entries shadow group entries, which shadow `all` entries. Two
    /// entries of the same specificity overlapping for one device, affinity
    /// partners missing from the roster, and coverage gaps are hard errors;
    /// the gap error names the first uncovered window.
    pub fn resolve(
        &self,
        roster: &Roster,
        start: i64,
        end: i64,
    ) -> Result<BTreeMap<DeviceId, Vec<ResolvedSegment>>> {
        for entry in &self.entries {
            for (partner, _) in &entry.affinity {
                if !roster.contains(partner) {
                    return Err(Error::Invalid(format!(
                        "mobility affinity references device {partner} not present in the roster"
                    )));
                }
            }
            if let MobilityTarget::Device(d) = &entry.target {
                if !roster.contains(d) {
                    return Err(Error::Invalid(format!(
                        "mobility entry references device {d} not present in the roster"
                    )));
                }
            }
        }

        let mut out = BTreeMap::new();
        for participant in roster.participants() {
            let device = &participant.device_id;
            // Applicable entries by specificity: 2 device, 1 group, 0 all.
            let mut applicable: Vec<(u8, usize)> = Vec::new();
            for (idx, entry) in self.entries.iter().enumerate() {
                let spec = match &entry.target {
                    MobilityTarget::Device(d) if d == device => Some(2),
                    MobilityTarget::Group(g) if *g == participant.group_id => Some(1),
                    MobilityTarget::All => Some(0),
                    _ => None,
                };
                if let Some(spec) = spec {
                    applicable.push((spec, idx));
                }
            }
            for level in 0..3u8 {
                let mut same: Vec<(i64, i64)> = applicable
                    .iter()
                    .filter(|&&(s, _)| s == level)
                    .map(|&(_, i)| (self.entries[i].start, self.entries[i].end))
                    .collect();
                same.sort_unstable();
                for w in same.windows(2) {
                    if w[1].0 < w[0].1 {
                        return Err(Error::Invalid(format!(
                            "mobility entries of equal specificity overlap for device {device}: \
                             [{}, {}) and [{}, {})",
                            w[0].0, w[0].1, w[1].0, w[1].1
                        )));
                    }
                }
            }

            // Sweep the horizon picking the most specific cover.
            let mut boundaries: Vec<i64> = vec![start, end];
            for &(_, idx) in &applicable {
                let e = &self.entries[idx];
                boundaries.push(e.start.clamp(start, end));
                boundaries.push(e.end.clamp(start, end));
            }
            boundaries.sort_unstable();
            boundaries.dedup();

            let mut segments: Vec<ResolvedSegment> = Vec::new();
            for w in boundaries.windows(2) {
                let (seg_start, seg_end) = (w[0], w[1]);
                if seg_start >= seg_end {
                    continue;
                }
                let covering = applicable
                    .iter()
                    .filter(|&&(_, idx)| {
                        let e = &self.entries[idx];
                        e.start <= seg_start && seg_end <= e.end
                    })
                    .max_by_key(|&&(spec, _)| spec);
                let Some(&(_, entry_idx)) = covering else {
                    return Err(Error::Invalid(format!(
                        "mobility gap for device {device}: [{seg_start}, {seg_end}) uncovered"
                    )));
                };
                match segments.last_mut() {
                    Some(last) if last.entry == entry_idx && last.end == seg_start => {
                        last.end = seg_end;
                    }
                    _ => segments.push(ResolvedSegment {
                        start: seg_start,
                        end: seg_end,
                        entry: entry_idx,
                    }),
                }
            }
            out.insert(device.clone(), segments);
        }
        Ok(out)
    }
}

/// One contiguous stretch of a device's timeline governed by one entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedSegment {
    pub start: i64,
    pub end: i64,
    /// Index into `MobilityScript::entries`.
    pub entry: usize,
}
