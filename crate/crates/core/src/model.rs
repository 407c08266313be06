//! Shared data model: devices, measurements, rosters, schedules, exemptions
//! and the four-way risk scale.
//!
//! Every structure here is immutable after construction and safe to share
//! across threads. Constructors validate the structural invariants; loaders in
//! [`crate::io`] parse the on-disk formats and delegate validation here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Devices further apart than this are not considered relevant and their
/// samples are discarded on load (mirrors the on-device discard rule).
pub const DEFAULT_MAX_RANGE_M: f64 = 10.0;

/// Opaque device identifier. Carries no personal information by design.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        DeviceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DeviceId {
    fn from(s: &str) -> Self {
        DeviceId(s.to_owned())
    }
}

/// An unordered device pair stored in canonical (sorted) order, so that the
/// same physical pair always hashes and compares identically no matter which
/// device reported the sample.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DevicePair {
    a: DeviceId,
    b: DeviceId,
}

impl DevicePair {
    /// Builds the canonical pair. Fails if both ids are the same device.
    pub fn new(x: DeviceId, y: DeviceId) -> Result<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(DevicePair { a: x, b: y }),
            std::cmp::Ordering::Greater => Ok(DevicePair { a: y, b: x }),
            std::cmp::Ordering::Equal => Err(Error::Invalid(format!(
                "measurement pairs a device with itself: {x}"
            ))),
        }
    }

    pub fn a(&self) -> &DeviceId {
        &self.a
    }

    pub fn b(&self) -> &DeviceId {
        &self.b
    }
}

impl fmt::Display for DevicePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// One timestamped pairwise distance sample, the atom of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeasurement {
    pub pair: DevicePair,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    /// Measured distance in meters.
    pub distance: f64,
}

impl RawMeasurement {
    pub fn new(pair: DevicePair, timestamp: i64, distance: f64) -> Result<Self> {
        if timestamp < 0 {
            return Err(Error::Invalid(format!(
                "negative timestamp {timestamp} for pair {pair}"
            )));
        }
        if !distance.is_finite() || distance < 0.0 {
            return Err(Error::Invalid(format!(
                "distance must be a non-negative finite number, got {distance}"
            )));
        }
        Ok(RawMeasurement {
            pair,
            timestamp,
            distance,
        })
    }

    /// UTC day index (days since the epoch) this sample falls on.
    pub fn day(&self) -> i64 {
        self.timestamp.div_euclid(86_400)
    }
}

/// Role of a participant inside a camp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Child,
    Educator,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Child => f.write_str("child"),
            Role::Educator => f.write_str("educator"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "child" => Ok(Role::Child),
            "educator" => Ok(Role::Educator),
            other => Err(format!("unknown role {other:?} (expected child|educator)")),
        }
    }
}

/// One device carrier: device, role, and the social bubble it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub device_id: DeviceId,
    pub role: Role,
    pub group_id: String,
    pub camp_id: String,
}

/// Validated device↔role↔group↔camp mapping.
#[derive(Debug, Clone)]
pub struct Roster {
    participants: Vec<Participant>,
    by_device: BTreeMap<DeviceId, usize>,
    camp_of_group: BTreeMap<String, String>,
}

impl Roster {
    /// Validates uniqueness of device ids and the group→camp mapping.
    pub fn new(participants: Vec<Participant>) -> Result<Self> {
        let mut by_device = BTreeMap::new();
        let mut camp_of_group: BTreeMap<String, String> = BTreeMap::new();
        for (idx, p) in participants.iter().enumerate() {
            if by_device.insert(p.device_id.clone(), idx).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate device id {} in roster",
                    p.device_id
                )));
            }
            match camp_of_group.get(&p.group_id) {
                None => {
                    camp_of_group.insert(p.group_id.clone(), p.camp_id.clone());
                }
                Some(camp) if *camp == p.camp_id => {}
                Some(camp) => {
                    return Err(Error::Invalid(format!(
                        "group {} appears in two camps ({} and {})",
                        p.group_id, camp, p.camp_id
                    )));
                }
            }
        }
        Ok(Roster {
            participants,
            by_device,
            camp_of_group,
        })
    }

    pub fn get(&self, device: &DeviceId) -> Option<&Participant> {
        self.by_device.get(device).map(|&i| &self.participants[i])
    }

    pub fn contains(&self, device: &DeviceId) -> bool {
        self.by_device.contains_key(device)
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    /// Device ids in sorted order.
    pub fn devices(&self) -> impl Iterator<Item = &DeviceId> {
        self.by_device.keys()
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn camp_of_group(&self, group_id: &str) -> Option<&str> {
        self.camp_of_group.get(group_id).map(String::as_str)
    }

    /// Camp ids in sorted order.
    pub fn camps(&self) -> BTreeSet<&str> {
        self.participants
            .iter()
            .map(|p| p.camp_id.as_str())
            .collect()
    }

    /// Group ids of one camp, sorted.
    pub fn groups_of_camp(&self, camp_id: &str) -> BTreeSet<&str> {
        self.camp_of_group
            .iter()
            .filter(|(_, camp)| camp.as_str() == camp_id)
            .map(|(group, _)| group.as_str())
            .collect()
    }
}

/// A pair for which distancing rules were waived (siblings, support
/// educators); contacts between them are excluded from the analyses.
pub type ExemptionPair = DevicePair;

/// Set of exempted pairs, validated against a roster.
#[derive(Debug, Clone, Default)]
pub struct ExemptionSet {
    pairs: BTreeSet<DevicePair>,
}

impl ExemptionSet {
    pub fn new(pairs: Vec<DevicePair>, roster: &Roster) -> Result<Self> {
        for pair in &pairs {
            for dev in [pair.a(), pair.b()] {
                if !roster.contains(dev) {
                    return Err(Error::Invalid(format!(
                        "exemption references device {dev} not present in the roster"
                    )));
                }
            }
        }
        Ok(ExemptionSet {
            pairs: pairs.into_iter().collect(),
        })
    }

    pub fn contains(&self, pair: &DevicePair) -> bool {
        self.pairs.contains(pair)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DevicePair> {
        self.pairs.iter()
    }
}

/// Where an activity takes place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Indoor,
    Outdoor,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Indoor => f.write_str("indoor"),
            Location::Outdoor => f.write_str("outdoor"),
        }
    }
}

impl FromStr for Location {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "indoor" => Ok(Location::Indoor),
            "outdoor" => Ok(Location::Outdoor),
            other => Err(format!(
                "unknown location {other:?} (expected indoor|outdoor)"
            )),
        }
    }
}

/// One scheduled activity for one group. The interval is half-open
/// `[start, end)` so adjacent blocks never double-assign a timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityBlock {
    pub camp_id: String,
    pub group_id: String,
    pub activity: String,
    pub location: Location,
    pub start: i64,
    pub end: i64,
    /// Blocks whose contacts are dropped from the analyses (devices piled up
    /// in the same place, not yet distributed, ...).
    pub excluded: bool,
}

impl ActivityBlock {
    pub fn contains(&self, timestamp: i64) -> bool {
        self.start <= timestamp && timestamp < self.end
    }

    pub fn duration_s(&self) -> i64 {
        self.end - self.start
    }
}

/// Validated, per-group time-indexed activity schedule.
#[derive(Debug, Clone)]
pub struct Schedule {
    blocks: Vec<ActivityBlock>,
    /// Per group: indices into `blocks`, sorted by start time.
    by_group: BTreeMap<String, Vec<usize>>,
}

impl Schedule {
    /// Validates block intervals, per-group non-overlap, and that every
    /// scheduled group exists in the roster.
    pub fn new(blocks: Vec<ActivityBlock>, roster: &Roster) -> Result<Self> {
        let mut by_group: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, block) in blocks.iter().enumerate() {
            if block.start >= block.end {
                return Err(Error::Invalid(format!(
                    "schedule block {:?} for group {} has start {} >= end {}",
                    block.activity, block.group_id, block.start, block.end
                )));
            }
            match roster.camp_of_group(&block.group_id) {
                None => {
                    return Err(Error::Invalid(format!(
                        "schedule references group {} not present in the roster",
                        block.group_id
                    )));
                }
                Some(camp) if camp == block.camp_id => {}
                Some(camp) => {
                    return Err(Error::Invalid(format!(
                        "schedule block {:?} places group {} in camp {} but the roster maps it to {}",
                        block.activity, block.group_id, block.camp_id, camp
                    )));
                }
            }
            by_group.entry(block.group_id.clone()).or_default().push(idx);
        }
        for indices in by_group.values_mut() {
            indices.sort_by_key(|&i| (blocks[i].start, blocks[i].end));
            for w in indices.windows(2) {
                let (prev, next) = (&blocks[w[0]], &blocks[w[1]]);
                if next.start < prev.end {
                    return Err(Error::Invalid(format!(
                        "overlapping blocks for group {}: {:?} [{}, {}) and {:?} [{}, {})",
                        prev.group_id,
                        prev.activity,
                        prev.start,
                        prev.end,
                        next.activity,
                        next.start,
                        next.end
                    )));
                }
            }
        }
        Ok(Schedule { blocks, by_group })
    }

    /// The unique block of `group_id` containing `timestamp`, if any.
    /// Intervals are half-open, so a timestamp exactly at a block's end falls
    /// outside it.
    pub fn activity_at(&self, group_id: &str, timestamp: i64) -> Option<&ActivityBlock> {
        let indices = self.by_group.get(group_id)?;
        // Blocks are sorted and disjoint: binary-search the last start <= t.
        let pos = indices.partition_point(|&i| self.blocks[i].start <= timestamp);
        if pos == 0 {
            return None;
        }
        let block = &self.blocks[indices[pos - 1]];
        block.contains(timestamp).then_some(block)
    }

    pub fn blocks(&self) -> &[ActivityBlock] {
        &self.blocks
    }

    pub fn groups(&self) -> impl Iterator<Item = &str> {
        self.by_group.keys().map(String::as_str)
    }

    /// Distinct activity names of one camp, with their exclusion status.
    /// An activity is excluded only if every one of its blocks is excluded.
    pub fn activities_of_camp(&self, camp_id: &str) -> BTreeMap<&str, bool> {
        let mut out: BTreeMap<&str, bool> = BTreeMap::new();
        for block in self.blocks.iter().filter(|b| b.camp_id == camp_id) {
            out.entry(block.activity.as_str())
                .and_modify(|all_excluded| *all_excluded &= block.excluded)
                .or_insert(block.excluded);
        }
        out
    }
}

/// Contagion-risk level of a contact. Ordered from lowest to highest so the
/// "never lowers the risk" monotonicity checks can use plain comparisons.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum RiskLevel {
    Low,
    MediumLow,
    MediumHigh,
    High,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 4] = [
        RiskLevel::High,
        RiskLevel::MediumHigh,
        RiskLevel::MediumLow,
        RiskLevel::Low,
    ];

    /// Stable machine-readable name, used in CSV columns and JSON keys.
    pub fn key(&self) -> &'static str {
        match self {
            RiskLevel::High => "high",
            RiskLevel::MediumHigh => "medium_high",
            RiskLevel::MediumLow => "medium_low",
            RiskLevel::Low => "low",
        }
    }

    /// Human-readable label for text tables.
    pub fn label(&self) -> &'static str {
        match self {
            RiskLevel::High => "High",
            RiskLevel::MediumHigh => "Medium high",
            RiskLevel::MediumLow => "Medium low",
            RiskLevel::Low => "Low",
        }
    }

    /// Index into fixed-size per-level arrays, High first (presentation
    /// order of the risk ladder).
    pub fn index(&self) -> usize {
        match self {
            RiskLevel::High => 0,
            RiskLevel::MediumHigh => 1,
            RiskLevel::MediumLow => 2,
            RiskLevel::Low => 3,
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for RiskLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "high" => Ok(RiskLevel::High),
            "medium_high" => Ok(RiskLevel::MediumHigh),
            "medium_low" => Ok(RiskLevel::MediumLow),
            "low" => Ok(RiskLevel::Low),
            other => Err(format!("unknown risk level {other:?}")),
        }
    }
}

/// Sorts measurements into the canonical (pair, timestamp) order used by the
/// on-disk format and the aggregation pipeline.
pub fn sort_measurements(measurements: &mut [RawMeasurement]) {
    measurements.sort_by(|x, y| {
        (&x.pair, x.timestamp)
            .cmp(&(&y.pair, y.timestamp))
            .then(x.distance.total_cmp(&y.distance))
    });
}
