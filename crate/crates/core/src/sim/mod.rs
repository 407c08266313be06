//! Discrete-event simulator of the dual-radio proximity system.
//!
//! A single-threaded loop over a global one-second clock drives mobility,
//! the inhibitor sleep protocol, per-epoch neighbor discovery and periodic
//! slot-coordinated ranging windows. All randomness flows from one seeded
//! generator, so identical (seed, config, inputs) produce byte-identical
//! logs. Parallelism, if any, belongs across independent runs with distinct
//! seeds, never inside one run.

pub mod mobility;
pub mod radio;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DevicePair, DeviceId, RawMeasurement, Roster, Schedule};

use mobility::{MobilityScript, Movement, Rect, ResolvedSegment};
use radio::{discovery_step, ranging_round, NodeState};

/// Protocol, noise and inhibitor parameters of one simulation run.
///
/// `detection_range_m` doubles as the on-device discard cutoff: a device
/// neither discovers neighbors beyond it nor keeps measurements above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    /// Simulated horizon, epoch seconds UTC, half-open.
    pub start: i64,
    pub end: i64,
    /// Discovery epoch length.
    #[serde(default = "default_epoch")]
    pub epoch_length_s: i64,
    /// Probability that an in-range awake pair discovers each other within
    /// one epoch.
    #[serde(default = "default_discovery_probability")]
    pub discovery_probability: f64,
    /// Neighbor-table capacity; the discovery SLA holds up to this count.
    #[serde(default = "default_max_neighbors")]
    pub max_neighbors: usize,
    #[serde(default = "default_ranging_period")]
    pub ranging_period_s: i64,
    /// Length of the per-node ranging window at the start of each period.
    #[serde(default = "default_ranging_window")]
    pub ranging_window_s: f64,
    /// Width of one responder slot inside the window.
    #[serde(default = "default_slot_width")]
    pub slot_width_s: f64,
    #[serde(default = "default_noise_sigma")]
    pub range_noise_sigma_m: f64,
    #[serde(default = "default_detection_range")]
    pub detection_range_m: f64,
    /// Responder reply delay in the two-packet exchange.
    #[serde(default = "default_reply_delay")]
    pub reply_delay_s: f64,
    /// How long a node sleeps after detecting the inhibitor.
    #[serde(default = "default_inhibitor_sleep")]
    pub inhibitor_sleep_s: i64,
    /// Intervals (half-open) during which the inhibitor beacon is powered.
    #[serde(default)]
    pub inhibitor: Vec<(i64, i64)>,
}

fn default_epoch() -> i64 {
    30
}
fn default_discovery_probability() -> f64 {
    0.95
}
fn default_max_neighbors() -> usize {
    20
}
fn default_ranging_period() -> i64 {
    30
}
fn default_ranging_window() -> f64 {
    20.0
}
fn default_slot_width() -> f64 {
    1.0
}
fn default_noise_sigma() -> f64 {
    0.1
}
fn default_detection_range() -> f64 {
    crate::model::DEFAULT_MAX_RANGE_M
}
fn default_reply_delay() -> f64 {
    3.0e-4
}
fn default_inhibitor_sleep() -> i64 {
    300
}

impl SimConfig {
    /// A config with all defaults, for tests and examples.
    pub fn for_tests(seed: u64, start: i64, end: i64) -> Self {
        SimConfig {
            seed,
            start,
            end,
            epoch_length_s: default_epoch(),
            discovery_probability: default_discovery_probability(),
            max_neighbors: default_max_neighbors(),
            ranging_period_s: default_ranging_period(),
            ranging_window_s: default_ranging_window(),
            slot_width_s: default_slot_width(),
            range_noise_sigma_m: default_noise_sigma(),
            detection_range_m: default_detection_range(),
            reply_delay_s: default_reply_delay(),
            inhibitor_sleep_s: default_inhibitor_sleep(),
            inhibitor: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.start >= self.end {
            return Err(Error::Config(format!(
                "simulation start {} >= end {}",
                self.start, self.end
            )));
        }
        if !(self.discovery_probability > 0.0 && self.discovery_probability <= 1.0) {
            return Err(Error::Config(format!(
                "discovery_probability must be in (0, 1], got {}",
                self.discovery_probability
            )));
        }
        if self.epoch_length_s <= 0 || self.ranging_period_s <= 0 || self.inhibitor_sleep_s <= 0 {
            return Err(Error::Config(
                "epoch_length_s, ranging_period_s and inhibitor_sleep_s must be positive".into(),
            ));
        }
        if !(self.slot_width_s > 0.0 && self.ranging_window_s > 0.0) {
            return Err(Error::Config(
                "slot_width_s and ranging_window_s must be positive".into(),
            ));
        }
        if self.slot_width_s * self.max_neighbors as f64 > self.ranging_window_s {
            return Err(Error::Config(format!(
                "slot_width_s x max_neighbors ({} x {}) exceeds ranging_window_s {}",
                self.slot_width_s, self.max_neighbors, self.ranging_window_s
            )));
        }
        if self.ranging_window_s > self.ranging_period_s as f64 {
            return Err(Error::Config(format!(
                "ranging_window_s {} exceeds ranging_period_s {}",
                self.ranging_window_s, self.ranging_period_s
            )));
        }
        if self.max_neighbors == 0 || self.max_neighbors > u8::MAX as usize {
            return Err(Error::Config(format!(
                "max_neighbors must be in [1, 255], got {}",
                self.max_neighbors
            )));
        }
        if !(self.range_noise_sigma_m >= 0.0 && self.range_noise_sigma_m.is_finite()) {
            return Err(Error::Config(format!(
                "range_noise_sigma_m must be non-negative, got {}",
                self.range_noise_sigma_m
            )));
        }
        if !(self.detection_range_m > 0.0 && self.detection_range_m.is_finite()) {
            return Err(Error::Config(format!(
                "detection_range_m must be positive, got {}",
                self.detection_range_m
            )));
        }
        if !(self.reply_delay_s > 0.0 && self.reply_delay_s.is_finite()) {
            return Err(Error::Config(format!(
                "reply_delay_s must be positive, got {}",
                self.reply_delay_s
            )));
        }
        for &(s, e) in &self.inhibitor {
            if s >= e {
                return Err(Error::Config(format!(
                    "inhibitor interval [{s}, {e}) is empty"
                )));
            }
        }
        Ok(())
    }

    fn inhibitor_active(&self, now: i64) -> bool {
        self.inhibitor.iter().any(|&(s, e)| s <= now && now < e)
    }
}

/// True pairwise distance at one ranging event.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRow {
    pub pair: DevicePair,
    pub timestamp: i64,
    pub true_distance_m: f64,
}

/// Writes the ground-truth trace CSV.
pub fn write_ground_truth<W: std::io::Write>(out: W, rows: &[GroundTruthRow]) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(out);
    (|| -> std::io::Result<()> {
        writeln!(w, "{}", crate::io::GROUND_TRUTH_HEADER.join(","))?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.pair.a(),
                r.pair.b(),
                r.timestamp,
                r.true_distance_m
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io("<writer>", e))
}

/// Counters and traces summarizing one run.
#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub seed: u64,
    pub start: i64,
    pub end: i64,
    pub devices: usize,
    pub epochs: u64,
    pub discovered_pairs: u64,
    pub saturation_events: u64,
    pub ranging_rounds: u64,
    pub measurements: usize,
    pub ground_truth_rows: usize,
    pub dropped_over_range: usize,
    /// Group-level mobility windows that do not coincide with a schedule
    /// block of their group.
    pub mobility_alignment_warnings: usize,
    pub warnings: Vec<String>,
    /// Per device: closed sleep intervals [start, end).
    pub sleep_intervals: BTreeMap<String, Vec<(i64, i64)>>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    /// Sorted by (pair, timestamp), ready for the measurement CSV.
    pub measurements: Vec<RawMeasurement>,
    /// Sorted the same way; one row per ranging exchange, kept even when the
    /// noisy measurement was discarded at the source.
    pub ground_truth: Vec<GroundTruthRow>,
    pub summary: SimSummary,
}

struct DeviceRuntime {
    segments: Vec<ResolvedSegment>,
    cursor: Option<usize>,
    waypoint: Option<(f64, f64)>,
    /// Dwelling at a reached waypoint until this time.
    pause_until: Option<i64>,
    sleep_started: Option<i64>,
}

/// Runs one simulation. The schedule is used only to cross-check that
/// group-level mobility windows align with scheduled blocks (misalignments
/// become warnings in the summary, not errors).
pub fn run_simulation(
    cfg: &SimConfig,
    roster: &Roster,
    schedule: &Schedule,
    mobility: &MobilityScript,
) -> Result<SimOutput> {
    cfg.validate()?;
    let resolved = mobility.resolve(roster, cfg.start, cfg.end)?;

    let device_index: BTreeMap<&DeviceId, usize> = roster
        .devices()
        .enumerate()
        .map(|(i, d)| (d, i))
        .collect();
    let mut nodes: Vec<NodeState> = roster
        .devices()
        .map(|d| NodeState::new(d.clone(), (0.0, 0.0)))
        .collect();
    let mut runtimes: Vec<DeviceRuntime> = roster
        .devices()
        .map(|d| DeviceRuntime {
            segments: resolved[d].clone(),
            cursor: None,
            waypoint: None,
            pause_until: None,
            sleep_started: None,
        })
        .collect();

    // Pre-resolve affinity device ids to node indices.
    let affinity_idx: Vec<Vec<(usize, f64)>> = mobility
        .entries
        .iter()
        .map(|e| {
            e.affinity
                .iter()
                .map(|(d, w)| (device_index[d], *w))
                .collect()
        })
        .collect();

    let mut warnings = Vec::new();
    let mut alignment_warnings = 0usize;
    for entry in &mobility.entries {
        if let mobility::MobilityTarget::Group(group) = &entry.target {
            let aligned = schedule
                .blocks()
                .iter()
                .any(|b| b.group_id == *group && b.start == entry.start && b.end == entry.end);
            if !aligned {
                alignment_warnings += 1;
                if warnings.len() < 8 {
                    warnings.push(format!(
                        "mobility window [{}, {}) for group {group} matches no schedule block",
                        entry.start, entry.end
                    ));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut measurements: Vec<RawMeasurement> = Vec::new();
    let mut ground_truth: Vec<GroundTruthRow> = Vec::new();
    let mut sleep_intervals: BTreeMap<String, Vec<(i64, i64)>> = BTreeMap::new();
    let mut epochs = 0u64;
    let mut discovered_pairs = 0u64;
    let mut saturation_events = 0u64;
    let mut ranging_rounds = 0u64;
    let mut dropped_over_range = 0usize;

    for now in cfg.start..cfg.end {
        // 1. Mobility: advance every device by one second, entering new
        //    segments as their windows open.
        for i in 0..nodes.len() {
            let rt = &mut runtimes[i];
            let seg_idx = match rt.cursor {
                Some(c) if now < rt.segments[c].end => Some(c),
                _ => {
                    let next = rt
                        .segments
                        .iter()
                        .position(|s| s.start <= now && now < s.end);
                    if let Some(n) = next {
                        // Segment entry.
                        let entry = &mobility.entries[rt.segments[n].entry];
                        match entry.movement {
                            Movement::Static => {
                                nodes[i].position = entry
                                    .position
                                    .unwrap_or_else(|| entry.zone.sample(&mut rng));
                            }
                            Movement::Waypoint => {
                                if rt.cursor.is_none() {
                                    nodes[i].position = entry.zone.sample(&mut rng);
                                }
                            }
                        }
                        rt.waypoint = None;
                        rt.pause_until = None;
                        rt.cursor = Some(n);
                    }
                    next
                }
            };
            let Some(seg_idx) = seg_idx else { continue };
            let entry_idx = rt.segments[seg_idx].entry;
            let entry = &mobility.entries[entry_idx];
            if entry.movement == Movement::Waypoint {
                if let Some(until) = rt.pause_until {
                    if now < until {
                        continue;
                    }
                    rt.pause_until = None;
                }
                let target = match rt.waypoint {
                    Some(t) => t,
                    None => {
                        let t = pick_waypoint(
                            &entry.zone,
                            &affinity_idx[entry_idx],
                            &nodes,
                            &mut rng,
                        );
                        rt.waypoint = Some(t);
                        t
                    }
                };
                let pos = nodes[i].position;
                let delta = (target.0 - pos.0, target.1 - pos.1);
                let dist = delta.0.hypot(delta.1);
                let step = entry.speed_mps; // dt = 1 s
                if dist <= step {
                    nodes[i].position = target;
                    rt.waypoint = None;
                    let (lo, hi) = entry.pause_s;
                    rt.pause_until = Some(now + rng.random_range(lo..=hi));
                } else {
                    nodes[i].position =
                        (pos.0 + delta.0 / dist * step, pos.1 + delta.1 / dist * step);
                }
            }
        }

        // 2. Wake checks: a node whose sleep expired re-checks the inhibitor
        //    immediately — detected again means another sleep cycle.
        let inhibitor_on = cfg.inhibitor_active(now);
        for (i, node) in nodes.iter_mut().enumerate() {
            if let Some(wake) = node.asleep_until {
                if now >= wake {
                    if inhibitor_on {
                        node.asleep_until = Some(now + cfg.inhibitor_sleep_s);
                    } else {
                        node.asleep_until = None;
                        if let Some(started) = runtimes[i].sleep_started.take() {
                            sleep_intervals
                                .entry(node.device.to_string())
                                .or_default()
                                .push((started, now));
                        }
                    }
                }
            }
        }

        // 3. Sleep onset: awake nodes hearing the inhibitor go to sleep
        //    before doing any discovery or ranging this second.
        if inhibitor_on {
            for (i, node) in nodes.iter_mut().enumerate() {
                if node.is_awake() {
                    node.asleep_until = Some(now + cfg.inhibitor_sleep_s);
                    runtimes[i].sleep_started = Some(now);
                }
            }
        }

        // 4. Neighbor discovery at epoch boundaries.
        if (now - cfg.start) % cfg.epoch_length_s == 0 {
            epochs += 1;
            let stats = discovery_step(&mut nodes, cfg, &mut rng);
            discovered_pairs += stats.discovered_pairs;
            saturation_events += stats.saturation_events;
        }

        // 5. Ranging windows at period boundaries.
        if (now - cfg.start) % cfg.ranging_period_s == 0 {
            for responder in 0..nodes.len() {
                if !nodes[responder].is_awake() || nodes[responder].neighbors.is_empty() {
                    continue;
                }
                ranging_rounds += 1;
                let out = ranging_round(responder, &nodes, cfg, now, &mut rng);
                dropped_over_range += out.dropped_over_range;
                measurements.extend(out.measurements);
                ground_truth.extend(out.ground_truth);
            }
        }
    }

    // Close sleep intervals still open at the horizon.
    for (i, node) in nodes.iter().enumerate() {
        if let Some(started) = runtimes[i].sleep_started {
            sleep_intervals
                .entry(node.device.to_string())
                .or_default()
                .push((started, cfg.end));
        }
    }

    crate::model::sort_measurements(&mut measurements);
    ground_truth.sort_by(|x, y| {
        (&x.pair, x.timestamp)
            .cmp(&(&y.pair, y.timestamp))
            .then(x.true_distance_m.total_cmp(&y.true_distance_m))
    });

    let summary = SimSummary {
        seed: cfg.seed,
        start: cfg.start,
        end: cfg.end,
        devices: nodes.len(),
        epochs,
        discovered_pairs,
        saturation_events,
        ranging_rounds,
        measurements: measurements.len(),
        ground_truth_rows: ground_truth.len(),
        dropped_over_range,
        mobility_alignment_warnings: alignment_warnings,
        warnings,
        sleep_intervals,
    };
    Ok(SimOutput {
        measurements,
        ground_truth,
        summary,
    })
}

fn pick_waypoint<R: rand::Rng>(
    zone: &Rect,
    affinity: &[(usize, f64)],
    nodes: &[NodeState],
    rng: &mut R,
) -> (f64, f64) {
    let total: f64 = 1.0 + affinity.iter().map(|&(_, w)| w).sum::<f64>();
    let mut x = rng.random_range(0.0..total);
    if x < 1.0 {
        return zone.sample(rng);
    }
    x -= 1.0;
    for &(partner, w) in affinity {
        if x < w {
            // Aim for a ring just outside personal space around the partner.
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let radius = rng.random_range(0.4..1.2);
            let p = nodes[partner].position;
            return zone.clamp((p.0 + radius * angle.cos(), p.1 + radius * angle.sin()));
        }
        x -= w;
    }
    zone.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Participant, Role};

    fn two_node_roster() -> Roster {
        Roster::new(
            ["n1", "n2"]
                .iter()
                .map(|id| Participant {
                    device_id: DeviceId::new(*id),
                    role: Role::Child,
                    group_id: "G1".to_owned(),
                    camp_id: "camp-t".to_owned(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn empty_schedule(roster: &Roster) -> Schedule {
        Schedule::new(Vec::new(), roster).unwrap()
    }

    fn static_pair_script(separation: f64) -> MobilityScript {
        let text = format!(
            r#"
            [[entry]]
            device = "n1"
            start = 0
            end = 100000
            zone = [-1.0, -1.0, 1.0, 1.0]
            movement = "static"
            position = [0.0, 0.0]

            [[entry]]
            device = "n2"
            start = 0
            end = 100000
            zone = [{lo}, -1.0, {hi}, 1.0]
            movement = "static"
            position = [{sep}, 0.0]
            "#,
            lo = separation - 1.0,
            hi = separation + 1.0,
            sep = separation,
        );
        MobilityScript::from_toml_str(&text).unwrap()
    }

    #[test]
    fn static_pair_noiseless_ten_minutes() {
        // Two static nodes 1 m apart, noise 0, 10 minutes: one ranging per
        // direction per 30 s period once discovered in the first epoch.
        let cfg = SimConfig {
            range_noise_sigma_m: 0.0,
            ..SimConfig::for_tests(42, 0, 600)
        };
        let roster = two_node_roster();
        let out = run_simulation(&cfg, &roster, &empty_schedule(&roster), &static_pair_script(1.0))
            .unwrap();
        assert_eq!(
            out.measurements.len(),
            40,
            "20 windows x 2 directions once discovered at epoch 0 (seed-pinned)"
        );
        for m in &out.measurements {
            assert!((m.distance - 1.0).abs() < 1e-9, "distance {}", m.distance);
            assert_eq!(m.timestamp % 30, 0);
        }
        assert_eq!(out.ground_truth.len(), 40);
        assert_eq!(out.summary.dropped_over_range, 0);
    }

    #[test]
    fn out_of_range_pair_never_measures() {
        let cfg = SimConfig::for_tests(1, 0, 600);
        let roster = two_node_roster();
        let out = run_simulation(
            &cfg,
            &roster,
            &empty_schedule(&roster),
            &static_pair_script(15.0),
        )
        .unwrap();
        assert!(out.measurements.is_empty());
        assert!(out.ground_truth.is_empty());
        assert_eq!(out.summary.discovered_pairs, 0);
    }

    #[test]
    fn inhibitor_covering_run_silences_devices() {
        let cfg = SimConfig {
            inhibitor: vec![(0, 100_000)],
            ..SimConfig::for_tests(2, 0, 3600)
        };
        let roster = two_node_roster();
        let out = run_simulation(&cfg, &roster, &empty_schedule(&roster), &static_pair_script(1.0))
            .unwrap();
        assert!(out.measurements.is_empty());
        let sleeps = &out.summary.sleep_intervals;
        assert_eq!(sleeps.len(), 2);
        for intervals in sleeps.values() {
            assert_eq!(intervals, &vec![(0, 3600)]);
        }
    }

    #[test]
    fn inhibitor_hour_blocks_measurements_then_wakes_within_sleep() {
        let cfg = SimConfig {
            range_noise_sigma_m: 0.0,
            inhibitor: vec![(3600, 7200)],
            ..SimConfig::for_tests(3, 0, 10_800)
        };
        let roster = two_node_roster();
        let out = run_simulation(&cfg, &roster, &empty_schedule(&roster), &static_pair_script(1.0))
            .unwrap();
        assert!(
            !out.measurements.is_empty(),
            "nodes measure outside the inhibitor hour"
        );
        for m in &out.measurements {
            assert!(
                !(3600..7200).contains(&m.timestamp),
                "measurement at {} inside the inhibitor hour",
                m.timestamp
            );
        }
        // Wake within inhibitor_sleep of power-off.
        for intervals in out.summary.sleep_intervals.values() {
            assert_eq!(intervals.len(), 1);
            let (start, end) = intervals[0];
            assert_eq!(start, 3600);
            assert!(end <= 7200 + cfg.inhibitor_sleep_s);
        }
        // And measurements resume afterwards.
        assert!(out.measurements.iter().any(|m| m.timestamp >= 7200));
    }

    #[test]
    fn no_inhibitor_equals_inhibitor_logic_disabled() {
        let base = SimConfig {
            range_noise_sigma_m: 0.0,
            ..SimConfig::for_tests(4, 0, 1200)
        };
        let roster = two_node_roster();
        let schedule = empty_schedule(&roster);
        let script = static_pair_script(1.0);
        let with_empty_intervals = run_simulation(&base, &roster, &schedule, &script).unwrap();
        let cfg2 = SimConfig {
            inhibitor: Vec::new(),
            ..base
        };
        let again = run_simulation(&cfg2, &roster, &schedule, &script).unwrap();
        assert_eq!(with_empty_intervals.measurements, again.measurements);
        assert!(with_empty_intervals.summary.sleep_intervals.is_empty());
    }

    #[test]
    fn identical_seed_identical_output() {
        let cfg = SimConfig::for_tests(7, 0, 1800);
        let roster = two_node_roster();
        let schedule = empty_schedule(&roster);
        let script = MobilityScript::from_toml_str(
            r#"
            [[entry]]
            all = true
            start = 0
            end = 100000
            zone = [0.0, 0.0, 8.0, 8.0]
            movement = "waypoint"
            affinity = [["n2", 2.0]]
            "#,
        )
        .unwrap();
        let a = run_simulation(&cfg, &roster, &schedule, &script).unwrap();
        let b = run_simulation(&cfg, &roster, &schedule, &script).unwrap();
        assert_eq!(a.measurements, b.measurements);
        assert_eq!(a.ground_truth, b.ground_truth);
        let mut buf_a = Vec::new();
        crate::io::write_measurements(&mut buf_a, &a.measurements).unwrap();
        let mut buf_b = Vec::new();
        crate::io::write_measurements(&mut buf_b, &b.measurements).unwrap();
        assert_eq!(buf_a, buf_b, "serialized logs must be byte-identical");

        let c = run_simulation(
            &SimConfig { seed: 8, ..cfg },
            &roster,
            &schedule,
            &script,
        )
        .unwrap();
        assert_ne!(
            a.measurements, c.measurements,
            "different seed should shuffle the run"
        );
    }

    #[test]
    fn noiseless_log_matches_ground_truth() {
        let cfg = SimConfig {
            range_noise_sigma_m: 0.0,
            ..SimConfig::for_tests(9, 0, 1800)
        };
        let roster = two_node_roster();
        let schedule = empty_schedule(&roster);
        let script = MobilityScript::from_toml_str(
            r#"
            [[entry]]
            all = true
            start = 0
            end = 100000
            zone = [0.0, 0.0, 6.0, 6.0]
            movement = "waypoint"
            "#,
        )
        .unwrap();
        let out = run_simulation(&cfg, &roster, &schedule, &script).unwrap();
        assert!(!out.measurements.is_empty());
        let mut truth: BTreeMap<(i64, String), f64> = BTreeMap::new();
        for row in &out.ground_truth {
            truth.insert((row.timestamp, row.pair.to_string()), row.true_distance_m);
        }
        for m in &out.measurements {
            let t = truth[&(m.timestamp, m.pair.to_string())];
            assert!(
                (m.distance - t).abs() < 1e-9,
                "logged {} vs true {t} at {}",
                m.distance,
                m.timestamp
            );
        }
    }

    #[test]
    fn mobility_gap_is_error() {
        let cfg = SimConfig::for_tests(1, 0, 1000);
        let roster = two_node_roster();
        let script = MobilityScript::from_toml_str(
            r#"
            [[entry]]
            all = true
            start = 0
            end = 500
            zone = [0.0, 0.0, 1.0, 1.0]
            movement = "static"
            "#,
        )
        .unwrap();
        let err =
            run_simulation(&cfg, &roster, &empty_schedule(&roster), &script).unwrap_err();
        assert!(err.to_string().contains("mobility gap"));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = SimConfig::for_tests(1, 0, 100);
        cfg.slot_width_s = 2.0; // 2 x 20 > window 20
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::for_tests(1, 0, 100);
        cfg.discovery_probability = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::for_tests(1, 0, 100);
        cfg.ranging_window_s = 45.0;
        assert!(cfg.validate().is_err());
    }
}
