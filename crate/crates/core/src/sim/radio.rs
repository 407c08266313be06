//! Radio-level primitives of the simulator: per-epoch neighbor discovery
//! against the discovery SLA, slot-coordinated ranging windows, and the
//! single-sided two-way ranging distance model.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{DevicePair, DeviceId, RawMeasurement};

use super::{GroundTruthRow, SimConfig};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// One-way time of flight for a given distance.
pub fn time_of_flight(distance_m: f64) -> f64 {
    distance_m / SPEED_OF_LIGHT_M_S
}

/// Single-sided two-way ranging: a two-packet exchange where the initiator
/// timestamps the round trip, subtracts the responder's reply delay, and
/// converts the remaining time of flight back to a distance. Measurement
/// error is folded into one Gaussian; the result is floored at zero since
/// distances are physical.
pub fn sstwr_range<R: Rng>(
    true_distance_m: f64,
    reply_delay_s: f64,
    noise_sigma_m: f64,
    rng: &mut R,
) -> f64 {
    let tof = time_of_flight(true_distance_m);
    let t_round = 2.0 * tof + reply_delay_s;
    let estimated_tof = (t_round - reply_delay_s) / 2.0;
    let base = estimated_tof * SPEED_OF_LIGHT_M_S;
    let noise = Normal::new(0.0, noise_sigma_m)
        .expect("noise sigma must be non-negative")
        .sample(rng);
    (base + noise).max(0.0)
}

/// Live state of one simulated device.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub device: DeviceId,
    pub position: (f64, f64),
    /// Discovered neighbors: node index → slot offset in THIS node's ranging
    /// window (this node is the responder for those slots).
    pub neighbors: BTreeMap<usize, u8>,
    /// Set while the inhibitor has put the node to sleep; the node produces
    /// no advertisements, discoveries or rangings until this time.
    pub asleep_until: Option<i64>,
}

impl NodeState {
    pub fn new(device: DeviceId, position: (f64, f64)) -> Self {
        NodeState {
            device,
            position,
            neighbors: BTreeMap::new(),
            asleep_until: None,
        }
    }

    pub fn is_awake(&self) -> bool {
        self.asleep_until.is_none()
    }

    fn lowest_free_slot(&self, max_neighbors: usize) -> Option<u8> {
        let mut used = vec![false; max_neighbors];
        for &slot in self.neighbors.values() {
            if (slot as usize) < max_neighbors {
                used[slot as usize] = true;
            }
        }
        used.iter().position(|u| !u).map(|s| s as u8)
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Outcome counters of one discovery epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscoveryStats {
    pub discovered_pairs: u64,
    /// Candidate pairs skipped because one side's neighbor table was full.
    pub saturation_events: u64,
}

/// One discovery epoch over all nodes.
///
/// Stale neighbors (asleep or out of range) are aged out first; sleeping
/// nodes lose their whole table, as the real device restarts after sleep.
/// Every in-range awake pair not yet mutually discovered is then discovered
/// with `discovery_probability` (one Bernoulli draw per pair, mutual on
/// success), each side assigning the other the lowest free slot in its own
/// ranging window. Pairs blocked by a full table are counted as saturation
/// events: the SLA only holds up to `max_neighbors` devices in range.
pub fn discovery_step<R: Rng>(
    nodes: &mut [NodeState],
    cfg: &SimConfig,
    rng: &mut R,
) -> DiscoveryStats {
    let mut stats = DiscoveryStats::default();

    // Age out: collect first to avoid holding borrows.
    let mut to_remove: Vec<(usize, usize)> = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        if !node.is_awake() {
            to_remove.extend(node.neighbors.keys().map(|&j| (i, j)));
            continue;
        }
        for &j in node.neighbors.keys() {
            if !nodes[j].is_awake()
                || distance(node.position, nodes[j].position) > cfg.detection_range_m
            {
                to_remove.push((i, j));
            }
        }
    }
    for (i, j) in to_remove {
        nodes[i].neighbors.remove(&j);
        nodes[j].neighbors.remove(&i);
    }

    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            if !nodes[i].is_awake() || !nodes[j].is_awake() {
                continue;
            }
            if nodes[i].neighbors.contains_key(&j) {
                continue;
            }
            if distance(nodes[i].position, nodes[j].position) > cfg.detection_range_m {
                continue;
            }
            let slot_i = nodes[i].lowest_free_slot(cfg.max_neighbors);
            let slot_j = nodes[j].lowest_free_slot(cfg.max_neighbors);
            let (Some(slot_i), Some(slot_j)) = (slot_i, slot_j) else {
                stats.saturation_events += 1;
                continue;
            };
            if rng.random_bool(cfg.discovery_probability) {
                nodes[i].neighbors.insert(j, slot_i);
                nodes[j].neighbors.insert(i, slot_j);
                stats.discovered_pairs += 1;
            }
        }
    }
    stats
}

/// Output of one responder's ranging window.
#[derive(Debug, Clone, Default)]
pub struct RangingOutput {
    pub measurements: Vec<RawMeasurement>,
    pub ground_truth: Vec<GroundTruthRow>,
    /// Measurements discarded at the source for exceeding the range cutoff.
    pub dropped_over_range: usize,
}

/// Runs the ranging window of `responder`: each discovered neighbor initiates
/// one exchange at its assigned slot. Slots are unique per responder by
/// construction, so requests never collide. Neighbors that are asleep or
/// have moved out of range since discovery are skipped this round.
pub fn ranging_round<R: Rng>(
    responder: usize,
    nodes: &[NodeState],
    cfg: &SimConfig,
    window_start: i64,
    rng: &mut R,
) -> RangingOutput {
    let mut out = RangingOutput::default();
    let node = &nodes[responder];
    debug_assert!(node.is_awake(), "asleep responders do not open windows");

    // Chronological slot order within the window.
    let mut by_slot: Vec<(u8, usize)> =
        node.neighbors.iter().map(|(&idx, &slot)| (slot, idx)).collect();
    by_slot.sort_unstable();

    for (slot, initiator_idx) in by_slot {
        let initiator = &nodes[initiator_idx];
        if !initiator.is_awake() {
            continue;
        }
        let true_distance = distance(initiator.position, node.position);
        if true_distance > cfg.detection_range_m {
            continue;
        }
        let timestamp = window_start + (slot as f64 * cfg.slot_width_s).floor() as i64;
        let pair = DevicePair::new(initiator.device.clone(), node.device.clone())
            .expect("distinct devices");
        out.ground_truth.push(GroundTruthRow {
            pair: pair.clone(),
            timestamp,
            true_distance_m: true_distance,
        });
        let measured = sstwr_range(
            true_distance,
            cfg.reply_delay_s,
            cfg.range_noise_sigma_m,
            rng,
        );
        if measured > cfg.detection_range_m {
            out.dropped_over_range += 1;
            continue;
        }
        out.measurements.push(RawMeasurement {
            pair,
            timestamp,
            distance: measured,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn dev(i: usize) -> DeviceId {
        DeviceId::new(format!("d{i:03}"))
    }

    fn config() -> SimConfig {
        SimConfig::for_tests(0, 0, 600)
    }

    #[test]
    fn tof_matches_expected_value() {
        // 3 m / c, compared against an independently written-out quotient.
        let tof = time_of_flight(3.0);
        let expected = 3.0 / 299_792_458.0;
        assert!((tof - expected).abs() / expected < 1e-12);
        assert!((tof - 1.0007e-8).abs() < 1e-11);
    }

    #[test]
    fn sstwr_zero_distance_zero_noise() {
        assert_eq!(sstwr_range(0.0, 3e-4, 0.0, &mut rng(1)), 0.0);
    }

    #[test]
    fn sstwr_noiseless_recovers_distance() {
        for d in [0.0, 0.5, 3.0, 9.9] {
            let measured = sstwr_range(d, 3e-4, 0.0, &mut rng(2));
            let err = (measured - d).abs();
            if d > 0.0 {
                assert!(err / d < 1e-9, "distance {d}: relative error {}", err / d);
            } else {
                assert!(err < 1e-9);
            }
        }
    }

    #[test]
    fn sstwr_noise_sigma_recovered() {
        let mut r = rng(3);
        let n = 10_000;
        let samples: Vec<f64> = (0..n).map(|_| sstwr_range(2.0, 3e-4, 0.1, &mut r)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma = var.sqrt();
        assert!(
            (sigma - 0.1).abs() / 0.1 < 0.10,
            "sample sigma {sigma} should be within 10% of 0.1"
        );
    }

    #[test]
    fn sstwr_floors_at_zero() {
        let mut r = rng(4);
        // Large noise on a tiny distance must never go negative.
        let all_non_negative =
            (0..5_000).all(|_| sstwr_range(0.05, 3e-4, 1.0, &mut r) >= 0.0);
        assert!(all_non_negative);
    }

    fn clique(n: usize, spacing: f64) -> Vec<NodeState> {
        // Nodes on a small circle: all within detection range of each other.
        (0..n)
            .map(|i| {
                let angle = i as f64 / n as f64 * std::f64::consts::TAU;
                NodeState::new(dev(i), (spacing * angle.cos(), spacing * angle.sin()))
            })
            .collect()
    }

    #[test]
    fn discovery_rate_matches_sla_probability() {
        // 21 nodes in a clique: every node has exactly 20 devices in range,
        // the SLA bound. Tables are reset after each epoch so every epoch is
        // a fresh Bernoulli per pair.
        let cfg = config();
        let mut nodes = clique(21, 2.0);
        let mut r = rng(5);
        let epochs = 2_000u64;
        let pairs_per_epoch = 21 * 20 / 2;
        let mut discovered = 0u64;
        for _ in 0..epochs {
            let stats = discovery_step(&mut nodes, &cfg, &mut r);
            assert_eq!(stats.saturation_events, 0);
            discovered += stats.discovered_pairs;
            for node in &mut nodes {
                node.neighbors.clear();
            }
        }
        let rate = discovered as f64 / (epochs * pairs_per_epoch) as f64;
        let ci = 2.576 * (0.95 * 0.05 / (epochs * pairs_per_epoch) as f64).sqrt();
        assert!(
            (rate - 0.95).abs() <= ci,
            "empirical rate {rate} outside 99% CI ±{ci}"
        );
    }

    #[test]
    fn saturation_beyond_max_neighbors() {
        // 22 nodes in a clique: each sees 21 devices, one over capacity.
        let cfg = config();
        let mut nodes = clique(22, 2.0);
        let mut r = rng(6);
        let mut saturation = 0u64;
        for _ in 0..50 {
            saturation += discovery_step(&mut nodes, &cfg, &mut r).saturation_events;
        }
        assert!(saturation > 0);
        for node in &nodes {
            assert!(node.neighbors.len() <= cfg.max_neighbors);
        }
    }

    #[test]
    fn asleep_node_never_discovered() {
        let cfg = config();
        let mut nodes = clique(3, 1.0);
        nodes[2].asleep_until = Some(10_000);
        let mut r = rng(7);
        for _ in 0..200 {
            discovery_step(&mut nodes, &cfg, &mut r);
        }
        assert!(nodes[2].neighbors.is_empty());
        assert!(!nodes[0].neighbors.contains_key(&2));
        assert!(!nodes[1].neighbors.contains_key(&2));
        assert!(nodes[0].neighbors.contains_key(&1));
    }

    #[test]
    fn sleeping_clears_tables_on_next_epoch() {
        let cfg = config();
        let mut nodes = clique(3, 1.0);
        let mut r = rng(8);
        for _ in 0..10 {
            discovery_step(&mut nodes, &cfg, &mut r);
        }
        assert_eq!(nodes[0].neighbors.len(), 2);
        nodes[0].asleep_until = Some(10_000);
        discovery_step(&mut nodes, &cfg, &mut r);
        assert!(nodes[0].neighbors.is_empty());
        assert!(!nodes[1].neighbors.contains_key(&0));
        assert!(!nodes[2].neighbors.contains_key(&0));
    }

    #[test]
    fn ranging_round_one_measurement_per_neighbor() {
        let cfg = SimConfig {
            range_noise_sigma_m: 0.0,
            ..config()
        };
        let mut nodes = clique(4, 1.5);
        let mut r = rng(9);
        // Discover everything (may take a couple of epochs).
        for _ in 0..10 {
            discovery_step(&mut nodes, &cfg, &mut r);
        }
        assert_eq!(nodes[0].neighbors.len(), 3);
        let out = ranging_round(0, &nodes, &cfg, 3000, &mut r);
        assert_eq!(out.measurements.len(), 3);
        assert_eq!(out.ground_truth.len(), 3);
        // Three distinct slot timestamps inside the window.
        let mut stamps: Vec<i64> = out.measurements.iter().map(|m| m.timestamp).collect();
        stamps.sort_unstable();
        stamps.dedup();
        assert_eq!(stamps.len(), 3);
        for m in &out.measurements {
            assert!(m.timestamp >= 3000);
            assert!((m.timestamp as f64) < 3000.0 + cfg.ranging_window_s);
        }
    }

    #[test]
    fn ranging_skips_neighbor_now_out_of_range() {
        let cfg = config();
        let mut nodes = clique(2, 1.0);
        let mut r = rng(10);
        for _ in 0..5 {
            discovery_step(&mut nodes, &cfg, &mut r);
        }
        assert_eq!(nodes[0].neighbors.len(), 1);
        // Neighbor walks away between discovery and the window.
        nodes[1].position = (100.0, 0.0);
        let out = ranging_round(0, &nodes, &cfg, 3000, &mut r);
        assert!(out.measurements.is_empty());
        assert!(out.ground_truth.is_empty());
    }

    #[test]
    fn full_window_uses_twenty_distinct_slots() {
        let cfg = SimConfig {
            discovery_probability: 1.0,
            ..config()
        };
        let mut nodes = clique(21, 2.0);
        let mut r = rng(11);
        discovery_step(&mut nodes, &cfg, &mut r);
        assert_eq!(nodes[0].neighbors.len(), 20);
        let slots: std::collections::BTreeSet<u8> =
            nodes[0].neighbors.values().copied().collect();
        assert_eq!(slots.len(), 20, "responder slots must be distinct");
        let out = ranging_round(0, &nodes, &cfg, 0, &mut r);
        assert_eq!(out.measurements.len(), 20);
        for m in &out.measurements {
            assert!((m.timestamp as f64) < cfg.ranging_window_s);
        }
    }
}
