//! Seeded synthetic instances shaped like the reference flood scenario.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    Delivery, DemandField, EnergyModel, LinkCapacityField, Location, Mission, MissionKind, PayloadItem, Scenario,
    ScenarioParts, UavSpec, Zone, ZoneLink,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub locations: usize,
    pub zones: usize,
    pub uavs: usize,
    pub deliveries: usize,
    pub epochs: usize,
}

impl Dims {
    /// Cardinalities of the reference large-scale topology.
    pub fn sf_small() -> Self {
        Self { locations: 40, zones: 50, uavs: 10, deliveries: 20, epochs: 20 }
    }

    /// Desk-scale instance that the exact engine handles with up to six UAVs.
    pub fn small(uavs: usize) -> Self {
        Self { locations: 3, zones: 2, uavs, deliveries: 1, epochs: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorOptions {
    /// Satisfaction horizon; defaults to `min(10, epochs - 1)`.
    pub horizon: Option<usize>,
    /// Number of zones with monitoring demand; defaults to every zone.
    pub monitoring_zones: Option<usize>,
    pub spacing_km: f64,
    pub max_step_distance: f64,
    pub unique_targets: bool,
    /// No mission demand before this epoch (UAVs are still at the depot).
    pub demand_start_epoch: usize,
    pub demand_scale: f64,
    pub to_network_capacity: f64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            monitoring_zones: None,
            spacing_km: 2.0,
            max_step_distance: 3.0,
            unique_targets: false,
            demand_start_epoch: 1,
            demand_scale: 1.0,
            to_network_capacity: 50.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("dimension `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("{deliveries} unique delivery targets requested but only {available} reachable locations")]
    NotEnoughTargets { deliveries: usize, available: usize },
    #[error("no location can host a delivery within battery range and time windows")]
    Unreachable,
    #[error("monitoring zone count {0} exceeds zone count {1}")]
    MonitoringZones(usize, usize),
}

pub const CAMERA: &str = "camera";
pub const RADIO: &str = "radio";

const EQUIPMENT_WEIGHT: f64 = 1.0;
const BLOOD_WEIGHT: f64 = 0.5;
const MEDICINE_WEIGHT: f64 = 0.25;
const BLOOD_WINDOW: usize = 5;
const MEDICINE_WINDOW: usize = 10;

/// Shortest-distance paths from `source` over the travel graph; returns
/// `(distance, hops)` per location, `None` where unreachable.
fn shortest_from(distances: &[Vec<f64>], v_max: f64, source: usize) -> Vec<Option<(f64, usize)>> {
    let n = distances.len();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    best[source] = Some((0.0, 0));
    for _ in 0..n {
        let next = (0..n)
            .filter(|&i| !done[i])
            .filter_map(|i| best[i].map(|b| (i, b)))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.cmp(&b.1 .1)).then(a.0.cmp(&b.0)));
        let Some((u, (du, hu))) = next else { break };
        done[u] = true;
        for w in 0..n {
            if w == u || done[w] || distances[u][w] > v_max {
                continue;
            }
            let cand = (du + distances[u][w], hu + 1);
            let better = match best[w] {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
            };
            if better {
                best[w] = Some(cand);
            }
        }
    }
    best
}

/// Build a deterministic synthetic scenario from `seed`.
pub fn generate_synthetic(seed: u64, dims: Dims, opts: &GeneratorOptions) -> Result<Scenario, SynthError> {
    for (name, v) in
        [("locations", dims.locations), ("zones", dims.zones), ("uavs", dims.uavs), ("epochs", dims.epochs)]
    {
        if v == 0 {
            return Err(SynthError::NonPositive(name));
        }
    }
    let mon_count = opts.monitoring_zones.unwrap_or(dims.zones);
    if mon_count > dims.zones {
        return Err(SynthError::MonitoringZones(mon_count, dims.zones));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Jittered grid with the depot pinned to the origin corner.
    let cols = (dims.locations as f64).sqrt().ceil() as usize;
    let jitter = 0.15 * opts.spacing_km;
    let locations: Vec<Location> = (0..dims.locations)
        .map(|i| {
            let (gx, gy) = ((i % cols) as f64, (i / cols) as f64);
            let (jx, jy) =
                if i == 0 { (0.0, 0.0) } else { (rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter)) };
            Location { id: i, x: gx * opts.spacing_km + jx, y: gy * opts.spacing_km + jy, is_depot: i == 0 }
        })
        .collect();
    let rows = dims.locations.div_ceil(cols);
    let extent_x = (cols.max(1) - 1) as f64 * opts.spacing_km;
    let extent_y = (rows.max(1) - 1) as f64 * opts.spacing_km;

    let uav = UavSpec {
        empty_weight: 4.0,
        payload_capacity: 2.5,
        battery_capacity: 200.0,
        max_step_distance: opts.max_step_distance,
        count: dims.uavs,
        forbidden_payloads: Vec::new(),
    };
    let energy_model = EnergyModel::default();

    let (camera, radio) = (0, 1);
    let missions = vec![
        Mission {
            id: 0,
            name: "coverage".into(),
            kind: MissionKind::Coverage,
            required_payloads: vec![radio],
            data_per_unit_work: 1.0,
        },
        Mission {
            id: 1,
            name: "monitoring".into(),
            kind: MissionKind::Monitoring,
            required_payloads: vec![camera],
            data_per_unit_work: 2.0,
        },
        Mission {
            id: 2,
            name: "relay".into(),
            kind: MissionKind::Relay,
            required_payloads: vec![radio],
            data_per_unit_work: 0.0,
        },
    ];

    let zones: Vec<Zone> = (0..dims.zones)
        .map(|z| {
            let zx = rng.gen_range(0.0..=extent_x.max(opts.spacing_km));
            let zy = rng.gen_range(0.0..=extent_y.max(opts.spacing_km));
            let wanted = rng.gen_range(1..=3usize).min(dims.locations);
            let mut order: Vec<usize> = (0..dims.locations).collect();
            order.sort_by(|&a, &b| {
                let da = (locations[a].x - zx).hypot(locations[a].y - zy);
                let db = (locations[b].x - zx).hypot(locations[b].y - zy);
                da.total_cmp(&db).then(a.cmp(&b))
            });
            order.truncate(wanted);
            order.sort_unstable();
            let servable_from = order
                .into_iter()
                .map(|l| ZoneLink {
                    location: l,
                    quality: vec![rng.gen_range(0.5..=1.0), rng.gen_range(0.5..=1.0), 0.0],
                })
                .collect();
            Zone { id: z, servable_from }
        })
        .collect();

    let mut demand = DemandField::zeros(dims.epochs, missions.len(), dims.zones);
    let mut mon_zones: Vec<usize> = (0..dims.zones).collect();
    mon_zones.shuffle(&mut rng);
    mon_zones.truncate(mon_count);
    for k in opts.demand_start_epoch..dims.epochs {
        for z in 0..dims.zones {
            demand.set(k, 0, z, opts.demand_scale * rng.gen_range(0.5..=1.5));
        }
        for &z in &mon_zones {
            demand.set(k, 1, z, opts.demand_scale);
        }
    }

    let n = dims.locations;
    let mut between = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = (locations[a].x - locations[b].x).hypot(locations[a].y - locations[b].y);
            let t = (40.0 * (1.0 - d / (3.0 * opts.max_step_distance))).max(0.0);
            between[a][b] = t;
            between[b][a] = t;
        }
    }
    let links = LinkCapacityField { between, to_network: vec![opts.to_network_capacity; n] };

    let mut scenario = Scenario::from_parts(ScenarioParts {
        locations,
        zones,
        uav,
        payloads: vec![
            PayloadItem { id: camera, name: "camera".into(), weight: EQUIPMENT_WEIGHT, delivery: None },
            PayloadItem { id: radio, name: "radio".into(), weight: EQUIPMENT_WEIGHT, delivery: None },
        ],
        missions,
        demand,
        links,
        energy_model,
        epochs: dims.epochs,
        horizon: opts.horizon.unwrap_or_else(|| 10.min(dims.epochs.saturating_sub(1))),
        epoch_minutes: 10.0,
        depot_return: true,
    });

    // Delivery targets must admit a dedicated round trip at full load.
    let paths = shortest_from(&scenario.distances, opts.max_step_distance, 0);
    let full_load = scenario.uav.empty_weight + scenario.uav.payload_capacity;
    let mut candidates: Vec<(usize, usize)> = (1..n)
        .filter_map(|l| paths[l].map(|(d, h)| (l, d, h)))
        .filter(|&(_, d, _)| 2.0 * d * energy_model.per_km_kg * full_load <= scenario.uav.battery_capacity)
        .filter(|&(_, _, h)| 2 * h < dims.epochs)
        .map(|(l, _, h)| (l, h))
        .collect();
    if dims.deliveries > 0 && candidates.is_empty() {
        return Err(SynthError::Unreachable);
    }
    if opts.unique_targets && candidates.len() < dims.deliveries {
        return Err(SynthError::NotEnoughTargets { deliveries: dims.deliveries, available: candidates.len() });
    }

    let last = dims.epochs - 1;
    for i in 0..dims.deliveries {
        let blood = rng.gen_bool(0.5);
        let (weight, len) = if blood { (BLOOD_WEIGHT, BLOOD_WINDOW) } else { (MEDICINE_WEIGHT, MEDICINE_WINDOW) };
        let pick = rng.gen_range(0..candidates.len());
        let (target, hops) = if opts.unique_targets { candidates.remove(pick) } else { candidates[pick] };
        // Arrival epoch t needs t >= hops and t + hops <= last.
        let (lo, hi) = (hops, last - hops);
        let earliest = loop {
            let a = rng.gen_range(0..=last);
            let b = (a + len - 1).min(last);
            if a.max(lo) <= b.min(hi) {
                break a;
            }
        };
        let latest = (earliest + len - 1).min(last);
        let id = scenario.payloads.len();
        scenario.payloads.push(PayloadItem {
            id,
            name: format!("{}-{i}", if blood { "blood" } else { "medicine" }),
            weight,
            delivery: Some(Delivery { target, earliest, latest }),
        });
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{serialize_scenario, validate};

    #[test]
    fn reference_cardinalities() {
        let s = generate_synthetic(1, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        assert_eq!(s.locations.len(), 40);
        assert_eq!(s.zones.len(), 50);
        assert_eq!(s.deliveries().count(), 20);
        assert_eq!(s.epochs, 20);
        assert_eq!(s.horizon, 10);
        assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_synthetic(7, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        let b = generate_synthetic(7, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        assert_eq!(serialize_scenario(&a), serialize_scenario(&b));
    }

    #[test]
    fn seeds_differ_in_targets() {
        let a = generate_synthetic(1, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        let b = generate_synthetic(2, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        let ta: Vec<_> = a.deliveries().map(|(_, d)| (d.target, d.earliest)).collect();
        let tb: Vec<_> = b.deliveries().map(|(_, d)| (d.target, d.earliest)).collect();
        assert_ne!(ta, tb);
    }

    #[test]
    fn zones_average_about_two_locations() {
        let s = generate_synthetic(3, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        let mean = s.zones.iter().map(|z| z.servable_from.len()).sum::<usize>() as f64 / 50.0;
        assert!((1.5..=2.5).contains(&mean), "{mean}");
    }

    #[test]
    fn nearest_neighbour_spacing_near_two_km() {
        let s = generate_synthetic(5, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        let n = s.locations.len();
        let mean = (0..n)
            .map(|a| (0..n).filter(|&b| b != a).map(|b| s.distances[a][b]).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / n as f64;
        assert!((1.6..=2.2).contains(&mean), "{mean}");
    }

    #[test]
    fn unique_targets_can_run_out() {
        let opts = GeneratorOptions { unique_targets: true, ..Default::default() };
        let err = generate_synthetic(1, Dims::sf_small(), &opts).unwrap_err();
        assert!(matches!(err, SynthError::NotEnoughTargets { .. }));
    }

    #[test]
    fn zero_dims_rejected() {
        let dims = Dims { uavs: 0, ..Dims::sf_small() };
        assert_eq!(
            generate_synthetic(1, dims, &GeneratorOptions::default()).unwrap_err(),
            SynthError::NonPositive("uavs")
        );
    }

    #[test]
    fn delivery_windows_are_five_or_ten() {
        let s = generate_synthetic(11, Dims::sf_small(), &GeneratorOptions::default()).unwrap();
        for p in s.payloads.iter().filter(|p| p.is_deliverable()) {
            let d = p.delivery.unwrap();
            let len = d.latest - d.earliest + 1;
            let full = if p.name.starts_with("blood") { 5 } else { 10 };
            assert!(len == full || d.latest == s.epochs - 1, "{p:?}");
        }
    }
}
