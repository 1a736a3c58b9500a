//! Problem instances: topology, fleet, payload items, missions, demand and
//! link capacities.
//!
//! A [`Scenario`] is immutable once built. Distances and per-kilogram energy
//! factors are derived from location coordinates and the [`EnergyModel`], so
//! a scenario document only carries the primitive inputs.

mod io;
mod synth;
mod validate;

pub use io::{load_scenario, serialize_scenario, LoadError, ScenarioDocument};
pub use synth::{generate_synthetic, Dims, GeneratorOptions, SynthError, CAMERA, RADIO};
pub use validate::{validate, Violation};

/// Energy coefficient of the reference airframe, Wh per km per kg.
pub const REFERENCE_ENERGY_PER_KM_KG: f64 = 3.125;

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub is_depot: bool,
}

/// Service that an UAV hovering at `location` can provide to a zone, one
/// quality value per mission (indexed like [`Scenario::missions`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneLink {
    pub location: usize,
    pub quality: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: usize,
    pub servable_from: Vec<ZoneLink>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavSpec {
    /// Airframe weight W, kg.
    pub empty_weight: f64,
    /// Payload capacity C, kg.
    pub payload_capacity: f64,
    /// Battery capacity E, Wh.
    pub battery_capacity: f64,
    /// Maximum distance V covered in one epoch, km.
    pub max_step_distance: f64,
    pub count: usize,
    /// `(uav, payload)` pairs an UAV may never carry. Empty for a fully
    /// flexible fleet.
    pub forbidden_payloads: Vec<(usize, usize)>,
}

impl UavSpec {
    pub fn is_forbidden(&self, uav: usize, payload: usize) -> bool {
        self.forbidden_payloads.contains(&(uav, payload))
    }
}

/// Time window and destination of a deliverable payload item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub target: usize,
    pub earliest: usize,
    pub latest: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadItem {
    pub id: usize,
    pub name: String,
    pub weight: f64,
    pub delivery: Option<Delivery>,
}

impl PayloadItem {
    pub fn is_deliverable(&self) -> bool {
        self.delivery.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionKind {
    Coverage,
    Monitoring,
    Relay,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub id: usize,
    pub name: String,
    pub kind: MissionKind,
    pub required_payloads: Vec<usize>,
    /// Mb generated per unit of work.
    pub data_per_unit_work: f64,
}

impl Mission {
    pub fn is_relay(&self) -> bool {
        self.kind == MissionKind::Relay
    }
}

/// Dense work demand `n(k, m, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandField {
    epochs: usize,
    missions: usize,
    zones: usize,
    values: Vec<f64>,
}

impl DemandField {
    pub fn zeros(epochs: usize, missions: usize, zones: usize) -> Self {
        Self { epochs, missions, zones, values: vec![0.0; epochs * missions * zones] }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.epochs, self.missions, self.zones)
    }

    fn offset(&self, k: usize, m: usize, z: usize) -> usize {
        (k * self.missions + m) * self.zones + z
    }

    pub fn get(&self, k: usize, m: usize, z: usize) -> f64 {
        self.values[self.offset(k, m, z)]
    }

    pub fn set(&mut self, k: usize, m: usize, z: usize, value: f64) {
        let i = self.offset(k, m, z);
        self.values[i] = value;
    }

    /// Nonzero entries as `(k, m, z, value)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        (0..self.epochs).flat_map(move |k| {
            (0..self.missions).flat_map(move |m| {
                (0..self.zones).filter_map(move |z| {
                    let v = self.get(k, m, z);
                    (v != 0.0).then_some((k, m, z, v))
                })
            })
        })
    }

    /// Sum of `n(h, m, z)` over `h` in the satisfaction window ending at `k`.
    pub fn window_sum(&self, k: usize, horizon: usize, m: usize, z: usize) -> f64 {
        (k.saturating_sub(horizon)..=k).map(|h| self.get(h, m, z)).sum()
    }

    pub fn total(&self, m: usize) -> f64 {
        (0..self.epochs).flat_map(|k| (0..self.zones).map(move |z| (k, z))).map(|(k, z)| self.get(k, m, z)).sum()
    }
}

/// Throughput between UAVs at location pairs and towards the terrestrial
/// network, Mb per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCapacityField {
    pub between: Vec<Vec<f64>>,
    pub to_network: Vec<f64>,
}

impl LinkCapacityField {
    pub fn max_between(&self) -> f64 {
        self.between.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn max_to_network(&self) -> f64 {
        self.to_network.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-kilogram energy model: flying one km costs `per_km_kg` Wh per kg,
/// hovering one epoch costs like flying `hover_km`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub per_km_kg: f64,
    pub hover_km: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self { per_km_kg: REFERENCE_ENERGY_PER_KM_KG, hover_km: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub locations: Vec<Location>,
    pub zones: Vec<Zone>,
    pub uav: UavSpec,
    pub payloads: Vec<PayloadItem>,
    pub missions: Vec<Mission>,
    pub demand: DemandField,
    pub links: LinkCapacityField,
    /// `v(l1, l2)`, km.
    pub distances: Vec<Vec<f64>>,
    /// `e(l1, l2)`, Wh per kg.
    pub energy: Vec<Vec<f64>>,
    pub energy_model: EnergyModel,
    pub epochs: usize,
    /// Satisfaction horizon H, epochs.
    pub horizon: usize,
    pub epoch_minutes: f64,
    /// Every UAV must be back at a depot in the final epoch.
    pub depot_return: bool,
}

/// Primitive inputs of a scenario; everything else is derived by
/// [`Scenario::from_parts`].
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub locations: Vec<Location>,
    pub zones: Vec<Zone>,
    pub uav: UavSpec,
    pub payloads: Vec<PayloadItem>,
    pub missions: Vec<Mission>,
    pub demand: DemandField,
    pub links: LinkCapacityField,
    pub energy_model: EnergyModel,
    pub epochs: usize,
    pub horizon: usize,
    pub epoch_minutes: f64,
    pub depot_return: bool,
}

impl Scenario {
    pub fn from_parts(parts: ScenarioParts) -> Self {
        let n = parts.locations.len();
        let mut distances = vec![vec![0.0; n]; n];
        let mut energy = vec![vec![0.0; n]; n];
        for (i, a) in parts.locations.iter().enumerate() {
            for (j, b) in parts.locations.iter().enumerate() {
                if i == j {
                    energy[i][j] = parts.energy_model.per_km_kg * parts.energy_model.hover_km;
                } else {
                    let d = (a.x - b.x).hypot(a.y - b.y);
                    distances[i][j] = d;
                    energy[i][j] = parts.energy_model.per_km_kg * d;
                }
            }
        }
        Self {
            locations: parts.locations,
            zones: parts.zones,
            uav: parts.uav,
            payloads: parts.payloads,
            missions: parts.missions,
            demand: parts.demand,
            links: parts.links,
            distances,
            energy,
            energy_model: parts.energy_model,
            epochs: parts.epochs,
            horizon: parts.horizon,
            epoch_minutes: parts.epoch_minutes,
            depot_return: parts.depot_return,
        }
    }

    pub fn into_parts(self) -> ScenarioParts {
        ScenarioParts {
            locations: self.locations,
            zones: self.zones,
            uav: self.uav,
            payloads: self.payloads,
            missions: self.missions,
            demand: self.demand,
            links: self.links,
            energy_model: self.energy_model,
            epochs: self.epochs,
            horizon: self.horizon,
            epoch_minutes: self.epoch_minutes,
            depot_return: self.depot_return,
        }
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.uav.count
    }

    pub fn is_depot(&self, l: usize) -> bool {
        self.locations[l].is_depot
    }

    pub fn depots(&self) -> Vec<usize> {
        self.locations.iter().filter(|l| l.is_depot).map(|l| l.id).collect()
    }

    /// `q(l, m, z)`; zero when the zone is not servable from `l`.
    pub fn quality(&self, l: usize, m: usize, z: usize) -> f64 {
        self.zones[z].servable_from.iter().find(|link| link.location == l).map_or(0.0, |link| link.quality[m])
    }

    /// Zones servable from location `l` with their quality vectors.
    pub fn zones_from(&self, l: usize) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.zones.iter().filter_map(move |zone| {
            zone.servable_from.iter().find(|link| link.location == l).map(|link| (zone.id, link.quality.as_slice()))
        })
    }

    pub fn can_travel(&self, from: usize, to: usize) -> bool {
        self.distances[from][to] <= self.uav.max_step_distance
    }

    pub fn relay_mission(&self) -> Option<usize> {
        self.missions.iter().position(Mission::is_relay)
    }

    /// Missions that carry demand and enter the objective.
    pub fn service_missions(&self) -> impl Iterator<Item = usize> + '_ {
        self.missions.iter().filter(|m| !m.is_relay()).map(|m| m.id)
    }

    pub fn mission_of_kind(&self, kind: MissionKind) -> Option<usize> {
        self.missions.iter().position(|m| m.kind == kind)
    }

    pub fn deliveries(&self) -> impl Iterator<Item = (usize, Delivery)> + '_ {
        self.payloads.iter().filter_map(|p| p.delivery.map(|d| (p.id, d)))
    }

    /// Payload items that are not delivered anywhere (cameras, radios, ...).
    pub fn equipment(&self) -> impl Iterator<Item = usize> + '_ {
        self.payloads.iter().filter(|p| !p.is_deliverable()).map(|p| p.id)
    }

    pub fn payload_by_name(&self, name: &str) -> Option<usize> {
        self.payloads.iter().position(|p| p.name == name)
    }

    pub fn max_energy_factor(&self) -> f64 {
        self.energy.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Whether a payload set satisfies mission `m`'s equipment requirement.
    pub fn equipped_for(&self, m: usize, carried: &[bool]) -> bool {
        self.missions[m].required_payloads.iter().all(|&p| carried[p])
    }

    /// Restrict equipment the way a fixed-capability fleet is organised:
    /// one third radio-only, one third camera-only, the rest both.
    pub fn with_fixed_equipment(mut self, radio: usize, camera: usize) -> Self {
        let third = self.uav.count / 3;
        let mut forbidden = Vec::new();
        for d in 0..third {
            forbidden.push((d, camera));
        }
        for d in third..2 * third {
            forbidden.push((d, radio));
        }
        forbidden.sort_unstable();
        self.uav.forbidden_payloads = forbidden;
        self
    }

    pub fn with_uav_count(mut self, count: usize) -> Self {
        self.uav.count = count;
        self.uav.forbidden_payloads.retain(|&(d, _)| d < count);
        self
    }
}

/// Range of a fully loaded UAV on one battery, km.
pub fn max_range(spec: &UavSpec, energy_per_km_kg: f64) -> f64 {
    spec.battery_capacity / (energy_per_km_kg * (spec.payload_capacity + spec.empty_weight))
}
