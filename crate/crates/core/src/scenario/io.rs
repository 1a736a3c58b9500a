use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate, Delivery, DemandField, EnergyModel, LinkCapacityField, Location, Mission, MissionKind, PayloadItem,
    Scenario, ScenarioParts, UavSpec, Violation, Zone, ZoneLink,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("structural error: {0}")]
    Structure(String),
    #[error("scenario has {} violation(s):\n{}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

/// On-disk form of a scenario (JSON syntax).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub locations: Vec<LocationDoc>,
    pub zones: Vec<ZoneDoc>,
    pub uavs: UavDoc,
    pub payloads: Vec<PayloadDoc>,
    pub missions: Vec<MissionDoc>,
    /// Sparse `(k, m, z, value)` entries; missing entries are zero.
    pub demand: Vec<(usize, usize, usize, f64)>,
    pub links: LinksDoc,
    pub epochs: usize,
    pub horizon: usize,
    pub energy: EnergyDoc,
    #[serde(default = "default_epoch_minutes")]
    pub epoch_minutes: f64,
    #[serde(default = "default_true")]
    pub depot_return: bool,
}

fn default_epoch_minutes() -> f64 {
    10.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationDoc {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub depot: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneDoc {
    pub id: usize,
    pub servable_from: Vec<ZoneLinkDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneLinkDoc {
    pub location: usize,
    pub quality: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavDoc {
    pub count: usize,
    pub empty_weight: f64,
    pub payload_capacity: f64,
    pub battery_capacity: f64,
    pub max_step_distance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden_payloads: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadDoc {
    pub id: usize,
    pub name: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delivery: Option<DeliveryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliveryDoc {
    pub target: usize,
    pub earliest: usize,
    pub latest: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionDoc {
    pub id: usize,
    pub name: String,
    pub kind: MissionKind,
    pub requires: Vec<usize>,
    pub data_per_unit_work: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksDoc {
    /// Dense `|L| x |L|` matrix of UAV-to-UAV throughput.
    pub between: Vec<Vec<f64>>,
    /// Per-location throughput to the terrestrial network; omitted means
    /// `default_to_network` from every location.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_network: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_to_network: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyDoc {
    pub per_km_kg: f64,
    #[serde(default = "default_hover_km")]
    pub hover_km: f64,
}

fn default_hover_km() -> f64 {
    0.1
}

impl ScenarioDocument {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            locations: s
                .locations
                .iter()
                .map(|l| LocationDoc { id: l.id, x: l.x, y: l.y, depot: l.is_depot })
                .collect(),
            zones: s
                .zones
                .iter()
                .map(|z| ZoneDoc {
                    id: z.id,
                    servable_from: z
                        .servable_from
                        .iter()
                        .map(|l| ZoneLinkDoc { location: l.location, quality: l.quality.clone() })
                        .collect(),
                })
                .collect(),
            uavs: UavDoc {
                count: s.uav.count,
                empty_weight: s.uav.empty_weight,
                payload_capacity: s.uav.payload_capacity,
                battery_capacity: s.uav.battery_capacity,
                max_step_distance: s.uav.max_step_distance,
                forbidden_payloads: s.uav.forbidden_payloads.clone(),
            },
            payloads: s
                .payloads
                .iter()
                .map(|p| PayloadDoc {
                    id: p.id,
                    name: p.name.clone(),
                    weight: p.weight,
                    delivery: p.delivery.map(|d| DeliveryDoc {
                        target: d.target,
                        earliest: d.earliest,
                        latest: d.latest,
                    }),
                })
                .collect(),
            missions: s
                .missions
                .iter()
                .map(|m| MissionDoc {
                    id: m.id,
                    name: m.name.clone(),
                    kind: m.kind,
                    requires: m.required_payloads.clone(),
                    data_per_unit_work: m.data_per_unit_work,
                })
                .collect(),
            demand: s.demand.entries().collect(),
            links: LinksDoc {
                between: s.links.between.clone(),
                to_network: Some(s.links.to_network.clone()),
                default_to_network: None,
            },
            epochs: s.epochs,
            horizon: s.horizon,
            energy: EnergyDoc { per_km_kg: s.energy_model.per_km_kg, hover_km: s.energy_model.hover_km },
            epoch_minutes: s.epoch_minutes,
            depot_return: s.depot_return,
        }
    }

    /// Materialize dense fields. Fails only on shape problems that prevent
    /// building the in-memory form; semantic checks belong to `validate`.
    pub fn into_scenario(self) -> Result<Scenario, LoadError> {
        let n_loc = self.locations.len();
        let n_m = self.missions.len();
        let n_z = self.zones.len();
        let mut demand = DemandField::zeros(self.epochs, n_m, n_z);
        for (i, &(k, m, z, v)) in self.demand.iter().enumerate() {
            if k >= self.epochs || m >= n_m || z >= n_z {
                return Err(LoadError::Structure(format!(
                    "demand[{i}] = ({k}, {m}, {z}) is outside {}x{}x{}",
                    self.epochs, n_m, n_z
                )));
            }
            demand.set(k, m, z, v);
        }
        for (z, zone) in self.zones.iter().enumerate() {
            for (j, link) in zone.servable_from.iter().enumerate() {
                if link.quality.len() != n_m {
                    return Err(LoadError::Structure(format!(
                        "zones[{z}].servable_from[{j}].quality has {} entries, expected {n_m}",
                        link.quality.len()
                    )));
                }
            }
        }
        if self.links.between.len() != n_loc || self.links.between.iter().any(|row| row.len() != n_loc) {
            return Err(LoadError::Structure(format!("links.between must be a {n_loc}x{n_loc} matrix")));
        }
        let to_network = match (self.links.to_network, self.links.default_to_network) {
            (Some(v), _) if v.len() == n_loc => v,
            (Some(v), _) => {
                return Err(LoadError::Structure(format!("links.to_network has {} entries, expected {n_loc}", v.len())))
            }
            (None, Some(d)) => vec![d; n_loc],
            (None, None) => {
                return Err(LoadError::Structure("links needs `to_network` or `default_to_network`".into()))
            }
        };
        Ok(Scenario::from_parts(ScenarioParts {
            locations: self
                .locations
                .into_iter()
                .map(|l| Location { id: l.id, x: l.x, y: l.y, is_depot: l.depot })
                .collect(),
            zones: self
                .zones
                .into_iter()
                .map(|z| Zone {
                    id: z.id,
                    servable_from: z
                        .servable_from
                        .into_iter()
                        .map(|l| ZoneLink { location: l.location, quality: l.quality })
                        .collect(),
                })
                .collect(),
            uav: UavSpec {
                empty_weight: self.uavs.empty_weight,
                payload_capacity: self.uavs.payload_capacity,
                battery_capacity: self.uavs.battery_capacity,
                max_step_distance: self.uavs.max_step_distance,
                count: self.uavs.count,
                forbidden_payloads: self.uavs.forbidden_payloads,
            },
            payloads: self
                .payloads
                .into_iter()
                .map(|p| PayloadItem {
                    id: p.id,
                    name: p.name,
                    weight: p.weight,
                    delivery: p.delivery.map(|d| Delivery { target: d.target, earliest: d.earliest, latest: d.latest }),
                })
                .collect(),
            missions: self
                .missions
                .into_iter()
                .map(|m| Mission {
                    id: m.id,
                    name: m.name,
                    kind: m.kind,
                    required_payloads: m.requires,
                    data_per_unit_work: m.data_per_unit_work,
                })
                .collect(),
            demand,
            links: LinkCapacityField { between: self.links.between, to_network },
            energy_model: EnergyModel { per_km_kg: self.energy.per_km_kg, hover_km: self.energy.hover_km },
            epochs: self.epochs,
            horizon: self.horizon,
            epoch_minutes: self.epoch_minutes,
            depot_return: self.depot_return,
        }))
    }
}

/// Parse and validate a scenario document. All violations are reported at
/// once.
pub fn load_scenario(text: &str) -> Result<Scenario, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;
    let scenario = doc.into_scenario()?;
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(LoadError::Invalid(violations))
    }
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let mut text =
        serde_json::to_string_pretty(&ScenarioDocument::from_scenario(s)).expect("scenario documents always serialize");
    text.push('\n');
    text
}
