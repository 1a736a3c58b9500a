//! Summary quantities of a plan: performance, payload and energy.

use serde::Serialize;

use crate::evaluator::{battery_trace, satisfaction};
use crate::plan::Plan;
use crate::scenario::{MissionKind, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanMetrics {
    pub objective: f64,
    /// `σ̄(m)` per mission, `None` for relay.
    pub sigma_bar: Vec<Option<f64>>,
    /// Served work over total demand, per mission (1 when there is no demand).
    pub served_fraction: Vec<Option<f64>>,
    /// Energy drawn from batteries, Wh. Epochs parked at a depot are free.
    pub energy_wh: f64,
    /// `energy_wh / E`.
    pub energy_charges: f64,
    /// Mean carried weight over airborne UAV-epochs, kg.
    pub mean_payload_kg: f64,
    pub mean_camera_kg: f64,
    pub mean_radio_kg: f64,
    pub mean_delivery_kg: f64,
    pub airborne_epochs: usize,
}

impl PlanMetrics {
    pub fn mean_payload_normalized(&self, s: &Scenario) -> f64 {
        self.mean_payload_kg / s.uav.payload_capacity
    }

    pub fn sigma_bar_of(&self, s: &Scenario, kind: MissionKind) -> Option<f64> {
        s.mission_of_kind(kind).and_then(|m| self.sigma_bar[m])
    }

    pub fn served_fraction_of(&self, s: &Scenario, kind: MissionKind) -> Option<f64> {
        s.mission_of_kind(kind).and_then(|m| self.served_fraction[m])
    }
}

pub fn plan_metrics(s: &Scenario, p: &Plan) -> PlanMetrics {
    let report = satisfaction(s, p);
    let trace = battery_trace(s, p);
    let (nd, nk) = (p.num_uavs(), p.num_epochs());

    let mut energy = 0.0;
    for d in 0..nd {
        for k in 1..nk {
            let (a, b) = (p.locations[d][k - 1], p.locations[d][k]);
            if !(a == b && s.is_depot(a)) {
                energy += trace.consumed[d][k];
            }
        }
    }

    let camera = s.payload_by_name(crate::scenario::CAMERA);
    let radio = s.payload_by_name(crate::scenario::RADIO);
    let (mut total, mut cam, mut rad, mut del) = (0.0, 0.0, 0.0, 0.0);
    let mut airborne = 0usize;
    for d in 0..nd {
        for k in 0..nk {
            if s.is_depot(p.locations[d][k]) {
                continue;
            }
            airborne += 1;
            for (i, &on) in p.payloads[d][k].iter().enumerate() {
                if !on {
                    continue;
                }
                let w = s.payloads[i].weight;
                total += w;
                if Some(i) == camera {
                    cam += w;
                } else if Some(i) == radio {
                    rad += w;
                } else if s.payloads[i].is_deliverable() {
                    del += w;
                }
            }
        }
    }
    let mean = |x: f64| if airborne == 0 { 0.0 } else { x / airborne as f64 };

    let served_fraction = s
        .missions
        .iter()
        .map(|mission| {
            if mission.is_relay() {
                return None;
            }
            let m = mission.id;
            let need = s.demand.total(m);
            if need == 0.0 {
                return Some(1.0);
            }
            let mut got = 0.0;
            for d in 0..nd {
                for k in 0..nk {
                    let l = p.locations[d][k];
                    for (z, q) in s.zones_from(l) {
                        got += p.missions[d][k][m][z] * q[m];
                    }
                }
            }
            Some(got / need)
        })
        .collect();

    PlanMetrics {
        objective: report.objective,
        sigma_bar: report.sigma_bar,
        served_fraction,
        energy_wh: energy,
        energy_charges: energy / s.uav.battery_capacity,
        mean_payload_kg: mean(total),
        mean_camera_kg: mean(cam),
        mean_radio_kg: mean(rad),
        mean_delivery_kg: mean(del),
        airborne_epochs: airborne,
    }
}
