//! Single-constraint mutations of a known-feasible plan.
//!
//! The base world has four UAVs over five locations:
//! 0 works coverage from location 1 and carries the delivery,
//! 1 monitors from location 2, 2 relays from location 3 with one depot
//! swap in the middle, 3 stays parked. Location 4 is out of one-hop reach.
//! Links are uniform, so moving a UAV never changes a transfer cap.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use uavplan::evaluator::{battery_trace, check_feasibility, ConstraintTag};
use uavplan::plan::Plan;
use uavplan::scenario::{load_scenario, Scenario};

pub const EPS: f64 = 1e-6;

const RADIO: usize = 0;
const CAMERA: usize = 1;
const PARCEL: usize = 2;
const COVERAGE: usize = 0;
const MONITORING: usize = 1;
const RELAY: usize = 2;
const FAR: usize = 4;

#[derive(Debug, Clone)]
struct Params {
    epochs: usize,
    swap: usize,
    coords: [(f64, f64); 5],
    capacity: f64,
    per_km: f64,
    link: f64,
    sink: f64,
    rate: [f64; 2],
    quality: [f64; 2],
    slack: Vec<[f64; 2]>,
}

pub struct Base {
    pub scenario: Scenario,
    pub plan: Plan,
    params: Params,
}

fn scenario(p: &Params, battery: f64, mu: &[[f64; 2]]) -> Scenario {
    let nk = p.epochs;
    let locations: Vec<_> =
        p.coords.iter().enumerate().map(|(i, &(x, y))| json!({ "id": i, "x": x, "y": y, "depot": i == 0 })).collect();
    let mut demand = Vec::new();
    for k in 1..nk {
        demand.push(json!([k, COVERAGE, 0, mu[k][0] * p.quality[0] + p.slack[k][0]]));
        demand.push(json!([k, MONITORING, 0, mu[k][1] * p.quality[1] + p.slack[k][1]]));
    }
    let doc = json!({
        "locations": locations,
        "zones": [{ "id": 0, "servable_from": [
            { "location": 1, "quality": [p.quality[0], 0.0, 0.0] },
            { "location": 2, "quality": [0.0, p.quality[1], 0.0] }
        ]}],
        "uavs": {
            "count": 4, "empty_weight": 4.0, "payload_capacity": p.capacity,
            "battery_capacity": battery, "max_step_distance": 2.0,
            "forbidden_payloads": [[2, CAMERA], [3, CAMERA]]
        },
        "payloads": [
            { "id": RADIO, "name": "radio", "weight": 1.0 },
            { "id": CAMERA, "name": "camera", "weight": 1.0 },
            { "id": PARCEL, "name": "parcel", "weight": 0.5,
              "delivery": { "target": 1, "earliest": 1, "latest": nk - 2 } }
        ],
        "missions": [
            { "id": COVERAGE, "name": "coverage", "kind": "coverage", "requires": [RADIO], "data_per_unit_work": p.rate[0] },
            { "id": MONITORING, "name": "monitoring", "kind": "monitoring", "requires": [CAMERA], "data_per_unit_work": p.rate[1] },
            { "id": RELAY, "name": "relay", "kind": "relay", "requires": [RADIO], "data_per_unit_work": 0.0 }
        ],
        "demand": demand,
        "links": { "between": vec![vec![p.link; 5]; 5], "to_network": vec![p.sink; 5] },
        "epochs": nk,
        "horizon": 1,
        "energy": { "per_km_kg": p.per_km, "hover_km": 0.1 },
        "depot_return": true
    });
    load_scenario(&doc.to_string()).expect("mutation base scenario is valid")
}

/// Largest charge used between depot visits, per UAV.
fn segment_use(s: &Scenario, p: &Plan) -> Vec<f64> {
    let t = battery_trace(s, p);
    (0..p.num_uavs())
        .map(|d| {
            let (mut run, mut best) = (0.0f64, 0.0f64);
            for k in 1..p.num_epochs() {
                run += t.consumed[d][k];
                if s.is_depot(p.locations[d][k]) {
                    best = best.max(run);
                    run = 0.0;
                }
            }
            best.max(run)
        })
        .collect()
}

impl Base {
    pub fn new(rng: &mut ChaCha8Rng) -> Self {
        let epochs = rng.gen_range(6..=8);
        let params = Params {
            epochs,
            swap: rng.gen_range(2..=epochs - 3),
            coords: [
                (0.0, 0.0),
                (rng.gen_range(0.8..1.2), 0.0),
                (0.0, rng.gen_range(0.8..1.2)),
                (-rng.gen_range(1.85..1.95), 0.0),
                (0.0, -rng.gen_range(2.1..2.3)),
            ],
            capacity: rng.gen_range(2.05..2.4),
            per_km: rng.gen_range(2.0..4.0),
            link: rng.gen_range(10.0..14.0),
            sink: rng.gen_range(10.0..14.0),
            rate: [rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)],
            quality: [rng.gen_range(0.5..1.0), rng.gen_range(0.5..1.0)],
            slack: (0..epochs).map(|_| [rng.gen_range(0.02..0.1), rng.gen_range(0.02..0.1)]).collect(),
        };
        let mut mu = vec![[0.0; 2]; epochs];
        for row in mu.iter_mut().take(epochs - 1).skip(1) {
            *row = [rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4)];
        }
        let mut s = scenario(&params, 1e6, &mu);
        let plan = Self::plan(&s, &params, &mu, rng);

        // The battery sits strictly between what the base plan needs and what
        // the relay UAV needs when it skips its swap.
        let mut needed = segment_use(&s, &plan).into_iter().fold(0.0, f64::max);
        needed = needed.max(2.0 * s.energy[0][FAR] * s.uav.empty_weight);
        let mut skip = plan.clone();
        skip.locations[2][params.swap] = 3;
        let over = segment_use(&s, &skip)[2];
        assert!(over > needed + 0.1, "battery window too narrow: {needed} vs {over}");
        let battery = needed + rng.gen_range(0.2..0.8) * (over - needed);
        s = scenario(&params, battery, &mu);

        let report = check_feasibility(&s, &plan, EPS).unwrap();
        assert!(report.is_feasible(), "base plan infeasible: {report:?}");
        Base { scenario: s, plan, params }
    }

    fn plan(s: &Scenario, p: &Params, mu: &[[f64; 2]], rng: &mut ChaCha8Rng) -> Plan {
        let nk = p.epochs;
        let mut plan = Plan::idle(s, 0);
        for k in 1..nk - 1 {
            plan.locations[0][k] = 1;
            plan.locations[1][k] = 2;
            plan.locations[2][k] = if k == p.swap { 0 } else { 3 };
        }
        for k in 0..nk {
            plan.payloads[0][k][RADIO] = true;
            plan.payloads[0][k][PARCEL] = true;
            plan.payloads[1][k][RADIO] = true;
            plan.payloads[1][k][CAMERA] = true;
            plan.payloads[2][k][RADIO] = true;
        }
        for k in 1..nk - 1 {
            plan.missions[0][k][COVERAGE][0] = mu[k][0];
            plan.missions[1][k][MONITORING][0] = mu[k][1];
            plan.relay[0][k] = rng.gen_range(0.1..0.3);
            plan.relay[1][k] = rng.gen_range(0.1..0.3);
            plan.relay[2][k] = rng.gen_range(0.6..0.9);
            let g0 = plan.generated(s, 0, k);
            let g1 = plan.generated(s, 1, k);
            let a = rng.gen_range(0.2..0.8);
            plan.transfers[0][2][k] = a * g0;
            plan.to_network[0][k] = g0 - a * g0;
            plan.transfers[1][2][k] = g1;
            plan.to_network[2][k] = a * g0 + g1;
        }
        plan
    }

    fn interior(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(1..self.params.epochs - 1)
    }

    /// A copy of the base plan that violates exactly `tag`.
    pub fn mutate(&self, tag: ConstraintTag, rng: &mut ChaCha8Rng) -> Plan {
        use ConstraintTag::*;
        let s = &self.scenario;
        let nk = self.params.epochs;
        let last = nk - 1;
        let mut p = self.plan.clone();
        match tag {
            LocUnique => {
                let (d, k) = (rng.gen_range(0..4), rng.gen_range(0..nk));
                p.locations[d][k] = s.num_locations() + rng.gen_range(0..3);
            }
            Travel => {
                let k = self.interior(rng);
                p.locations[3][k] = FAR;
            }
            Capacity => {
                let d = rng.gen_range(0..2);
                p.payloads[d][last] = vec![true; 3];
            }
            PayloadLock => {
                let mut ks: Vec<usize> = (1..last).collect();
                ks.shuffle(rng);
                let n = rng.gen_range(1..ks.len());
                for &k in &ks[..n] {
                    p.payloads[0][k][PARCEL] = false;
                }
            }
            Battery => {
                p.locations[2][self.params.swap] = 3;
            }
            Delivery => {
                let keep_last = rng.gen_bool(0.5);
                for k in 0..nk {
                    if !(keep_last && k == last) {
                        p.payloads[0][k][PARCEL] = false;
                    }
                }
            }
            Equip => match rng.gen_range(0..5) {
                0 => p.payloads[2][last][CAMERA] = true,
                1 => {
                    for k in 0..nk {
                        if rng.gen_bool(0.5) || k == last {
                            p.payloads[3][k][CAMERA] = true;
                        }
                    }
                }
                2 => {
                    for k in 0..nk {
                        p.payloads[1][k][CAMERA] = false;
                    }
                }
                3 => {
                    let (d, k) = (rng.gen_range(0..3), self.interior(rng));
                    let used = p.relay[d][k] + p.missions[d][k].iter().flatten().sum::<f64>();
                    p.missions[d][k][RELAY][0] = rng.gen_range(0.1..0.9) * (1.0 - used);
                }
                _ => {
                    let k = rng.gen_range(0..nk);
                    if rng.gen_bool(0.5) {
                        p.relay[3][k] = rng.gen_range(0.01..1.0);
                    } else {
                        let k = self.interior(rng);
                        p.missions[0][k][MONITORING][0] = rng.gen_range(0.01..0.2);
                    }
                }
            },
            Need => {
                let (d, m) = *[(0, COVERAGE), (1, MONITORING)].choose(rng).unwrap();
                let k = self.interior(rng);
                let q = self.params.quality[m];
                let delta = (self.params.slack[k][m] + rng.gen_range(0.005..0.04)) / q;
                p.missions[d][k][m][0] += delta;
                p.to_network[d][k] += delta * q * self.params.rate[m];
            }
            Flow => {
                let k = self.interior(rng);
                let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (0, 3), (2, 3)];
                let (a, b) = *pairs.choose(rng).unwrap();
                let t = p.transfers[a][b][k];
                if t > 1e-3 && rng.gen_bool(0.5) {
                    p.transfers[a][b][k] = t * rng.gen_range(0.0..0.9);
                } else {
                    p.transfers[a][b][k] += rng.gen_range(1e-4..0.2);
                }
            }
            RelayCap => {
                let k = self.interior(rng);
                match rng.gen_range(0..3) {
                    0 => {
                        let d = rng.gen_range(0..2);
                        let used = p.transfers[d][2][k] / self.params.link;
                        let used = used.max(p.to_network[d][k] / self.params.sink);
                        p.relay[d][k] = rng.gen_range(0.0..0.9) * used;
                    }
                    1 => {
                        let (a, b) = *[(0, 1), (0, 2), (1, 2)].choose(rng).unwrap();
                        let delta = rng.gen_range(1e-3..0.5);
                        p.transfers[a][b][k] -= delta;
                        p.transfers[b][a][k] -= delta;
                    }
                    _ => {
                        let d = rng.gen_range(0..2);
                        let delta = self.params.link * p.relay[d][k] - p.transfers[d][2][k] + rng.gen_range(0.01..0.5);
                        p.transfers[d][2][k] += delta;
                        p.transfers[2][d][k] += delta;
                    }
                }
            }
            Sink => {
                let k = rng.gen_range(0..nk);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                for d in 0..4 {
                    p.to_network[d][k] += sign * rng.gen_range(0.4..0.9) * EPS;
                }
            }
            Budget => match rng.gen_range(0..4) {
                0 => {
                    let k = self.interior(rng);
                    p.relay[2][k] = 1.0 + rng.gen_range(0.01..0.5);
                }
                1 => {
                    let (d, m) = *[(0, COVERAGE), (1, MONITORING)].choose(rng).unwrap();
                    let k = self.interior(rng);
                    let mu = p.missions[d][k][m][0];
                    p.relay[d][k] = 1.0 - mu + rng.gen_range(0.01..mu);
                }
                2 => {
                    let d = rng.gen_range(0..3);
                    p.relay[d][*[0, last].choose(rng).unwrap()] = 1.0 + rng.gen_range(0.01..0.5);
                }
                _ => {
                    let (d, k) = (rng.gen_range(0..3), rng.gen_range(0..nk));
                    p.missions[d][k][RELAY][0] = -rng.gen_range(0.01..0.5);
                }
            },
            DepotReturn => match rng.gen_range(0..3) {
                0 => p.locations[3][0] = rng.gen_range(1..=2),
                1 => p.locations[3][last] = rng.gen_range(1..=3),
                _ => p.locations[2][last] = 3,
            },
        }
        p
    }
}
