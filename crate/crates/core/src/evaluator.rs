//! Feasibility checking and the satisfaction objective.
//!
//! Every solver in the crate funnels its output through
//! [`check_feasibility`]; a plan is feasible iff the returned report is
//! empty.
//!
//! Battery accounting: `β(d,0) = E`. For `k ≥ 1` the hop flown into epoch
//! `k` costs `e(λ(d,k-1), λ(d,k)) · (W + payload carried at k-1)`. At a
//! depot the battery is swapped, so `β(d,k) = E`, but the hop into the
//! depot must still be affordable with the charge left.

use std::fmt::Write as _;

use serde::Serialize;

use crate::plan::{Plan, PlanError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConstraintTag {
    #[serde(rename = "LOC-UNIQUE")]
    LocUnique,
    #[serde(rename = "TRAVEL")]
    Travel,
    #[serde(rename = "CAPACITY")]
    Capacity,
    #[serde(rename = "PAYLOAD-LOCK")]
    PayloadLock,
    #[serde(rename = "BATTERY")]
    Battery,
    #[serde(rename = "DELIVERY")]
    Delivery,
    #[serde(rename = "EQUIP")]
    Equip,
    #[serde(rename = "NEED")]
    Need,
    #[serde(rename = "FLOW")]
    Flow,
    #[serde(rename = "RELAY-CAP")]
    RelayCap,
    #[serde(rename = "SINK")]
    Sink,
    #[serde(rename = "BUDGET")]
    Budget,
    #[serde(rename = "DEPOT-RETURN")]
    DepotReturn,
}

impl ConstraintTag {
    pub const ALL: [ConstraintTag; 13] = [
        Self::LocUnique,
        Self::Travel,
        Self::Capacity,
        Self::PayloadLock,
        Self::Battery,
        Self::Delivery,
        Self::Equip,
        Self::Need,
        Self::Flow,
        Self::RelayCap,
        Self::Sink,
        Self::Budget,
        Self::DepotReturn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::LocUnique => "LOC-UNIQUE",
            Self::Travel => "TRAVEL",
            Self::Capacity => "CAPACITY",
            Self::PayloadLock => "PAYLOAD-LOCK",
            Self::Battery => "BATTERY",
            Self::Delivery => "DELIVERY",
            Self::Equip => "EQUIP",
            Self::Need => "NEED",
            Self::Flow => "FLOW",
            Self::RelayCap => "RELAY-CAP",
            Self::Sink => "SINK",
            Self::Budget => "BUDGET",
            Self::DepotReturn => "DEPOT-RETURN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationEntry {
    pub tag: ConstraintTag,
    /// Constraint indices; a transfer to the network uses `|D|` as the
    /// destination UAV index.
    pub indices: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub entries: Vec<ViolationEntry>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tags(&self) -> Vec<ConstraintTag> {
        let mut t: Vec<_> = self.entries.iter().map(|e| e.tag).collect();
        t.dedup();
        t
    }

    fn push(&mut self, tag: ConstraintTag, indices: &[usize], magnitude: f64) {
        self.entries.push(ViolationEntry { tag, indices: indices.to_vec(), magnitude });
    }

    fn finish(mut self) -> Self {
        self.entries.sort_by(|a, b| a.tag.cmp(&b.tag).then_with(|| a.indices.cmp(&b.indices)));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tag,indices,magnitude\n");
        for e in &self.entries {
            let idx = e.indices.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
            let _ = writeln!(out, "{},{},{}", e.tag.as_str(), idx, e.magnitude);
        }
        out
    }
}

/// Battery level per UAV and epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryTrace {
    /// `β(d, k)` after any depot swap.
    pub level: Vec<Vec<f64>>,
    /// Charge left on arrival at epoch `k`, before a depot swap.
    pub arrival: Vec<Vec<f64>>,
    /// Energy drawn by the hop into epoch `k` (zero at `k = 0`), Wh.
    pub consumed: Vec<Vec<f64>>,
}

impl BatteryTrace {
    /// `(d, k, deficit)` for every epoch whose arrival charge is below `-eps`.
    pub fn deficits(&self, eps: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (d, row) in self.arrival.iter().enumerate() {
            for (k, &b) in row.iter().enumerate() {
                if b < -eps {
                    out.push((d, k, -b));
                }
            }
        }
        out
    }
}

/// Battery simulation; assumes every location id in `p` is valid.
pub fn battery_trace(s: &Scenario, p: &Plan) -> BatteryTrace {
    let cap = s.uav.battery_capacity;
    let (nd, nk) = (p.num_uavs(), p.num_epochs());
    let mut level = vec![vec![cap; nk]; nd];
    let mut arrival = vec![vec![cap; nk]; nd];
    let mut consumed = vec![vec![0.0; nk]; nd];
    for d in 0..nd {
        for k in 1..nk {
            let (from, to) = (p.locations[d][k - 1], p.locations[d][k]);
            let mass = s.uav.empty_weight + p.payload_weight(s, d, k - 1);
            let used = s.energy[from][to] * mass;
            consumed[d][k] = used;
            arrival[d][k] = level[d][k - 1] - used;
            level[d][k] = if s.is_depot(to) { cap } else { arrival[d][k] };
        }
    }
    BatteryTrace { level, arrival, consumed }
}

/// Check every model constraint, returning one entry per violated
/// `(constraint, index)` pair, sorted by tag then indices.
pub fn check_feasibility(s: &Scenario, p: &Plan, eps: f64) -> Result<ViolationReport, PlanError> {
    use ConstraintTag::*;
    p.check_dims(s)?;
    let mut r = ViolationReport::default();
    let (nd, nk, nl) = (s.num_uavs(), s.epochs, s.num_locations());

    for d in 0..nd {
        for k in 0..nk {
            if p.locations[d][k] >= nl {
                r.push(LocUnique, &[d, k], 1.0);
            }
        }
    }
    if !r.entries.is_empty() {
        return Ok(r.finish());
    }

    for d in 0..nd {
        let loc = &p.locations[d];
        if !s.is_depot(loc[0]) {
            r.push(DepotReturn, &[d, 0], 1.0);
        }
        if s.depot_return && nk > 1 && !s.is_depot(loc[nk - 1]) {
            r.push(DepotReturn, &[d, nk - 1], 1.0);
        }
        for k in 0..nk {
            if k >= 1 {
                let hop = s.distances[loc[k - 1]][loc[k]];
                if hop > s.uav.max_step_distance + eps {
                    r.push(Travel, &[d, k], hop - s.uav.max_step_distance);
                }
            }
            let w = p.payload_weight(s, d, k);
            if w > s.uav.payload_capacity + eps {
                r.push(Capacity, &[d, k], w - s.uav.payload_capacity);
            }
            for (i, &on) in p.payloads[d][k].iter().enumerate() {
                if k >= 1 && !s.is_depot(loc[k]) && on != p.payloads[d][k - 1][i] {
                    r.push(PayloadLock, &[d, k, i], 1.0);
                }
                if on && s.uav.is_forbidden(d, i) {
                    r.push(Equip, &[d, k, i], 1.0);
                }
            }
        }
    }

    for (d, k, deficit) in battery_trace(s, p).deficits(eps) {
        r.push(Battery, &[d, k], deficit);
    }

    for (pi, del) in s.deliveries() {
        let served = (0..nd).any(|d| {
            (del.earliest..=del.latest.min(nk.saturating_sub(1)))
                .any(|k| p.locations[d][k] == del.target && p.payloads[d][k][pi])
        });
        if !served {
            r.push(Delivery, &[pi], 1.0);
        }
    }

    let relay = s.relay_mission();
    for d in 0..nd {
        for k in 0..nk {
            let carried = &p.payloads[d][k];
            let mut used = 0.0;
            for (m, mission) in s.missions.iter().enumerate() {
                for z in 0..s.zones.len() {
                    let mu = p.missions[d][k][m][z];
                    if !(-eps..=1.0 + eps).contains(&mu) {
                        r.push(Budget, &[d, k, m, z], if mu < 0.0 { -mu } else { mu - 1.0 });
                    }
                    if mu > eps && (mission.is_relay() || !s.equipped_for(m, carried)) {
                        r.push(Equip, &[d, k, m, z], mu);
                    }
                    used += mu;
                }
            }
            let rho = p.relay[d][k];
            if !(-eps..=1.0 + eps).contains(&rho) {
                r.push(Budget, &[d, k], if rho < 0.0 { -rho } else { rho - 1.0 });
            }
            if rho > eps && relay.is_none_or(|m| !s.equipped_for(m, carried)) {
                r.push(Equip, &[d, k], rho);
            }
            used += rho;
            if used > 1.0 + eps {
                r.push(Budget, &[d, k], used - 1.0);
            }
        }
    }

    for k in 0..nk {
        for m in s.service_missions() {
            for z in 0..s.zones.len() {
                let served: f64 = (0..nd).map(|d| p.missions[d][k][m][z] * s.quality(p.locations[d][k], m, z)).sum();
                let need = s.demand.get(k, m, z);
                if served > need + eps {
                    r.push(Need, &[k, m, z], served - need);
                }
            }
        }
    }

    for k in 0..nk {
        let mut generated_total = 0.0;
        let mut sunk_total = 0.0;
        for d in 0..nd {
            let l = p.locations[d][k];
            let share = if relay.is_some() { p.relay[d][k] } else { 1.0 };
            for d2 in 0..nd {
                let tau = p.transfers[d][d2][k];
                let cap = s.links.between[l][p.locations[d2][k]] * share;
                if tau < -eps {
                    r.push(RelayCap, &[d, d2, k], -tau);
                } else if tau > cap + eps {
                    r.push(RelayCap, &[d, d2, k], tau - cap);
                }
            }
            let sink = p.to_network[d][k];
            let cap = s.links.to_network[l] * share;
            if sink < -eps {
                r.push(RelayCap, &[d, nd, k], -sink);
            } else if sink > cap + eps {
                r.push(RelayCap, &[d, nd, k], sink - cap);
            }

            let generated = p.generated(s, d, k);
            let inflow: f64 = (0..nd).map(|d1| p.transfers[d1][d][k]).sum();
            let outflow: f64 = (0..nd).map(|d2| p.transfers[d][d2][k]).sum::<f64>() + sink;
            let imbalance = inflow + generated - outflow;
            if imbalance.abs() > eps {
                r.push(Flow, &[d, k], imbalance.abs());
            }
            generated_total += generated;
            sunk_total += sink;
        }
        if (generated_total - sunk_total).abs() > eps {
            r.push(Sink, &[k], (generated_total - sunk_total).abs());
        }
    }

    Ok(r.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfactionReport {
    /// `σ(k, m, z)`; relay rows are fixed at 1.
    pub sigma: Vec<Vec<Vec<f64>>>,
    /// `σ̄(m)`; `None` for the relay mission.
    pub sigma_bar: Vec<Option<f64>>,
    pub objective: f64,
}

impl SatisfactionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,epoch,mission,zone,value\n");
        for (k, per_m) in self.sigma.iter().enumerate() {
            for (m, per_z) in per_m.iter().enumerate() {
                if self.sigma_bar[m].is_none() {
                    continue;
                }
                for (z, v) in per_z.iter().enumerate() {
                    let _ = writeln!(out, "sigma,{k},{m},{z},{v}");
                }
            }
        }
        for (m, v) in self.sigma_bar.iter().enumerate() {
            if let Some(v) = v {
                let _ = writeln!(out, "sigma_bar,,{m},,{v}");
            }
        }
        let _ = writeln!(out, "objective,,,,{}", self.objective);
        out
    }
}

/// Windowed service-over-need ratios and the max-min objective.
///
/// The window for epoch `k` spans `max(0, k-H)..=k`; an empty need counts
/// as fully satisfied.
pub fn satisfaction(s: &Scenario, p: &Plan) -> SatisfactionReport {
    let (nk, nm, nz) = (s.epochs, s.missions.len(), s.zones.len());
    let mut served = vec![vec![vec![0.0; nz]; nm]; nk];
    for d in 0..p.num_uavs() {
        for k in 0..nk {
            let l = p.locations[d][k];
            for (z, q) in s.zones_from(l) {
                for m in s.service_missions() {
                    served[k][m][z] += p.missions[d][k][m][z] * q[m];
                }
            }
        }
    }
    let mut sigma = vec![vec![vec![1.0; nz]; nm]; nk];
    let mut sigma_bar: Vec<Option<f64>> = s.missions.iter().map(|m| (!m.is_relay()).then_some(1.0)).collect();
    for m in s.service_missions() {
        for z in 0..nz {
            for k in 0..nk {
                let need = s.demand.window_sum(k, s.horizon, m, z);
                if need > 0.0 {
                    let got: f64 = (k.saturating_sub(s.horizon)..=k).map(|h| served[h][m][z]).sum();
                    sigma[k][m][z] = got / need;
                }
                let bar = sigma_bar[m].as_mut().expect("service mission");
                *bar = bar.min(sigma[k][m][z]);
            }
        }
    }
    let objective = sigma_bar.iter().flatten().copied().fold(1.0, f64::min);
    SatisfactionReport { sigma, sigma_bar, objective }
}
