//! Complete decision assignment for a fleet over the whole time grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::Scenario;

/// Dense plan storage. Index order is always UAV, epoch, then the
/// remaining indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// `λ(d, k)`: location id.
    pub locations: Vec<Vec<usize>>,
    /// `ω(d, k, p)`.
    pub payloads: Vec<Vec<Vec<bool>>>,
    /// `μ(d, k, m, z)`; always zero for the relay mission.
    pub missions: Vec<Vec<Vec<Vec<f64>>>>,
    /// `ρ(d, k)`: share of the epoch spent relaying.
    pub relay: Vec<Vec<f64>>,
    /// `τ(d1, d2, k)`, Mb.
    pub transfers: Vec<Vec<Vec<f64>>>,
    /// `τ(d, Ω, k)`, Mb.
    pub to_network: Vec<Vec<f64>>,
}

impl Plan {
    /// Every UAV parked at `depot`, nothing carried, nothing served.
    pub fn idle(s: &Scenario, depot: usize) -> Self {
        let (nd, nk) = (s.num_uavs(), s.epochs);
        Self {
            locations: vec![vec![depot; nk]; nd],
            payloads: vec![vec![vec![false; s.payloads.len()]; nk]; nd],
            missions: vec![vec![vec![vec![0.0; s.zones.len()]; s.missions.len()]; nk]; nd],
            relay: vec![vec![0.0; nk]; nd],
            transfers: vec![vec![vec![0.0; nk]; nd]; nd],
            to_network: vec![vec![0.0; nk]; nd],
        }
    }

    pub fn num_uavs(&self) -> usize {
        self.locations.len()
    }

    pub fn num_epochs(&self) -> usize {
        self.locations.first().map_or(0, Vec::len)
    }

    /// Checks that every array has the shape implied by `s`.
    pub fn check_dims(&self, s: &Scenario) -> Result<(), PlanError> {
        let (nd, nk, np, nm, nz) = (s.num_uavs(), s.epochs, s.payloads.len(), s.missions.len(), s.zones.len());
        let bad = |what: &str| Err(PlanError::Dimension(what.to_string()));
        if self.locations.len() != nd || self.locations.iter().any(|r| r.len() != nk) {
            return bad("locations");
        }
        if self.payloads.len() != nd || self.payloads.iter().any(|r| r.len() != nk || r.iter().any(|x| x.len() != np)) {
            return bad("payloads");
        }
        if self.missions.len() != nd
            || self
                .missions
                .iter()
                .any(|r| r.len() != nk || r.iter().any(|x| x.len() != nm || x.iter().any(|y| y.len() != nz)))
        {
            return bad("missions");
        }
        if self.relay.len() != nd || self.relay.iter().any(|r| r.len() != nk) {
            return bad("relay");
        }
        if self.transfers.len() != nd || self.transfers.iter().any(|r| r.len() != nd || r.iter().any(|x| x.len() != nk))
        {
            return bad("transfers");
        }
        if self.to_network.len() != nd || self.to_network.iter().any(|r| r.len() != nk) {
            return bad("to_network");
        }
        Ok(())
    }

    /// Data generated by UAV `d` at epoch `k`, Mb.
    pub fn generated(&self, s: &Scenario, d: usize, k: usize) -> f64 {
        let l = self.locations[d][k];
        let mut total = 0.0;
        for (m, mission) in s.missions.iter().enumerate() {
            if mission.data_per_unit_work == 0.0 {
                continue;
            }
            for (z, q) in s.zones_from(l) {
                total += self.missions[d][k][m][z] * q[m] * mission.data_per_unit_work;
            }
        }
        total
    }

    pub fn payload_weight(&self, s: &Scenario, d: usize, k: usize) -> f64 {
        self.payloads[d][k].iter().zip(&s.payloads).filter(|(&on, _)| on).map(|(_, p)| p.weight).sum()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("plan dimension mismatch in `{0}`")]
    Dimension(String),
    #[error("plan parse error: {0}")]
    Parse(String),
    #[error("plan entry {what}[{index}] is out of range")]
    Range { what: &'static str, index: usize },
}

/// Transfer destination: another UAV or the terrestrial network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransferTarget {
    Uav(usize),
    Network(NetworkTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NetworkTag {
    #[serde(rename = "omega")]
    Omega,
}

/// Sparse on-disk form of a [`Plan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub locations: Vec<Vec<usize>>,
    pub payloads: Vec<(usize, usize, usize)>,
    pub missions: Vec<(usize, usize, usize, usize, f64)>,
    pub relay: Vec<(usize, usize, f64)>,
    pub transfers: Vec<(usize, TransferTarget, usize, f64)>,
}

impl PlanDocument {
    pub fn from_plan(p: &Plan) -> Self {
        let mut doc = PlanDocument {
            locations: p.locations.clone(),
            payloads: Vec::new(),
            missions: Vec::new(),
            relay: Vec::new(),
            transfers: Vec::new(),
        };
        for d in 0..p.num_uavs() {
            for k in 0..p.num_epochs() {
                for (i, &on) in p.payloads[d][k].iter().enumerate() {
                    if on {
                        doc.payloads.push((d, k, i));
                    }
                }
                for (m, row) in p.missions[d][k].iter().enumerate() {
                    for (z, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            doc.missions.push((d, k, m, z, v));
                        }
                    }
                }
                if p.relay[d][k] != 0.0 {
                    doc.relay.push((d, k, p.relay[d][k]));
                }
            }
        }
        for d1 in 0..p.num_uavs() {
            for d2 in 0..p.num_uavs() {
                for k in 0..p.num_epochs() {
                    let v = p.transfers[d1][d2][k];
                    if v != 0.0 {
                        doc.transfers.push((d1, TransferTarget::Uav(d2), k, v));
                    }
                }
            }
            for k in 0..p.num_epochs() {
                let v = p.to_network[d1][k];
                if v != 0.0 {
                    doc.transfers.push((d1, TransferTarget::Network(NetworkTag::Omega), k, v));
                }
            }
        }
        doc
    }

    pub fn into_plan(self, s: &Scenario) -> Result<Plan, PlanError> {
        let mut p = Plan::idle(s, 0);
        let (nd, nk) = (s.num_uavs(), s.epochs);
        if self.locations.len() != nd || self.locations.iter().any(|r| r.len() != nk) {
            return Err(PlanError::Dimension("locations".into()));
        }
        p.locations = self.locations;
        for (i, (d, k, pi)) in self.payloads.into_iter().enumerate() {
            if d >= nd || k >= nk || pi >= s.payloads.len() {
                return Err(PlanError::Range { what: "payloads", index: i });
            }
            p.payloads[d][k][pi] = true;
        }
        for (i, (d, k, m, z, v)) in self.missions.into_iter().enumerate() {
            if d >= nd || k >= nk || m >= s.missions.len() || z >= s.zones.len() {
                return Err(PlanError::Range { what: "missions", index: i });
            }
            p.missions[d][k][m][z] = v;
        }
        for (i, (d, k, v)) in self.relay.into_iter().enumerate() {
            if d >= nd || k >= nk {
                return Err(PlanError::Range { what: "relay", index: i });
            }
            p.relay[d][k] = v;
        }
        for (i, (d, to, k, v)) in self.transfers.into_iter().enumerate() {
            if d >= nd || k >= nk {
                return Err(PlanError::Range { what: "transfers", index: i });
            }
            match to {
                TransferTarget::Uav(d2) if d2 < nd => p.transfers[d][d2][k] = v,
                TransferTarget::Uav(_) => return Err(PlanError::Range { what: "transfers", index: i }),
                TransferTarget::Network(_) => p.to_network[d][k] = v,
            }
        }
        Ok(p)
    }
}

pub fn serialize_plan(p: &Plan) -> String {
    let mut text = serde_json::to_string(&PlanDocument::from_plan(p)).expect("plan serializes");
    text.push('\n');
    text
}

pub fn parse_plan(s: &Scenario, text: &str) -> Result<Plan, PlanError> {
    let doc: PlanDocument = serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
    doc.into_plan(s)
}
