use std::collections::BTreeMap;

use serde::Serialize;

use super::graph::RouteGraph;
use super::weights::{arc_service_weights, ResidualDemand};
use super::HeuristicConfig;
use crate::scenario::Scenario;
use crate::DEFAULT_TOLERANCE;

/// A closed delivery tour from the depot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tour {
    /// Node locations `[l0, ..., lm]` with `l0 = lm` the depot.
    pub stops: Vec<usize>,
    /// Payload ids dropped off at each stop.
    pub deliveries: Vec<Vec<usize>>,
    /// Route index, into the graph's route list, for each leg.
    pub legs: Vec<usize>,
    pub uav: Option<usize>,
    /// Epoch at which the UAV is still at the depot, about to take off.
    pub departure: usize,
}

impl Tour {
    pub fn empty(depot: usize) -> Self {
        Self {
            stops: vec![depot, depot],
            deliveries: vec![Vec::new(), Vec::new()],
            legs: vec![0],
            uav: None,
            departure: 0,
        }
    }

    pub fn payloads(&self) -> impl Iterator<Item = usize> + '_ {
        self.deliveries.iter().flatten().copied()
    }

    /// Flight epochs from take-off to landing.
    pub fn epochs(&self, g: &RouteGraph) -> usize {
        self.offsets(g).last().copied().unwrap_or(0)
    }

    /// Epochs after take-off at which each stop is reached.
    pub fn offsets(&self, g: &RouteGraph) -> Vec<usize> {
        let mut out = vec![0];
        for (i, &leg) in self.legs.iter().enumerate() {
            let r = &g.routes(self.stops[i], self.stops[i + 1])[leg];
            out.push(out[i] + r.epochs);
        }
        out
    }

    /// Locations visited epoch by epoch, take-off and landing included.
    pub fn path(&self, g: &RouteGraph) -> Vec<usize> {
        let mut out = vec![self.stops[0]];
        for (i, &leg) in self.legs.iter().enumerate() {
            out.extend_from_slice(&g.routes(self.stops[i], self.stops[i + 1])[leg].path[1..]);
        }
        out
    }

    pub fn energy_per_kg(&self, g: &RouteGraph) -> f64 {
        self.legs
            .iter()
            .enumerate()
            .map(|(i, &leg)| g.routes(self.stops[i], self.stops[i + 1])[leg].energy_per_kg)
            .sum()
    }

    /// Take-off epochs that meet every window and land by the last epoch.
    pub fn departure_window(&self, s: &Scenario, g: &RouteGraph) -> Option<(usize, usize)> {
        let offsets = self.offsets(g);
        let mut lo: i64 = 0;
        let mut hi: i64 = s.epochs as i64 - 1 - *offsets.last().unwrap() as i64;
        for (stop, ps) in self.deliveries.iter().enumerate() {
            for &p in ps {
                let w = s.payloads[p].delivery.expect("deliverable");
                lo = lo.max(w.earliest as i64 - offsets[stop] as i64);
                hi = hi.min(w.latest as i64 - offsets[stop] as i64);
            }
        }
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    fn insert(&mut self, p: usize, target: usize, ins: &Insertion) {
        let i = ins.position;
        self.stops.insert(i, target);
        self.deliveries.insert(i, vec![p]);
        self.legs[i - 1] = ins.legs.0;
        self.legs.insert(i, ins.legs.1);
    }
}

/// Best way to put a delivery between stops `position - 1` and `position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub position: usize,
    /// Routes for the two new legs.
    pub legs: (usize, usize),
    pub cost: f64,
}

/// State shared by the φ evaluations: graph, weights and the current
/// residual demand.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    pub s: &'a Scenario,
    pub graph: &'a RouteGraph,
    pub cfg: HeuristicConfig,
    pub residual: ResidualDemand,
    weights: BTreeMap<(usize, usize), Vec<(f64, f64)>>,
    equipment_kg: f64,
}

impl<'a> Planner<'a> {
    pub fn new(s: &'a Scenario, graph: &'a RouteGraph, cfg: HeuristicConfig) -> Self {
        let equipment_kg = s.equipment().map(|p| s.payloads[p].weight).sum();
        let mut planner =
            Self { s, graph, cfg, residual: ResidualDemand::initial(s), weights: BTreeMap::new(), equipment_kg };
        planner.reweigh();
        planner
    }

    /// Recompute residual demand and arc weights after `tours` changed.
    pub fn refresh(&mut self, tours: &[Tour]) {
        let visits = tours.iter().flat_map(|t| {
            let p = t.path(self.graph);
            p[1..].to_vec()
        });
        self.residual = ResidualDemand::after_visits(self.s, visits);
        self.reweigh();
    }

    fn reweigh(&mut self) {
        self.weights.clear();
        for &a in &self.graph.nodes {
            for &b in &self.graph.nodes {
                let w =
                    self.graph.routes(a, b).iter().map(|r| arc_service_weights(self.s, r, &self.residual)).collect();
                self.weights.insert((a, b), w);
            }
        }
    }

    /// `(c, ν)` of route `g` from `a` to `b`.
    pub fn weight(&self, a: usize, b: usize, g: usize) -> (f64, f64) {
        self.weights[&(a, b)][g]
    }

    fn objective(&self, dpsi: f64, dc: f64, dnu: f64) -> f64 {
        let HeuristicConfig { alpha1, alpha2 } = self.cfg;
        (1.0 - alpha1 - alpha2) * dpsi - alpha1 * dc - alpha2 * dnu
    }

    /// φ1 at one position: the cheapest feasible route pair, or `None`
    /// when every pair breaks the battery, a window, the horizon or the
    /// payload capacity.
    pub fn phi1(&self, tour: &Tour, p: usize, position: usize) -> Option<Insertion> {
        let (s, g) = (self.s, self.graph);
        let del = s.payloads[p].delivery.expect("deliverable payload");
        let load: f64 =
            self.equipment_kg + tour.payloads().map(|q| s.payloads[q].weight).sum::<f64>() + s.payloads[p].weight;
        if load > s.uav.payload_capacity + DEFAULT_TOLERANCE {
            return None;
        }
        let mass = s.uav.empty_weight + load;
        let (a, b, target) = (tour.stops[position - 1], tour.stops[position], del.target);
        let old = &g.routes(a, b)[tour.legs[position - 1]];
        let (old_c, old_nu) = self.weight(a, b, tour.legs[position - 1]);
        let offsets = tour.offsets(g);
        let total = *offsets.last().unwrap() as i64;
        let base_energy = tour.energy_per_kg(g) - old.energy_per_kg;

        // Departure bounds from stops before and after the insertion point.
        let bounds = |range: std::ops::Range<usize>| {
            let mut lo = i64::MIN;
            let mut hi = i64::MAX;
            for stop in range {
                for &q in &tour.deliveries[stop] {
                    let w = s.payloads[q].delivery.expect("deliverable");
                    lo = lo.max(w.earliest as i64 - offsets[stop] as i64);
                    hi = hi.min(w.latest as i64 - offsets[stop] as i64);
                }
            }
            (lo, hi)
        };
        let (pre_lo, pre_hi) = bounds(0..position);
        let (suf_lo, suf_hi) = bounds(position..tour.stops.len());

        let mut best: Option<Insertion> = None;
        for (i1, r1) in g.routes(a, target).iter().enumerate() {
            let (c1, nu1) = self.weight(a, target, i1);
            for (i2, r2) in g.routes(target, b).iter().enumerate() {
                let shift = (r1.epochs + r2.epochs) as i64 - old.epochs as i64;
                let at = offsets[position - 1] as i64 + r1.epochs as i64;
                let lo = 0.max(pre_lo).max(suf_lo.saturating_sub(shift)).max(del.earliest as i64 - at);
                let hi = (s.epochs as i64 - 1 - total - shift)
                    .min(pre_hi)
                    .min(suf_hi.saturating_sub(shift))
                    .min(del.latest as i64 - at);
                if lo > hi {
                    continue;
                }
                let energy = mass * (base_energy + r1.energy_per_kg + r2.energy_per_kg);
                if energy > s.uav.battery_capacity + DEFAULT_TOLERANCE {
                    continue;
                }
                let (c2, nu2) = self.weight(target, b, i2);
                let cost = self.objective(shift as f64, c1 + c2 - old_c, nu1 + nu2 - old_nu);
                if best.is_none_or(|b| cost < b.cost - 1e-12) {
                    best = Some(Insertion { position, legs: (i1, i2), cost });
                }
            }
        }
        best
    }

    /// Best position for `p` in `tour`: minimal φ1, earliest position on ties.
    pub fn best_position(&self, tour: &Tour, p: usize) -> Option<Insertion> {
        let mut best: Option<Insertion> = None;
        for i in 1..tour.stops.len() {
            if let Some(ins) = self.phi1(tour, p, i) {
                if best.is_none_or(|b| ins.cost < b.cost - 1e-12) {
                    best = Some(ins);
                }
            }
        }
        best
    }

    /// φ2: savings of the insertion against serving `p` from the depot,
    /// measured on routes from the depot to the insertion successor.
    pub fn phi2(&self, tour: &Tour, ins: &Insertion) -> f64 {
        let depot = self.graph.depot;
        let succ = tour.stops[ins.position];
        let psi = self.graph.shortest(depot, succ).epochs as f64;
        (0..self.graph.routes(depot, succ).len())
            .map(|g| {
                let (c, nu) = self.weight(depot, succ, g);
                self.objective(psi, c, nu) - ins.cost
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Build tours by earliest-deadline seeding and φ1/φ2 insertion. Tours are
/// returned unassigned.
pub(crate) fn build_tours(planner: &mut Planner) -> Result<Vec<Tour>, super::HeuristicError> {
    let s = planner.s;
    let mut unserved: Vec<usize> = s.deliveries().map(|(p, _)| p).collect();
    unserved.sort_by_key(|&p| {
        let d = s.payloads[p].delivery.expect("deliverable");
        (d.latest, d.earliest, p)
    });
    let mut tours: Vec<Tour> = Vec::new();
    while !unserved.is_empty() {
        let p0 = unserved.remove(0);
        let mut tour = Tour::empty(planner.graph.depot);
        let ins = planner.phi1(&tour, p0, 1).ok_or(super::HeuristicError::DeliveryUnplaceable(p0))?;
        tour.insert(p0, s.payloads[p0].delivery.expect("deliverable").target, &ins);
        tours.push(tour);
        planner.refresh(&tours);
        loop {
            let current = tours.last().expect("tour just opened");
            let mut best: Option<(f64, usize, Insertion)> = None;
            for (idx, &p) in unserved.iter().enumerate() {
                let Some(ins) = planner.best_position(current, p) else { continue };
                let saving = planner.phi2(current, &ins);
                if best.is_none_or(|b| saving > b.0 + 1e-12) {
                    best = Some((saving, idx, ins));
                }
            }
            match best {
                Some((saving, idx, ins)) if saving >= -1e-12 => {
                    let p = unserved.remove(idx);
                    let target = s.payloads[p].delivery.expect("deliverable").target;
                    tours.last_mut().expect("open tour").insert(p, target, &ins);
                    planner.refresh(&tours);
                }
                _ => break,
            }
        }
    }
    Ok(tours)
}
