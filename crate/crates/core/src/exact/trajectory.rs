//! Per-UAV location/payload trajectories.

use super::Pruning;
use crate::scenario::Scenario;
use crate::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Trajectory {
    pub locations: Vec<usize>,
    /// Payload bit mask per epoch.
    pub loads: Vec<u64>,
    /// Epochs spent away from a depot.
    pub airborne: usize,
    /// Bit mask of the deliveries (by position in `Scenario::deliveries`)
    /// this trajectory completes.
    pub serves: u64,
    /// `(flat (k, m, z) index, q)` pairs the UAV could serve, one unit of
    /// epoch time each.
    pub potential: Vec<(usize, f64)>,
}

pub(crate) fn mask_weight(s: &Scenario, mask: u64) -> f64 {
    s.payloads.iter().filter(|p| mask >> p.id & 1 == 1).map(|p| p.weight).sum()
}

fn carried(s: &Scenario, mask: u64) -> Vec<bool> {
    (0..s.payloads.len()).map(|i| mask >> i & 1 == 1).collect()
}

/// Every trajectory a UAV barred from `forbidden` may fly, subject to the
/// enabled pruning rules. Travel limits and depot start/return are always
/// enforced.
pub(crate) fn trajectories(s: &Scenario, forbidden: u64, pruning: &Pruning) -> Vec<Trajectory> {
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(s.epochs);
    for depot in s.depots() {
        seq.push(depot);
        extend_locations(s, forbidden, pruning, &mut seq, s.uav.battery_capacity, &mut out);
        seq.pop();
    }
    out
}

fn extend_locations(
    s: &Scenario,
    forbidden: u64,
    pruning: &Pruning,
    seq: &mut Vec<usize>,
    charge: f64,
    out: &mut Vec<Trajectory>,
) {
    let k = seq.len();
    if k == s.epochs {
        assign_payloads(s, forbidden, pruning, seq, out);
        return;
    }
    let last = k + 1 == s.epochs;
    let from = seq[k - 1];
    for to in 0..s.num_locations() {
        if s.distances[from][to] > s.uav.max_step_distance + DEFAULT_TOLERANCE {
            continue;
        }
        if last && s.depot_return && !s.is_depot(to) {
            continue;
        }
        let arrival = charge - s.energy[from][to] * s.uav.empty_weight;
        if pruning.battery && arrival < -DEFAULT_TOLERANCE {
            continue;
        }
        let next = if s.is_depot(to) { s.uav.battery_capacity } else { arrival };
        seq.push(to);
        extend_locations(s, forbidden, pruning, seq, next, out);
        seq.pop();
    }
}

/// Half-open epoch ranges that share a payload: each starts at a depot
/// epoch and runs up to the next depot epoch.
fn segments(s: &Scenario, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut starts: Vec<usize> = (0..seq.len()).filter(|&k| s.is_depot(seq[k])).collect();
    starts.push(seq.len());
    starts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn assign_payloads(s: &Scenario, forbidden: u64, pruning: &Pruning, seq: &[usize], out: &mut Vec<Trajectory>) {
    let np = s.payloads.len();
    let all: u64 = if np == 64 { u64::MAX } else { (1u64 << np) - 1 };
    let deliveries: Vec<_> = s.deliveries().collect();
    let mut options: Vec<Vec<u64>> = Vec::new();
    for (a, b) in segments(s, seq) {
        let mut universe = all & !forbidden;
        if pruning.dominance {
            // Only equipment and deliveries completed inside this segment
            // can be worth their weight.
            for &(p, del) in &deliveries {
                let useful = (a..b).any(|k| seq[k] == del.target && (del.earliest..=del.latest).contains(&k));
                if !useful {
                    universe &= !(1u64 << p);
                }
            }
        }
        let mut feasible: Vec<u64> = Vec::new();
        let mut mask = universe;
        loop {
            if segment_ok(s, pruning, seq, a, b, mask) {
                feasible.push(mask);
            }
            if mask == 0 {
                break;
            }
            mask = (mask - 1) & universe;
        }
        if pruning.dominance {
            let snapshot = feasible.clone();
            feasible.retain(|&m| !snapshot.iter().any(|&o| o != m && o & m == m));
        }
        feasible.sort_unstable();
        if feasible.is_empty() {
            return;
        }
        options.push(feasible);
    }

    let segs = segments(s, seq);
    let mut choice = vec![0usize; options.len()];
    loop {
        let mut loads = vec![0u64; seq.len()];
        for (i, &(a, b)) in segs.iter().enumerate() {
            for load in &mut loads[a..b] {
                *load = options[i][choice[i]];
            }
        }
        out.push(build(s, seq, loads, &deliveries));
        // Odometer increment.
        let mut i = options.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

fn segment_ok(s: &Scenario, pruning: &Pruning, seq: &[usize], a: usize, b: usize, mask: u64) -> bool {
    let w = mask_weight(s, mask);
    if pruning.capacity && w > s.uav.payload_capacity + DEFAULT_TOLERANCE {
        return false;
    }
    if pruning.battery {
        let mass = s.uav.empty_weight + w;
        let mut charge = s.uav.battery_capacity;
        let end = b.min(seq.len() - 1);
        for k in a..end {
            charge -= s.energy[seq[k]][seq[k + 1]] * mass;
            if charge < -DEFAULT_TOLERANCE {
                return false;
            }
        }
    }
    true
}

fn build(
    s: &Scenario,
    seq: &[usize],
    loads: Vec<u64>,
    deliveries: &[(usize, crate::scenario::Delivery)],
) -> Trajectory {
    let airborne = seq.iter().filter(|&&l| !s.is_depot(l)).count();
    let mut serves = 0u64;
    for (i, &(p, del)) in deliveries.iter().enumerate() {
        let hit = (0..seq.len())
            .any(|k| seq[k] == del.target && loads[k] >> p & 1 == 1 && (del.earliest..=del.latest).contains(&k));
        if hit {
            serves |= 1 << i;
        }
    }
    let (nm, nz) = (s.missions.len(), s.zones.len());
    let mut potential = Vec::new();
    for (k, &l) in seq.iter().enumerate() {
        let have = carried(s, loads[k]);
        for (z, q) in s.zones_from(l) {
            for m in s.service_missions() {
                if q[m] > 0.0 && s.demand.get(k, m, z) > 0.0 && s.equipped_for(m, &have) {
                    potential.push(((k * nm + m) * nz + z, q[m]));
                }
            }
        }
    }
    Trajectory { locations: seq.to_vec(), loads, airborne, serves, potential }
}
