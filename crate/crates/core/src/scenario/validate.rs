use std::fmt;

use super::Scenario;

/// One broken scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub indices: Vec<usize>,
    pub rule: String,
}

impl Violation {
    fn new(field: &str, indices: &[usize], rule: &str) -> Self {
        Self { field: field.to_string(), indices: indices.to_vec(), rule: rule.to_string() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}: {}", self.field, self.indices, self.rule)
    }
}

fn nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Check every scenario invariant; empty means valid.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_loc = s.locations.len();
    let n_m = s.missions.len();
    let n_p = s.payloads.len();

    for (i, l) in s.locations.iter().enumerate() {
        if l.id != i {
            out.push(Violation::new("locations", &[i], "ids must be dense and ordered"));
        }
        if !l.x.is_finite() || !l.y.is_finite() {
            out.push(Violation::new("locations", &[i], "non-finite coordinates"));
        }
    }
    if !s.locations.iter().any(|l| l.is_depot) {
        out.push(Violation::new("locations", &[], "no depot"));
    }

    for (z, zone) in s.zones.iter().enumerate() {
        if zone.id != z {
            out.push(Violation::new("zones", &[z], "ids must be dense and ordered"));
        }
        for (j, link) in zone.servable_from.iter().enumerate() {
            if link.location >= n_loc {
                out.push(Violation::new("zones.servable_from", &[z, j], "unknown location"));
            }
            if link.quality.len() != n_m {
                out.push(Violation::new("zones.servable_from", &[z, j], "quality length"));
            } else if link.quality.iter().any(|&q| !nonneg(q)) {
                out.push(Violation::new("zones.servable_from", &[z, j], "negative quality"));
            }
            if zone.servable_from[..j].iter().any(|o| o.location == link.location) {
                out.push(Violation::new("zones.servable_from", &[z, j], "duplicate location"));
            }
        }
    }

    let u = &s.uav;
    for (name, value) in [
        ("uavs.empty_weight", u.empty_weight),
        ("uavs.payload_capacity", u.payload_capacity),
        ("uavs.battery_capacity", u.battery_capacity),
        ("uavs.max_step_distance", u.max_step_distance),
    ] {
        if !positive(value) {
            out.push(Violation::new(name, &[], "must be strictly positive"));
        }
    }
    if u.count == 0 {
        out.push(Violation::new("uavs.count", &[], "must be strictly positive"));
    }
    for (i, &(d, p)) in u.forbidden_payloads.iter().enumerate() {
        if d >= u.count || p >= n_p {
            out.push(Violation::new("uavs.forbidden_payloads", &[i], "index out of range"));
        }
    }

    for (i, p) in s.payloads.iter().enumerate() {
        if p.id != i {
            out.push(Violation::new("payloads", &[i], "ids must be dense and ordered"));
        }
        if !nonneg(p.weight) {
            out.push(Violation::new("payloads", &[i], "negative weight"));
        } else if p.weight > u.payload_capacity {
            out.push(Violation::new("payloads", &[i], "payload exceeds capacity"));
        }
        if let Some(d) = p.delivery {
            if d.target >= n_loc {
                out.push(Violation::new("payloads.delivery", &[i], "unknown target"));
            }
            if d.earliest > d.latest {
                out.push(Violation::new("payloads.delivery", &[i], "window inverted"));
            }
            if d.latest >= s.epochs {
                out.push(Violation::new("payloads.delivery", &[i], "window beyond last epoch"));
            }
        }
    }

    for (i, m) in s.missions.iter().enumerate() {
        if m.id != i {
            out.push(Violation::new("missions", &[i], "ids must be dense and ordered"));
        }
        if m.required_payloads.iter().any(|&p| p >= n_p) {
            out.push(Violation::new("missions", &[i], "unknown required payload"));
        }
        if !nonneg(m.data_per_unit_work) {
            out.push(Violation::new("missions", &[i], "negative data per unit work"));
        }
        if m.is_relay() && m.required_payloads.is_empty() {
            out.push(Violation::new("missions", &[i], "relay must require the radio payload"));
        }
    }
    if s.missions.iter().filter(|m| m.is_relay()).count() > 1 {
        out.push(Violation::new("missions", &[], "more than one relay mission"));
    }

    let (dk, dm, dz) = s.demand.dims();
    if (dk, dm, dz) != (s.epochs, n_m, s.zones.len()) {
        out.push(Violation::new("demand", &[], "dimensions do not match epochs x missions x zones"));
    } else {
        for (k, m, z, v) in s.demand.entries() {
            if !nonneg(v) {
                out.push(Violation::new("demand", &[k, m, z], "negative demand"));
            } else if s.missions[m].is_relay() {
                out.push(Violation::new("demand", &[k, m, z], "relay carries no demand"));
            }
        }
    }

    if s.links.between.len() != n_loc || s.links.between.iter().any(|r| r.len() != n_loc) {
        out.push(Violation::new("links.between", &[], "not a square location matrix"));
    } else {
        for a in 0..n_loc {
            for b in 0..n_loc {
                let t = s.links.between[a][b];
                if !nonneg(t) {
                    out.push(Violation::new("links.between", &[a, b], "negative capacity"));
                } else if a < b && t != s.links.between[b][a] {
                    out.push(Violation::new("links.between", &[a, b], "asymmetric capacity"));
                }
            }
        }
    }
    if s.links.to_network.len() != n_loc {
        out.push(Violation::new("links.to_network", &[], "length differs from locations"));
    } else {
        for (l, &t) in s.links.to_network.iter().enumerate() {
            if !nonneg(t) {
                out.push(Violation::new("links.to_network", &[l], "negative capacity"));
            }
        }
    }

    let square = |m: &Vec<Vec<f64>>| m.len() == n_loc && m.iter().all(|r| r.len() == n_loc);
    if !square(&s.distances) || !square(&s.energy) {
        out.push(Violation::new("distances", &[], "not a square location matrix"));
    } else {
        for a in 0..n_loc {
            if s.distances[a][a] != 0.0 {
                out.push(Violation::new("distances", &[a, a], "nonzero self distance"));
            }
            if !positive(s.energy[a][a]) {
                out.push(Violation::new("energy", &[a, a], "hover cost must be positive"));
            }
            for b in 0..n_loc {
                if !nonneg(s.distances[a][b]) {
                    out.push(Violation::new("distances", &[a, b], "negative distance"));
                }
                if !nonneg(s.energy[a][b]) {
                    out.push(Violation::new("energy", &[a, b], "negative energy factor"));
                }
                if a < b && s.distances[a][b] != s.distances[b][a] {
                    out.push(Violation::new("distances", &[a, b], "asymmetric distance"));
                }
            }
        }
    }

    if s.epochs == 0 {
        out.push(Violation::new("epochs", &[], "must be strictly positive"));
    }
    if s.horizon > s.epochs {
        out.push(Violation::new("horizon", &[], "horizon exceeds epoch count"));
    }
    out
}
