use super::graph::Route;
use crate::scenario::{MissionKind, Scenario};

/// Per-epoch demand still unclaimed by the tours built so far, for the
/// coverage and monitoring missions.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDemand {
    /// `[coverage, monitoring]` mission ids, when present.
    pub missions: [Option<usize>; 2],
    /// Residual work per epoch, `[mission slot][zone]`.
    pub per_epoch: [Vec<f64>; 2],
    /// Most work one UAV can do in one epoch at any location against the
    /// initial demand; the normalization of c and ν.
    pub scale: [f64; 2],
}

impl ResidualDemand {
    pub fn initial(s: &Scenario) -> Self {
        let missions = [s.mission_of_kind(MissionKind::Coverage), s.mission_of_kind(MissionKind::Monitoring)];
        let per_epoch = missions.map(|m| match m {
            None => vec![0.0; s.zones.len()],
            Some(m) => (0..s.zones.len())
                .map(|z| (0..s.epochs).map(|k| s.demand.get(k, m, z)).sum::<f64>() / s.epochs as f64)
                .collect(),
        });
        let mut r = Self { missions, per_epoch, scale: [0.0; 2] };
        for slot in 0..2 {
            r.scale[slot] = (0..s.num_locations()).map(|l| r.raw_at(s, l)[slot]).fold(0.0, f64::max);
        }
        r
    }

    /// Residual after the given paths are flown, each location visit
    /// assumed to serve every reachable zone for a full epoch.
    pub fn after_visits(s: &Scenario, visits: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Self::initial(s);
        let mut served = [vec![0.0; s.zones.len()], vec![0.0; s.zones.len()]];
        for l in visits {
            for (z, q) in s.zones_from(l) {
                for slot in 0..2 {
                    if let Some(m) = r.missions[slot] {
                        served[slot][z] += q[m];
                    }
                }
            }
        }
        for slot in 0..2 {
            for (z, left) in r.per_epoch[slot].iter_mut().enumerate() {
                *left = (*left - served[slot][z] / s.epochs as f64).max(0.0);
            }
        }
        r
    }

    /// `Σ_z min(q(l,m,z), residual)` for coverage and monitoring.
    pub fn raw_at(&self, s: &Scenario, l: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (z, q) in s.zones_from(l) {
            for slot in 0..2 {
                if let Some(m) = self.missions[slot] {
                    out[slot] += q[m].min(self.per_epoch[slot][z]);
                }
            }
        }
        out
    }
}

/// Unnormalized coverage and monitoring work along a route: one epoch at
/// every location after the start.
pub fn raw_service(s: &Scenario, route: &Route, residual: &ResidualDemand) -> (f64, f64) {
    let mut c = 0.0;
    let mut nu = 0.0;
    for &l in &route.path[1..] {
        let [a, b] = residual.raw_at(s, l);
        c += a;
        nu += b;
    }
    (c, nu)
}

/// `(c, ν)` of a route, each in `[0, ψ]`.
pub fn arc_service_weights(s: &Scenario, route: &Route, residual: &ResidualDemand) -> (f64, f64) {
    let (c, nu) = raw_service(s, route, residual);
    let norm = |x: f64, scale: f64| if scale > 0.0 { x / scale } else { 0.0 };
    (norm(c, residual.scale[0]), norm(nu, residual.scale[1]))
}
