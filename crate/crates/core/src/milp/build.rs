use super::{var_name, MilpError, MilpModel, Sense, Symbol, VarId, VarKind};
use crate::scenario::{validate, Scenario};
use crate::DEFAULT_TOLERANCE;

use Sense::{Eq, Ge, Le};
use Symbol::*;

struct Builder<'a> {
    s: &'a Scenario,
    m: MilpModel,
}

impl Builder<'_> {
    fn var(&mut self, sym: Symbol, idx: &[usize], kind: VarKind, lower: f64, upper: f64) -> VarId {
        self.m.add_var(var_name(sym, idx), kind, lower, upper)
    }

    fn id(&self, sym: Symbol, idx: &[usize]) -> Option<VarId> {
        self.m.var(sym, idx)
    }

    fn must(&self, sym: Symbol, idx: &[usize]) -> VarId {
        self.id(sym, idx).unwrap_or_else(|| panic!("{} not declared", var_name(sym, idx)))
    }

    fn row(&mut self, family: &str, idx: &[usize], terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let mut name = family.to_string();
        for i in idx {
            name.push('_');
            name.push_str(&i.to_string());
        }
        self.m.add_row(name, terms, sense, rhs);
    }
}

/// Build the linear model of `s`. See the module docs for the
/// reformulation and the variable counts.
pub fn build_milp(s: &Scenario) -> Result<MilpModel, MilpError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(MilpError::InvalidScenario(violations));
    }
    let mut b = Builder { s, m: MilpModel::default() };
    declare(&mut b);
    constrain(&mut b);
    b.m.objective = vec![(b.must(Gamma, &[]), 1.0)];
    Ok(b.m)
}

fn service(s: &Scenario) -> Vec<usize> {
    s.service_missions().collect()
}

fn window(s: &Scenario, k: usize) -> std::ops::RangeInclusive<usize> {
    k.saturating_sub(s.horizon)..=k
}

fn declare(b: &mut Builder) {
    let s = b.s;
    let (nd, nk, nl, np, nz) = (s.num_uavs(), s.epochs, s.num_locations(), s.payloads.len(), s.zones.len());
    let service = service(s);
    let last = nk - 1;

    for d in 0..nd {
        for k in 0..nk {
            for l in 0..nl {
                let pinned = !s.is_depot(l) && (k == 0 || (s.depot_return && nk > 1 && k == last));
                b.var(Lambda, &[d, k, l], VarKind::Binary, 0.0, if pinned { 0.0 } else { 1.0 });
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for p in 0..np {
                let banned = s.uav.is_forbidden(d, p) || s.payloads[p].weight > s.uav.payload_capacity;
                b.var(Omega, &[d, k, p], VarKind::Binary, 0.0, if banned { 0.0 } else { 1.0 });
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for (p, del) in s.deliveries() {
                if (del.earliest..=del.latest.min(last)).contains(&k) {
                    b.var(Delta, &[d, k, p], VarKind::Binary, 0.0, 1.0);
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            b.var(Beta, &[d, k], VarKind::Continuous, 0.0, s.uav.battery_capacity);
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for &m in &service {
                for z in 0..nz {
                    b.var(Mu, &[d, k, m, z], VarKind::Continuous, 0.0, 1.0);
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for l in 0..nl {
                for &m in &service {
                    for z in 0..nz {
                        if s.quality(l, m, z) > 0.0 {
                            b.var(MuHat, &[d, k, l, m, z], VarKind::Continuous, 0.0, 1.0);
                        }
                    }
                }
            }
        }
    }
    if s.relay_mission().is_some() {
        for d in 0..nd {
            for k in 0..nk {
                b.var(Rho, &[d, k], VarKind::Continuous, 0.0, 1.0);
            }
        }
    }
    for d1 in 0..nd {
        for d2 in 0..nd {
            for k in 0..nk {
                b.var(Tau, &[d1, d2, k], VarKind::Continuous, 0.0, f64::INFINITY);
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            b.var(TauNet, &[d, k], VarKind::Continuous, 0.0, f64::INFINITY);
        }
    }
    for d1 in 0..nd {
        for d2 in 0..nd {
            for k in 0..nk {
                for l1 in 0..nl {
                    for l2 in 0..nl {
                        if s.links.between[l1][l2] > 0.0 {
                            b.var(Pi, &[d1, d2, k, l1, l2], VarKind::Continuous, 0.0, 1.0);
                        }
                    }
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for l in 0..nl {
                if s.links.to_network[l] > 0.0 {
                    b.var(PiNet, &[d, k, l], VarKind::Continuous, 0.0, 1.0);
                }
            }
        }
    }
    for k in 0..nk {
        for &m in &service {
            for z in 0..nz {
                if s.demand.window_sum(k, s.horizon, m, z) > 0.0 {
                    b.var(Sigma, &[k, m, z], VarKind::Continuous, 0.0, 1.0);
                }
            }
        }
    }
    for &m in &service {
        b.var(SigmaBar, &[m], VarKind::Continuous, 0.0, 1.0);
    }
    b.var(Gamma, &[], VarKind::Continuous, 0.0, 1.0);
}

fn constrain(b: &mut Builder) {
    let s = b.s;
    let (nd, nk, nl, np, nz) = (s.num_uavs(), s.epochs, s.num_locations(), s.payloads.len(), s.zones.len());
    let service = service(s);
    let relay = s.relay_mission();
    let (w_empty, cap, e_cap) = (s.uav.empty_weight, s.uav.payload_capacity, s.uav.battery_capacity);
    let depots = s.depots();
    let far = |l1: usize, l2: usize| s.distances[l1][l2] > s.uav.max_step_distance + DEFAULT_TOLERANCE;

    for d in 0..nd {
        for k in 0..nk {
            let terms = (0..nl).map(|l| (b.must(Lambda, &[d, k, l]), 1.0)).collect();
            b.row("loc", &[d, k], terms, Eq, 1.0);
        }
    }
    for d in 0..nd {
        for k in 1..nk {
            for l1 in 0..nl {
                for l2 in 0..nl {
                    if far(l1, l2) {
                        let t = vec![(b.must(Lambda, &[d, k - 1, l1]), 1.0), (b.must(Lambda, &[d, k, l2]), 1.0)];
                        b.row("trv", &[d, k, l1, l2], t, Le, 1.0);
                    }
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            let terms = (0..np).map(|p| (b.must(Omega, &[d, k, p]), s.payloads[p].weight)).collect();
            b.row("cap", &[d, k], terms, Le, cap);
        }
    }
    for d in 0..nd {
        for k in 1..nk {
            for p in 0..np {
                let (now, before) = (b.must(Omega, &[d, k, p]), b.must(Omega, &[d, k - 1, p]));
                let at_depot: Vec<(VarId, f64)> = depots.iter().map(|&l| (b.must(Lambda, &[d, k, l]), -1.0)).collect();
                let mut up = vec![(now, 1.0), (before, -1.0)];
                up.extend(at_depot.iter().copied());
                b.row("lku", &[d, k, p], up, Le, 0.0);
                let mut down = vec![(before, 1.0), (now, -1.0)];
                down.extend(at_depot);
                b.row("lkd", &[d, k, p], down, Le, 0.0);
            }
        }
    }
    // Battery: the hop into epoch k is flown with the payload of epoch k-1;
    // arriving at a depot only requires a nonnegative residual.
    for d in 0..nd {
        for k in 1..nk {
            for l1 in 0..nl {
                for l2 in 0..nl {
                    if far(l1, l2) {
                        continue;
                    }
                    let e12 = s.energy[l1][l2];
                    let big_m = e_cap + e12 * (w_empty + cap);
                    let mut t = Vec::with_capacity(np + 4);
                    if !s.is_depot(l2) {
                        t.push((b.must(Beta, &[d, k]), 1.0));
                    }
                    t.push((b.must(Beta, &[d, k - 1]), -1.0));
                    for p in 0..np {
                        t.push((b.must(Omega, &[d, k - 1, p]), e12 * s.payloads[p].weight));
                    }
                    t.push((b.must(Lambda, &[d, k - 1, l1]), big_m));
                    t.push((b.must(Lambda, &[d, k, l2]), big_m));
                    b.row("bat", &[d, k, l1, l2], t, Le, 2.0 * big_m - e12 * w_empty);
                }
            }
        }
    }
    for (p, del) in s.deliveries() {
        let mut cover = Vec::new();
        for d in 0..nd {
            for k in del.earliest..=del.latest.min(nk - 1) {
                let dl = b.must(Delta, &[d, k, p]);
                b.row("dlo", &[d, k, p], vec![(dl, 1.0), (b.must(Omega, &[d, k, p]), -1.0)], Le, 0.0);
                b.row("dll", &[d, k, p], vec![(dl, 1.0), (b.must(Lambda, &[d, k, del.target]), -1.0)], Le, 0.0);
                cover.push((dl, 1.0));
            }
        }
        b.row("dlv", &[p], cover, Ge, 1.0);
    }
    for d in 0..nd {
        for k in 0..nk {
            for &m in &service {
                for z in 0..nz {
                    let mu = b.must(Mu, &[d, k, m, z]);
                    for &p in &s.missions[m].required_payloads {
                        b.row("eqp", &[d, k, m, z, p], vec![(mu, 1.0), (b.must(Omega, &[d, k, p]), -1.0)], Le, 0.0);
                    }
                }
            }
            if let Some(r) = relay {
                let rho = b.must(Rho, &[d, k]);
                for &p in &s.missions[r].required_payloads {
                    b.row("rqp", &[d, k, p], vec![(rho, 1.0), (b.must(Omega, &[d, k, p]), -1.0)], Le, 0.0);
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            let mut t: Vec<(VarId, f64)> = Vec::new();
            for &m in &service {
                for z in 0..nz {
                    t.push((b.must(Mu, &[d, k, m, z]), 1.0));
                }
            }
            if relay.is_some() {
                t.push((b.must(Rho, &[d, k]), 1.0));
            }
            if !t.is_empty() {
                b.row("bud", &[d, k], t, Le, 1.0);
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for &m in &service {
                for z in 0..nz {
                    let shares: Vec<(VarId, f64)> =
                        (0..nl).filter_map(|l| b.id(MuHat, &[d, k, l, m, z])).map(|v| (v, 1.0)).collect();
                    if shares.is_empty() {
                        continue;
                    }
                    let mut t = shares;
                    t.push((b.must(Mu, &[d, k, m, z]), -1.0));
                    b.row("mhs", &[d, k, m, z], t, Le, 0.0);
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            for l in 0..nl {
                for &m in &service {
                    for z in 0..nz {
                        if let Some(v) = b.id(MuHat, &[d, k, l, m, z]) {
                            let t = vec![(v, 1.0), (b.must(Lambda, &[d, k, l]), -1.0)];
                            b.row("mhl", &[d, k, l, m, z], t, Le, 0.0);
                        }
                    }
                }
            }
        }
    }

    // Work delivered to (m, z) at epoch h, as linear terms in muh.
    let served = |b: &Builder, h: usize, m: usize, z: usize| -> Vec<(VarId, f64)> {
        let mut t = Vec::new();
        for d in 0..nd {
            for l in 0..nl {
                if let Some(v) = b.id(MuHat, &[d, h, l, m, z]) {
                    t.push((v, s.quality(l, m, z)));
                }
            }
        }
        t
    };
    // Data generated by UAV d at epoch k, Mb.
    let generated = |b: &Builder, d: usize, k: usize| -> Vec<(VarId, f64)> {
        let mut t = Vec::new();
        for l in 0..nl {
            for &m in &service {
                let rate = s.missions[m].data_per_unit_work;
                if rate == 0.0 {
                    continue;
                }
                for z in 0..nz {
                    if let Some(v) = b.id(MuHat, &[d, k, l, m, z]) {
                        t.push((v, rate * s.quality(l, m, z)));
                    }
                }
            }
        }
        t
    };

    for k in 0..nk {
        for &m in &service {
            for z in 0..nz {
                let t = served(b, k, m, z);
                if !t.is_empty() {
                    b.row("need", &[k, m, z], t, Le, s.demand.get(k, m, z));
                }
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            let mut t = generated(b, d, k);
            for d2 in 0..nd {
                t.push((b.must(Tau, &[d2, d, k]), 1.0));
                t.push((b.must(Tau, &[d, d2, k]), -1.0));
            }
            t.push((b.must(TauNet, &[d, k]), -1.0));
            b.row("flow", &[d, k], t, Eq, 0.0);
        }
    }
    let share = |b: &Builder, d: usize, k: usize| -> (Vec<(VarId, f64)>, f64) {
        match relay {
            Some(_) => (vec![(b.must(Rho, &[d, k]), -1.0)], 0.0),
            None => (Vec::new(), 1.0),
        }
    };
    for d1 in 0..nd {
        for d2 in 0..nd {
            for k in 0..nk {
                let mut pis = Vec::new();
                let mut cap_terms = vec![(b.must(Tau, &[d1, d2, k]), 1.0)];
                for l1 in 0..nl {
                    for l2 in 0..nl {
                        if let Some(v) = b.id(Pi, &[d1, d2, k, l1, l2]) {
                            pis.push((v, 1.0));
                            cap_terms.push((v, -s.links.between[l1][l2]));
                            b.row(
                                "pil",
                                &[d1, d2, k, l1, l2],
                                vec![(v, 1.0), (b.must(Lambda, &[d1, k, l1]), -1.0)],
                                Le,
                                0.0,
                            );
                            b.row(
                                "pir",
                                &[d1, d2, k, l1, l2],
                                vec![(v, 1.0), (b.must(Lambda, &[d2, k, l2]), -1.0)],
                                Le,
                                0.0,
                            );
                        }
                    }
                }
                if !pis.is_empty() {
                    let (mut t, rhs) = share(b, d1, k);
                    t.extend(pis);
                    b.row("pis", &[d1, d2, k], t, Le, rhs);
                }
                b.row("rcap", &[d1, d2, k], cap_terms, Le, 0.0);
            }
        }
    }
    for d in 0..nd {
        for k in 0..nk {
            let mut pis = Vec::new();
            let mut cap_terms = vec![(b.must(TauNet, &[d, k]), 1.0)];
            for l in 0..nl {
                if let Some(v) = b.id(PiNet, &[d, k, l]) {
                    pis.push((v, 1.0));
                    cap_terms.push((v, -s.links.to_network[l]));
                    b.row("pnl", &[d, k, l], vec![(v, 1.0), (b.must(Lambda, &[d, k, l]), -1.0)], Le, 0.0);
                }
            }
            if !pis.is_empty() {
                let (mut t, rhs) = share(b, d, k);
                t.extend(pis);
                b.row("pns", &[d, k], t, Le, rhs);
            }
            b.row("ncap", &[d, k], cap_terms, Le, 0.0);
        }
    }
    for k in 0..nk {
        let mut t = Vec::new();
        for d in 0..nd {
            t.extend(generated(b, d, k));
            t.push((b.must(TauNet, &[d, k]), -1.0));
        }
        b.row("sink", &[k], t, Eq, 0.0);
    }
    for k in 0..nk {
        for &m in &service {
            for z in 0..nz {
                let Some(sig) = b.id(Sigma, &[k, m, z]) else { continue };
                let need = s.demand.window_sum(k, s.horizon, m, z);
                let mut t = vec![(sig, need)];
                for h in window(s, k) {
                    t.extend(served(b, h, m, z).into_iter().map(|(v, q)| (v, -q)));
                }
                b.row("sdef", &[k, m, z], t, Eq, 0.0);
            }
        }
    }
    for k in 0..nk {
        for &m in &service {
            for z in 0..nz {
                if let Some(sig) = b.id(Sigma, &[k, m, z]) {
                    b.row("sbr", &[k, m, z], vec![(b.must(SigmaBar, &[m]), 1.0), (sig, -1.0)], Le, 0.0);
                }
            }
        }
    }
    let gamma = b.must(Gamma, &[]);
    for &m in &service {
        b.row("gam", &[m], vec![(gamma, 1.0), (b.must(SigmaBar, &[m]), -1.0)], Le, 0.0);
    }
}
