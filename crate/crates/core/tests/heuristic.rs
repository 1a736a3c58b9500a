use proptest::prelude::*;
use serde_json::json;
use uavplan::exact::{solve_exact, EnumerationLimits};
use uavplan::heuristic::{
    arc_service_weights, build_route_graph, insertion_solve, raw_service, schedule_tours, tours_to_plan,
    HeuristicConfig, HeuristicError, Planner, ResidualDemand, RouteGraph, Tour,
};
use uavplan::metrics::plan_metrics;
use uavplan::scenario::{generate_synthetic, load_scenario, Dims, GeneratorOptions, Scenario};
use uavplan::{check_feasibility, satisfaction};

const EPS: f64 = 1e-6;

/// Hand-made world: depot at location 0, camera (0) and radio (1) on board,
/// then one 0.5 kg delivery per `(target, earliest, latest)`.
struct World {
    points: Vec<(f64, f64)>,
    deliveries: Vec<(usize, usize, usize)>,
    /// `(location, coverage q, monitoring q)` per zone.
    zones: Vec<Vec<(usize, f64, f64)>>,
    /// `(mission, zone, need)` repeated at every epoch from 1 on.
    demand: Vec<(usize, usize, f64)>,
    uavs: usize,
    battery: f64,
    capacity: f64,
    epochs: usize,
}

impl World {
    fn new(points: &[(f64, f64)]) -> Self {
        Self {
            points: points.to_vec(),
            deliveries: Vec::new(),
            zones: Vec::new(),
            demand: Vec::new(),
            uavs: 1,
            battery: 200.0,
            capacity: 2.5,
            epochs: 10,
        }
    }

    fn build(&self) -> Scenario {
        let n = self.points.len();
        let locations: Vec<_> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| json!({ "id": i, "x": x, "y": y, "depot": i == 0 }))
            .collect();
        let mut payloads = vec![
            json!({ "id": 0, "name": "camera", "weight": 1.0 }),
            json!({ "id": 1, "name": "radio", "weight": 1.0 }),
        ];
        for (i, &(target, earliest, latest)) in self.deliveries.iter().enumerate() {
            payloads.push(json!({
                "id": i + 2, "name": format!("blood-{i}"), "weight": 0.5,
                "delivery": { "target": target, "earliest": earliest, "latest": latest }
            }));
        }
        let zones: Vec<_> = self
            .zones
            .iter()
            .enumerate()
            .map(|(z, links)| {
                let from: Vec<_> = links.iter().map(|&(l, c, m)| json!({ "location": l, "quality": [c, m] })).collect();
                json!({ "id": z, "servable_from": from })
            })
            .collect();
        let demand: Vec<_> =
            (1..self.epochs).flat_map(|k| self.demand.iter().map(move |&(m, z, v)| json!([k, m, z, v]))).collect();
        let doc = json!({
            "locations": locations,
            "zones": zones,
            "uavs": {
                "count": self.uavs, "empty_weight": 4.0, "payload_capacity": self.capacity,
                "battery_capacity": self.battery, "max_step_distance": 2.5
            },
            "payloads": payloads,
            "missions": [
                { "id": 0, "name": "coverage", "kind": "coverage", "requires": [1], "data_per_unit_work": 1.0 },
                { "id": 1, "name": "monitoring", "kind": "monitoring", "requires": [0], "data_per_unit_work": 2.0 }
            ],
            "demand": demand,
            "links": { "between": vec![vec![10.0; n]; n], "default_to_network": 50.0 },
            "epochs": self.epochs,
            "horizon": 2,
            "energy": { "per_km_kg": 3.125, "hover_km": 0.1 }
        });
        load_scenario(&doc.to_string()).unwrap()
    }
}

/// A(0,0) depot, B(1,0), C(2,0).
fn collinear() -> World {
    World::new(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
}

fn sf(seed: u64) -> Scenario {
    generate_synthetic(seed, Dims::sf_small(), &GeneratorOptions::default()).unwrap()
}

fn paths(g: &RouteGraph, a: usize, b: usize) -> Vec<Vec<usize>> {
    g.routes(a, b).iter().map(|r| r.path.clone()).collect()
}

fn tour(stops: &[usize], deliveries: &[&[usize]], legs: &[usize]) -> Tour {
    Tour {
        stops: stops.to_vec(),
        deliveries: deliveries.iter().map(|d| d.to_vec()).collect(),
        legs: legs.to_vec(),
        uav: None,
        departure: 0,
    }
}

fn assert_plan_serves_everything(s: &Scenario, plan: &uavplan::Plan) {
    let report = check_feasibility(s, plan, EPS).unwrap();
    assert!(report.is_feasible(), "{:?}", report.tags());
    for (p, del) in s.deliveries() {
        let hit = (0..s.num_uavs()).any(|d| {
            (del.earliest..=del.latest.min(s.epochs - 1))
                .any(|k| plan.locations[d][k] == del.target && plan.payloads[d][k][p])
        });
        assert!(hit, "payload {p} not delivered");
    }
}

// Route graph

#[test]
fn collinear_pair_has_two_routes() {
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 8)];
    let g = build_route_graph(&w.build()).unwrap();
    assert_eq!(g.nodes, vec![0, 2]);
    assert_eq!(paths(&g, 0, 2), vec![vec![0, 2], vec![0, 1, 2]]);
    assert_eq!(paths(&g, 2, 0), vec![vec![2, 0], vec![2, 1, 0]]);
    assert_eq!(paths(&g, 0, 0), vec![vec![0]]);
    assert_eq!(g.routes(0, 2)[1].via, vec![1]);
    assert_eq!(g.routes(0, 2)[1].epochs, 2);
}

#[test]
fn detour_of_exactly_twice_the_shortest_is_kept() {
    let h = 3f64.sqrt();
    // |A B| + |B C| = 4 = 2 |A C|; the second detour is slightly longer.
    let mut w = World::new(&[(0.0, 0.0), (2.0, 0.0), (1.0, h), (1.0, 1.8)]);
    w.deliveries = vec![(1, 1, 8)];
    let g = build_route_graph(&w.build()).unwrap();
    assert_eq!(paths(&g, 0, 1), vec![vec![0, 1], vec![0, 2, 1]]);
}

#[test]
fn single_delivery_graph_has_two_nodes() {
    let mut w = collinear();
    w.deliveries = vec![(1, 1, 8)];
    let g = build_route_graph(&w.build()).unwrap();
    assert_eq!(g.nodes.len(), 2);
    assert!(!g.routes(0, 1).is_empty() && !g.routes(1, 0).is_empty());
}

#[test]
fn unreachable_delivery_and_extra_depot_are_rejected() {
    let mut w = World::new(&[(0.0, 0.0), (1.0, 0.0), (9.0, 0.0)]);
    w.deliveries = vec![(2, 1, 8)];
    assert_eq!(build_route_graph(&w.build()).unwrap_err(), HeuristicError::Unreachable(2));

    let mut s = collinear().build();
    s.locations[1].is_depot = true;
    assert_eq!(build_route_graph(&s).unwrap_err(), HeuristicError::MultipleDepots(2));
}

/// All-pairs shortest lengths by Floyd-Warshall over hops of length ≤ V.
fn floyd(s: &Scenario) -> Vec<Vec<f64>> {
    let n = s.num_locations();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                d[a][b] = 0.0;
            } else if s.distances[a][b] <= s.uav.max_step_distance + 1e-6 {
                d[a][b] = s.distances[a][b];
            }
        }
    }
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                if d[a][c] + d[c][b] < d[a][b] {
                    d[a][b] = d[a][c] + d[c][b];
                }
            }
        }
    }
    d
}

#[test]
fn every_route_respects_the_length_cap() {
    for seed in 0..3 {
        let s = sf(seed);
        let g = build_route_graph(&s).unwrap();
        let short = floyd(&s);
        for ((a, b), r) in g.all_routes() {
            assert_eq!((r.path[0], *r.path.last().unwrap()), (a, b));
            let hops: Vec<_> = r.path.windows(2).collect();
            let length: f64 = hops.iter().map(|h| s.distances[h[0]][h[1]]).sum();
            let energy: f64 = hops.iter().map(|h| s.energy[h[0]][h[1]]).sum();
            assert!(hops.iter().all(|h| s.distances[h[0]][h[1]] <= s.uav.max_step_distance + 1e-6));
            assert!(length <= 2.0 * short[a][b] + 1e-9, "{:?} {length} vs {}", r.path, short[a][b]);
            assert!((r.length_km - length).abs() < 1e-9 && (r.energy_per_kg - energy).abs() < 1e-9);
            assert_eq!(r.epochs, hops.len());
            assert!(r.via.len() <= 2);
        }
        for &a in &g.nodes {
            for &b in &g.nodes {
                assert!((g.shortest(a, b).length_km - short[a][b]).abs() < 1e-9);
                let mut seen = paths(&g, a, b);
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), g.routes(a, b).len(), "duplicate route {a}->{b}");
            }
        }
    }
}

// Arc weights

/// B serves zone 0 for coverage with q = `q`; C serves nothing.
fn weight_world(q: f64) -> Scenario {
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 3)];
    w.zones = vec![vec![(1, q, 0.0)]];
    w.epochs = 4;
    // Need 1 at epochs 1..3, so the per-epoch average is 3/4.
    w.demand = vec![(0, 0, 1.0)];
    w.build()
}

#[test]
fn arc_weights_take_the_residual_minimum() {
    let s = weight_world(2.0);
    let g = build_route_graph(&s).unwrap();
    let r0 = ResidualDemand::initial(&s);
    assert_eq!(r0.per_epoch[0], vec![0.75]);
    let direct = &g.routes(0, 2)[0];
    let via_b = &g.routes(0, 2)[1];
    assert_eq!(raw_service(&s, direct, &r0), (0.0, 0.0));
    assert_eq!(arc_service_weights(&s, direct, &r0), (0.0, 0.0));
    assert_eq!(raw_service(&s, via_b, &r0), (0.75, 0.0));
    assert_eq!(arc_service_weights(&s, via_b, &r0), (1.0, 0.0));

    // A single visit to B removes 2/4 of the average need.
    let r1 = ResidualDemand::after_visits(&s, [1]);
    assert!((r1.per_epoch[0][0] - 0.25).abs() < 1e-12);
    assert!((arc_service_weights(&s, via_b, &r1).0 - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn doubling_quality_on_saturated_demand_changes_nothing() {
    let (a, b) = (weight_world(2.0), weight_world(4.0));
    let (ga, gb) = (build_route_graph(&a).unwrap(), build_route_graph(&b).unwrap());
    let (ra, rb) = (ResidualDemand::initial(&a), ResidualDemand::initial(&b));
    for ((_, x), (_, y)) in ga.all_routes().zip(gb.all_routes()) {
        assert_eq!(raw_service(&a, x, &ra), raw_service(&b, y, &rb));
        assert_eq!(arc_service_weights(&a, x, &ra), arc_service_weights(&b, y, &rb));
    }
}

#[test]
fn normalized_weights_stay_within_route_time() {
    let s = sf(0);
    let g = build_route_graph(&s).unwrap();
    let r = ResidualDemand::initial(&s);
    for (_, route) in g.all_routes() {
        let (c, nu) = arc_service_weights(&s, route, &r);
        let psi = route.epochs as f64 + 1e-12;
        assert!((0.0..=psi).contains(&c) && (0.0..=psi).contains(&nu), "{c} {nu} on {:?}", route.path);
    }
}

// Insertion functions

/// Collinear world with coverage at B and coverage plus monitoring at C:
///
/// | location | coverage q | monitoring q | raw (c, ν) |
/// |----------|-----------:|-------------:|------------|
/// | A        | 0          | 0            | (0, 0)     |
/// | B        | 1          | 0            | (1, 0)     |
/// | C        | 0.5        | 1            | (0.5, 1)   |
///
/// Need is 1 per epoch for every served pair, so both scales are 1 and the
/// normalized weights equal the raw ones. The route weights are
///
/// | route   | ψ | c   | ν |
/// |---------|---|-----|---|
/// | A→B     | 1 | 1   | 0 |
/// | B→C     | 1 | 0.5 | 1 |
/// | C→B     | 1 | 1   | 0 |
/// | B→A     | 1 | 0   | 0 |
/// | A→C     | 1 | 0.5 | 1 |
/// | A→B→C   | 2 | 1.5 | 1 |
/// | C→A     | 1 | 0   | 0 |
/// | C→B→A   | 2 | 1   | 0 |
///
/// For the tour A→B→C→A, inserting B:
/// * position 1 replaces A→B→C by A→B + B→C: Δψ = 0, Δc = 0, Δν = 0;
/// * position 2 replaces C→A by C→B + B→A: Δψ = 1, Δc = 1, Δν = 0.
fn phi_world() -> World {
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 8), (1, 1, 8)];
    w.zones = vec![vec![(1, 1.0, 0.0)], vec![(2, 0.5, 1.0)]];
    w.demand = vec![(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)];
    w.capacity = 3.0;
    w
}

#[test]
fn phi1_matches_hand_table() {
    let s = phi_world().build();
    let g = build_route_graph(&s).unwrap();
    assert_eq!(paths(&g, 0, 2), vec![vec![0, 2], vec![0, 1, 2]]);
    assert_eq!(paths(&g, 2, 0), vec![vec![2, 0], vec![2, 1, 0]]);
    let t = tour(&[0, 2, 0], &[&[], &[2], &[]], &[1, 0]);
    // (α1, α2, cost at position 1, cost at position 2)
    let table = [(0.0, 0.0, 0.0, 1.0), (1.0, 0.0, 0.0, -1.0), (0.0, 1.0, 0.0, 0.0), (0.5, 0.25, 0.0, -0.25)];
    for (a1, a2, c1, c2) in table {
        let p = Planner::new(&s, &g, HeuristicConfig::new(a1, a2).unwrap());
        let at1 = p.phi1(&t, 3, 1).unwrap();
        let at2 = p.phi1(&t, 3, 2).unwrap();
        assert!((at1.cost - c1).abs() < 1e-12, "({a1},{a2}) position 1: {}", at1.cost);
        assert!((at2.cost - c2).abs() < 1e-12, "({a1},{a2}) position 2: {}", at2.cost);
        assert_eq!(at1.legs, (0, 0));
        let best = p.best_position(&t, 3).unwrap();
        assert_eq!(best.position, if c2 < c1 { 2 } else { 1 });
    }
}

#[test]
fn phi1_rejects_windows_battery_and_capacity() {
    let t = tour(&[0, 2, 0], &[&[], &[2], &[]], &[1, 0]);

    // B must be reached at epoch 1: only position 1 is early enough.
    let mut w = phi_world();
    w.deliveries[1] = (1, 1, 1);
    let s = w.build();
    let g = build_route_graph(&s).unwrap();
    let p = Planner::new(&s, &g, HeuristicConfig::save_time());
    assert!(p.phi1(&t, 3, 1).is_some());
    assert!(p.phi1(&t, 3, 2).is_none());

    // 7 kg over 4 km needs 87.5 Wh.
    for (battery, fits) in [(87.5 - 1e-3, false), (87.5, true)] {
        let mut w = phi_world();
        w.battery = battery;
        let s = w.build();
        let g = build_route_graph(&s).unwrap();
        let p = Planner::new(&s, &g, HeuristicConfig::save_time());
        assert_eq!(p.phi1(&t, 3, 1).is_some(), fits, "battery {battery}");
    }

    // Camera, radio and two 0.5 kg packs exceed 2.5 kg.
    let mut w = phi_world();
    w.capacity = 2.5;
    let s = w.build();
    let g = build_route_graph(&s).unwrap();
    assert!(Planner::new(&s, &g, HeuristicConfig::save_time()).phi1(&t, 3, 1).is_none());
}

#[test]
fn phi2_sign_cases() {
    let s = phi_world().build();
    let g = build_route_graph(&s).unwrap();
    let p = Planner::new(&s, &g, HeuristicConfig::save_time());

    // B already lies on the A→B→C leg: φ1 = 0 and the savings are ψ(A, C) = 1.
    let t = tour(&[0, 2, 0], &[&[], &[2], &[]], &[1, 0]);
    let ins = p.best_position(&t, 3).unwrap();
    assert_eq!((ins.position, ins.cost), (1, 0.0));
    assert_eq!(p.phi2(&t, &ins), 1.0);

    // A(0,0) depot, C(2,0), D(0,4), with E(0,2) and F(1,2) as stepping
    // stones. D costs three extra epochs in either position, and the
    // successor is at most one epoch from the depot.
    let mut w = World::new(&[(0.0, 0.0), (2.0, 0.0), (0.0, 4.0), (0.0, 2.0), (1.0, 2.0)]);
    w.deliveries = vec![(1, 1, 9), (2, 1, 9)];
    w.capacity = 3.0;
    w.battery = 400.0;
    let s = w.build();
    let g = build_route_graph(&s).unwrap();
    let p = Planner::new(&s, &g, HeuristicConfig::save_time());
    let t = tour(&[0, 1, 0], &[&[], &[2], &[]], &[0, 0]);
    let ins = p.best_position(&t, 3).unwrap();
    assert_eq!((ins.position, ins.cost), (1, 3.0));
    assert_eq!(p.phi2(&t, &ins), -2.0);

    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert_eq!(sol.tours.len(), 2);
    assert_plan_serves_everything(&s, &sol.plan);
}

/// With α = 0, φ1 picks the position and pair of least added time.
#[test]
fn save_time_position_is_least_detour() {
    let s = sf(2);
    let g = build_route_graph(&s).unwrap();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    let p = Planner::new(&s, &g, HeuristicConfig::save_time());
    for t in &sol.tours {
        let mut t = t.clone();
        t.uav = None;
        for (q, _) in s.deliveries().filter(|(q, _)| !t.payloads().any(|x| x == *q)) {
            let Some(ins) = p.best_position(&t, q) else { continue };
            let base = t.epochs(&g) as f64;
            let detours: Vec<f64> = (1..t.stops.len())
                .filter_map(|i| p.phi1(&t, q, i))
                .map(|x| {
                    let mut u = t.clone();
                    u.stops.insert(x.position, s.payloads[q].delivery.unwrap().target);
                    u.deliveries.insert(x.position, vec![q]);
                    u.legs[x.position - 1] = x.legs.0;
                    u.legs.insert(x.position, x.legs.1);
                    u.epochs(&g) as f64 - base
                })
                .collect();
            let least = detours.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(ins.cost, least);
        }
    }
}

// Brute-force φ1 by re-simulating every tentative tour.

fn tentative(t: &Tour, target: usize, p: usize, i: usize, g1: usize, g2: usize) -> Tour {
    let mut u = t.clone();
    u.stops.insert(i, target);
    u.deliveries.insert(i, vec![p]);
    u.legs[i - 1] = g1;
    u.legs.insert(i, g2);
    u
}

fn simulated_ok(s: &Scenario, g: &RouteGraph, u: &Tour) -> bool {
    let kit: f64 = s.equipment().map(|e| s.payloads[e].weight).sum();
    let load = kit + u.payloads().map(|q| s.payloads[q].weight).sum::<f64>();
    if load > s.uav.payload_capacity + EPS {
        return false;
    }
    let path = u.path(g);
    let energy: f64 = path.windows(2).map(|h| s.energy[h[0]][h[1]]).sum::<f64>() * (s.uav.empty_weight + load);
    if energy > s.uav.battery_capacity + EPS {
        return false;
    }
    // Some departure must put every stop inside its window and land in time.
    let arrivals = u.offsets(g);
    (0..s.epochs).any(|t0| {
        t0 + path.len() - 1 < s.epochs
            && u.deliveries.iter().enumerate().all(|(j, ps)| {
                ps.iter().all(|&q| {
                    let w = s.payloads[q].delivery.unwrap();
                    (w.earliest..=w.latest).contains(&(t0 + arrivals[j]))
                })
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phi1_matches_resimulation(seed in 0u64..1000, a1 in 0.0f64..=1.0, share in 0.0f64..=1.0) {
        let dims = Dims { locations: 9, zones: 6, uavs: 3, deliveries: 5, epochs: 12 };
        let s = generate_synthetic(seed, dims, &GeneratorOptions::default()).unwrap();
        let cfg = HeuristicConfig::new(a1, (1.0 - a1) * share).unwrap();
        let g = build_route_graph(&s).unwrap();
        let p = Planner::new(&s, &g, cfg);
        let sol = match insertion_solve(&s, &cfg) {
            Ok(sol) => sol,
            Err(HeuristicError::FleetExhausted(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for t in &sol.tours {
            for (q, del) in s.deliveries().filter(|(q, _)| !t.payloads().any(|x| x == *q)) {
                for i in 1..t.stops.len() {
                    let (a, b) = (t.stops[i - 1], t.stops[i]);
                    let mut best: Option<f64> = None;
                    for g1 in 0..g.routes(a, del.target).len() {
                        for g2 in 0..g.routes(del.target, b).len() {
                            let u = tentative(t, del.target, q, i, g1, g2);
                            if !simulated_ok(&s, &g, &u) {
                                continue;
                            }
                            let w = |a: usize, b: usize, r: usize| p.weight(a, b, r);
                            let (c1, n1) = w(a, del.target, g1);
                            let (c2, n2) = w(del.target, b, g2);
                            let (c0, n0) = w(a, b, t.legs[i - 1]);
                            let dpsi = u.epochs(&g) as f64 - t.epochs(&g) as f64;
                            let cost = (1.0 - cfg.alpha1 - cfg.alpha2) * dpsi
                                - cfg.alpha1 * (c1 + c2 - c0)
                                - cfg.alpha2 * (n1 + n2 - n0);
                            best = Some(best.map_or(cost, |b: f64| b.min(cost)));
                        }
                    }
                    match (best, p.phi1(t, q, i)) {
                        (None, None) => {}
                        (Some(b), Some(ins)) => prop_assert!((b - ins.cost).abs() < 1e-9, "{b} vs {}", ins.cost),
                        (b, ins) => prop_assert!(false, "simulated {b:?}, phi1 {ins:?}"),
                    }
                }
            }
        }
    }
}

// Whole solve

#[test]
fn single_delivery_gets_a_shortest_round_trip() {
    let mut w = collinear();
    w.deliveries = vec![(2, 3, 8)];
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert_eq!(sol.tours.len(), 1);
    let t = &sol.tours[0];
    assert_eq!((t.stops.clone(), t.legs.clone()), (vec![0, 2, 0], vec![0, 0]));
    assert_eq!(t.path(&sol.graph), vec![0, 2, 0]);
    // Latest take-off that still reaches C by epoch 8.
    assert_eq!((t.uav, t.departure), (Some(0), 7));
    assert_plan_serves_everything(&s, &sol.plan);
}

#[test]
fn deliveries_on_a_line_share_a_tour() {
    let mut w = collinear();
    w.deliveries = vec![(1, 1, 8), (2, 1, 8)];
    w.capacity = 3.0;
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert_eq!(sol.tours.len(), 1);
    // Seeded with B; C goes before it, saving exactly the trip to B.
    assert_eq!(sol.tours[0].stops, vec![0, 2, 1, 0]);
    assert_plan_serves_everything(&s, &sol.plan);
}

#[test]
fn full_capacity_is_feasible() {
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 8)];
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    let d = sol.tours[0].uav.unwrap();
    let k = sol.tours[0].departure;
    assert_eq!(sol.plan.payload_weight(&s, d, k), 2.5);
    assert_plan_serves_everything(&s, &sol.plan);

    // A second pack no longer fits alongside the first.
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 8), (2, 1, 8)];
    w.uavs = 2;
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert_eq!(sol.tours.len(), 2);
    assert_plan_serves_everything(&s, &sol.plan);
}

#[test]
fn fleet_exhaustion_is_reported() {
    // C at epoch 2 and D at epoch 2 need overlapping flights.
    let mut w = World::new(&[(0.0, 0.0), (2.0, 0.0), (0.0, 4.0), (0.0, 2.0), (1.0, 2.0)]);
    w.deliveries = vec![(1, 2, 2), (2, 2, 2)];
    let s = w.build();
    assert!(matches!(insertion_solve(&s, &HeuristicConfig::save_time()), Err(HeuristicError::FleetExhausted(_))));
    w.uavs = 2;
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert_plan_serves_everything(&s, &sol.plan);
}

#[test]
fn impossible_window_is_unplaceable() {
    let mut w = World::new(&[(0.0, 0.0), (2.0, 0.0), (0.0, 4.0), (0.0, 2.0)]);
    w.deliveries = vec![(2, 1, 1)];
    let s = w.build();
    assert_eq!(insertion_solve(&s, &HeuristicConfig::save_time()).unwrap_err(), HeuristicError::DeliveryUnplaceable(2));
}

#[test]
fn invalid_weights_are_rejected() {
    for (a1, a2) in [(-0.1, 0.0), (0.7, 0.4), (f64::NAN, 0.0)] {
        assert!(matches!(HeuristicConfig::new(a1, a2), Err(HeuristicError::InvalidConfig(_))));
    }
    assert_eq!(HeuristicConfig::preset("coverage"), Some(HeuristicConfig::privilege_coverage()));
    assert_eq!(HeuristicConfig::preset("monitoring"), Some(HeuristicConfig::privilege_monitoring()));
    assert_eq!(HeuristicConfig::preset("save-time"), Some(HeuristicConfig::save_time()));
    assert_eq!(HeuristicConfig::preset("fastest"), None);
}

// Plan expansion

#[test]
fn idle_fleet_is_fully_satisfied() {
    let mut w = collinear();
    w.uavs = 2;
    let s = w.build();
    let sol = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
    assert!(sol.tours.is_empty());
    assert!(sol.plan.locations.iter().flatten().all(|&l| l == 0));
    assert!(check_feasibility(&s, &sol.plan, EPS).unwrap().is_feasible());
    assert_eq!(satisfaction(&s, &sol.plan).objective, 1.0);
}

#[test]
fn passing_a_zone_serves_it() {
    let mut w = collinear();
    w.deliveries = vec![(2, 2, 2)];
    w.zones = vec![vec![(1, 1.0, 0.0)]];
    w.demand = vec![(0, 0, 0.5)];
    let s = w.build();
    let g = build_route_graph(&s).unwrap();
    let mut tours = vec![tour(&[0, 2, 0], &[&[], &[2], &[]], &[1, 0])];
    schedule_tours(&s, &g, &mut tours).unwrap();
    assert_eq!(tours[0].departure, 0);
    let plan = tours_to_plan(&s, &g, &tours).unwrap();
    assert_eq!(plan.locations[0][..4], [0, 1, 2, 0]);
    assert_eq!(plan.missions[0][1][0][0], 0.5);
    // Coverage data leaves through the network link, so μ fills the budget.
    assert_eq!(plan.to_network[0][1], 0.5);
    let idle = tours_to_plan(&s, &g, &[]).unwrap();
    let (with, without) = (satisfaction(&s, &plan), satisfaction(&s, &idle));
    assert!(with.sigma[1][0][0] > without.sigma[1][0][0]);
    assert!(check_feasibility(&s, &plan, EPS).unwrap().is_feasible());
}

#[test]
fn unassigned_and_overweight_tours_are_refused() {
    let mut w = collinear();
    w.deliveries = vec![(2, 1, 8), (1, 1, 8)];
    let s = w.build();
    let g = build_route_graph(&s).unwrap();
    let t = tour(&[0, 2, 0], &[&[], &[2], &[]], &[0, 0]);
    assert_eq!(tours_to_plan(&s, &g, std::slice::from_ref(&t)).unwrap_err(), HeuristicError::Unassigned(0));
    let mut heavy = tour(&[0, 2, 1, 0], &[&[], &[2], &[3], &[]], &[0, 0, 0]);
    heavy.uav = Some(0);
    assert!(matches!(tours_to_plan(&s, &g, &[heavy]), Err(HeuristicError::Capacity { tour: 0, .. })));
}

// Properties

#[test]
fn identical_inputs_give_identical_tours() {
    for seed in 0..3 {
        let s = sf(seed);
        for cfg in [HeuristicConfig::save_time(), HeuristicConfig::new(0.3, 0.4).unwrap()] {
            let a = insertion_solve(&s, &cfg).unwrap();
            let b = insertion_solve(&s, &cfg).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn heuristic_never_beats_exact_on_tiny_instances() {
    for seed in 0..20u64 {
        let dims = Dims { locations: 3, zones: 2, uavs: 2, deliveries: 1 + seed as usize % 2, epochs: 4 };
        let s = generate_synthetic(seed, dims, &GeneratorOptions::default()).unwrap();
        let h = insertion_solve(&s, &HeuristicConfig::save_time()).unwrap();
        assert_plan_serves_everything(&s, &h.plan);
        let e = solve_exact(&s, &EnumerationLimits::default()).unwrap();
        assert!(satisfaction(&s, &h.plan).objective <= e.objective + 1e-9, "seed {seed}");
    }
}

#[test]
fn save_time_uses_least_energy() {
    for seed in 0..2 {
        let s = sf(seed);
        let energy = |cfg: HeuristicConfig| plan_metrics(&s, &insertion_solve(&s, &cfg).unwrap().plan).energy_wh;
        let save = energy(HeuristicConfig::save_time());
        assert!(save < energy(HeuristicConfig::privilege_coverage()), "seed {seed}");
        assert!(save < energy(HeuristicConfig::privilege_monitoring()), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solved_plans_are_feasible(
        seed in 0u64..10_000,
        locations in 5usize..16,
        zones in 1usize..8,
        uavs in 1usize..5,
        deliveries in 1usize..7,
        epochs in 6usize..16,
        a1 in 0.0f64..=1.0,
        share in 0.0f64..=1.0,
    ) {
        let dims = Dims { locations, zones, uavs, deliveries, epochs };
        let Ok(s) = generate_synthetic(seed, dims, &GeneratorOptions::default()) else { return Ok(()) };
        let cfg = HeuristicConfig::new(a1, (1.0 - a1) * share).unwrap();
        match insertion_solve(&s, &cfg) {
            Ok(sol) => {
                let report = check_feasibility(&s, &sol.plan, EPS).unwrap();
                prop_assert!(report.is_feasible(), "{:?}", report.tags());
                let sat = satisfaction(&s, &sol.plan);
                prop_assert!(sat.sigma.iter().flatten().flatten().all(|&x| (-EPS..=1.0 + EPS).contains(&x)));
                for t in &sol.tours {
                    prop_assert!(t.uav.is_some());
                    prop_assert_eq!(t.stops.first(), t.stops.last());
                }
            }
            Err(HeuristicError::FleetExhausted(_) | HeuristicError::DeliveryUnplaceable(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
