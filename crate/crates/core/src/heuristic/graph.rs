use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::HeuristicError;
use crate::scenario::Scenario;

const LENGTH_TOL: f64 = 1e-9;

/// One way of flying between two graph nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    /// Visited locations, both endpoints included; one hop per epoch.
    pub path: Vec<usize>,
    /// Intermediate locations the route was composed through (at most two).
    pub via: Vec<usize>,
    /// Flight time ψ in epochs (hop count).
    pub epochs: usize,
    /// Σ e over the hops, Wh per kg of take-off mass.
    pub energy_per_kg: f64,
    pub length_km: f64,
}

/// Depot plus delivery locations, with alternative routes between every
/// ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteGraph {
    pub depot: usize,
    /// Locations of the graph nodes; the depot comes first.
    pub nodes: Vec<usize>,
    routes: BTreeMap<(usize, usize), Vec<Route>>,
}

impl RouteGraph {
    /// Routes from location `from` to location `to`; the shortest comes first.
    pub fn routes(&self, from: usize, to: usize) -> &[Route] {
        self.routes.get(&(from, to)).map_or(&[], Vec::as_slice)
    }

    pub fn shortest(&self, from: usize, to: usize) -> &Route {
        &self.routes(from, to)[0]
    }

    pub fn all_routes(&self) -> impl Iterator<Item = ((usize, usize), &Route)> {
        self.routes.iter().flat_map(|(&k, v)| v.iter().map(move |r| (k, r)))
    }
}

/// Shortest path by length, then by hop count, over hops no longer than V.
fn shortest_paths(s: &Scenario, source: usize) -> Vec<Option<(f64, Vec<usize>)>> {
    let n = s.num_locations();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    best[source] = Some((0.0, 0));
    loop {
        let next = (0..n)
            .filter(|&i| !done[i])
            .filter_map(|i| best[i].map(|b| (i, b)))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.cmp(&b.1 .1)).then(a.0.cmp(&b.0)));
        let Some((u, (du, hu))) = next else { break };
        done[u] = true;
        for w in 0..n {
            if w == u || done[w] || !s.can_travel(u, w) {
                continue;
            }
            let cand = (du + s.distances[u][w], hu + 1);
            let better = match best[w] {
                None => true,
                Some(b) => cand.0 < b.0 - LENGTH_TOL || (cand.0 <= b.0 + LENGTH_TOL && cand.1 < b.1),
            };
            if better {
                best[w] = Some(cand);
                prev[w] = u;
            }
        }
    }
    (0..n)
        .map(|t| {
            best[t].map(|(d, _)| {
                let mut path = vec![t];
                while *path.last().unwrap() != source {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                (d, path)
            })
        })
        .collect()
}

fn make_route(s: &Scenario, path: Vec<usize>, via: Vec<usize>) -> Route {
    let hops = path.windows(2);
    let length_km = hops.clone().map(|h| s.distances[h[0]][h[1]]).sum();
    let energy_per_kg = hops.map(|h| s.energy[h[0]][h[1]]).sum();
    Route { epochs: path.len() - 1, path, via, energy_per_kg, length_km }
}

fn join(parts: &[&Vec<usize>]) -> Vec<usize> {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        out.extend_from_slice(&p[1..]);
    }
    out
}

/// Alternative routes between depot and delivery locations: the shortest
/// path plus every composition through one or two intermediate locations
/// whose length is at most twice the shortest.
pub fn build_route_graph(s: &Scenario) -> Result<RouteGraph, HeuristicError> {
    let depots = s.depots();
    let [depot] = depots[..] else {
        return Err(HeuristicError::MultipleDepots(depots.len()));
    };
    let mut nodes = vec![depot];
    for (_, del) in s.deliveries() {
        if !nodes.contains(&del.target) {
            nodes.push(del.target);
        }
    }
    let n = s.num_locations();
    let sp: Vec<Vec<Option<(f64, Vec<usize>)>>> = (0..n).map(|l| shortest_paths(s, l)).collect();
    for &l in &nodes[1..] {
        if sp[depot][l].is_none() || sp[l][depot].is_none() {
            return Err(HeuristicError::Unreachable(l));
        }
    }

    let mut routes = BTreeMap::new();
    for &a in &nodes {
        for &b in &nodes {
            let (base, direct) = sp[a][b].as_ref().expect("nodes are connected through the depot");
            let cap = 2.0 * base + LENGTH_TOL;
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            let mut list = vec![make_route(s, direct.clone(), Vec::new())];
            seen.insert(direct.clone());
            let mut push = |path: Vec<usize>, via: Vec<usize>, list: &mut Vec<Route>| {
                if !seen.contains(&path) {
                    let r = make_route(s, path, via);
                    if r.length_km <= cap {
                        seen.insert(r.path.clone());
                        list.push(r);
                    }
                }
            };
            if a != b {
                for c in (0..n).filter(|&c| c != a && c != b) {
                    let (Some((l1, p1)), Some((l2, p2))) = (&sp[a][c], &sp[c][b]) else { continue };
                    if l1 + l2 > cap {
                        continue;
                    }
                    push(join(&[p1, p2]), vec![c], &mut list);
                }
                for c in (0..n).filter(|&c| c != a && c != b) {
                    for d in (0..n).filter(|&d| d != a && d != b && d != c) {
                        let (Some((l1, p1)), Some((l2, p2)), Some((l3, p3))) = (&sp[a][c], &sp[c][d], &sp[d][b]) else {
                            continue;
                        };
                        if l1 + l2 + l3 > cap {
                            continue;
                        }
                        push(join(&[p1, p2, p3]), vec![c, d], &mut list);
                    }
                }
            }
            routes.insert((a, b), list);
        }
    }
    Ok(RouteGraph { depot, nodes, routes })
}
