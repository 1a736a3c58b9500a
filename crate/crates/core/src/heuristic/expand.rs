use super::graph::RouteGraph;
use super::insertion::Tour;
use super::HeuristicError;
use crate::plan::Plan;
use crate::scenario::Scenario;
use crate::DEFAULT_TOLERANCE;

fn first_payload(t: &Tour) -> usize {
    t.payloads().next().unwrap_or(usize::MAX)
}

/// Assign every tour a UAV and a departure epoch.
///
/// Tours are taken by latest feasible departure, then earliest, and each
/// goes to the UAV that can take off first; a UAV is free again one epoch
/// after landing. Each UAV's tours are then pushed as late as their windows
/// and successors allow.
pub fn schedule_tours(s: &Scenario, g: &RouteGraph, tours: &mut [Tour]) -> Result<(), HeuristicError> {
    let mut windows = Vec::with_capacity(tours.len());
    for t in tours.iter() {
        windows.push(t.departure_window(s, g).ok_or(HeuristicError::DeliveryUnplaceable(first_payload(t)))?);
    }
    let flights: Vec<usize> = tours.iter().map(|t| t.epochs(g)).collect();
    let mut order: Vec<usize> = (0..tours.len()).collect();
    order.sort_by_key(|&i| (windows[i].1, windows[i].0, i));

    let nd = s.num_uavs();
    let mut free_at = vec![0usize; nd];
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); nd];
    for &i in &order {
        let (lo, hi) = windows[i];
        let best = (0..nd)
            .filter(|&d| tours[i].payloads().all(|p| !s.uav.is_forbidden(d, p)))
            .map(|d| (lo.max(free_at[d]), d))
            .filter(|&(t0, _)| t0 <= hi)
            .min();
        let Some((t0, d)) = best else {
            return Err(HeuristicError::FleetExhausted(first_payload(&tours[i])));
        };
        tours[i].uav = Some(d);
        tours[i].departure = t0;
        free_at[d] = t0 + flights[i] + 1;
        assigned[d].push(i);
    }

    for list in &assigned {
        let mut next: Option<usize> = None;
        for &i in list.iter().rev() {
            let hi = windows[i].1;
            let t0 = next.map_or(hi, |n| hi.min(n - flights[i] - 1));
            tours[i].departure = t0;
            next = Some(t0);
        }
    }
    Ok(())
}

/// Expand scheduled tours into a full plan.
///
/// UAVs follow their tours hop by hop and wait at the depot otherwise.
/// Every UAV carries the equipment it may carry, up to the capacity, and
/// a tour's deliveries from take-off until landing. The service budget of
/// every epoch is then filled greedily, best `q · residual need` first,
/// and the data produced goes straight to the network.
pub fn tours_to_plan(s: &Scenario, g: &RouteGraph, tours: &[Tour]) -> Result<Plan, HeuristicError> {
    let (nd, nk) = (s.num_uavs(), s.epochs);
    let mut plan = Plan::idle(s, g.depot);

    let mut kit: Vec<Vec<usize>> = Vec::with_capacity(nd);
    for d in 0..nd {
        let mut load = 0.0;
        let mut items = Vec::new();
        for e in s.equipment().filter(|&e| !s.uav.is_forbidden(d, e)) {
            if load + s.payloads[e].weight <= s.uav.payload_capacity + DEFAULT_TOLERANCE {
                load += s.payloads[e].weight;
                items.push(e);
            }
        }
        for k in 0..nk {
            for &e in &items {
                plan.payloads[d][k][e] = true;
            }
        }
        kit.push(items);
    }

    for (ti, t) in tours.iter().enumerate() {
        let d = t.uav.ok_or(HeuristicError::Unassigned(ti))?;
        let load: f64 = kit[d].iter().chain(t.deliveries.iter().flatten()).map(|&p| s.payloads[p].weight).sum();
        if load > s.uav.payload_capacity + DEFAULT_TOLERANCE {
            return Err(HeuristicError::Capacity { tour: ti, load });
        }
        let path = t.path(g);
        for (i, &l) in path.iter().enumerate() {
            plan.locations[d][t.departure + i] = l;
        }
        let carry = (path.len() - 1).max(1);
        for k in t.departure..t.departure + carry {
            for p in t.payloads() {
                plan.payloads[d][k][p] = true;
            }
        }
    }

    fill_service(s, &mut plan);
    Ok(plan)
}

fn fill_service(s: &Scenario, plan: &mut Plan) {
    let relay = s.relay_mission();
    let service: Vec<usize> = s.service_missions().collect();
    let mut left = vec![vec![vec![0.0; s.zones.len()]; s.missions.len()]; s.epochs];
    for (k, m, z, n) in s.demand.entries() {
        left[k][m][z] = n;
    }
    for k in 0..s.epochs {
        for d in 0..s.num_uavs() {
            let l = plan.locations[d][k];
            let carried = &plan.payloads[d][k];
            let can_relay = relay.is_some_and(|m| s.equipped_for(m, carried));
            let link = s.links.to_network[l];
            let mut options: Vec<(f64, usize, usize, f64)> = Vec::new();
            for &m in &service {
                if !s.equipped_for(m, carried) {
                    continue;
                }
                for (z, q) in s.zones_from(l) {
                    if q[m] > 0.0 && left[k][m][z] > 0.0 {
                        options.push((q[m] * left[k][m][z], m, z, q[m]));
                    }
                }
            }
            options.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

            let mut budget = 1.0;
            let mut data = 0.0;
            for (_, m, z, q) in options {
                let rate = s.missions[m].data_per_unit_work * q;
                let mut mu = (left[k][m][z] / q).min(1.0);
                let mut cost = 1.0;
                if rate > 0.0 {
                    if link <= 0.0 {
                        continue;
                    }
                    if relay.is_some() {
                        if !can_relay {
                            continue;
                        }
                        cost += rate / link;
                    } else {
                        mu = mu.min((link - data) / rate);
                    }
                }
                mu = mu.min(budget / cost);
                if mu <= 0.0 {
                    continue;
                }
                plan.missions[d][k][m][z] = mu;
                budget -= mu * cost;
                data += mu * rate;
                left[k][m][z] = (left[k][m][z] - mu * q).max(0.0);
            }
            if data > 0.0 {
                plan.to_network[d][k] = data;
                if relay.is_some() {
                    plan.relay[d][k] = data / link;
                }
            }
        }
    }
}
