//! The continuous part of a plan once routes and payloads are fixed.

use crate::plan::Plan;
use crate::scenario::Scenario;
use crate::simplex::{simplex_solve_with, LinearProgram, LpStatus, Relation, SimplexError, SimplexOptions};

enum Var {
    Mu { d: usize, k: usize, m: usize, z: usize },
    Rho { d: usize, k: usize },
    Tau { d1: usize, d2: usize, k: usize },
    TauNet { d: usize, k: usize },
    Gamma,
}

/// Maximize the satisfaction objective over mission shares, relay shares
/// and data transfers for the routes and payloads already in `p`.
///
/// On success the continuous fields of `p` are overwritten and the optimal
/// objective is returned. `None` means the LP is infeasible, which cannot
/// happen for a binary-feasible plan.
pub(crate) fn optimize_continuous(
    s: &Scenario,
    p: &mut Plan,
    opts: &SimplexOptions,
) -> Result<Option<f64>, SimplexError> {
    let (nd, nk, nm, nz) = (s.num_uavs(), s.epochs, s.missions.len(), s.zones.len());
    let relay = s.relay_mission();
    let mut vars: Vec<Var> = Vec::new();
    let mut mu = vec![vec![Vec::<(usize, usize, usize)>::new(); nk]; nd];
    let mut rho = vec![vec![None; nk]; nd];

    for d in 0..nd {
        for k in 0..nk {
            let l = p.locations[d][k];
            let carried = &p.payloads[d][k];
            for (z, q) in s.zones_from(l) {
                for m in s.service_missions() {
                    if q[m] > 0.0 && s.demand.get(k, m, z) > 0.0 && s.equipped_for(m, carried) {
                        mu[d][k].push((vars.len(), m, z));
                        vars.push(Var::Mu { d, k, m, z });
                    }
                }
            }
            if relay.is_some_and(|r| s.equipped_for(r, carried)) {
                rho[d][k] = Some(vars.len());
                vars.push(Var::Rho { d, k });
            }
        }
    }

    let mut tau: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let mut tau_net: Vec<(usize, usize, usize, f64)> = Vec::new();
    for k in 0..nk {
        let producing = (0..nd).any(|d| mu[d][k].iter().any(|&(_, m, _)| s.missions[m].data_per_unit_work > 0.0));
        if !producing {
            continue;
        }
        for d1 in 0..nd {
            if relay.is_some() && rho[d1][k].is_none() {
                continue;
            }
            let l1 = p.locations[d1][k];
            for d2 in 0..nd {
                let cap = s.links.between[l1][p.locations[d2][k]];
                if d1 != d2 && cap > 0.0 {
                    tau.push((vars.len(), d1, d2, k, cap));
                    vars.push(Var::Tau { d1, d2, k });
                }
            }
            let cap = s.links.to_network[l1];
            if cap > 0.0 {
                tau_net.push((vars.len(), d1, k, cap));
                vars.push(Var::TauNet { d: d1, k });
            }
        }
    }
    let gamma = vars.len();
    vars.push(Var::Gamma);

    let mut lp = LinearProgram::new(vars.len());
    lp.objective[gamma] = 1.0;
    lp.add_row(vec![(gamma, 1.0)], Relation::Le, 1.0);

    for d in 0..nd {
        for k in 0..nk {
            let mut row: Vec<(usize, f64)> = mu[d][k].iter().map(|&(j, _, _)| (j, 1.0)).collect();
            row.extend(rho[d][k].map(|j| (j, 1.0)));
            if !row.is_empty() {
                lp.add_row(row, Relation::Le, 1.0);
            }
        }
    }

    // served[k][m][z]: terms of Σ_d q μ.
    let mut served = vec![vec![vec![Vec::<(usize, f64)>::new(); nz]; nm]; nk];
    for d in 0..nd {
        for k in 0..nk {
            let l = p.locations[d][k];
            for &(j, m, z) in &mu[d][k] {
                served[k][m][z].push((j, s.quality(l, m, z)));
            }
        }
    }
    for (k, by_m) in served.iter().enumerate() {
        for (m, by_z) in by_m.iter().enumerate() {
            for (z, terms) in by_z.iter().enumerate() {
                if !terms.is_empty() {
                    lp.add_row(terms.clone(), Relation::Le, s.demand.get(k, m, z));
                }
            }
        }
    }

    for d in 0..nd {
        for k in 0..nk {
            let l = p.locations[d][k];
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(j, m, z) in &mu[d][k] {
                let rate = s.missions[m].data_per_unit_work * s.quality(l, m, z);
                if rate > 0.0 {
                    row.push((j, rate));
                }
            }
            let generates = !row.is_empty();
            for &(j, d1, d2, kk, _) in &tau {
                if kk == k && d2 == d {
                    row.push((j, 1.0));
                }
                if kk == k && d1 == d {
                    row.push((j, -1.0));
                }
            }
            for &(j, d1, kk, _) in &tau_net {
                if kk == k && d1 == d {
                    row.push((j, -1.0));
                }
            }
            if generates || !row.is_empty() {
                lp.add_row(row, Relation::Eq, 0.0);
            }
        }
    }

    for &(j, d1, _, k, cap) in &tau {
        match rho[d1][k] {
            Some(r) if relay.is_some() => lp.add_row(vec![(j, 1.0), (r, -cap)], Relation::Le, 0.0),
            _ => lp.add_row(vec![(j, 1.0)], Relation::Le, cap),
        }
    }
    for &(j, d, k, cap) in &tau_net {
        match rho[d][k] {
            Some(r) if relay.is_some() => lp.add_row(vec![(j, 1.0), (r, -cap)], Relation::Le, 0.0),
            _ => lp.add_row(vec![(j, 1.0)], Relation::Le, cap),
        }
    }

    for m in s.service_missions() {
        for z in 0..nz {
            for k in 0..nk {
                let need = s.demand.window_sum(k, s.horizon, m, z);
                if need <= 0.0 {
                    continue;
                }
                let mut row = vec![(gamma, 1.0)];
                for h in k.saturating_sub(s.horizon)..=k {
                    row.extend(served[h][m][z].iter().map(|&(j, q)| (j, -q / need)));
                }
                lp.add_row(row, Relation::Le, 0.0);
            }
        }
    }

    let sol = simplex_solve_with(&lp, opts)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    for d in 0..nd {
        for k in 0..nk {
            p.relay[d][k] = 0.0;
            p.to_network[d][k] = 0.0;
            for row in &mut p.missions[d][k] {
                row.iter_mut().for_each(|x| *x = 0.0);
            }
            for d2 in 0..nd {
                p.transfers[d][d2][k] = 0.0;
            }
        }
    }
    for (j, v) in vars.iter().enumerate() {
        let x = sol.x[j].max(0.0);
        match *v {
            Var::Mu { d, k, m, z } => p.missions[d][k][m][z] = x.min(1.0),
            Var::Rho { d, k } => p.relay[d][k] = x.min(1.0),
            Var::Tau { d1, d2, k } => p.transfers[d1][d2][k] = x,
            Var::TauNet { d, k } => p.to_network[d][k] = x,
            Var::Gamma => {}
        }
    }
    Ok(Some(sol.value))
}
