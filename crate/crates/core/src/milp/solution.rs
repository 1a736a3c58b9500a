use std::collections::BTreeMap;

use super::{split_name, var_name, MilpError, MilpModel, Symbol, VarKind};
use crate::evaluator::{battery_trace, satisfaction};
use crate::plan::Plan;
use crate::scenario::Scenario;

const BINARY_TOLERANCE: f64 = 1e-4;

/// Variable name to value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionVector {
    pub values: BTreeMap<String, f64>,
}

impl SolutionVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Dense vector in model order; absent variables read as 0.
    pub fn dense(&self, m: &MilpModel) -> Vec<f64> {
        m.variables.iter().map(|v| self.get(&v.name).unwrap_or(0.0)).collect()
    }

    pub fn from_dense(m: &MilpModel, x: &[f64]) -> Self {
        let values = m.variables.iter().zip(x).map(|(v, &x)| (v.name.clone(), x)).collect();
        Self { values }
    }

    /// `name value` lines in model order.
    pub fn to_text(&self, m: &MilpModel) -> String {
        let mut out = String::new();
        for v in &m.variables {
            if let Some(x) = self.get(&v.name) {
                out.push_str(&format!("{} {}\n", v.name, super::lp_format::fmt_num(x)));
            }
        }
        out
    }
}

/// Parse whitespace-separated `name value` lines; `#` starts a comment.
pub fn parse_solution(text: &str) -> Result<SolutionVector, MilpError> {
    let mut values = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| MilpError::Parse { line: n + 1, message };
        let mut it = body.split_whitespace();
        let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(err("expected `name value`".into()));
        };
        let v: f64 = value.parse().map_err(|_| err(format!("bad value `{value}` for `{name}`")))?;
        if !v.is_finite() {
            return Err(MilpError::NonFinite(name.to_string()));
        }
        if values.insert(name.to_string(), v).is_some() {
            return Err(err(format!("duplicate variable `{name}`")));
        }
    }
    Ok(SolutionVector { values })
}

/// Rebuild a plan from a solution of `build_milp(s)`.
///
/// Binaries are rounded (an error past `1e-4` from 0 or 1); the mission
/// allocation is the sum of the location shares `muh`.
pub fn import_solution(s: &Scenario, m: &MilpModel, sol: &SolutionVector) -> Result<Plan, MilpError> {
    for v in &m.variables {
        match sol.get(&v.name) {
            None if v.kind == VarKind::Binary => return Err(MilpError::MissingVariable(v.name.clone())),
            Some(x) if !x.is_finite() => return Err(MilpError::NonFinite(v.name.clone())),
            Some(x) if v.kind == VarKind::Binary && (x - x.round()).abs() > BINARY_TOLERANCE => {
                return Err(MilpError::NotBinary { name: v.name.clone(), value: x })
            }
            _ => {}
        }
    }
    if let Some(name) = sol.values.keys().find(|n| m.lookup(n).is_none()) {
        return Err(MilpError::UnknownVariable(name.clone()));
    }
    let val = |sym: Symbol, idx: &[usize]| sol.get(&var_name(sym, idx)).unwrap_or(0.0);
    let bit = |sym: Symbol, idx: &[usize]| val(sym, idx).round() == 1.0;

    let (nd, nk, nl) = (s.num_uavs(), s.epochs, s.num_locations());
    let mut p = Plan::idle(s, 0);
    for d in 0..nd {
        for k in 0..nk {
            let at: Vec<usize> = (0..nl).filter(|&l| bit(Symbol::Lambda, &[d, k, l])).collect();
            let [l] = at[..] else {
                return Err(MilpError::Inconsistent(format!("UAV {d} is at {} locations in epoch {k}", at.len())));
            };
            p.locations[d][k] = l;
            for i in 0..s.payloads.len() {
                p.payloads[d][k][i] = bit(Symbol::Omega, &[d, k, i]);
            }
            p.relay[d][k] = val(Symbol::Rho, &[d, k]);
            p.to_network[d][k] = val(Symbol::TauNet, &[d, k]);
            for d2 in 0..nd {
                p.transfers[d][d2][k] = val(Symbol::Tau, &[d, d2, k]);
            }
        }
    }
    for (name, &x) in &sol.values {
        if let Some((Symbol::MuHat, idx)) = split_name(name) {
            let [d, k, _, mi, z] = idx[..] else { continue };
            p.missions[d][k][mi][z] += x;
        }
    }
    Ok(p)
}

/// The model point that corresponds to a plan: the inverse of
/// [`import_solution`], with `beta` set to the simulated battery level and
/// the satisfaction variables at their implied values.
pub fn plan_to_solution(s: &Scenario, m: &MilpModel, p: &Plan) -> SolutionVector {
    let mut x = vec![0.0; m.variables.len()];
    let mut set = |sym: Symbol, idx: &[usize], v: f64| {
        if let Some(j) = m.var(sym, idx) {
            x[j] = v;
        }
    };
    let (nd, nk) = (s.num_uavs(), s.epochs);
    let trace = battery_trace(s, p);
    let report = satisfaction(s, p);
    let has_relay = s.relay_mission().is_some();
    for d in 0..nd {
        for k in 0..nk {
            let l = p.locations[d][k];
            set(Symbol::Lambda, &[d, k, l], 1.0);
            for (i, &on) in p.payloads[d][k].iter().enumerate() {
                set(Symbol::Omega, &[d, k, i], if on { 1.0 } else { 0.0 });
            }
            for (i, del) in s.deliveries() {
                let hit = p.payloads[d][k][i] && l == del.target;
                set(Symbol::Delta, &[d, k, i], if hit { 1.0 } else { 0.0 });
            }
            set(Symbol::Beta, &[d, k], trace.level[d][k]);
            for mi in s.service_missions() {
                for z in 0..s.zones.len() {
                    let mu = p.missions[d][k][mi][z];
                    set(Symbol::Mu, &[d, k, mi, z], mu);
                    set(Symbol::MuHat, &[d, k, l, mi, z], mu);
                }
            }
            let share = if has_relay { p.relay[d][k] } else { 1.0 };
            set(Symbol::Rho, &[d, k], p.relay[d][k]);
            set(Symbol::TauNet, &[d, k], p.to_network[d][k]);
            set(Symbol::PiNet, &[d, k, l], share);
            for d2 in 0..nd {
                set(Symbol::Tau, &[d, d2, k], p.transfers[d][d2][k]);
                set(Symbol::Pi, &[d, d2, k, l, p.locations[d2][k]], share);
            }
        }
    }
    for k in 0..nk {
        for mi in s.service_missions() {
            for z in 0..s.zones.len() {
                set(Symbol::Sigma, &[k, mi, z], report.sigma[k][mi][z]);
            }
        }
    }
    for mi in s.service_missions() {
        set(Symbol::SigmaBar, &[mi], report.sigma_bar[mi].unwrap_or(1.0));
    }
    set(Symbol::Gamma, &[], report.objective);
    SolutionVector::from_dense(m, &x)
}

/// Names of violated bounds, integrality conditions and rows at `x`.
pub fn check_solution(m: &MilpModel, x: &[f64], tol: f64) -> Vec<String> {
    let mut bad = Vec::new();
    for (v, &xi) in m.variables.iter().zip(x) {
        if xi < v.lower - tol || xi > v.upper + tol {
            bad.push(format!("bound:{}", v.name));
        }
        if v.kind == VarKind::Binary && (xi - xi.round()).abs() > tol {
            bad.push(format!("integrality:{}", v.name));
        }
    }
    for c in &m.constraints {
        if c.violation(x) > tol {
            bad.push(c.name.clone());
        }
    }
    bad
}
