//! Exact optimizer for desk-scale instances.
//!
//! Every UAV's route and payload schedule is enumerated up front as a
//! [`Trajectory`](trajectory). The search then picks one trajectory per UAV
//! depth-first and, for each complete assignment, solves the remaining
//! linear program (mission shares, relaying and data flow) with the bundled
//! simplex.
//!
//! Pruning, each of which can be switched off through [`Pruning`]:
//!
//! * `battery`: drop route prefixes and payload sets that run a battery flat;
//! * `capacity`: drop payload sets over the lift capacity;
//! * `windows`: abandon a partial assignment once its remaining UAVs can no
//!   longer complete every delivery;
//! * `dominance`: per flight segment keep only inclusion-maximal payload
//!   sets, ignoring deliverables that cannot be dropped off in the segment;
//! * `bound`: abandon a partial assignment whose satisfaction upper bound
//!   cannot beat the incumbent;
//! * `symmetry`: UAVs with identical equipment restrictions take
//!   trajectories in non-decreasing order.
//!
//! Among optimal plans the one with the fewest airborne UAV-epochs wins,
//! then the first in enumeration order.

mod inner;
mod trajectory;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::evaluator::check_feasibility;
use crate::plan::Plan;
use crate::scenario::{validate, Scenario, Violation};
use crate::simplex::{PivotRule, SimplexError, SimplexOptions};
use crate::DEFAULT_TOLERANCE;
use trajectory::Trajectory;

const TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationLimits {
    /// Stop after this many complete assignments have been evaluated.
    pub max_assignments: u64,
    pub time_budget: Option<Duration>,
    /// Refuse instances with `|D|·|K|·|L|` above this.
    pub max_size: usize,
    pub max_payloads: usize,
    /// Split the search over the first UAV's trajectories across threads.
    /// Results stay identical; the visit count may not.
    pub parallel: bool,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_assignments: 5_000_000,
            time_budget: Some(Duration::from_secs(600)),
            max_size: 120,
            max_payloads: 12,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pruning {
    pub battery: bool,
    pub capacity: bool,
    pub windows: bool,
    pub dominance: bool,
    pub bound: bool,
    pub symmetry: bool,
}

impl Default for Pruning {
    fn default() -> Self {
        Self { battery: true, capacity: true, windows: true, dominance: true, bound: true, symmetry: true }
    }
}

impl Pruning {
    pub fn none() -> Self {
        Self { battery: false, capacity: false, windows: false, dominance: false, bound: false, symmetry: false }
    }

    fn all(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub plan: Plan,
    pub objective: f64,
    /// False when a limit stopped the search early.
    pub proven_optimal: bool,
    pub assignments_visited: u64,
    /// Candidate trajectories generated over all UAV classes.
    pub trajectories: usize,
}

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<Violation>),
    #[error("instance too large for exact search: |D|·|K|·|L| = {size} exceeds {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("too many payload items for exact search: {count} exceeds {limit}")]
    TooManyPayloads { count: usize, limit: usize },
    #[error("no feasible plan exists")]
    Infeasible,
    #[error("search limit reached before a feasible plan was found")]
    LimitReached,
    #[error(transparent)]
    Lp(#[from] SimplexError),
}

/// Optimal plan of `s` with every pruning rule enabled.
pub fn solve_exact(s: &Scenario, limits: &EnumerationLimits) -> Result<ExactResult, ExactError> {
    solve_exact_with(s, limits, Pruning::default())
}

pub fn solve_exact_with(s: &Scenario, limits: &EnumerationLimits, pruning: Pruning) -> Result<ExactResult, ExactError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(ExactError::InvalidScenario(violations));
    }
    let size = s.num_uavs() * s.epochs * s.num_locations();
    if size > limits.max_size {
        return Err(ExactError::TooLarge { size, limit: limits.max_size });
    }
    if s.payloads.len() > limits.max_payloads.min(63) {
        return Err(ExactError::TooManyPayloads { count: s.payloads.len(), limit: limits.max_payloads.min(63) });
    }
    let search = Search::new(s, limits, pruning);
    let first = &search.pool[search.class_of[0]];
    let order: Vec<usize> = (0..first.len()).collect();
    let run = |t: usize| -> Result<(), ExactError> {
        let mut state = search.state();
        search.place(&mut state, 0, t)
    };
    if limits.parallel {
        order.into_par_iter().try_for_each(run)?;
    } else {
        order.into_iter().try_for_each(run)?;
    }
    let visited = search.visited.load(Ordering::Relaxed);
    let stopped = search.stopped.load(Ordering::Relaxed);
    let trajectories = search.pool.iter().map(Vec::len).sum();
    match search.best.into_inner().expect("incumbent lock") {
        Some(best) => Ok(ExactResult {
            objective: crate::evaluator::satisfaction(s, &best.plan).objective,
            plan: best.plan,
            proven_optimal: !stopped,
            assignments_visited: visited,
            trajectories,
        }),
        None if stopped => Err(ExactError::LimitReached),
        None => Err(ExactError::Infeasible),
    }
}

struct Incumbent {
    value: f64,
    airborne: usize,
    choice: Vec<usize>,
    plan: Plan,
}

impl Incumbent {
    fn beaten_by(&self, value: f64, airborne: usize, choice: &[usize]) -> bool {
        if value > self.value + TIE {
            return true;
        }
        if value < self.value - TIE {
            return false;
        }
        (airborne, choice) < (self.airborne, &self.choice[..])
    }
}

struct Search<'a> {
    s: &'a Scenario,
    limits: &'a EnumerationLimits,
    pruning: Pruning,
    lp: SimplexOptions,
    /// Trajectories per equipment class.
    pool: Vec<Vec<Trajectory>>,
    class_of: Vec<usize>,
    /// `suffix_serves[d]`: deliveries some UAV in `d..` could complete.
    suffix_serves: Vec<u64>,
    /// `suffix_cap[d][i]`: most service the UAVs `d..` could add at flat index `i`.
    suffix_cap: Vec<Vec<f64>>,
    all_deliveries: u64,
    need: Vec<f64>,
    started: Instant,
    visited: AtomicU64,
    stopped: AtomicBool,
    best: Mutex<Option<Incumbent>>,
}

struct State {
    choice: Vec<usize>,
    served: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(s: &'a Scenario, limits: &'a EnumerationLimits, pruning: Pruning) -> Self {
        let nd = s.num_uavs();
        let forbidden: Vec<u64> = (0..nd)
            .map(|d| (0..s.payloads.len()).filter(|&i| s.uav.is_forbidden(d, i)).fold(0, |m, i| m | 1 << i))
            .collect();
        let mut masks: Vec<u64> = Vec::new();
        let class_of: Vec<usize> = forbidden
            .iter()
            .map(|f| {
                masks.iter().position(|m| m == f).unwrap_or_else(|| {
                    masks.push(*f);
                    masks.len() - 1
                })
            })
            .collect();
        let pool: Vec<Vec<Trajectory>> = masks.iter().map(|&f| trajectory::trajectories(s, f, &pruning)).collect();

        let width = s.epochs * s.missions.len() * s.zones.len();
        let mut need = vec![0.0; width];
        for (k, m, z, v) in s.demand.entries() {
            need[(k * s.missions.len() + m) * s.zones.len() + z] = v;
        }
        let class_union: Vec<u64> = pool.iter().map(|ts| ts.iter().fold(0, |u, t| u | t.serves)).collect();
        let class_cap: Vec<Vec<f64>> = pool
            .iter()
            .map(|ts| {
                let mut cap = vec![0.0f64; width];
                for t in ts {
                    for &(i, q) in &t.potential {
                        cap[i] = cap[i].max(q);
                    }
                }
                cap
            })
            .collect();
        let mut suffix_serves = vec![0u64; nd + 1];
        let mut suffix_cap = vec![vec![0.0; width]; nd + 1];
        for d in (0..nd).rev() {
            suffix_serves[d] = suffix_serves[d + 1] | class_union[class_of[d]];
            suffix_cap[d] = suffix_cap[d + 1].iter().zip(&class_cap[class_of[d]]).map(|(a, b)| a + b).collect();
        }
        let n = s.deliveries().count();
        Search {
            s,
            limits,
            pruning,
            lp: SimplexOptions { pivot_rule: PivotRule::DantzigThenBland, ..SimplexOptions::default() },
            pool,
            class_of,
            suffix_serves,
            suffix_cap,
            all_deliveries: if n == 0 { 0 } else { (1u64 << n) - 1 },
            need,
            started: Instant::now(),
            visited: AtomicU64::new(0),
            stopped: AtomicBool::new(false),
            best: Mutex::new(None),
        }
    }

    fn state(&self) -> State {
        State { choice: Vec::with_capacity(self.s.num_uavs()), served: vec![0.0; self.need.len()] }
    }

    fn traj(&self, d: usize, t: usize) -> &Trajectory {
        &self.pool[self.class_of[d]][t]
    }

    /// Assign trajectory `t` to UAV `d` and explore below it.
    fn place(&self, st: &mut State, d: usize, t: usize) -> Result<(), ExactError> {
        if self.stopped.load(Ordering::Relaxed) {
            return Ok(());
        }
        st.choice.push(t);
        for &(i, q) in &self.traj(d, t).potential {
            st.served[i] += q;
        }
        let result = self.descend(st, d + 1);
        for &(i, q) in &self.traj(d, t).potential {
            st.served[i] -= q;
        }
        st.choice.pop();
        result
    }

    fn descend(&self, st: &mut State, d: usize) -> Result<(), ExactError> {
        let nd = self.s.num_uavs();
        let serves = (0..st.choice.len()).fold(0, |u, e| u | self.traj(e, st.choice[e]).serves);
        if d == nd {
            if serves & self.all_deliveries != self.all_deliveries {
                return Ok(());
            }
            return self.leaf(st);
        }
        if self.pruning.windows && (serves | self.suffix_serves[d]) & self.all_deliveries != self.all_deliveries {
            return Ok(());
        }
        if self.pruning.bound && self.bounded_out(st, d) {
            return Ok(());
        }
        let class = self.class_of[d];
        let start = if self.pruning.symmetry && self.class_of[d - 1] == class { st.choice[d - 1] } else { 0 };
        for t in start..self.pool[class].len() {
            self.place(st, d, t)?;
            if self.stopped.load(Ordering::Relaxed) {
                break;
            }
        }
        Ok(())
    }

    /// Whether no completion of the partial assignment (UAVs `..d` fixed)
    /// can beat the incumbent.
    fn bounded_out(&self, st: &State, d: usize) -> bool {
        let guard = self.best.lock().expect("incumbent lock");
        let Some(best) = guard.as_ref() else { return false };
        let airborne: usize = (0..d).map(|e| self.traj(e, st.choice[e]).airborne).sum();
        let ub = self.upper_bound(st, d);
        ub < best.value - TIE || (ub <= best.value + TIE && airborne > best.airborne)
    }

    fn upper_bound(&self, st: &State, d: usize) -> f64 {
        let s = self.s;
        let (nm, nz) = (s.missions.len(), s.zones.len());
        let served = |k: usize, m: usize, z: usize| {
            let i = (k * nm + m) * nz + z;
            (st.served[i] + self.suffix_cap[d][i]).min(self.need[i])
        };
        let mut ub: f64 = 1.0;
        for m in s.service_missions() {
            for z in 0..nz {
                for k in 0..s.epochs {
                    let need = s.demand.window_sum(k, s.horizon, m, z);
                    if need > 0.0 {
                        let got: f64 = (k.saturating_sub(s.horizon)..=k).map(|h| served(h, m, z)).sum();
                        ub = ub.min(got / need);
                    }
                }
            }
        }
        ub
    }

    fn leaf(&self, st: &State) -> Result<(), ExactError> {
        let s = self.s;
        let n = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        let out_of_time = self.limits.time_budget.is_some_and(|b| self.started.elapsed() > b);
        if n >= self.limits.max_assignments || out_of_time {
            self.stopped.store(true, Ordering::Relaxed);
        }
        let mut plan = Plan::idle(s, s.depots()[0]);
        for (d, &t) in st.choice.iter().enumerate() {
            let traj = self.traj(d, t);
            plan.locations[d].clone_from(&traj.locations);
            for (k, &mask) in traj.loads.iter().enumerate() {
                for (i, slot) in plan.payloads[d][k].iter_mut().enumerate() {
                    *slot = mask >> i & 1 == 1;
                }
            }
        }
        if !self.pruning.all() {
            let report = check_feasibility(s, &plan, DEFAULT_TOLERANCE).expect("plan dimensions");
            if !report.is_feasible() {
                return Ok(());
            }
        }
        let airborne: usize = st.choice.iter().enumerate().map(|(d, &t)| self.traj(d, t).airborne).sum();
        if self.pruning.bound {
            let guard = self.best.lock().expect("incumbent lock");
            if let Some(best) = guard.as_ref() {
                if !best.beaten_by(self.upper_bound(st, s.num_uavs()), airborne, &st.choice) {
                    return Ok(());
                }
            }
        }
        let Some(value) = inner::optimize_continuous(s, &mut plan, &self.lp)? else {
            return Ok(());
        };
        let mut guard = self.best.lock().expect("incumbent lock");
        if guard.as_ref().is_none_or(|b| b.beaten_by(value, airborne, &st.choice)) {
            *guard = Some(Incumbent { value, airborne, choice: st.choice.clone(), plan });
        }
        Ok(())
    }
}
