//! Reference optimizer for small exported models: depth-first search over
//! the binaries with bound propagation and LP-relaxation pruning, solving
//! the continuous remainder of each complete binary assignment with the
//! bundled simplex.
//!
//! It knows nothing about the planning problem; it only reads rows, so it
//! checks the formulation independently of the enumeration engine.

use super::{MilpModel, Sense, VarKind};
use crate::simplex::{simplex_solve_with, LinearProgram, LpStatus, PivotRule, Relation, SimplexError, SimplexOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Solve the LP relaxation at a node once at most this many coupled
    /// binaries are still free.
    pub relax_below: usize,
    /// Stop after this many complete assignments.
    pub max_leaves: usize,
    pub tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { relax_below: usize::MAX, max_leaves: 1_000_000, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best objective found; `None` if no feasible point was found.
    pub objective: Option<f64>,
    /// Dense variable values of the best point.
    pub solution: Option<Vec<f64>>,
    pub nodes: usize,
    pub leaves: usize,
    /// False when `max_leaves` cut the search short.
    pub complete: bool,
}

struct Search<'a> {
    m: &'a MilpModel,
    opts: &'a OracleOptions,
    lp_opts: SimplexOptions,
    rows_of: Vec<Vec<usize>>,
    binary: Vec<bool>,
    coupled: Vec<bool>,
    best: Option<(f64, Vec<f64>)>,
    nodes: usize,
    leaves: usize,
    stopped: bool,
}

#[derive(Clone)]
struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

pub fn solve_model_by_enumeration(m: &MilpModel, opts: &OracleOptions) -> Result<OracleResult, SimplexError> {
    let n = m.variables.len();
    let binary: Vec<bool> = m.variables.iter().map(|v| v.kind == VarKind::Binary).collect();
    let mut rows_of = vec![Vec::new(); n];
    let mut coupled = vec![false; n];
    for (r, c) in m.constraints.iter().enumerate() {
        let mixed = c.terms.iter().any(|&(j, _)| !binary[j]);
        for &(j, _) in &c.terms {
            rows_of[j].push(r);
            if mixed && binary[j] {
                coupled[j] = true;
            }
        }
    }
    let mut search = Search {
        m,
        opts,
        lp_opts: SimplexOptions { pivot_rule: PivotRule::DantzigThenBland, ..SimplexOptions::default() },
        rows_of,
        binary,
        coupled,
        best: None,
        nodes: 0,
        leaves: 0,
        stopped: false,
    };
    let b =
        Bounds { lo: m.variables.iter().map(|v| v.lower).collect(), hi: m.variables.iter().map(|v| v.upper).collect() };
    let all_rows: Vec<usize> = (0..m.constraints.len()).collect();
    search.node(b, all_rows)?;
    Ok(OracleResult {
        objective: search.best.as_ref().map(|b| b.0),
        solution: search.best.map(|b| b.1),
        nodes: search.nodes,
        leaves: search.leaves,
        complete: !search.stopped,
    })
}

impl Search<'_> {
    /// Fix binaries implied by the rows in `queue`; false on infeasibility.
    fn propagate(&self, b: &mut Bounds, mut queue: Vec<usize>) -> bool {
        let tol = 1e-9;
        let mut queued = vec![false; self.m.constraints.len()];
        for &r in &queue {
            queued[r] = true;
        }
        while let Some(r) = queue.pop() {
            queued[r] = false;
            let c = &self.m.constraints[r];
            let parts: &[bool] = match c.sense {
                Sense::Le => &[true],
                Sense::Ge => &[false],
                Sense::Eq => &[true, false],
            };
            for &upper_side in parts {
                // Orient as Σ a x ≤ rhs.
                let sign = if upper_side { 1.0 } else { -1.0 };
                let rhs = sign * c.rhs;
                let mut finite = 0.0;
                let mut infinite = 0usize;
                for &(j, a) in &c.terms {
                    let a = sign * a;
                    let v = if a > 0.0 { b.lo[j] } else { b.hi[j] };
                    if v.is_infinite() {
                        infinite += 1;
                    } else {
                        finite += a * v;
                    }
                }
                if infinite > 0 {
                    continue;
                }
                if finite > rhs + tol {
                    return false;
                }
                for &(j, a) in &c.terms {
                    if !self.binary[j] || b.lo[j] == b.hi[j] {
                        continue;
                    }
                    let a = sign * a;
                    let rest = finite - if a > 0.0 { a * b.lo[j] } else { a * b.hi[j] };
                    let one_ok = rest + a <= rhs + tol;
                    let zero_ok = rest <= rhs + tol;
                    let (lo, hi) = match (zero_ok, one_ok) {
                        (true, true) => continue,
                        (true, false) => (0.0, 0.0),
                        (false, true) => (1.0, 1.0),
                        (false, false) => return false,
                    };
                    b.lo[j] = lo;
                    b.hi[j] = hi;
                    for &r2 in &self.rows_of[j] {
                        if !queued[r2] {
                            queued[r2] = true;
                            queue.push(r2);
                        }
                    }
                }
            }
        }
        true
    }

    fn node(&mut self, mut b: Bounds, queue: Vec<usize>) -> Result<(), SimplexError> {
        if self.stopped {
            return Ok(());
        }
        self.nodes += 1;
        if !self.propagate(&mut b, queue) {
            return Ok(());
        }
        let free: Vec<usize> = (0..b.lo.len()).filter(|&j| self.coupled[j] && b.lo[j] != b.hi[j]).collect();
        if free.is_empty() {
            if !self.complete_pure(&mut b) {
                return Ok(());
            }
            self.leaves += 1;
            if self.leaves >= self.opts.max_leaves {
                self.stopped = true;
            }
            if let Some((value, x)) = self.solve_lp(&b)? {
                if self.best.as_ref().is_none_or(|best| value > best.0 + self.opts.tolerance) {
                    self.best = Some((value, x));
                }
            }
            return Ok(());
        }
        if free.len() <= self.opts.relax_below {
            match self.solve_lp(&b)? {
                None => return Ok(()),
                Some((bound, _)) => {
                    if self.best.as_ref().is_some_and(|best| bound <= best.0 + self.opts.tolerance) {
                        return Ok(());
                    }
                }
            }
        }
        let j = free[0];
        for v in [1.0, 0.0] {
            let mut child = b.clone();
            child.lo[j] = v;
            child.hi[j] = v;
            self.node(child, self.rows_of[j].clone())?;
        }
        Ok(())
    }

    /// Find any completion of the binaries that touch no continuous
    /// variable; they do not influence the LP.
    fn complete_pure(&self, b: &mut Bounds) -> bool {
        let Some(j) = (0..b.lo.len()).find(|&j| self.binary[j] && b.lo[j] != b.hi[j]) else {
            return true;
        };
        for v in [1.0, 0.0] {
            let mut child = b.clone();
            child.lo[j] = v;
            child.hi[j] = v;
            if self.propagate(&mut child, self.rows_of[j].clone()) && self.complete_pure(&mut child) {
                *b = child;
                return true;
            }
        }
        false
    }

    /// LP over the current bounds (binaries relaxed to their interval).
    /// Returns `None` when infeasible.
    fn solve_lp(&self, b: &Bounds) -> Result<Option<(f64, Vec<f64>)>, SimplexError> {
        let m = self.m;
        let n = b.lo.len();
        let (mut lo, mut hi) = (b.lo.clone(), b.hi.clone());
        // Singleton rows become bounds.
        let mut converged = false;
        for _ in 0..50 {
            let mut changed = false;
            for c in &m.constraints {
                let mut constant = 0.0;
                let mut single: Option<(usize, f64)> = None;
                let mut count = 0;
                for &(j, a) in &c.terms {
                    if lo[j] == hi[j] {
                        constant += a * lo[j];
                    } else {
                        count += 1;
                        single = Some((j, a));
                    }
                }
                let r = c.rhs - constant;
                match (count, single) {
                    (0, _) => {
                        let bad = match c.sense {
                            Sense::Le => r < -1e-9,
                            Sense::Ge => r > 1e-9,
                            Sense::Eq => r.abs() > 1e-9,
                        };
                        if bad {
                            return Ok(None);
                        }
                    }
                    (1, Some((j, a))) => {
                        let v = r / a;
                        let (up, down) = match (c.sense, a > 0.0) {
                            (Sense::Eq, _) => (true, true),
                            (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                            _ => (false, true),
                        };
                        if up && v < hi[j] {
                            hi[j] = v;
                            changed = true;
                        }
                        if down && v > lo[j] {
                            lo[j] = v;
                            changed = true;
                        }
                        if lo[j] > hi[j] + 1e-9 {
                            return Ok(None);
                        }
                        if hi[j] - lo[j] <= 1e-12 {
                            hi[j] = lo[j];
                        }
                    }
                    _ => {}
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }

        let mut col = vec![usize::MAX; n];
        let mut free = Vec::new();
        for j in 0..n {
            if lo[j] != hi[j] {
                col[j] = free.len();
                free.push(j);
            }
        }
        let mut lp = LinearProgram::new(free.len());
        let mut offset = 0.0;
        for &(j, a) in &m.objective {
            offset += a * lo[j];
            if col[j] != usize::MAX {
                lp.objective[col[j]] += a;
            }
        }
        for c in &m.constraints {
            let mut constant = 0.0;
            let mut coeffs = Vec::new();
            for &(j, a) in &c.terms {
                constant += a * lo[j];
                if col[j] != usize::MAX {
                    coeffs.push((col[j], a));
                }
            }
            if coeffs.is_empty() || (converged && coeffs.len() == 1) {
                continue;
            }
            let rel = match c.sense {
                Sense::Le => Relation::Le,
                Sense::Ge => Relation::Ge,
                Sense::Eq => Relation::Eq,
            };
            lp.add_row(coeffs, rel, c.rhs - constant);
        }
        for (i, &j) in free.iter().enumerate() {
            if hi[j].is_finite() {
                lp.add_row(vec![(i, 1.0)], Relation::Le, hi[j] - lo[j]);
            }
        }
        let sol = simplex_solve_with(&lp, &self.lp_opts)?;
        match sol.status {
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Ok(Some((f64::INFINITY, lo))),
            LpStatus::Optimal => {
                let mut x = lo;
                for (i, &j) in free.iter().enumerate() {
                    x[j] += sol.x[i];
                }
                Ok(Some((sol.value + offset, x)))
            }
        }
    }
}
