//! Dense two-phase primal simplex.
//!
//! Solves `max c·x` subject to linear rows and `x ≥ 0`. Meant for
//! desk-scale problems (a few thousand columns at most); no presolve, no
//! sparse factorizations.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `max objective·x` s.t. `rows`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, objective: vec![0.0; num_vars], rows: Vec::new() }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(LpRow { coeffs, relation, rhs });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost; Bland's rule takes over during a long
    /// run of degenerate pivots until the objective moves again.
    DantzigThenBland,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_vars: usize,
    pub tolerance: f64,
    pub pivot_rule: PivotRule,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_vars: 2000, tolerance: 1e-9, pivot_rule: PivotRule::Bland, max_iterations: 200_000 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("LP has {vars} variables, above the cap of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution, SimplexError> {
    simplex_solve_with(lp, &SimplexOptions::default())
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, &y) in self.cost.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs for `max c·x` given the current basis; entering
    /// candidates have negative entries.
    fn price(&mut self, c: &[f64]) {
        let w = self.width;
        self.cost = vec![0.0; w];
        for (j, &cj) in c.iter().enumerate() {
            self.cost[j] = -cj;
        }
        for i in 0..self.rows {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] += cb * self.data[i * w + j];
                }
            }
        }
    }

    /// Returns `Ok(true)` at optimality and `Ok(false)` when unbounded.
    fn optimize(&mut self, allowed: usize, opts: &SimplexOptions, iters: &mut usize) -> Result<bool, SimplexError> {
        let tol = opts.tolerance;
        let mut bland = opts.pivot_rule == PivotRule::Bland;
        let mut degenerate_run = 0usize;
        loop {
            *iters += 1;
            if *iters > opts.max_iterations {
                return Err(SimplexError::IterationLimit(opts.max_iterations));
            }
            let entering = if bland {
                (0..allowed).find(|&j| self.cost[j] < -tol)
            } else {
                (0..allowed)
                    .filter(|&j| self.cost[j] < -tol)
                    .min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]).then(a.cmp(&b)))
            };
            let Some(c) = entering else { return Ok(true) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > tol {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - tol || (ratio <= br + tol && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return Ok(false) };
            if ratio.abs() <= tol {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = opts.pivot_rule == PivotRule::Bland;
            }
            self.pivot(r, c);
        }
    }
}

pub fn simplex_solve_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, SimplexError> {
    let n = lp.num_vars;
    if n > opts.max_vars {
        return Err(SimplexError::TooLarge { vars: n, limit: opts.max_vars });
    }
    if lp.objective.iter().any(|v| !v.is_finite()) {
        return Err(SimplexError::NonFinite("objective"));
    }
    if lp.rows.iter().any(|r| !r.rhs.is_finite() || r.coeffs.iter().any(|(_, v)| !v.is_finite())) {
        return Err(SimplexError::NonFinite("constraints"));
    }

    let m = lp.rows.len();
    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = lp
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                let rel = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (r.coeffs.iter().map(|&(j, v)| (j, -v)).collect(), rel, -r.rhs)
            } else {
                (r.coeffs.clone(), r.relation, r.rhs)
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = n + n_slack;
    let width = art_start + n_art + 1;

    let mut t = Tableau { rows: m, width, data: vec![0.0; m * width], basis: vec![0; m], cost: Vec::new() };
    let (mut slack, mut art) = (n, art_start);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        for &(j, v) in coeffs {
            t.data[i * width + j] += v;
        }
        t.data[i * width + width - 1] = *rhs;
        match rel {
            Relation::Le => {
                t.data[i * width + slack] = 1.0;
                t.basis[i] = slack;
                slack += 1;
            }
            Relation::Ge => {
                t.data[i * width + slack] = -1.0;
                slack += 1;
                t.data[i * width + art] = 1.0;
                t.basis[i] = art;
                art += 1;
            }
            Relation::Eq => {
                t.data[i * width + art] = 1.0;
                t.basis[i] = art;
                art += 1;
            }
        }
    }

    let mut iters = 0usize;
    let scale = rows.iter().map(|r| r.2).fold(1.0, f64::max);
    if n_art > 0 {
        let mut phase1 = vec![0.0; width - 1];
        for c in phase1.iter_mut().skip(art_start) {
            *c = -1.0;
        }
        t.price(&phase1);
        t.optimize(width - 1, opts, &mut iters)?;
        let infeas: f64 = (0..m).filter(|&i| t.basis[i] >= art_start).map(|i| t.rhs(i)).sum();
        if infeas > 1e-7 * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: vec![0.0; n], value: 0.0 });
        }
        // Drive remaining artificials out of the basis; rows where that is
        // impossible are redundant and get dropped.
        let mut keep = vec![true; m];
        for i in 0..m {
            if t.basis[i] < art_start {
                continue;
            }
            match (0..art_start).find(|&j| t.at(i, j).abs() > opts.tolerance) {
                Some(j) => t.pivot(i, j),
                None => keep[i] = false,
            }
        }
        if keep.iter().any(|k| !k) {
            let mut data = Vec::with_capacity(t.data.len());
            let mut basis = Vec::new();
            for i in 0..m {
                if keep[i] {
                    data.extend_from_slice(&t.data[i * width..(i + 1) * width]);
                    basis.push(t.basis[i]);
                }
            }
            t.rows = basis.len();
            t.data = data;
            t.basis = basis;
        }
    }

    let mut c = vec![0.0; width - 1];
    c[..n].copy_from_slice(&lp.objective);
    t.price(&c);
    if !t.optimize(art_start, opts, &mut iters)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![0.0; n], value: f64::INFINITY });
    }
    let mut x = vec![0.0; n];
    for i in 0..t.rows {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).max(0.0);
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution { status: LpStatus::Optimal, x, value })
}
