//! Linear MILP formulation of the planning problem.
//!
//! Every bilinear term of the original model is replaced by an exact
//! linear reformulation:
//!
//! * battery consumption: one big-M row per UAV, epoch and ordered pair of
//!   locations, `M = E + e(l1,l2)(W + C)`;
//! * deliveries: indicators `dl(d,k,p) ≤ om(d,k,p)`, `dl ≤ lam(d,k,f(p))`,
//!   `Σ dl ≥ 1` over the window;
//! * service: `muh(d,k,l,m,z)` is the share of `mu(d,k,m,z)` performed at
//!   location `l`; it exists only where `q(l,m,z) > 0`, is bounded by
//!   `lam(d,k,l)` and sums to at most `mu`;
//! * link capacities: `pi(d1,d2,k,l1,l2)` carries the relay share of `d1`
//!   when `d1` sits at `l1` and `d2` at `l2`, with `τ ≤ Σ t(l1,l2)·pi`;
//!   `pin(d,k,l)` does the same for the network sink;
//! * max-min objective: `Gamma ≤ sbar(m) ≤ sig(k,m,z)`.
//!
//! Variable counts, with `Ms` the non-relay missions, `Q` the set of
//! `(l,m,z)` with `q > 0`, `T` the location pairs with `t > 0`, `TΩ` the
//! locations with `t(l,Ω) > 0`, `R = 1` when a relay mission exists:
//!
//! | symbol | count |
//! |--------|-------|
//! | `lam`  | `|D||K||L|` |
//! | `om`   | `|D||K||P|` |
//! | `dl`   | `|D| Σ_p (min(b(p),|K|-1) - a(p) + 1)` |
//! | `beta` | `|D||K|` |
//! | `mu`   | `|D||K||Ms||Z|` |
//! | `muh`  | `|D||K||Q|` |
//! | `rho`  | `R|D||K|` |
//! | `tau`  | `|D|²|K|` |
//! | `taun` | `|D||K|` |
//! | `pi`   | `|D|²|K||T|` |
//! | `pin`  | `|D||K||TΩ|` |
//! | `sig`  | `(k,m,z)` with positive windowed need |
//! | `sbar` | `|Ms|` |
//! | `Gamma`| 1 |

mod build;
mod lp_format;
mod oracle;
mod solution;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::scenario::Violation;

pub use build::build_milp;
pub use lp_format::{export_lp, parse_lp};
pub use oracle::{solve_model_by_enumeration, OracleOptions, OracleResult};
pub use solution::{check_solution, import_solution, parse_solution, plan_to_solution, SolutionVector};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Lambda,
    Omega,
    Delta,
    Beta,
    Mu,
    MuHat,
    Rho,
    Tau,
    TauNet,
    Pi,
    PiNet,
    Sigma,
    SigmaBar,
    Gamma,
}

impl Symbol {
    pub const ALL: [Symbol; 14] = [
        Self::Lambda,
        Self::Omega,
        Self::Delta,
        Self::Beta,
        Self::Mu,
        Self::MuHat,
        Self::Rho,
        Self::Tau,
        Self::TauNet,
        Self::Pi,
        Self::PiNet,
        Self::Sigma,
        Self::SigmaBar,
        Self::Gamma,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            Self::Lambda => "lam",
            Self::Omega => "om",
            Self::Delta => "dl",
            Self::Beta => "beta",
            Self::Mu => "mu",
            Self::MuHat => "muh",
            Self::Rho => "rho",
            Self::Tau => "tau",
            Self::TauNet => "taun",
            Self::Pi => "pi",
            Self::PiNet => "pin",
            Self::Sigma => "sig",
            Self::SigmaBar => "sbar",
            Self::Gamma => "Gamma",
        }
    }

    pub fn from_prefix(prefix: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.prefix() == prefix)
    }
}

pub fn var_name(sym: Symbol, idx: &[usize]) -> String {
    let mut name = sym.prefix().to_string();
    for i in idx {
        name.push('_');
        name.push_str(&i.to_string());
    }
    name
}

/// Splits `lam_0_1_2` into its symbol and indices.
pub fn split_name(name: &str) -> Option<(Symbol, Vec<usize>)> {
    let mut parts = name.split('_');
    let sym = Symbol::from_prefix(parts.next()?)?;
    let idx = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
    Some((sym, idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// May be `f64::INFINITY`.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

/// Solver-neutral linear model. Objective is always maximized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
    by_name: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn var(&self, sym: Symbol, idx: &[usize]) -> Option<VarId> {
        self.lookup(&var_name(sym, idx))
    }

    pub fn count(&self, sym: Symbol) -> usize {
        self.variables.iter().filter(|v| split_name(&v.name).is_some_and(|(s, _)| s == sym)).count()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Number of rows whose name starts with `family` followed by `_` or
    /// the end of the name.
    pub fn count_rows(&self, family: &str) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.name == family || c.name.strip_prefix(family).is_some_and(|r| r.starts_with('_')))
            .count()
    }

    pub(crate) fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = self.variables.len();
        let prev = self.by_name.insert(name.clone(), id);
        assert!(prev.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, kind, lower, upper });
        id
    }

    /// Adds a row, merging repeated variables and dropping zero terms.
    pub(crate) fn add_row(&mut self, name: String, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        let mut sorted = terms;
        sorted.sort_by_key(|t| t.0);
        for (j, a) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        self.constraints.push(Constraint { name, terms: merged, sense, rhs });
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("scenario is invalid: {}", join(.0))]
    InvalidScenario(Vec<Violation>),
    #[error("missing variable `{0}`")]
    MissingVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{name}` = {value} is not binary")]
    NotBinary { name: String, value: f64 },
    #[error("variable `{0}` has a non-finite value")]
    NonFinite(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent solution: {0}")]
    Inconsistent(String),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
