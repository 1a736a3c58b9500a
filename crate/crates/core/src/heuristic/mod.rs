//! Multi-objective insertion heuristic.
//!
//! Deliveries are grouped into depot tours over a graph of alternative
//! routes. A tour is opened with the delivery of earliest deadline; the
//! remaining ones are inserted where φ1 (weighted detour time against the
//! coverage and monitoring collected en route) is smallest, picking the
//! delivery with the largest φ2 (savings over a dedicated trip). Tours are
//! then packed onto the fleet and expanded into a [`Plan`] whose idle
//! budget is spent greedily on coverage and monitoring.

mod expand;
mod graph;
mod insertion;
mod weights;

use serde::Serialize;
use thiserror::Error;

use crate::plan::Plan;
use crate::scenario::{validate, Scenario, Violation};

pub use expand::{schedule_tours, tours_to_plan};
pub use graph::{build_route_graph, Route, RouteGraph};
pub use insertion::{Insertion, Planner, Tour};
pub use weights::{arc_service_weights, raw_service, ResidualDemand};

/// Weights of coverage (`alpha1`) and monitoring (`alpha2`) against travel
/// time in the insertion cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeuristicConfig {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl HeuristicConfig {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self, HeuristicError> {
        let cfg = Self { alpha1, alpha2 };
        cfg.check()?;
        Ok(cfg)
    }

    pub const fn save_time() -> Self {
        Self { alpha1: 0.0, alpha2: 0.0 }
    }

    pub const fn privilege_coverage() -> Self {
        Self { alpha1: 1.0, alpha2: 0.0 }
    }

    pub const fn privilege_monitoring() -> Self {
        Self { alpha1: 0.0, alpha2: 1.0 }
    }

    /// Preset by name: `save-time`, `coverage` or `monitoring`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "save-time" | "save_time" => Some(Self::save_time()),
            "coverage" | "privilege-coverage" | "privilege_coverage" => Some(Self::privilege_coverage()),
            "monitoring" | "privilege-monitoring" | "privilege_monitoring" => Some(Self::privilege_monitoring()),
            _ => None,
        }
    }

    pub fn check(&self) -> Result<(), HeuristicError> {
        let Self { alpha1, alpha2 } = *self;
        if !(alpha1.is_finite() && alpha2.is_finite()) || alpha1 < 0.0 || alpha2 < 0.0 || alpha1 + alpha2 > 1.0 + 1e-12
        {
            return Err(HeuristicError::InvalidConfig(format!(
                "weights must be non-negative with alpha1 + alpha2 <= 1, got ({alpha1}, {alpha2})"
            )));
        }
        Ok(())
    }
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self::save_time()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HeuristicError {
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<Violation>),
    #[error("invalid heuristic weights: {0}")]
    InvalidConfig(String),
    #[error("the heuristic needs exactly one depot, found {0}")]
    MultipleDepots(usize),
    #[error("delivery location {0} cannot be reached from the depot and back")]
    Unreachable(usize),
    #[error("delivery of payload {0} fits no tour, even a dedicated one")]
    DeliveryUnplaceable(usize),
    #[error("no UAV is free to fly the tour carrying payload {0}")]
    FleetExhausted(usize),
    #[error("tour {tour} needs {load} kg, above the payload capacity")]
    Capacity { tour: usize, load: f64 },
    #[error("tour {0} has no UAV assigned")]
    Unassigned(usize),
}

/// Tours with their UAVs and departures, and the expanded plan.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicSolution {
    pub tours: Vec<Tour>,
    pub plan: Plan,
    pub graph: RouteGraph,
}

pub fn insertion_solve(s: &Scenario, cfg: &HeuristicConfig) -> Result<HeuristicSolution, HeuristicError> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(HeuristicError::InvalidScenario(violations));
    }
    cfg.check()?;
    let graph = build_route_graph(s)?;
    let mut planner = Planner::new(s, &graph, *cfg);
    let mut tours = insertion::build_tours(&mut planner)?;
    schedule_tours(s, &graph, &mut tours)?;
    let plan = tours_to_plan(s, &graph, &tours)?;
    Ok(HeuristicSolution { tours, plan, graph })
}
