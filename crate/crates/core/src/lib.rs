//! Planning toolkit for multitask UAV fleets in post-disaster operations.
//!
//! The crate models a fleet that delivers payloads inside time windows
//! while providing network coverage, video monitoring and relaying to a
//! set of zones. It offers:
//!
//! * [`scenario`]: instance model, validation, file format and a seeded generator;
//! * [`evaluator`]: the feasibility checker and satisfaction objective;
//! * [`milp`]: a linear MILP formulation with CPLEX LP import/export;
//! * [`exact`]: an enumeration + simplex optimizer for desk-scale instances;
//! * [`heuristic`]: the multi-objective insertion heuristic for large ones.

pub mod evaluator;
pub mod exact;
pub mod experiments;
pub mod heuristic;
pub mod metrics;
pub mod milp;
pub mod plan;
pub mod scenario;
pub mod simplex;

pub use evaluator::{battery_trace, check_feasibility, satisfaction, SatisfactionReport, ViolationReport};
pub use plan::Plan;
pub use scenario::Scenario;

/// Absolute tolerance used for every real-valued constraint.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
