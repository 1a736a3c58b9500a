//! Engine runs and sweeps, summarized with the normalized quantities used
//! for plots: performance over total demand, payload over C, energy over E.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::evaluator::check_feasibility;
use crate::exact::{solve_exact, EnumerationLimits, ExactError};
use crate::heuristic::{insertion_solve, HeuristicConfig, HeuristicError, Tour};
use crate::metrics::{plan_metrics, PlanMetrics};
use crate::plan::Plan;
use crate::scenario::{MissionKind, Scenario, CAMERA, RADIO};
use crate::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Heuristic(HeuristicConfig),
    Exact(EnumerationLimits),
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Heuristic(_) => "heuristic",
            Engine::Exact(_) => "exact",
        }
    }
}

/// Whether every UAV may carry every payload, or the fleet is split into
/// radio-only, camera-only and fully equipped thirds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquipmentMode {
    Flexible,
    Fixed,
}

impl fmt::Display for EquipmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquipmentMode::Flexible => "flexible",
            EquipmentMode::Fixed => "fixed",
        })
    }
}

impl FromStr for EquipmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flexible" => Ok(EquipmentMode::Flexible),
            "fixed" => Ok(EquipmentMode::Fixed),
            other => Err(format!("unknown equipment mode `{other}` (expected flexible or fixed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub label: String,
    pub engine: Engine,
    pub equipment: EquipmentMode,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("fixed equipment needs payloads named `{CAMERA}` and `{RADIO}`")]
    MissingEquipment,
    #[error("run `{run}` produced an infeasible plan: {tags}")]
    Infeasible { run: String, tags: String },
}

/// A solved run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub plan: Plan,
    pub metrics: PlanMetrics,
    /// Heuristic tours, when the heuristic ran.
    pub tours: Option<Vec<Tour>>,
    /// Whether the exact search completed, when it ran.
    pub proven_optimal: Option<bool>,
}

/// `s` resized to `uavs` (when given) and, in fixed mode, with the
/// equipment split imposed as forbidden payloads.
pub fn prepare(s: &Scenario, uavs: Option<usize>, equipment: EquipmentMode) -> Result<Scenario, ExperimentError> {
    let mut out = s.clone();
    if let Some(n) = uavs {
        out = out.with_uav_count(n);
    }
    if equipment == EquipmentMode::Fixed {
        let (Some(radio), Some(camera)) = (out.payload_by_name(RADIO), out.payload_by_name(CAMERA)) else {
            return Err(ExperimentError::MissingEquipment);
        };
        out = out.with_fixed_equipment(radio, camera);
    }
    Ok(out)
}

/// Solve `s` with `engine` and check the plan before reporting it.
pub fn run_engine(s: &Scenario, engine: &Engine, label: &str) -> Result<Outcome, ExperimentError> {
    let (plan, tours, proven_optimal) = match engine {
        Engine::Heuristic(cfg) => {
            let sol = insertion_solve(s, cfg)?;
            (sol.plan, Some(sol.tours), None)
        }
        Engine::Exact(limits) => {
            let r = solve_exact(s, limits)?;
            (r.plan, None, Some(r.proven_optimal))
        }
    };
    let report = check_feasibility(s, &plan, DEFAULT_TOLERANCE).expect("engines return well-shaped plans");
    if !report.is_feasible() {
        let tags = report.tags().iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ");
        return Err(ExperimentError::Infeasible { run: label.to_string(), tags });
    }
    let metrics = plan_metrics(s, &plan);
    Ok(Outcome { plan, metrics, tours, proven_optimal })
}

/// One CSV line: a run at one fleet size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub run: String,
    pub engine: &'static str,
    pub equipment: EquipmentMode,
    pub uavs: usize,
    pub objective: f64,
    /// Served coverage work over total coverage demand.
    pub coverage: Option<f64>,
    pub monitoring: Option<f64>,
    pub coverage_sigma_bar: Option<f64>,
    pub monitoring_sigma_bar: Option<f64>,
    /// Mean airborne payload over C, then its split.
    pub payload: f64,
    pub camera: f64,
    pub radio: f64,
    pub delivery: f64,
    /// Energy over E.
    pub energy: f64,
}

impl MetricsRow {
    pub fn new(s: &Scenario, run: &RunSpec, m: &PlanMetrics) -> Self {
        let c = s.uav.payload_capacity;
        Self {
            run: run.label.clone(),
            engine: run.engine.name(),
            equipment: run.equipment,
            uavs: s.num_uavs(),
            objective: m.objective,
            coverage: m.served_fraction_of(s, MissionKind::Coverage),
            monitoring: m.served_fraction_of(s, MissionKind::Monitoring),
            coverage_sigma_bar: m.sigma_bar_of(s, MissionKind::Coverage),
            monitoring_sigma_bar: m.sigma_bar_of(s, MissionKind::Monitoring),
            payload: m.mean_payload_kg / c,
            camera: m.mean_camera_kg / c,
            radio: m.mean_radio_kg / c,
            delivery: m.mean_delivery_kg / c,
            energy: m.energy_charges,
        }
    }
}

/// Every run at every fleet size (the scenario's own when `counts` is
/// empty), in run-major order. Runs execute concurrently; the first
/// failure in that order is returned.
pub fn sweep(s: &Scenario, runs: &[RunSpec], counts: &[usize]) -> Result<Vec<MetricsRow>, ExperimentError> {
    let sizes: Vec<Option<usize>> =
        if counts.is_empty() { vec![None] } else { counts.iter().map(|&n| Some(n)).collect() };
    let jobs: Vec<(&RunSpec, Option<usize>)> = runs.iter().flat_map(|r| sizes.iter().map(move |&n| (r, n))).collect();
    let results: Vec<Result<MetricsRow, ExperimentError>> = jobs
        .par_iter()
        .map(|&(run, n)| {
            let scenario = prepare(s, n, run.equipment)?;
            let out = run_engine(&scenario, &run.engine, &run.label)?;
            Ok(MetricsRow::new(&scenario, run, &out.metrics))
        })
        .collect();
    results.into_iter().collect()
}

pub fn rows_to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_HEADER).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is UTF-8")
}

const CSV_HEADER: [&str; 14] = [
    "run",
    "engine",
    "equipment",
    "uavs",
    "objective",
    "coverage",
    "monitoring",
    "coverage_sigma_bar",
    "monitoring_sigma_bar",
    "payload",
    "camera",
    "radio",
    "delivery",
    "energy",
];
