use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;
use uavplan::evaluator::ViolationEntry;
use uavplan::exact::{EnumerationLimits, ExactError};
use uavplan::experiments::{self, Engine, ExperimentError, Outcome, RunSpec};
use uavplan::heuristic::{build_route_graph, HeuristicConfig, HeuristicError, Tour};
use uavplan::metrics::{plan_metrics, PlanMetrics};
use uavplan::milp::{build_milp, export_lp, import_solution, parse_solution};
use uavplan::plan::{parse_plan, serialize_plan};
use uavplan::scenario::{
    generate_synthetic, load_scenario, serialize_scenario, validate, Dims, GeneratorOptions, Scenario,
};
use uavplan::{check_feasibility, satisfaction, DEFAULT_TOLERANCE};

use crate::output::{pretty_json, read_text, sibling, CmdResult, Failure, RunManifest};
use crate::{Cli, Command, CompareArgs, EngineKind, ExactArgs, GenerateArgs, SizePreset, SolveArgs, WeightArgs};

struct Globals {
    seed: Option<u64>,
    out: Option<PathBuf>,
    json: bool,
}

pub fn run(cli: Cli) -> CmdResult {
    let g = Globals { seed: cli.seed, out: cli.out, json: cli.json };
    match cli.command {
        Command::Generate(a) => generate(&g, &a),
        Command::Validate { scenario } => validate_cmd(&g, &scenario),
        Command::Solve(a) => solve(&g, &a),
        Command::ExportLp { scenario } => export(&g, &scenario),
        Command::ImportSolution { scenario, solution } => import(&g, &scenario, &solution),
        Command::Evaluate { scenario, plan } => evaluate(&g, &scenario, &plan),
        Command::Compare(a) => compare(&g, &a),
    }
}

fn heuristic_failure(e: HeuristicError) -> Failure {
    match e {
        HeuristicError::DeliveryUnplaceable(_) | HeuristicError::FleetExhausted(_) => Failure::Limit(e.to_string()),
        HeuristicError::Capacity { .. } | HeuristicError::Unassigned(_) => Failure::Internal(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn exact_failure(e: ExactError) -> Failure {
    match e {
        ExactError::TooLarge { .. } | ExactError::TooManyPayloads { .. } | ExactError::LimitReached => {
            Failure::Limit(e.to_string())
        }
        ExactError::Lp(_) => Failure::Internal(e.to_string()),
        ExactError::InvalidScenario(_) | ExactError::Infeasible => Failure::Input(e.to_string()),
    }
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Heuristic(h) => heuristic_failure(h),
        ExperimentError::Exact(x) => exact_failure(x),
        ExperimentError::MissingEquipment => Failure::Input(e.to_string()),
        ExperimentError::Infeasible { .. } => Failure::Internal(e.to_string()),
    }
}

fn load(path: &Path) -> CmdResult<Scenario> {
    load_scenario(&read_text(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Write `files` (the first is the main output) with a manifest, or print
/// the main output when no `--out` was given.
fn emit(g: &Globals, manifest: RunManifest, main: String, siblings: &[(&str, String)], started: Instant) -> CmdResult {
    match &g.out {
        Some(path) => {
            let mut files = vec![(path.clone(), main)];
            files.extend(siblings.iter().map(|(suffix, text)| (sibling(path, suffix), text.clone())));
            manifest.write_outputs(&files, started)
        }
        None => {
            if !g.json {
                print!("{main}");
            }
            Ok(())
        }
    }
}

fn generate(g: &Globals, a: &GenerateArgs) -> CmdResult {
    let started = Instant::now();
    let seed = g.seed.unwrap_or(0);
    let mut dims = match a.preset {
        SizePreset::SfSmall => Dims::sf_small(),
        SizePreset::Small => Dims::small(2),
        SizePreset::Tiny => Dims { locations: 3, zones: 2, uavs: 2, deliveries: 1, epochs: 4 },
    };
    dims.locations = a.locations.unwrap_or(dims.locations);
    dims.zones = a.zones.unwrap_or(dims.zones);
    dims.uavs = a.uavs.unwrap_or(dims.uavs);
    dims.deliveries = a.deliveries.unwrap_or(dims.deliveries);
    dims.epochs = a.epochs.unwrap_or(dims.epochs);
    let opts = GeneratorOptions { horizon: a.horizon, unique_targets: a.unique_targets, ..GeneratorOptions::default() };
    let s = generate_synthetic(seed, dims, &opts).map_err(|e| Failure::Input(e.to_string()))?;
    let violations = validate(&s);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure::Input(format!("generated scenario is invalid:\n{}", lines.join("\n"))));
    }
    let config = json!({
        "preset": format!("{:?}", a.preset),
        "locations": dims.locations, "zones": dims.zones, "uavs": dims.uavs,
        "deliveries": dims.deliveries, "epochs": dims.epochs,
        "horizon": a.horizon, "unique_targets": a.unique_targets,
    });
    if g.json {
        print!("{}", pretty_json(&config));
    }
    let manifest = RunManifest::new("generate", None, config, Some(seed));
    emit(g, manifest, serialize_scenario(&s), &[], started)
}

fn validate_cmd(g: &Globals, path: &Path) -> CmdResult {
    let s = load(path)?;
    let summary = json!({
        "valid": true,
        "locations": s.num_locations(), "zones": s.zones.len(), "uavs": s.num_uavs(),
        "payloads": s.payloads.len(), "deliveries": s.deliveries().count(), "epochs": s.epochs,
    });
    if g.json {
        print!("{}", pretty_json(&summary));
    } else {
        println!(
            "{}: valid ({} locations, {} zones, {} UAVs, {} deliveries, {} epochs)",
            path.display(),
            s.num_locations(),
            s.zones.len(),
            s.num_uavs(),
            s.deliveries().count(),
            s.epochs
        );
    }
    Ok(())
}

fn weights(w: &WeightArgs) -> CmdResult<HeuristicConfig> {
    if let Some(name) = &w.preset {
        return HeuristicConfig::preset(name)
            .ok_or_else(|| Failure::Input(format!("unknown preset `{name}` (save-time, coverage, monitoring)")));
    }
    HeuristicConfig::new(w.alpha1.unwrap_or(0.0), w.alpha2.unwrap_or(0.0)).map_err(heuristic_failure)
}

fn limits(a: &ExactArgs) -> CmdResult<EnumerationLimits> {
    let time_budget = match a.time_limit {
        None => None,
        Some(t) if t.is_finite() && t > 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(Failure::Input(format!("time limit must be positive, got {t}"))),
    };
    Ok(EnumerationLimits {
        max_assignments: a.max_assignments,
        time_budget,
        parallel: a.parallel,
        ..EnumerationLimits::default()
    })
}

fn engine_config(engine: &Engine) -> serde_json::Value {
    match engine {
        Engine::Heuristic(cfg) => json!({ "engine": "heuristic", "alpha1": cfg.alpha1, "alpha2": cfg.alpha2 }),
        Engine::Exact(l) => json!({
            "engine": "exact",
            "max_assignments": l.max_assignments,
            "time_limit_s": l.time_budget.map(|d| d.as_secs_f64()),
            "parallel": l.parallel,
        }),
    }
}

/// Mission name to value, skipping missions without a value.
fn by_mission(s: &Scenario, values: &[Option<f64>]) -> BTreeMap<String, f64> {
    s.missions.iter().zip(values).filter_map(|(m, v)| v.map(|v| (m.name.clone(), v))).collect()
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    engine: serde_json::Value,
    equipment: String,
    uavs: usize,
    feasible: bool,
    objective: f64,
    sigma_bar: BTreeMap<String, f64>,
    served_fraction: BTreeMap<String, f64>,
    energy_wh: f64,
    /// Energy in battery charges (over E).
    energy_charges: f64,
    mean_payload_kg: f64,
    /// Mean payload over C.
    mean_payload: f64,
    airborne_epochs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    proven_optimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tours: Option<usize>,
}

impl SolveSummary {
    fn new(s: &Scenario, engine: &Engine, equipment: String, out: &Outcome) -> Self {
        let m: &PlanMetrics = &out.metrics;
        Self {
            engine: engine_config(engine),
            equipment,
            uavs: s.num_uavs(),
            feasible: true,
            objective: m.objective,
            sigma_bar: by_mission(s, &m.sigma_bar),
            served_fraction: by_mission(s, &m.served_fraction),
            energy_wh: m.energy_wh,
            energy_charges: m.energy_charges,
            mean_payload_kg: m.mean_payload_kg,
            mean_payload: m.mean_payload_normalized(s),
            airborne_epochs: m.airborne_epochs,
            proven_optimal: out.proven_optimal,
            tours: out.tours.as_ref().map(Vec::len),
        }
    }
}

#[derive(Debug, Serialize)]
struct TourRecord<'a> {
    #[serde(flatten)]
    tour: &'a Tour,
    /// Location flown through at each leg, endpoints included.
    routes: Vec<Vec<usize>>,
    path: Vec<usize>,
    epochs: usize,
}

fn tours_json(s: &Scenario, tours: &[Tour]) -> CmdResult<String> {
    let graph = build_route_graph(s).map_err(heuristic_failure)?;
    let records: Vec<TourRecord> = tours
        .iter()
        .map(|t| TourRecord {
            tour: t,
            routes: t
                .legs
                .iter()
                .enumerate()
                .map(|(i, &r)| graph.routes(t.stops[i], t.stops[i + 1])[r].path.clone())
                .collect(),
            path: t.path(&graph),
            epochs: t.epochs(&graph),
        })
        .collect();
    Ok(pretty_json(&records))
}

fn print_summary(g: &Globals, summary: &SolveSummary) {
    if g.json {
        print!("{}", pretty_json(summary));
    } else if g.out.is_some() {
        println!(
            "objective {:.6}, energy {:.3} charges, mean payload {:.3} kg",
            summary.objective, summary.energy_charges, summary.mean_payload_kg
        );
    }
}

fn solve(g: &Globals, a: &SolveArgs) -> CmdResult {
    let started = Instant::now();
    let base = load(&a.scenario)?;
    let engine = match a.engine {
        EngineKind::Heuristic => Engine::Heuristic(weights(&a.weights)?),
        EngineKind::Exact => Engine::Exact(limits(&a.exact)?),
    };
    let s = experiments::prepare(&base, a.uavs, a.equipment).map_err(experiment_failure)?;
    let out = experiments::run_engine(&s, &engine, "solve").map_err(experiment_failure)?;
    let summary = SolveSummary::new(&s, &engine, a.equipment.to_string(), &out);
    print_summary(g, &summary);

    let mut config = engine_config(&engine);
    config["equipment"] = json!(a.equipment.to_string());
    config["uavs"] = json!(a.uavs);
    let manifest = RunManifest::new("solve", Some(&a.scenario), config, g.seed);
    let mut siblings = vec![(".summary.json", pretty_json(&summary))];
    if let Some(tours) = &out.tours {
        siblings.push((".tours.json", tours_json(&s, tours)?));
    }
    emit(g, manifest, serialize_plan(&out.plan), &siblings, started)
}

fn export(g: &Globals, path: &Path) -> CmdResult {
    let started = Instant::now();
    let s = load(path)?;
    let m = build_milp(&s).map_err(|e| Failure::Input(e.to_string()))?;
    if g.json {
        let summary = json!({
            "variables": m.variables.len(), "binaries": m.num_binaries(), "constraints": m.constraints.len(),
        });
        print!("{}", pretty_json(&summary));
    }
    let manifest = RunManifest::new("export-lp", Some(path), json!({}), g.seed);
    emit(g, manifest, export_lp(&m), &[], started)
}

fn import(g: &Globals, path: &Path, solution: &Path) -> CmdResult {
    let started = Instant::now();
    let s = load(path)?;
    let m = build_milp(&s).map_err(|e| Failure::Input(e.to_string()))?;
    let input = |e: uavplan::milp::MilpError| Failure::Input(format!("{}: {e}", solution.display()));
    let sol = parse_solution(&read_text(solution)?).map_err(input)?;
    let plan = import_solution(&s, &m, &sol).map_err(input)?;
    let report = check_feasibility(&s, &plan, DEFAULT_TOLERANCE).map_err(|e| Failure::Input(e.to_string()))?;
    if !report.is_feasible() {
        return Err(Failure::Input(format!("imported plan is infeasible: {}", tag_list(&report.entries))));
    }
    let objective = satisfaction(&s, &plan).objective;
    if g.json {
        print!("{}", pretty_json(&json!({ "feasible": true, "objective": objective, "gamma": sol.get("Gamma") })));
    } else if g.out.is_some() {
        println!("imported plan is feasible, objective {objective:.6}");
    }
    let manifest =
        RunManifest::new("import-solution", Some(path), json!({ "solution": solution.display().to_string() }), g.seed);
    emit(g, manifest, serialize_plan(&plan), &[], started)
}

fn tag_list(entries: &[ViolationEntry]) -> String {
    let mut tags: Vec<&str> = entries.iter().map(|e| e.tag.as_str()).collect();
    tags.dedup();
    tags.join(" ")
}

fn evaluate(g: &Globals, path: &Path, plan_path: &Path) -> CmdResult {
    let started = Instant::now();
    let s = load(path)?;
    let plan =
        parse_plan(&s, &read_text(plan_path)?).map_err(|e| Failure::Input(format!("{}: {e}", plan_path.display())))?;
    let report = check_feasibility(&s, &plan, DEFAULT_TOLERANCE).map_err(|e| Failure::Input(e.to_string()))?;
    let m = plan_metrics(&s, &plan);
    let doc = json!({
        "feasible": report.is_feasible(),
        "violations": report.entries,
        "objective": m.objective,
        "sigma_bar": by_mission(&s, &m.sigma_bar),
        "served_fraction": by_mission(&s, &m.served_fraction),
        "energy_wh": m.energy_wh,
        "energy_charges": m.energy_charges,
        "mean_payload_kg": m.mean_payload_kg,
    });
    let text = pretty_json(&doc);
    if g.json {
        print!("{text}");
    } else {
        if report.is_feasible() {
            println!("feasible, objective {:.6}", m.objective);
        } else {
            print!("{}", report.to_csv());
        }
    }
    if let Some(out) = &g.out {
        let config = json!({ "plan": plan_path.display().to_string() });
        RunManifest::new("evaluate", Some(path), config, g.seed).write_outputs(&[(out.clone(), text)], started)?;
    }
    if report.is_feasible() {
        Ok(())
    } else {
        Err(Failure::Input(format!("plan is infeasible: {}", tag_list(&report.entries))))
    }
}

fn parse_run(text: &str, exact: &EnumerationLimits) -> CmdResult<Engine> {
    let (kind, arg) = text.split_once(':').map_or((text, None), |(k, a)| (k, Some(a)));
    match (kind, arg) {
        ("exact", None) => Ok(Engine::Exact(exact.clone())),
        ("heuristic", None) => Ok(Engine::Heuristic(HeuristicConfig::save_time())),
        ("heuristic", Some(a)) => {
            if let Some(cfg) = HeuristicConfig::preset(a) {
                return Ok(Engine::Heuristic(cfg));
            }
            let bad = || Failure::Input(format!("bad run `{text}`: expected heuristic:PRESET or heuristic:A1,A2"));
            let (a1, a2) = a.split_once(',').ok_or_else(bad)?;
            let a1: f64 = a1.trim().parse().map_err(|_| bad())?;
            let a2: f64 = a2.trim().parse().map_err(|_| bad())?;
            Ok(Engine::Heuristic(HeuristicConfig::new(a1, a2).map_err(heuristic_failure)?))
        }
        _ => Err(Failure::Input(format!("bad run `{text}`: expected exact or heuristic[:...]"))),
    }
}

fn compare(g: &Globals, a: &CompareArgs) -> CmdResult {
    let started = Instant::now();
    let s = load(&a.scenario)?;
    let exact = limits(&a.exact)?;
    let mut specs = Vec::new();
    for run in &a.runs {
        let engine = parse_run(run, &exact)?;
        for &equipment in &a.equipment {
            specs.push(RunSpec { label: run.clone(), engine: engine.clone(), equipment });
        }
    }
    let rows = experiments::sweep(&s, &specs, &a.uavs).map_err(experiment_failure)?;
    let csv = experiments::rows_to_csv(&rows);
    if g.json {
        print!("{}", pretty_json(&rows));
    }
    let config = json!({
        "runs": a.runs,
        "uavs": a.uavs,
        "equipment": a.equipment.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "exact": engine_config(&Engine::Exact(exact)),
    });
    let manifest = RunManifest::new("compare", Some(&a.scenario), config, g.seed);
    emit(g, manifest, csv, &[], started)
}
