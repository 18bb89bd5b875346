//! Command-line front end: load or generate an instance, solve it, verify the
//! result and write JSON and SVG output.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use enclose_core::instance::load_instance;
use enclose_core::oracle::{brute_force_with, random_instance, GeneratorSpec, OracleLimits, PenaltyMix, Shape};
use enclose_core::render::render_svg;
use enclose_core::scalar::approx_eq;
use enclose_core::{Error, InstanceF64, Mode, PolygonF64, SolveResultF64, SolverKind};
use serde_json::{json, Value};

/// Relative tolerance for comparing solver and oracle costs.
pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "enclose", version, about = "Minimum-cost enclosing polygons with penalties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance with one of the exact solvers.
    Solve(RunConfig),
    /// Solve by exhaustive enumeration of short closed walks.
    Oracle(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Enclose,
    Invert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Dp,
    Dijkstra,
    Oracle,
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Instance JSON file.
    #[arg(long, required_unless_present = "gen", conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Overrides the mode given in the instance.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "dijkstra")]
    pub solver: SolverArg,
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Run the weak-simplicity checks on the result.
    #[arg(long)]
    pub verify: bool,
    /// Cross-check the cost against the brute-force oracle.
    #[arg(long)]
    pub oracle_check: bool,
    /// Edge budget of the oracle.
    #[arg(long, default_value_t = 10)]
    pub max_edges: usize,
    /// Random instance instead of `--input`, e.g. `objects=4,required=2,shape=squares`.
    #[arg(long)]
    pub gen: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Include the free-space graph in the output.
    #[arg(long)]
    pub debug_freespace: bool,
}

/// Parses a comma separated `key=value` generator description.
pub fn parse_generator(s: &str) -> Result<GeneratorSpec, Error> {
    let mut spec = GeneratorSpec::default();
    let bad = |msg: String| Error::Schema(vec![msg]);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("generator entry {part:?} is not key=value")))?;
        let int = |v: &str| v.parse::<i64>().map_err(|_| bad(format!("{k}: {v:?} is not an integer")));
        match k {
            "objects" => spec.objects = int(v)? as usize,
            "required" => spec.required = int(v)? as usize,
            "grid" => spec.grid = int(v)?,
            "size" => spec.max_size = int(v)?,
            "max_penalty" => {
                spec.max_penalty = v.parse().map_err(|_| bad(format!("max_penalty: {v:?} is not a number")))?
            }
            "shape" => {
                spec.shape = match v {
                    "squares" => Shape::Squares,
                    "triangles" => Shape::Triangles,
                    "mixed" => Shape::Mixed,
                    _ => return Err(bad(format!("unknown shape {v:?}"))),
                }
            }
            "penalties" => {
                spec.penalties = match v {
                    "finite" => PenaltyMix::Finite,
                    "mixed" => PenaltyMix::Mixed,
                    "zero" => PenaltyMix::Zero,
                    _ => return Err(bad(format!("unknown penalty mix {v:?}"))),
                }
            }
            _ => return Err(bad(format!("unknown generator key {k:?}"))),
        }
    }
    Ok(spec)
}

/// Cost as a JSON value: `"inf"` or a number rounded to 12 significant digits.
pub fn cost_json(c: f64) -> Value {
    if c.is_infinite() {
        return json!("inf");
    }
    let rounded: f64 = format!("{c:.11e}").parse().unwrap_or(c);
    json!(rounded)
}

fn load(cfg: &RunConfig) -> Result<InstanceF64, Error> {
    let mut inst = match (&cfg.input, &cfg.gen) {
        (Some(path), _) => load_instance::<f64>(&fs::read(path)?)?,
        (None, Some(g)) => random_instance(cfg.seed, &parse_generator(g)?)?,
        (None, None) => return Err(Error::Schema(vec!["either --input or --gen is required".into()])),
    };
    if let Some(m) = cfg.mode {
        inst.mode = match m {
            ModeArg::Enclose => Mode::Enclose,
            ModeArg::Invert => Mode::Invert,
        };
    }
    Ok(inst)
}

fn polygon_json(inst: &InstanceF64, poly: &PolygonF64) -> (Value, Value) {
    let f = inst.refinement as f64;
    let walk: Vec<Value> = poly
        .vertices
        .iter()
        .map(|q| {
            let (x, y) = q.to_f64();
            json!([x / f, y / f])
        })
        .collect();
    let internal: Vec<Value> = poly
        .vertices
        .iter()
        .map(|q| json!([q.x.to_string(), q.y.to_string()]))
        .collect();
    (Value::Array(walk), Value::Array(internal))
}

fn result_json(inst: &InstanceF64, r: &SolveResultF64, solver: SolverKind, debug_freespace: bool) -> Value {
    let (walk, internal) = r
        .polygon
        .as_ref()
        .map(|p| polygon_json(inst, p))
        .unwrap_or_else(|| (json!([]), json!([])));
    let solution = r.solution.as_ref();
    let mut out = json!({
        "solver": format!("{solver:?}").to_lowercase(),
        "mode": inst.mode,
        "cost": cost_json(r.cost),
        "weight": solution.map_or(Value::Null, |s| cost_json(s.weight)),
        "penalty": solution.map_or(Value::Null, |s| cost_json(s.penalty)),
        "feasible": r.feasible(),
        "walk": walk,
        "walk_internal": internal,
        "internal_scale": inst.refinement,
        "scale": inst.scale,
        "enclosed_optional": solution.map_or(Vec::new(), |s| s.enclosed_optional.clone()),
        "verification": r.verification,
        "uncross": r.uncross,
        "stats": r.stats,
        "timing": r.timing,
        "n": r.fsg.n(),
        "k": inst.k(),
    });
    if debug_freespace {
        out["free_space"] = r.fsg.to_json(inst);
    }
    out
}

fn oracle_check(inst: &InstanceF64, r: &SolveResultF64, max_edges: usize) -> Result<Value, Error> {
    let o = match brute_force_with(inst, &r.fsg, max_edges, OracleLimits::default()) {
        Ok(o) => o,
        Err(Error::SearchSpaceTooLarge(msg)) => return Ok(json!({"skipped": msg})),
        Err(e) => return Err(e),
    };
    let agrees = approx_eq(o.best_cost, r.cost, COST_TOLERANCE);
    if o.best_cost < r.cost && !agrees {
        return Err(Error::Internal(format!(
            "oracle found cost {} below solver cost {}",
            o.best_cost, r.cost
        )));
    }
    Ok(json!({
        "cost": cost_json(o.best_cost),
        "exhausted": o.exhausted,
        "walks_examined": o.walks_examined,
        "agrees": agrees,
    }))
}

fn execute(cfg: &RunConfig, oracle: bool) -> Result<i32, Error> {
    let inst = load(cfg)?;
    let solver = match (oracle, cfg.solver) {
        (true, _) | (_, SolverArg::Oracle) => SolverKind::Oracle,
        (false, SolverArg::Dp) => SolverKind::Dp,
        (false, SolverArg::Dijkstra) => SolverKind::Dijkstra,
    };
    log::info!("solving n={} k={} with {solver:?}", inst.n(), inst.k());
    let r = enclose_core::solve(&inst, solver, cfg.verify, cfg.max_edges)?;
    let mut out = result_json(&inst, &r, solver, cfg.debug_freespace);
    if cfg.oracle_check {
        out["oracle_check"] = oracle_check(&inst, &r, cfg.max_edges)?;
    }
    let text = serde_json::to_string_pretty(&out).map_err(|e| Error::Internal(e.to_string()))?;
    match &cfg.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    if let Some(path) = &cfg.svg {
        fs::write(path, render_svg(&inst, r.polygon.as_ref()))?;
    }
    if let Some(v) = &r.verification {
        if !v.weakly_simple {
            return Err(Error::Internal(format!("result failed weak-simplicity checks: {v:?}")));
        }
    }
    Ok(if r.feasible() { 0 } else { 2 })
}

/// Runs a parsed command: 0 when a feasible solution was found, 2 when the
/// instance is infeasible, 1 on any error.
pub fn run(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Solve(cfg) => execute(cfg, false),
        Command::Oracle(cfg) => execute(cfg, true),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
