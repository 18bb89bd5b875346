//! End-to-end solve: free space, solver, uncrossing, verification.

use std::time::Instant;

use serde::Serialize;

use crate::dijkstra::{self, SolverOutput};
use crate::dp;
use crate::error::{Error, Result};
use crate::freespace::{compute_free_space_edges, FreeSpaceGraph};
use crate::instance::{Instance, Mode};
use crate::inverted::solve_inverted;
use crate::label::SolverStats;
use crate::oracle::{brute_force_with, OracleLimits};
use crate::scalar::Weight;
use crate::uncross::{uncross, Polygon, UncrossReport};
use crate::verify::{check_weak_simplicity, evaluate_solution, Solution, WeakSimplicityReport};
use crate::walk::Walk;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Dp,
    Dijkstra,
    Oracle,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(SolverKind::Dp),
            "dijkstra" => Ok(SolverKind::Dijkstra),
            "oracle" => Ok(SolverKind::Oracle),
            other => Err(Error::Schema(vec![format!("unknown solver {other:?}")])),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timing {
    pub free_space_ms: f64,
    pub solve_ms: f64,
    pub uncross_ms: f64,
    pub verify_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult<S> {
    /// Cost reported by the solver.
    pub cost: S,
    /// Walk produced by the solver, before uncrossing.
    pub raw_walk: Walk<S>,
    /// Final polygon: counterclockwise for enclosure, clockwise when inverted.
    /// `None` when infeasible.
    pub polygon: Option<Polygon<S>>,
    pub uncross: UncrossReport,
    pub solution: Option<Solution<S>>,
    pub verification: Option<WeakSimplicityReport>,
    pub stats: SolverStats,
    pub timing: Timing,
    pub fsg: FreeSpaceGraph<S>,
}

impl<S: Weight> SolveResult<S> {
    pub fn feasible(&self) -> bool {
        self.cost.is_finite() && self.solution.as_ref().is_none_or(|s| s.feasible)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs `solver` on `inst`; the inverted problem has a single solver and
/// ignores the `dp`/`dijkstra` choice. The oracle uses `oracle_edges` edges.
pub fn solve<S: Weight>(inst: &Instance<S>, solver: SolverKind, verify: bool, oracle_edges: usize) -> Result<SolveResult<S>> {
    let t = Instant::now();
    let fsg = compute_free_space_edges(inst);
    let mut timing = Timing { free_space_ms: ms(t), ..Default::default() };

    let t = Instant::now();
    let out: SolverOutput<S> = match (solver, inst.mode) {
        (SolverKind::Oracle, _) => {
            let limits = OracleLimits::default();
            let r = brute_force_with(inst, &fsg, oracle_edges, limits)?;
            SolverOutput { cost: r.best_cost, walk: r.best_walk, stats: SolverStats::default() }
        }
        (_, Mode::Invert) => solve_inverted(inst, &fsg)?,
        (SolverKind::Dp, Mode::Enclose) => dp::solve_dp(inst, &fsg)?,
        (SolverKind::Dijkstra, Mode::Enclose) => dijkstra::solve(inst, &fsg)?,
    };
    timing.solve_ms = ms(t);

    let mut result = SolveResult {
        cost: out.cost,
        raw_walk: out.walk,
        polygon: None,
        uncross: UncrossReport::default(),
        solution: None,
        verification: None,
        stats: out.stats,
        timing,
        fsg,
    };
    if !result.cost.is_finite() {
        return Ok(result);
    }

    let t = Instant::now();
    let polygon = if result.raw_walk.is_empty() {
        Polygon::new(Vec::new(), Vec::new())?
    } else {
        let (p, rep) = uncross(&Polygon::from_walk(&result.raw_walk, &result.fsg)?)?;
        result.uncross = rep;
        if inst.mode == Mode::Invert {
            p.reversed()
        } else {
            p
        }
    };
    result.timing.uncross_ms = ms(t);

    let t = Instant::now();
    result.solution = Some(evaluate_solution(inst, &polygon)?);
    if verify {
        result.verification = Some(check_weak_simplicity(&polygon)?);
    }
    result.timing.verify_ms = ms(t);
    result.polygon = Some(polygon);
    Ok(result)
}
