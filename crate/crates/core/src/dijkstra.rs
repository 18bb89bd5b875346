//! Label-setting solver for the enclosure problem, without an edge budget.

use crate::bound::HullBound;
use crate::error::Result;
use crate::freespace::{assert_superiority, FreeSpaceGraph};
use crate::instance::Instance;
use crate::label::{Core, NoExtension, Outcome};
pub use crate::label::SolverStats;
use crate::scalar::Weight;
use crate::walk::{extract_closed, Walk};

#[derive(Clone, Debug)]
pub struct SolverOutput<S> {
    pub cost: S,
    pub walk: Walk<S>,
    pub stats: SolverStats,
}

/// Minimum cost of a closed walk on free-space edges whose region contains all
/// required reference points, plus winding-weighted penalties. Infinite cost
/// and an empty walk if infeasible.
pub fn solve<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>) -> Result<SolverOutput<S>> {
    assert_superiority(fsg)?;
    let mut core = Core::new(inst, fsg)?;
    if core.k == 0 {
        let walk = if fsg.n() == 0 { Walk::empty() } else { Walk::point(0) };
        return Ok(SolverOutput {
            cost: S::zero(),
            walk,
            stats: core.stats,
        });
    }
    let Some(mut bound) = HullBound::new(fsg, &core.tri.refs().required) else {
        return finish(core, fsg);
    };
    // the bound only skips labels that cannot lead below the threshold, so a
    // walk found at or under it is optimal; otherwise raise it and rerun
    let mut threshold = bound.lower_bound() * THRESHOLD_GROWTH;
    let mut rounds = 0;
    loop {
        rounds += 1;
        bound.threshold = threshold;
        core.bound = Some(bound);
        let outcome = core.run(&mut NoExtension, true);
        let pruned = core.stats.pruned;
        bound = core.bound.take().expect("bound set above");
        let next = match outcome {
            Outcome::Full(p) => {
                let cost = core.c_value(p, core.full).to_f64_lossy();
                if cost <= threshold {
                    core.stats.rounds = rounds;
                    return finish_at(core, fsg, p);
                }
                cost
            }
            Outcome::Exceeded(g) => g.max(core.min_pruned),
            _ if pruned == 0 => {
                core.stats.rounds = rounds;
                return finish(core, fsg);
            }
            _ => core.min_pruned,
        };
        log::debug!("round {rounds}: threshold {threshold} too low, {pruned} labels pruned");
        threshold = (threshold * THRESHOLD_GROWTH).max(next);
        core = Core::new(inst, fsg)?;
    }
}

/// Factor between successive thresholds of the bounded search.
const THRESHOLD_GROWTH: f64 = 1.25;

fn finish_at<S: Weight>(core: Core<'_, S>, fsg: &FreeSpaceGraph<S>, p: usize) -> Result<SolverOutput<S>> {
    let full = core.full;
    let walk = extract_closed(&core, (p, full), fsg)?;
    Ok(SolverOutput {
        cost: core.c_value(p, full),
        walk,
        stats: core.stats,
    })
}

/// Runs without a bound to the first full label, or reports infeasibility.
fn finish<S: Weight>(mut core: Core<'_, S>, fsg: &FreeSpaceGraph<S>) -> Result<SolverOutput<S>> {
    let rounds = core.stats.rounds;
    let outcome = if core.queue_is_empty() { Outcome::Exhausted } else { core.run(&mut NoExtension, true) };
    core.stats.rounds = rounds.max(1);
    match outcome {
        Outcome::Full(p) => finish_at(core, fsg, p),
        _ => Ok(SolverOutput {
            cost: S::infinity(),
            walk: Walk::empty(),
            stats: core.stats,
        }),
    }
}

/// Runs the label-setting loop to exhaustion and checks that every finalized
/// label equals the minimum of its equation over the final values, within `tol`
/// relative. Returns the number of labels checked.
pub fn check_fixed_point<S: Weight>(
    inst: &Instance<S>,
    fsg: &FreeSpaceGraph<S>,
    tol: f64,
) -> Result<usize> {
    use crate::error::Error;
    use crate::scalar::approx_eq;
    let mut core = Core::new(inst, fsg)?;
    core.run(&mut NoExtension, false);
    let n = fsg.n();
    let masks = 1u32 << core.k;
    let mut checked = 0;
    for p in 0..n {
        for mask in 0..masks {
            let v = core.c_value(p, mask);
            let rhs = core.rhs_c(p, mask);
            if !approx_eq(v, rhs, tol) {
                return Err(Error::Internal(format!("C({p}, {mask:#b}) = {v} but equation gives {rhs}")));
            }
            checked += 1;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for mask in 0..masks {
                let v = core.m_value(a, b, mask);
                let rhs = core.rhs_m(a, b, mask);
                if !approx_eq(v, rhs, tol) {
                    return Err(Error::Internal(format!(
                        "M({a}, {b}, {mask:#b}) = {v} but equation gives {rhs}"
                    )));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
