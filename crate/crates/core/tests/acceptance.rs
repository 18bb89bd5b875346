//! Acceptance suite. Every criterion writes one PASS/FAIL line to stderr
//! directly (not through the test harness capture) and then asserts.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use enclose_core::dijkstra;
use enclose_core::dp::solve_dp;
use enclose_core::freespace::compute_free_space_edges;
use enclose_core::geometry::{orient, Point, QPoint};
use enclose_core::instance::load_instance;
use enclose_core::inverted::solve_inverted;
use enclose_core::oracle::{brute_force_with, random_instance, GeneratorSpec, OracleLimits, PenaltyMix, Shape};
use enclose_core::scalar::approx_eq;
use enclose_core::uncross::uncross;
use enclose_core::verify::{check_weak_simplicity, evaluate_solution};
use enclose_core::{solve, Instance, Mode, Polygon, SolveResult, SolverKind};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance for cost comparisons.
const COST_TOL: f64 = 1e-9;
const C1_INSTANCES: usize = 200;
const C1_BUDGET: Duration = Duration::from_secs(300);
const C2_INSTANCES: usize = 50;
const C2_MAX_EDGES: usize = 10;
/// Relative distance from the hull perimeter.
const C4_TOL: f64 = 1e-3;
const C6_RANDOM: usize = 30;
const C7_WALKS: usize = 100;
const C7_MIN_SAMPLES: usize = 100;
const C8_N: usize = 200;
const C8_K: usize = 10;
const C8_BUDGET: Duration = Duration::from_secs(600);
/// Logged, not asserted.
const C8_DOUBLING_RATIO: f64 = 10.0;

/// Timed criteria must not share the CPU with each other.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{verdict} criterion {criterion} ({name}): {detail}");
}

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Small random instances: at most 6 objects, 24 vertices and 4 required.
fn small_instances(count: usize) -> Vec<(u64, Instance<f64>)> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let objects = 2 + (seed % 5) as usize;
        let spec = GeneratorSpec {
            objects,
            required: 1 + (seed / 5 % 4) as usize % objects.min(4),
            shape: Shape::Mixed,
            penalties: PenaltyMix::Mixed,
            grid: 14,
            max_size: 3,
            max_penalty: 8.0,
            mode: Mode::Enclose,
        };
        let inst: Instance<f64> = random_instance(seed, &spec).unwrap();
        if inst.n() <= 24 && inst.k() <= 4 {
            out.push((seed, inst));
        }
    }
    out
}

/// Points on a 24 x 24 lattice over the bounding box, offset by a seventh of
/// a unit so they avoid every segment between lattice points of small height.
fn sample_points<S: enclose_core::Weight>(inst: &Instance<S>) -> Vec<QPoint> {
    let pts: Vec<Point> = inst.polygons.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    let f = inst.refinement;
    let (x0, x1) = (pts.iter().map(|p| p.x).min().unwrap() - f, pts.iter().map(|p| p.x).max().unwrap() + f);
    let (y0, y1) = (pts.iter().map(|p| p.y).min().unwrap() - f, pts.iter().map(|p| p.y).max().unwrap() + f);
    let den = 48 * 7;
    let mut out = Vec::new();
    for i in 0..24i64 {
        for j in 0..24i64 {
            let x = x0 * den + (x1 - x0) * (2 * i + 1) * 7 + 48;
            let y = y0 * den + (y1 - y0) * (2 * j + 1) * 7 + 96;
            out.push(QPoint::new(BigRational::new(x.into(), den.into()), BigRational::new(y.into(), den.into())));
        }
    }
    out
}

#[test]
fn criterion_1_dp_and_dijkstra_agree() {
    let _g = serial();
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (seed, inst) in small_instances(C1_INSTANCES) {
        let fsg = compute_free_space_edges(&inst);
        let a = solve_dp(&inst, &fsg).unwrap().cost;
        let b = dijkstra::solve(&inst, &fsg).unwrap().cost;
        if !approx_eq(a, b, COST_TOL) {
            failures.push(format!("seed {seed}: dp {a} dijkstra {b}"));
        } else if a.is_finite() {
            worst = worst.max(rel_diff(a, b));
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < C1_BUDGET;
    report(
        1,
        "dp and dijkstra agree",
        pass,
        &format!(
            "{C1_INSTANCES} instances, {} mismatches, worst relative difference {worst:.1e}, {:.1} s (budget {} s)",
            failures.len(),
            elapsed.as_secs_f64(),
            C1_BUDGET.as_secs()
        ),
    );
    assert!(pass, "{failures:?}");
}

/// Instances small enough for the exhaustive oracle: one to three objects,
/// mostly triangles, at most ten free-space vertices.
fn oracle_instances(count: usize) -> Vec<(u64, Instance<f64>)> {
    let mut out = Vec::new();
    let mut seed = 1000u64;
    while out.len() < count {
        seed += 1;
        let objects = 1 + (seed % 3) as usize;
        let spec = GeneratorSpec {
            objects,
            required: 1 + (seed / 3 % objects as u64) as usize,
            shape: if seed.is_multiple_of(4) { Shape::Mixed } else { Shape::Triangles },
            penalties: PenaltyMix::Mixed,
            grid: 9,
            max_size: 3,
            max_penalty: 6.0,
            mode: Mode::Enclose,
        };
        let inst: Instance<f64> = random_instance(seed, &spec).unwrap();
        if compute_free_space_edges(&inst).n() <= 10 {
            out.push((seed, inst));
        }
    }
    out
}

#[test]
fn criterion_2_oracle_optimality() {
    let _g = serial();
    let limits = OracleLimits { max_vertices: 10, max_edges: C2_MAX_EDGES, max_walks: 50_000_000 };
    let (mut compared, mut failures) = (0, Vec::new());
    for (seed, inst) in oracle_instances(C2_INSTANCES) {
        let fsg = compute_free_space_edges(&inst);
        let o = brute_force_with(&inst, &fsg, C2_MAX_EDGES, limits).unwrap();
        if !o.exhausted {
            continue;
        }
        compared += 1;
        let d = dijkstra::solve(&inst, &fsg).unwrap().cost;
        let p = solve_dp(&inst, &fsg).unwrap().cost;
        if !approx_eq(d, o.best_cost, COST_TOL) || !approx_eq(p, o.best_cost, COST_TOL) {
            failures.push(format!("seed {seed}: oracle {} dijkstra {d} dp {p}", o.best_cost));
        }
    }
    let pass = failures.is_empty() && compared == C2_INSTANCES;
    report(
        2,
        "oracle optimality",
        pass,
        &format!("{compared}/{C2_INSTANCES} exhausted oracle runs compared, {} mismatches", failures.len()),
    );
    assert!(pass, "{failures:?}");
}

/// Checks the walk and polygon invariants of one pipeline result; returns the
/// number of problems found, described in `log`.
fn check_invariants(inst: &Instance<f64>, r: &SolveResult<f64>, log: &mut Vec<String>) -> usize {
    let before = log.len();
    let raw = Polygon::from_walk(&r.raw_walk, &r.fsg).unwrap();
    for (i, &q) in inst.required_refs().iter().enumerate() {
        match raw.winding_number(&q.into()) {
            Ok(1) => {}
            other => log.push(format!("required {i}: solver walk winding {other:?}")),
        }
    }
    let poly = r.polygon.as_ref().expect("feasible result has a polygon");
    for x in sample_points(inst) {
        if let Ok(w) = raw.winding_number(&x) {
            if w < 0 {
                log.push(format!("solver walk winding {w} at a sample"));
                break;
            }
        }
        if let Ok(w) = poly.winding_number(&x) {
            if !(0..=1).contains(&w) {
                log.push(format!("uncrossed winding {w} at a sample"));
                break;
            }
        }
    }
    let v = r.verification.as_ref().expect("verification requested");
    if !v.weakly_simple {
        log.push(format!("not weakly simple: {v:?}"));
    }
    let sol = r.solution.as_ref().unwrap();
    if !sol.feasible {
        log.push("uncrossed polygon misses a required object".into());
    }
    if !approx_eq(sol.cost, r.cost, COST_TOL) {
        log.push(format!("uncrossed cost {} vs solver cost {}", sol.cost, r.cost));
    }
    log.len() - before
}

#[test]
fn criterion_3_walk_and_polygon_invariants() {
    let _g = serial();
    let (mut solves, mut problems, mut log) = (0, 0, Vec::new());
    for (_, inst) in small_instances(C1_INSTANCES) {
        for kind in [SolverKind::Dp, SolverKind::Dijkstra] {
            let r = solve(&inst, kind, true, 0).unwrap();
            if !r.cost.is_finite() {
                continue;
            }
            solves += 1;
            problems += check_invariants(&inst, &r, &mut log);
        }
    }
    let pass = problems == 0 && solves > 0;
    report(
        3,
        "walk and polygon invariants",
        pass,
        &format!("{solves} feasible solves checked, {problems} violations"),
    );
    assert!(pass, "{log:?}");
}

fn hull_perimeter(mut pts: Vec<(i64, i64)>) -> (Vec<(i64, i64)>, f64) {
    pts.sort();
    pts.dedup();
    let p = |(x, y): (i64, i64)| Point::new(x, y);
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let order: Vec<(i64, i64)> = if pass == 0 { pts.clone() } else { pts.iter().rev().copied().collect() };
        for q in order {
            while hull.len() >= start + 2 && orient(p(hull[hull.len() - 2]), p(hull[hull.len() - 1]), p(q)) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let len = (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            ((a.0 - b.0) as f64).hypot((a.1 - b.1) as f64)
        })
        .sum();
    (hull, len)
}

fn points_instance(pts: &[(i64, i64)]) -> Instance<f64> {
    let xs = pts.iter().map(|p| p.0);
    let ys = pts.iter().map(|p| p.1);
    let extent = (xs.clone().max().unwrap() - xs.min().unwrap()).max(ys.clone().max().unwrap() - ys.min().unwrap());
    // triangles of size 1e-4 of the bounding box
    let points: Vec<serde_json::Value> = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| serde_json::json!({"id": format!("p{i}"), "kind": "required", "at": [x, y]}))
        .collect();
    let json = serde_json::json!({"points": points, "point_refinement": 10_000, "point_epsilon": extent});
    load_instance(json.to_string().as_bytes()).unwrap()
}

#[test]
fn criterion_4_convex_hull_of_points() {
    let _g = serial();
    let mut cases = vec![vec![(0, 0), (1, 0), (1, 1), (0, 1)]];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    while cases.len() < 6 {
        let raw: Vec<(i64, i64)> = (0..10).map(|_| (rng.gen_range(0..40), rng.gen_range(0..40))).collect();
        let (hull, _) = hull_perimeter(raw);
        if hull.len() >= 3 && hull.len() <= 8 {
            cases.push(hull);
        }
    }
    let mut lines = Vec::new();
    let mut pass = true;
    for pts in &cases {
        let (_, perimeter) = hull_perimeter(pts.clone());
        let inst = points_instance(pts);
        let r = solve(&inst, SolverKind::Dijkstra, true, 0).unwrap();
        let d = rel_diff(r.cost, perimeter);
        pass &= d <= C4_TOL && r.verification.as_ref().unwrap().weakly_simple;
        lines.push(format!("k={} cost {:.6} hull {perimeter:.6}", pts.len(), r.cost));
    }
    report(4, "convex hull of points", pass, &lines.join("; "));
    assert!(pass);
}

/// Unit grid graph with `side` x `side` faces; face `(i, j)` gets `tag(i, j)`.
fn grid_graph(side: i64, tag: impl Fn(i64, i64) -> serde_json::Value) -> Instance<f64> {
    let id = |x: i64, y: i64| (y * (side + 1) + x) as u64;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for y in 0..=side {
        for x in 0..=side {
            vertices.push(serde_json::json!([x, y]));
            if x < side {
                edges.push(serde_json::json!([id(x, y), id(x + 1, y), 1.0]));
            }
            if y < side {
                edges.push(serde_json::json!([id(x, y), id(x, y + 1), 1.0]));
            }
        }
    }
    let mut faces = Vec::new();
    for j in 0..side {
        for i in 0..side {
            let mut f = tag(i, j);
            f["point"] = serde_json::json!([i as f64 + 0.5, j as f64 + 0.5]);
            faces.push(f);
        }
    }
    let json = serde_json::json!({"graph": {"vertices": vertices, "edges": edges, "faces": faces}});
    load_instance(json.to_string().as_bytes()).unwrap()
}

#[test]
fn criterion_5_grid_graph() {
    let _g = serial();
    let center = |i: i64, j: i64| i == 1 && j == 1;
    let plain = grid_graph(3, |i, j| {
        if center(i, j) {
            serde_json::json!({"kind": "required"})
        } else {
            serde_json::json!({"kind": "optional", "penalty": 0})
        }
    });
    let walled = grid_graph(3, |i, j| {
        if center(i, j) {
            serde_json::json!({"kind": "required"})
        } else if (i - 1).abs() + (j - 1).abs() == 1 {
            serde_json::json!({"kind": "optional", "penalty": "inf"})
        } else {
            serde_json::json!({"kind": "optional", "penalty": 0})
        }
    });
    let a = solve(&plain, SolverKind::Dijkstra, true, 0).unwrap();
    let b = solve(&walled, SolverKind::Dijkstra, true, 0).unwrap();
    let fsg = compute_free_space_edges(&walled);
    let limits = OracleLimits { max_vertices: 16, max_edges: 12, max_walks: 50_000_000 };
    let o = brute_force_with(&walled, &fsg, 12, limits).unwrap();
    let pass = approx_eq(a.cost, 4.0, COST_TOL)
        && o.exhausted
        && approx_eq(b.cost, o.best_cost, COST_TOL)
        && approx_eq(solve_dp(&walled, &fsg).unwrap().cost, o.best_cost, COST_TOL);
    report(
        5,
        "grid graph",
        pass,
        &format!(
            "penalty 0 neighbours: cost {} (expected 4); infinite edge-adjacent faces: cost {} vs exhausted oracle {}",
            a.cost, b.cost, o.best_cost
        ),
    );
    assert!(pass);
}

fn knapsack_square(side: i64, penalty: f64) -> Instance<f64> {
    let json = serde_json::json!({"mode": "invert", "polygons": [{
        "id": "sq", "kind": "optional", "penalty": penalty,
        "vertices": [[0, 0], [side, 0], [side, side], [0, side]]}]});
    load_instance(json.to_string().as_bytes()).unwrap()
}

#[test]
fn criterion_6_inverted_knapsack() {
    let _g = serial();
    let mut lines = Vec::new();
    let mut pass = true;
    for s in [1i64, 2, 5] {
        for (factor, expected) in [(10.0, 4.0), (3.0, 3.0)] {
            let inst = knapsack_square(s, factor * s as f64);
            let r = solve(&inst, SolverKind::Dijkstra, true, 0).unwrap();
            let ok = approx_eq(r.cost, expected * s as f64, COST_TOL);
            pass &= ok;
            if !ok {
                lines.push(format!("s={s} penalty {factor}s: cost {}", r.cost));
            }
        }
    }
    let zero = random_instance::<f64>(
        6,
        &GeneratorSpec { objects: 4, required: 0, penalties: PenaltyMix::Zero, mode: Mode::Invert, ..Default::default() },
    )
    .unwrap();
    let z = solve(&zero, SolverKind::Dijkstra, true, 0).unwrap().cost;
    pass &= z == 0.0;
    lines.push(format!("square cases ok={}, zero penalties cost {z}", lines.is_empty()));

    let limits = OracleLimits { max_vertices: 16, max_edges: 12, max_walks: 50_000_000 };
    let (mut compared, mut exhausted, mut mismatches) = (0, 0, Vec::new());
    let mut seed = 600u64;
    while compared < C6_RANDOM {
        seed += 1;
        let spec = GeneratorSpec {
            objects: 1 + (seed % 4) as usize,
            required: 0,
            shape: Shape::Mixed,
            penalties: PenaltyMix::Finite,
            grid: 10,
            max_size: 3,
            max_penalty: 12.0,
            mode: Mode::Invert,
        };
        let inst: Instance<f64> = random_instance(seed, &spec).unwrap();
        let fsg = compute_free_space_edges(&inst);
        if fsg.n() > limits.max_vertices {
            continue;
        }
        compared += 1;
        let s = solve_inverted(&inst, &fsg).unwrap().cost;
        let o = brute_force_with(&inst, &fsg, limits.max_edges, limits).unwrap();
        exhausted += usize::from(o.exhausted);
        if !approx_eq(s, o.best_cost, COST_TOL) {
            mismatches.push(format!("seed {seed}: solver {s} oracle {}", o.best_cost));
        }
    }
    pass &= mismatches.is_empty() && exhausted == compared;
    lines.push(format!(
        "{compared} random instances, {exhausted} exhausted oracle runs, {} mismatches",
        mismatches.len()
    ));
    report(6, "inverted knapsack", pass, &lines.join("; "));
    assert!(pass, "{mismatches:?}");
}

fn fuzzed_walk(rng: &mut ChaCha8Rng) -> Vec<Point> {
    loop {
        let len = rng.gen_range(4..10);
        let w: Vec<Point> = (0..len).map(|_| Point::new(rng.gen_range(0..6), rng.gen_range(0..6))).collect();
        if (0..len).any(|i| w[i] == w[(i + 1) % len]) {
            continue;
        }
        let poly = Polygon::<f64>::from_points(&w);
        if check_weak_simplicity(&poly).is_ok_and(|r| r.proper_crossings > 0) {
            return w;
        }
    }
}

#[test]
fn criterion_7_uncrossing() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut failures, mut min_samples) = (Vec::new(), usize::MAX);
    for case in 0..C7_WALKS {
        let walk = fuzzed_walk(&mut rng);
        let poly = Polygon::<f64>::from_points(&walk);
        let (out, _) = uncross(&poly).unwrap();
        let report = check_weak_simplicity(&out).unwrap();
        let mut samples = 0;
        let mut parity_ok = true;
        for sx in 0..18i64 {
            for sy in 0..18i64 {
                let x = QPoint::new(
                    BigRational::new((sx * 1000 + 1).into(), 3000.into()),
                    BigRational::new((sy * 1000 + 2).into(), 3000.into()),
                );
                let (Ok(a), Ok(b)) = (poly.winding_number(&x), out.winding_number(&x)) else { continue };
                parity_ok &= a.rem_euclid(2) == b.rem_euclid(2);
                samples += 1;
            }
        }
        min_samples = min_samples.min(samples);
        if !report.weakly_simple || !parity_ok || samples < C7_MIN_SAMPLES || out.weight() > poly.weight() + 1e-9 {
            failures.push(format!("walk {case} {walk:?}: {report:?}, parity {parity_ok}, {samples} samples"));
        }
    }
    // solver walks never cross themselves in the interior
    let mut crossing_walks = 0;
    let mut solves = 0;
    for (_, inst) in small_instances(60) {
        for kind in [SolverKind::Dp, SolverKind::Dijkstra] {
            let r = solve(&inst, kind, false, 0).unwrap();
            solves += 1;
            crossing_walks += usize::from(r.uncross.s > 0);
        }
    }
    let pass = failures.is_empty() && crossing_walks == 0;
    report(
        7,
        "uncrossing",
        pass,
        &format!(
            "{C7_WALKS} fuzzed walks, {} failures, at least {min_samples} samples each; {crossing_walks}/{solves} solver walks with interior crossings",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

/// Uniform random squares, ten of them required; the grid grows with the
/// object count to keep the density fixed.
fn performance_instance(objects: usize, grid: i64) -> Instance<f64> {
    let spec = GeneratorSpec {
        objects,
        required: C8_K,
        shape: Shape::Squares,
        penalties: PenaltyMix::Finite,
        grid,
        max_size: 4,
        max_penalty: 8.0,
        mode: Mode::Enclose,
    };
    random_instance(1, &spec).unwrap()
}

#[test]
fn criterion_8_performance() {
    let _g = serial();
    let mut timings = Vec::new();
    let mut pass = true;
    for (objects, grid) in [(C8_N / 8, 60), (C8_N / 4, 85)] {
        let inst = performance_instance(objects, grid);
        let t = Instant::now();
        let fsg = compute_free_space_edges(&inst);
        let out = dijkstra::solve(&inst, &fsg).unwrap();
        let elapsed = t.elapsed();
        let poly = Polygon::from_walk(&out.walk, &fsg).unwrap();
        let (uncrossed, _) = uncross(&poly).unwrap();
        let sol = evaluate_solution(&inst, &uncrossed).unwrap();
        pass &= sol.feasible && approx_eq(sol.cost, out.cost, COST_TOL);
        timings.push((fsg.n(), inst.k(), elapsed, out.cost, out.stats));
    }
    let (n_half, _, t_half, ..) = timings[0];
    let (n, k, t_full, cost, stats) = timings[1];
    let ratio = t_full.as_secs_f64() / t_half.as_secs_f64();
    pass &= n == C8_N && k == C8_K && t_full < C8_BUDGET;
    report(
        8,
        "performance",
        pass,
        &format!(
            "n={n} k={k}: {:.1} s (budget {} s), cost {cost:.6}, {} labels finalized, {} pruned; n={n_half}: {:.1} s; doubling ratio {ratio:.2} (logged, expected <= {C8_DOUBLING_RATIO})",
            t_full.as_secs_f64(),
            C8_BUDGET.as_secs(),
            stats.finalized,
            stats.pruned,
            t_half.as_secs_f64(),
        ),
    );
    assert!(pass);
}
