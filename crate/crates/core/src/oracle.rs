//! Brute-force ground truth for toy instances, and a seeded instance generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::freespace::FreeSpaceGraph;
use crate::geometry::{segments_properly_cross, winding_number, Point, Segment};
use crate::instance::{validate_and_subdivide, InputPolygon, Instance, Kind, Mode};
use crate::scalar::Weight;
use crate::uncross::{uncross, Polygon};
use crate::verify::{check_weak_simplicity, evaluate_solution};
use crate::walk::Walk;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_edges: usize,
    /// Closed walks evaluated before giving up with `exhausted = false`.
    pub max_walks: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 10, max_edges: 12, max_walks: 20_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult<S> {
    pub best_cost: S,
    /// Best walk as enumerated, before uncrossing.
    pub best_walk: Walk<S>,
    /// Uncrossed polygon whose evaluated cost is `best_cost`.
    pub best_polygon: Option<Polygon<S>>,
    pub walks_examined: u64,
    pub exhausted: bool,
}

/// Minimum evaluated cost over closed free-space walks of at most `max_edges`
/// edges, each uncrossed and checked, plus the point solution.
///
/// Walks start at their smallest vertex and are kept in one of their two
/// directions. A prefix is abandoned once its weight plus the cheapest way
/// back to the start reaches the incumbent, or when the start is out of reach
/// within the budget; this is exact for walks without interior crossings, whose
/// uncrossing is itself an enumerated walk of no greater weight. Since an
/// optimum is weakly simple, prefixes with a proper self-crossing are dropped
/// as well. Immediate
/// reversals `u v u` are never taken, and a walk whose parity-determined
/// penalties alone reach the incumbent is not evaluated.
pub fn brute_force<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>, max_edges: usize) -> Result<OracleResult<S>> {
    brute_force_with(inst, fsg, max_edges, OracleLimits::default())
}

pub fn brute_force_with<S: Weight>(
    inst: &Instance<S>,
    fsg: &FreeSpaceGraph<S>,
    max_edges: usize,
    limits: OracleLimits,
) -> Result<OracleResult<S>> {
    let n = fsg.n();
    if n > limits.max_vertices {
        return Err(Error::SearchSpaceTooLarge(format!(
            "{n} free-space vertices exceed the limit of {}",
            limits.max_vertices
        )));
    }
    if max_edges > limits.max_edges {
        return Err(Error::SearchSpaceTooLarge(format!(
            "edge budget {max_edges} exceeds the limit of {}",
            limits.max_edges
        )));
    }
    let mut search = Search {
        inst,
        fsg,
        required: inst.required_refs(),
        best: S::infinity(),
        best_walk: Walk::empty(),
        best_polygon: None,
        examined: 0,
        max_walks: limits.max_walks,
        back: shortest_paths(fsg),
        optional: inst.optional_refs(),
        stopped: false,
    };
    if n > 0 {
        search.consider(vec![0]);
    } else {
        let sol = evaluate_solution(inst, &Polygon::new(Vec::new(), Vec::new())?)?;
        if sol.feasible {
            search.best = sol.cost;
            search.best_polygon = Some(sol.polygon);
        }
    }
    for m in 2..=max_edges {
        for s in 0..n {
            let mut path = vec![s];
            search.dfs(&mut path, S::zero(), m);
            if search.stopped {
                break;
            }
        }
    }
    Ok(OracleResult {
        best_cost: search.best,
        best_walk: search.best_walk,
        best_polygon: search.best_polygon,
        walks_examined: search.examined,
        exhausted: !search.stopped,
    })
}

struct Search<'a, S: Weight> {
    inst: &'a Instance<S>,
    fsg: &'a FreeSpaceGraph<S>,
    required: Vec<Point>,
    best: S,
    best_walk: Walk<S>,
    best_polygon: Option<Polygon<S>>,
    examined: u64,
    max_walks: u64,
    stopped: bool,
    /// All-pairs `(weight, hops)` of cheapest and shortest paths, for pruning.
    back: Vec<(S, usize)>,
    optional: Vec<(Point, S)>,
}

/// Floyd-Warshall over the free-space graph, separately for weight and for
/// edge count. Unreachable pairs hold infinity and `usize::MAX`.
fn shortest_paths<S: Weight>(fsg: &FreeSpaceGraph<S>) -> Vec<(S, usize)> {
    let n = fsg.n();
    let mut d = vec![(S::infinity(), usize::MAX); n * n];
    for v in 0..n {
        d[v * n + v] = (S::zero(), 0);
        for &(u, w) in fsg.neighbors(v) {
            d[v * n + u] = (w, 1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (d[i * n + k], d[k * n + j]);
                let c = &mut d[i * n + j];
                if a.0 + b.0 < c.0 {
                    c.0 = a.0 + b.0;
                }
                if a.1 != usize::MAX && b.1 != usize::MAX && a.1 + b.1 < c.1 {
                    c.1 = a.1 + b.1;
                }
            }
        }
    }
    d
}

impl<'a, S: Weight> Search<'a, S> {
    fn dfs(&mut self, path: &mut Vec<usize>, weight: S, m: usize) {
        if self.stopped || weight >= self.best {
            return;
        }
        let s = path[0];
        let last = *path.last().unwrap();
        let edges = path.len() - 1;
        // the walk still has to get back to its start
        let (back_weight, back_hops) = self.back[last * self.fsg.n() + s];
        if weight + back_weight >= self.best || back_hops > m - edges {
            return;
        }
        if edges + 1 == m {
            if let Some(w) = self.fsg.weight(last, s) {
                // path[1] == last would close with a spike at the start
                if path[1] < last && weight + w < self.best && !self.crosses(path, last, s) {
                    path.push(s);
                    self.consider(path.clone());
                    path.pop();
                }
            }
            return;
        }
        let prev = path.len().checked_sub(2).map(|i| path[i]);
        for &(v, w) in self.fsg.neighbors(last) {
            // an immediate reversal only adds weight and changes no winding,
            // so some optimum avoids it
            if v < s || Some(v) == prev || self.crosses(path, last, v) {
                continue;
            }
            path.push(v);
            self.dfs(path, weight + w, m);
            path.pop();
            if self.stopped {
                return;
            }
        }
    }

    /// Whether segment `a b` properly crosses an edge of `path`.
    fn crosses(&self, path: &[usize], a: usize, b: usize) -> bool {
        let e = Segment::new(self.fsg.point(a), self.fsg.point(b));
        path.windows(2)
            .any(|w| segments_properly_cross(e, Segment::new(self.fsg.point(w[0]), self.fsg.point(w[1]))))
    }

    fn consider(&mut self, vertices: Vec<usize>) {
        self.examined += 1;
        if self.examined > self.max_walks {
            self.stopped = true;
            return;
        }
        // winding parity survives uncrossing, so it filters cheaply
        let ring: Vec<Point> = {
            let mut r: Vec<Point> = vertices.iter().map(|&v| self.fsg.point(v)).collect();
            if r.len() > 1 {
                r.pop();
            }
            r
        };
        let want_odd = self.inst.mode == Mode::Enclose;
        for &r in &self.required {
            match winding_number(&ring, r) {
                Ok(w) if (w % 2 != 0) == want_odd => {}
                _ => return,
            }
        }
        // penalties owed by parity bound the cost from below
        let mut owed = S::zero();
        for (r, pen) in &self.optional {
            if let Ok(w) = winding_number(&ring, *r) {
                if (w % 2 != 0) == want_odd {
                    owed = S::add_inf(owed, *pen);
                }
            }
        }
        if owed.to_f64_lossy() * (1.0 - 1e-12) >= self.best.to_f64_lossy() {
            return;
        }
        let walk = match Walk::closed_from(vertices, self.fsg) {
            Ok(w) => w,
            Err(_) => return,
        };
        let Some(out) = uncrossed(self.inst, self.fsg, &walk) else { return };
        // the exact evaluation and the simplicity checks are only worth it for
        // a walk that could improve
        let bound = (out.weight().to_f64_lossy() + owed.to_f64_lossy()) * (1.0 - 1e-9);
        if bound >= self.best.to_f64_lossy() {
            return;
        }
        if let Some((cost, poly)) = evaluate_uncrossed(self.inst, out) {
            if cost < self.best {
                self.best = cost;
                self.best_walk = walk;
                self.best_polygon = Some(poly);
            }
        }
    }
}

fn uncrossed<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>, walk: &Walk<S>) -> Option<Polygon<S>> {
    let poly = Polygon::from_walk(walk, fsg).ok()?;
    let (out, _) = uncross(&poly).ok()?;
    Some(if inst.mode == Mode::Invert { out.reversed() } else { out })
}

fn evaluate_uncrossed<S: Weight>(inst: &Instance<S>, out: Polygon<S>) -> Option<(S, Polygon<S>)> {
    if !check_weak_simplicity(&out).ok()?.weakly_simple {
        return None;
    }
    let sol = evaluate_solution(inst, &out).ok()?;
    sol.feasible.then_some((sol.cost, out))
}

/// Cost of the uncrossed walk if it is weakly simple and feasible; clockwise
/// orientation in invert mode.
pub fn evaluate_walk<S: Weight>(inst: &Instance<S>, fsg: &FreeSpaceGraph<S>, walk: &Walk<S>) -> Option<(S, Polygon<S>)> {
    evaluate_uncrossed(inst, uncrossed(inst, fsg, walk)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Squares,
    Triangles,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyMix {
    /// Uniform finite penalties.
    Finite,
    /// Finite, with some zero and some infinite.
    Mixed,
    Zero,
}

/// Parameters of [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub objects: usize,
    pub required: usize,
    pub shape: Shape,
    pub penalties: PenaltyMix,
    /// Objects are placed in `[0, grid]²`.
    pub grid: i64,
    pub max_size: i64,
    pub max_penalty: f64,
    pub mode: Mode,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            objects: 3,
            required: 1,
            shape: Shape::Mixed,
            penalties: PenaltyMix::Finite,
            grid: 12,
            max_size: 3,
            max_penalty: 10.0,
            mode: Mode::Enclose,
        }
    }
}

const MAX_TRIES: usize = 1000;

/// Reproducible instance of axis-aligned squares and right triangles with
/// pairwise disjoint bounding boxes (touching allowed). The first `required`
/// objects are required.
pub fn random_instance<S: Weight>(seed: u64, spec: &GeneratorSpec) -> Result<Instance<S>> {
    if spec.required > spec.objects {
        return Err(Error::GenerationFailure(format!(
            "{} required objects among {} objects",
            spec.required, spec.objects
        )));
    }
    if spec.max_size < 1 || spec.grid < spec.max_size {
        return Err(Error::GenerationFailure("grid too small for the object size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boxes: Vec<(Point, Point)> = Vec::new();
    let mut polys = Vec::new();
    for i in 0..spec.objects {
        let mut placed = None;
        for _ in 0..MAX_TRIES {
            let s = rng.gen_range(1..=spec.max_size);
            let x = rng.gen_range(0..=spec.grid - s);
            let y = rng.gen_range(0..=spec.grid - s);
            let (lo, hi) = (Point::new(x, y), Point::new(x + s, y + s));
            let free = boxes
                .iter()
                .all(|(l, h)| hi.x <= l.x || h.x <= lo.x || hi.y <= l.y || h.y <= lo.y);
            let triangle = match spec.shape {
                Shape::Squares => false,
                Shape::Triangles => true,
                Shape::Mixed => rng.gen_bool(0.5),
            };
            let corner = rng.gen_range(0..4);
            if free {
                placed = Some((lo, hi, triangle, corner));
                break;
            }
        }
        let (lo, hi, triangle, corner) = placed.ok_or_else(|| {
            Error::GenerationFailure(format!("no room for object {i} after {MAX_TRIES} tries"))
        })?;
        boxes.push((lo, hi));
        let mut square = vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
        if triangle {
            square.remove(corner);
        }
        let id = format!("o{i}");
        let poly = if i < spec.required {
            InputPolygon::required(id, square)
        } else {
            let u: f64 = rng.gen();
            let p = match spec.penalties {
                PenaltyMix::Zero => 0.0,
                PenaltyMix::Finite => (u * spec.max_penalty * 4.0).round() / 4.0,
                PenaltyMix::Mixed => {
                    if u < 0.15 {
                        0.0
                    } else if u < 0.3 {
                        f64::INFINITY
                    } else {
                        (u * spec.max_penalty * 4.0).round() / 4.0
                    }
                }
            };
            InputPolygon::optional(id, square, S::from_f64_lossy(p))
        };
        polys.push(poly);
    }
    validate_and_subdivide(Instance::new(polys, spec.mode))
}

/// Required ids and penalties of a generated instance, for snapshots.
pub fn describe<S: Weight>(inst: &Instance<S>) -> Vec<String> {
    inst.polygons
        .iter()
        .map(|p| {
            let f = inst.refinement;
            let pts: Vec<String> = p.vertices.iter().map(|v| format!("({},{})", v.x / f, v.y / f)).collect();
            match p.kind {
                Kind::Required => format!("{} required {}", p.id, pts.join(" ")),
                Kind::Optional => format!("{} optional {} {}", p.id, p.penalty, pts.join(" ")),
            }
        })
        .collect()
}
