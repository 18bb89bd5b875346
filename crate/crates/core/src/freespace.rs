//! Free-space edges between polygon vertices, and reference-point contents of triangles.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{orient, segments_properly_cross, strictly_inside_segment, Point, Segment};
use crate::instance::{InputPolygon, Instance};
use crate::mask::SubsetMask;
use crate::scalar::Weight;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeSpaceEdge<S> {
    pub a: usize,
    pub b: usize,
    pub weight: S,
    pub squeezed: bool,
}

/// Vertices are sorted lexicographically, so vertex ids follow `(x, y)` order.
#[derive(Clone, Debug)]
pub struct FreeSpaceGraph<S> {
    pub vertices: Vec<Point>,
    pub edges: Vec<FreeSpaceEdge<S>>,
    adjacency: Vec<Vec<(usize, S)>>,
    weights: Vec<S>,
}

impl<S: Weight> FreeSpaceGraph<S> {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// Weight of the free-space edge `ab`, if there is one.
    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> Option<S> {
        let w = self.weights[a * self.vertices.len() + b];
        (!w.is_nan()).then_some(w)
    }

    /// Neighbours of `v` with edge weights, in increasing id order.
    pub fn neighbors(&self, v: usize) -> &[(usize, S)] {
        &self.adjacency[v]
    }

    pub fn vertex_id(&self, p: Point) -> Option<usize> {
        self.vertices.binary_search(&p).ok()
    }

    pub fn point(&self, v: usize) -> Point {
        self.vertices[v]
    }

    /// Vertex and edge lists in input coordinates, for debugging.
    pub fn to_json(&self, inst: &Instance<S>) -> Value {
        let verts: Vec<Value> = self
            .vertices
            .iter()
            .map(|&p| {
                let (x, y) = inst.to_input_units(p);
                json!([x, y])
            })
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                json!({"a": e.a, "b": e.b, "weight": e.weight.to_f64_lossy(), "squeezed": e.squeezed})
            })
            .collect();
        json!({"vertices": verts, "edges": edges})
    }
}

struct Obstacles<'a, S> {
    polygons: &'a [InputPolygon<S>],
    boxes: Vec<(Point, Point)>,
    vertices: Vec<Point>,
}

impl<'a, S: Weight> Obstacles<'a, S> {
    fn new(inst: &'a Instance<S>) -> Self {
        let boxes = inst
            .polygons
            .iter()
            .map(|p| {
                let xs = p.vertices.iter().map(|v| v.x);
                let ys = p.vertices.iter().map(|v| v.y);
                (
                    Point::new(xs.clone().min().unwrap(), ys.clone().min().unwrap()),
                    Point::new(xs.max().unwrap(), ys.max().unwrap()),
                )
            })
            .collect();
        Obstacles {
            polygons: &inst.polygons,
            boxes,
            vertices: inst.distinct_vertices(),
        }
    }

    fn crosses_boundary(&self, s: Segment) -> bool {
        let (lo, hi) = (
            Point::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y)),
            Point::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y)),
        );
        self.polygons.iter().zip(&self.boxes).any(|(p, b)| {
            b.0.x <= hi.x
                && lo.x <= b.1.x
                && b.0.y <= hi.y
                && lo.y <= b.1.y
                && p.edges().any(|e| segments_properly_cross(s, e))
        })
    }

    /// Whether the point `xn / 2` is in the open interior of some polygon.
    fn half_point_blocked(&self, xn: (i128, i128)) -> bool {
        self.polygons.iter().zip(&self.boxes).any(|(p, b)| {
            let inside_box = 2 * b.0.x as i128 <= xn.0
                && xn.0 <= 2 * b.1.x as i128
                && 2 * b.0.y as i128 <= xn.1
                && xn.1 <= 2 * b.1.y as i128;
            (p.unbounded || inside_box) && p.strictly_contains_scaled(xn, 2)
        })
    }

    /// Free segment with no vertex in its relative interior.
    fn is_edge(&self, a: Point, b: Point) -> bool {
        !self.vertices.iter().any(|&x| strictly_inside_segment(x, a, b))
            && !self.crosses_boundary(Segment::new(a, b))
            && !self.half_point_blocked(Segment::new(a, b).mid2())
    }

    fn is_free(&self, a: Point, b: Point) -> bool {
        let s = Segment::new(a, b);
        if self.crosses_boundary(s) {
            return false;
        }
        let mut cuts: Vec<Point> = self
            .vertices
            .iter()
            .copied()
            .filter(|&x| strictly_inside_segment(x, a, b))
            .collect();
        cuts.sort_by_key(|x| (x.x as i128 - a.x as i128).abs() + (x.y as i128 - a.y as i128).abs());
        let mut chain = vec![a];
        chain.extend(cuts);
        chain.push(b);
        chain
            .windows(2)
            .all(|w| !self.half_point_blocked(Segment::new(w[0], w[1]).mid2()))
    }
}

/// Whether the closed segment `ab` avoids the open interior of every polygon.
pub fn segment_in_free_space<S: Weight>(a: Point, b: Point, inst: &Instance<S>) -> bool {
    if a == b {
        return !inst.strictly_inside_any(a);
    }
    Obstacles::new(inst).is_free(a, b)
}

/// Builds the free-space graph by testing every vertex pair.
pub fn compute_free_space_edges<S: Weight>(inst: &Instance<S>) -> FreeSpaceGraph<S> {
    let obstacles = Obstacles::new(inst);
    let vertices = obstacles.vertices.clone();
    let n = vertices.len();
    let squeezed = inst.squeezed_map();
    let mut edges = Vec::new();
    let mut weights = vec![S::nan(); n * n];
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (vertices[i], vertices[j]);
            if !obstacles.is_edge(a, b) {
                continue;
            }
            let sq = squeezed.get(&Segment::new(a, b).normalized()).copied();
            let weight = sq.unwrap_or_else(|| inst.euclidean(a, b));
            edges.push(FreeSpaceEdge {
                a: i,
                b: j,
                weight,
                squeezed: sq.is_some(),
            });
            weights[i * n + j] = weight;
            weights[j * n + i] = weight;
            adjacency[i].push((j, weight));
            adjacency[j].push((i, weight));
        }
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(v, _)| v);
    }
    FreeSpaceGraph {
        vertices,
        edges,
        adjacency,
        weights,
    }
}

/// Fails with [`Error::NonpositiveWeight`] unless every free-space edge has positive weight.
pub fn assert_superiority<S: Weight>(fsg: &FreeSpaceGraph<S>) -> Result<()> {
    for e in &fsg.edges {
        if e.weight.partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonpositiveWeight {
                a: fsg.vertices[e.a],
                b: fsg.vertices[e.b],
                weight: e.weight.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleContent<S> {
    pub required_mask: SubsetMask,
    pub penalty_sum: S,
}

impl<S: Weight> TriangleContent<S> {
    pub fn empty() -> Self {
        TriangleContent {
            required_mask: SubsetMask::EMPTY,
            penalty_sum: S::zero(),
        }
    }
}

/// Reference points of an instance, split by kind.
#[derive(Clone, Debug)]
pub struct ReferenceSet<S> {
    /// Required reference points in mask-bit order.
    pub required: Vec<Point>,
    /// Optional bounded reference points with their penalties.
    pub optional: Vec<(Point, S)>,
}

impl<S: Weight> ReferenceSet<S> {
    pub fn new(inst: &Instance<S>) -> Self {
        ReferenceSet {
            required: inst.required_refs(),
            optional: inst.optional_refs(),
        }
    }

    /// Content of the region selected by `inside`.
    pub fn content_where(&self, inside: impl Fn(Point) -> bool) -> TriangleContent<S> {
        let mut c = TriangleContent::empty();
        for (i, &r) in self.required.iter().enumerate() {
            if inside(r) {
                c.required_mask = c.required_mask.union(SubsetMask::singleton(i));
            }
        }
        for &(r, pen) in &self.optional {
            if inside(r) {
                c.penalty_sum = S::add_inf(c.penalty_sum, pen);
            }
        }
        c
    }

    /// Content of the half-open triangle `prq` (closed on `pr`, `rq`; open on `pq`).
    pub fn triangle(&self, p: Point, r: Point, q: Point) -> Result<TriangleContent<S>> {
        if orient(p, r, q) != 1 {
            return Err(Error::DegenerateTriangle);
        }
        let lo = Point::new(p.x.min(r.x).min(q.x), p.y.min(r.y).min(q.y));
        let hi = Point::new(p.x.max(r.x).max(q.x), p.y.max(r.y).max(q.y));
        Ok(self.content_where(|x| {
            x.x >= lo.x
                && x.x <= hi.x
                && x.y >= lo.y
                && x.y <= hi.y
                && orient(p, r, x) >= 0
                && orient(r, q, x) >= 0
                && orient(q, p, x) > 0
        }))
    }
}

/// Content of the triangle on free-space vertices `p, r, q`.
pub fn triangle_content<S: Weight>(
    p: usize,
    r: usize,
    q: usize,
    fsg: &FreeSpaceGraph<S>,
    refs: &ReferenceSet<S>,
) -> Result<TriangleContent<S>> {
    refs.triangle(fsg.point(p), fsg.point(r), fsg.point(q))
}

/// Dense index tables are used up to this many `(p, r, q)` slots.
const DENSE_TRIANGLE_SLOTS: usize = 1 << 26;

/// Per-solver memo of triangle contents keyed by `(p, r, q)`. Distinct
/// contents are stored once; slots hold `1 + index` or 0 when not yet computed.
pub struct TriangleCache<'a, S> {
    fsg: &'a FreeSpaceGraph<S>,
    refs: ReferenceSet<S>,
    n: usize,
    dense: Vec<Cell<u32>>,
    sparse: RefCell<HashMap<(u32, u32, u32), u32>>,
    contents: RefCell<Vec<TriangleContent<S>>>,
    distinct: RefCell<HashMap<(u32, u64), u32>>,
    computed: Cell<usize>,
}

impl<'a, S: Weight> TriangleCache<'a, S> {
    pub fn new(fsg: &'a FreeSpaceGraph<S>, refs: ReferenceSet<S>) -> Self {
        let n = fsg.n();
        let slots = n.saturating_mul(n).saturating_mul(n);
        let dense = if slots <= DENSE_TRIANGLE_SLOTS {
            (0..slots).map(|_| Cell::new(0)).collect()
        } else {
            Vec::new()
        };
        TriangleCache {
            fsg,
            refs,
            n,
            dense,
            sparse: RefCell::new(HashMap::new()),
            contents: RefCell::new(Vec::new()),
            distinct: RefCell::new(HashMap::new()),
            computed: Cell::new(0),
        }
    }

    pub fn refs(&self) -> &ReferenceSet<S> {
        &self.refs
    }

    /// Content of the counterclockwise triangle `prq`; callers guarantee the orientation.
    #[inline]
    pub fn get(&self, p: usize, r: usize, q: usize) -> TriangleContent<S> {
        let slot = if self.dense.is_empty() {
            self.sparse.borrow().get(&(p as u32, r as u32, q as u32)).copied().unwrap_or(0)
        } else {
            self.dense[(p * self.n + r) * self.n + q].get()
        };
        if slot != 0 {
            return self.contents.borrow()[slot as usize - 1];
        }
        let fsg = self.fsg;
        let t = self
            .refs
            .triangle(fsg.point(p), fsg.point(r), fsg.point(q))
            .expect("triangle must be counterclockwise");
        let key = (t.required_mask.bits(), t.penalty_sum.to_f64_lossy().to_bits());
        let slot = *self.distinct.borrow_mut().entry(key).or_insert_with(|| {
            let mut c = self.contents.borrow_mut();
            c.push(t);
            c.len() as u32
        });
        if self.dense.is_empty() {
            self.sparse.borrow_mut().insert((p as u32, r as u32, q as u32), slot);
        } else {
            self.dense[(p * self.n + r) * self.n + q].set(slot);
        }
        self.computed.set(self.computed.get() + 1);
        t
    }

    /// Number of triangles evaluated so far.
    pub fn len(&self) -> usize {
        self.computed.get()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
