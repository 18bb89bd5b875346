//! Turning a closed walk into a weakly simple polygon of no greater weight.
//!
//! The walk is cut at forks and interior crossings, equal segments are
//! discarded in pairs down to multiplicity one or two, and the resulting plane
//! multigraph is traversed by an Euler tour whose successive visits to a vertex
//! never cross.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freespace::FreeSpaceGraph;
use crate::geometry::{
    line_intersection_q, on_segment_q, param_on_q, segments_properly_cross_q, signed_area_sign_q,
    winding_number_q, Point, QPoint,
};
use crate::scalar::Weight;
use crate::walk::Walk;

/// Closed polygonal chain: edge `i` runs from `vertices[i]` to
/// `vertices[(i + 1) % len]`. One vertex and no weights is a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<S> {
    pub vertices: Vec<QPoint>,
    pub weights: Vec<S>,
}

impl<S: Weight> Polygon<S> {
    pub fn new(vertices: Vec<QPoint>, weights: Vec<S>) -> Result<Self> {
        let expected = if vertices.len() < 2 { 0 } else { vertices.len() };
        if weights.len() != expected {
            return Err(Error::Internal(format!(
                "polygon with {} vertices needs {expected} weights, got {}",
                vertices.len(),
                weights.len()
            )));
        }
        Ok(Polygon { vertices, weights })
    }

    /// Polygon through lattice points with Euclidean edge weights in coordinate units.
    pub fn from_points(pts: &[Point]) -> Self {
        let vertices: Vec<QPoint> = pts.iter().map(|&p| p.into()).collect();
        let weights = if pts.len() < 2 {
            Vec::new()
        } else {
            (0..pts.len())
                .map(|i| S::from_f64_lossy(pts[i].dist(pts[(i + 1) % pts.len()])))
                .collect()
        };
        Polygon { vertices, weights }
    }

    /// The closed walk as a polygon, with free-space edge weights.
    pub fn from_walk(walk: &Walk<S>, fsg: &FreeSpaceGraph<S>) -> Result<Self> {
        let ring = walk.ring(fsg);
        let weights = if ring.len() < 2 {
            Vec::new()
        } else {
            walk.vertices
                .windows(2)
                .map(|w| {
                    fsg.weight(w[0], w[1]).ok_or_else(|| {
                        Error::Internal(format!("walk step {}-{} is not a free-space edge", w[0], w[1]))
                    })
                })
                .collect::<Result<Vec<S>>>()?
        };
        Polygon::new(ring.into_iter().map(QPoint::from).collect(), weights)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge(&self, i: usize) -> (&QPoint, &QPoint) {
        (&self.vertices[i], &self.vertices[(i + 1) % self.vertices.len()])
    }

    pub fn weight(&self) -> S {
        self.weights.iter().fold(S::zero(), |a, &w| a + w)
    }

    pub fn winding_number(&self, x: &QPoint) -> Result<i64> {
        winding_number_q(&self.vertices, x)
    }

    /// Lattice vertices, if every vertex is integral.
    pub fn lattice_vertices(&self) -> Option<Vec<Point>> {
        self.vertices.iter().map(QPoint::to_point).collect()
    }

    /// Free-space vertex ids of a closed walk along the same vertices, if all
    /// vertices are free-space vertices joined by free-space edges.
    pub fn to_walk(&self, fsg: &FreeSpaceGraph<S>) -> Option<Walk<S>> {
        let pts = self.lattice_vertices()?;
        let mut ids: Vec<usize> = pts.iter().map(|&p| fsg.vertex_id(p)).collect::<Option<_>>()?;
        if ids.len() > 1 {
            ids.push(ids[0]);
        }
        if ids.is_empty() {
            return Some(Walk::empty());
        }
        Walk::closed_from(ids, fsg).ok()
    }

    /// Same polygon traversed in the opposite direction, starting at the same vertex.
    pub fn reversed(&self) -> Self {
        if self.vertices.len() < 2 {
            return self.clone();
        }
        let mut vertices = vec![self.vertices[0].clone()];
        vertices.extend(self.vertices[1..].iter().rev().cloned());
        let weights = self.weights.iter().rev().copied().collect();
        Polygon { vertices, weights }
    }
}

/// Segment between two graph vertices (`a < b`), with one weight per copy.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiEdge<S> {
    pub a: usize,
    pub b: usize,
    pub weights: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneMultigraph<S> {
    pub vertices: Vec<QPoint>,
    pub edges: Vec<MultiEdge<S>>,
    /// Traversal of the subdivided walk as `(edge, forward)`; the `j`-th visit of
    /// an edge is its copy `j`. Empty once multiplicities have been reduced.
    pub walk: Vec<(usize, bool)>,
}

impl<S: Weight> PlaneMultigraph<S> {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.a == v) as usize * e.weights.len() + (e.b == v) as usize * e.weights.len())
            .sum()
    }

    pub fn copy_count(&self) -> usize {
        self.edges.iter().map(|e| e.weights.len()).sum()
    }

    pub fn weight(&self) -> S {
        self.edges
            .iter()
            .flat_map(|e| e.weights.iter())
            .fold(S::zero(), |a, &w| a + w)
    }

    fn connected(&self) -> bool {
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        (1..n).all(|v| uf.find(v) == uf.find(0))
    }

    /// Edge ends around each vertex in counterclockwise order, as
    /// `(edge, copy, at_a)`. Copies of an edge are ascending around `a` and
    /// descending around `b`, as parallel strands would be drawn.
    pub fn rotation(&self) -> Vec<Vec<(usize, usize, bool)>> {
        let mut rot: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            for c in 0..e.weights.len() {
                rot[e.a].push((i, c, true));
                rot[e.b].push((i, c, false));
            }
        }
        for (v, ends) in rot.iter_mut().enumerate() {
            let origin = &self.vertices[v];
            let dir = |&(e, _, at_a): &(usize, usize, bool)| {
                let edge = &self.edges[e];
                let other = &self.vertices[if at_a { edge.b } else { edge.a }];
                (&other.x - &origin.x, &other.y - &origin.y)
            };
            ends.sort_by(|x, y| {
                let (dx1, dy1) = dir(x);
                let (dx2, dy2) = dir(y);
                direction_cmp(&dx1, &dy1, &dx2, &dy2).then_with(|| {
                    debug_assert_eq!(x.0, y.0);
                    if x.2 {
                        x.1.cmp(&y.1)
                    } else {
                        y.1.cmp(&x.1)
                    }
                })
            });
        }
        rot
    }
}

/// Counterclockwise order of directions starting from the positive x-axis.
pub(crate) fn direction_cmp(
    dx1: &BigRational,
    dy1: &BigRational,
    dx2: &BigRational,
    dy2: &BigRational,
) -> Ordering {
    let half = |dx: &BigRational, dy: &BigRational| {
        if dy.is_positive() || (dy.is_zero() && dx.is_positive()) {
            0
        } else {
            1
        }
    };
    half(dx1, dy1).cmp(&half(dx2, dy2)).then_with(|| {
        let c = dx1 * dy2 - dy1 * dx2;
        if c.is_positive() {
            Ordering::Less
        } else if c.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UncrossReport {
    /// Edges of the input walk.
    pub t: usize,
    /// Distinct interior crossing points.
    pub s: usize,
    /// Distinct walk vertices lying in the relative interior of a walk edge.
    pub forks: usize,
    pub discarded_pairs: usize,
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[derive(Clone, Copy)]
struct Bbox {
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Bbox {
    fn of(a: &QPoint, b: &QPoint) -> Self {
        let (ax, ay) = a.to_f64();
        let (bx, by) = b.to_f64();
        let pad = |v: f64| 1e-9 * (v.abs() + 1.0);
        Bbox {
            lo: (ax.min(bx) - pad(ax.min(bx)), ay.min(by) - pad(ay.min(by))),
            hi: (ax.max(bx) + pad(ax.max(bx)), ay.max(by) + pad(ay.max(by))),
        }
    }

    fn point(p: &QPoint) -> Self {
        Bbox::of(p, p)
    }

    fn overlaps(&self, o: &Bbox) -> bool {
        self.lo.0 <= o.hi.0 && o.lo.0 <= self.hi.0 && self.lo.1 <= o.hi.1 && o.lo.1 <= self.hi.1
    }
}

/// Cuts every edge at forks and interior crossings. Edges of zero length are dropped.
pub fn subdivide_walk<S: Weight>(poly: &Polygon<S>) -> Result<(PlaneMultigraph<S>, UncrossReport)> {
    let mut segs: Vec<(QPoint, QPoint, S)> = Vec::new();
    for i in 0..poly.edge_count() {
        let (a, b) = poly.edge(i);
        if a != b {
            segs.push((a.clone(), b.clone(), poly.weights[i]));
        }
    }
    let mut report = UncrossReport { t: segs.len(), ..Default::default() };
    if segs.is_empty() {
        let vertices = poly.vertices.first().cloned().into_iter().collect();
        return Ok((PlaneMultigraph { vertices, edges: Vec::new(), walk: Vec::new() }, report));
    }
    let boxes: Vec<Bbox> = segs.iter().map(|(a, b, _)| Bbox::of(a, b)).collect();
    let mut splits: Vec<Vec<QPoint>> = vec![Vec::new(); segs.len()];
    let mut forks: HashSet<QPoint> = HashSet::new();
    let mut crossings: HashSet<QPoint> = HashSet::new();

    let mut distinct: Vec<QPoint> = segs.iter().map(|s| s.0.clone()).collect();
    distinct.sort();
    distinct.dedup();
    for v in &distinct {
        let vb = Bbox::point(v);
        for (i, (a, b, _)) in segs.iter().enumerate() {
            if boxes[i].overlaps(&vb) && v != a && v != b && on_segment_q(v, a, b) {
                splits[i].push(v.clone());
                forks.insert(v.clone());
            }
        }
    }
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if !boxes[i].overlaps(&boxes[j]) {
                continue;
            }
            let (a, b, _) = &segs[i];
            let (c, d, _) = &segs[j];
            if segments_properly_cross_q(a, b, c, d) {
                let x = line_intersection_q(a, b, c, d)
                    .ok_or_else(|| Error::Internal("crossing segments are parallel".into()))?;
                splits[i].push(x.clone());
                splits[j].push(x.clone());
                crossings.insert(x);
            }
        }
    }
    report.s = crossings.len();
    report.forks = forks.len();

    let mut g = PlaneMultigraph { vertices: Vec::new(), edges: Vec::new(), walk: Vec::new() };
    let mut vid: HashMap<QPoint, usize> = HashMap::new();
    let mut eid: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, (a, b, w)) in segs.iter().enumerate() {
        let mut pts: Vec<(BigRational, QPoint)> =
            splits[i].drain(..).map(|x| (param_on_q(&x, a, b), x)).collect();
        pts.push((BigRational::zero(), a.clone()));
        pts.push((BigRational::from_integer(1.into()), b.clone()));
        pts.sort_by(|x, y| x.0.cmp(&y.0));
        pts.dedup_by(|x, y| x.0 == y.0);
        for win in pts.windows(2) {
            let (t0, p0) = &win[0];
            let (t1, p1) = &win[1];
            let frac = (t1 - t0).to_f64().unwrap_or(1.0);
            let piece = if pts.len() == 2 { *w } else { *w * S::from_f64_lossy(frac) };
            let mut id = |p: &QPoint| {
                let next = g.vertices.len();
                *vid.entry(p.clone()).or_insert_with(|| {
                    g.vertices.push(p.clone());
                    next
                })
            };
            let (u, v) = (id(p0), id(p1));
            let key = (u.min(v), u.max(v));
            let e = *eid.entry(key).or_insert_with(|| {
                g.edges.push(MultiEdge { a: key.0, b: key.1, weights: Vec::new() });
                g.edges.len() - 1
            });
            g.edges[e].weights.push(piece);
            g.walk.push((e, u < v));
        }
    }
    Ok((g, report))
}

/// Reduces each multiplicity to 1 (odd) or 2 (even), keeping the lightest
/// copies. Returns the number of discarded pairs.
pub fn reduce_multiplicities<S: Weight>(g: &mut PlaneMultigraph<S>) -> Result<usize> {
    let mut discarded = 0;
    for e in &mut g.edges {
        let m = e.weights.len();
        let keep = if m % 2 == 1 { 1 } else { 2 };
        if m > keep {
            e.weights.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            e.weights.truncate(keep);
            discarded += (m - keep) / 2;
        }
    }
    g.walk.clear();
    if !g.connected() {
        return Err(Error::DisconnectedAfterReduction);
    }
    Ok(discarded)
}

/// Closed tour: `vertices[i] -> vertices[i + 1]` along copy `edges[i] = (edge, copy)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Euler tour in which the two edge ends used at each visit of a vertex never
/// interleave with those of another visit in the rotation order.
pub fn non_crossing_euler_tour<S: Weight>(g: &PlaneMultigraph<S>) -> Result<Tour> {
    if g.edges.is_empty() {
        return Ok(Tour { vertices: g.vertices.first().map(|_| 0).into_iter().collect(), edges: Vec::new() });
    }
    let n = g.vertices.len();
    if (0..n).any(|v| g.degree(v) % 2 == 1) {
        return Err(Error::NotEulerian);
    }
    if !g.connected() {
        return Err(Error::NotConnected);
    }
    let mut offset = Vec::with_capacity(g.edges.len());
    let mut copies = 0;
    for e in &g.edges {
        offset.push(copies);
        copies += e.weights.len();
    }
    let mut copy_of = vec![(0, 0); copies];
    for (i, e) in g.edges.iter().enumerate() {
        for c in 0..e.weights.len() {
            copy_of[offset[i] + c] = (i, c);
        }
    }
    // end 2x sits at edge a, end 2x + 1 at edge b
    let end = |e: usize, c: usize, at_a: bool| 2 * (offset[e] + c) + (!at_a) as usize;
    let vertex_of = |x: usize| {
        let (e, _) = copy_of[x / 2];
        if x.is_multiple_of(2) {
            g.edges[e].a
        } else {
            g.edges[e].b
        }
    };
    let rot: Vec<Vec<usize>> = g
        .rotation()
        .into_iter()
        .map(|ends| ends.into_iter().map(|(e, c, at_a)| end(e, c, at_a)).collect())
        .collect();
    let mut partner = vec![usize::MAX; 2 * copies];
    for ends in &rot {
        for pair in ends.chunks(2) {
            partner[pair[0]] = pair[1];
            partner[pair[1]] = pair[0];
        }
    }

    let mut cycle = vec![usize::MAX; copies];
    let mut cycles = 0;
    for start in 0..copies {
        if cycle[start] != usize::MAX {
            continue;
        }
        let mut x = 2 * start;
        loop {
            cycle[x / 2] = cycles;
            x = partner[x ^ 1];
            if x == 2 * start {
                break;
            }
        }
        cycles += 1;
    }

    let mut uf = UnionFind::new(cycles);
    for ends in &rot {
        let pairs = ends.len() / 2;
        let mut block_start = 0;
        for j in 1..pairs {
            let cur = cycle[ends[2 * j] / 2];
            let blk = cycle[ends[block_start] / 2];
            if uf.find(cur) == uf.find(blk) {
                block_start = 2 * j;
                continue;
            }
            // outer chord (s, 2j - 1) and (2j, 2j + 1) become (s, 2j + 1) and (2j - 1, 2j)
            let (s, l, r, e) = (ends[block_start], ends[2 * j - 1], ends[2 * j], ends[2 * j + 1]);
            partner[s] = e;
            partner[e] = s;
            partner[l] = r;
            partner[r] = l;
            uf.union(cur, blk);
        }
    }

    let mut tour = Tour { vertices: Vec::new(), edges: Vec::new() };
    let mut x = 0;
    loop {
        tour.vertices.push(vertex_of(x));
        tour.edges.push(copy_of[x / 2]);
        x = partner[x ^ 1];
        if x == 0 {
            break;
        }
        if tour.edges.len() > copies {
            return Err(Error::Internal("tour does not close".into()));
        }
    }
    if tour.edges.len() != copies {
        return Err(Error::NotConnected);
    }
    Ok(tour)
}

/// Weakly simple, counterclockwise polygon of weight at most that of `poly`,
/// with the same winding parity at every point off both.
pub fn uncross<S: Weight>(poly: &Polygon<S>) -> Result<(Polygon<S>, UncrossReport)> {
    let (mut g, mut report) = subdivide_walk(poly)?;
    if g.edges.is_empty() {
        let out = Polygon { vertices: g.vertices, weights: Vec::new() };
        return Ok((out, report));
    }
    report.discarded_pairs = reduce_multiplicities(&mut g)?;
    let tour = non_crossing_euler_tour(&g)?;
    let vertices: Vec<QPoint> = tour.vertices.iter().map(|&v| g.vertices[v].clone()).collect();
    let weights = tour.edges.iter().map(|&(e, c)| g.edges[e].weights[c]).collect();
    let mut out = Polygon { vertices, weights };
    if signed_area_sign_q(&out.vertices) < 0 {
        out = out.reversed();
    }
    Ok((out, report))
}

/// [`uncross`] applied to a free-space walk.
pub fn uncross_walk<S: Weight>(
    walk: &Walk<S>,
    fsg: &FreeSpaceGraph<S>,
) -> Result<(Polygon<S>, UncrossReport)> {
    uncross(&Polygon::from_walk(walk, fsg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(i64, i64)]) -> Polygon<f64> {
        let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Polygon::from_points(&pts)
    }

    #[test]
    fn square_unchanged() {
        let p = poly(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep, UncrossReport { t: 4, s: 0, forks: 0, discarded_pairs: 0 });
        assert_eq!(out.vertices.len(), 4);
        assert!((out.weight() - 8.0).abs() < 1e-12);
        assert_eq!(signed_area_sign_q(&out.vertices), 1);
    }

    #[test]
    fn clockwise_square_is_reversed() {
        let p = poly(&[(0, 0), (0, 2), (2, 2), (2, 0)]);
        let (out, _) = uncross(&p).unwrap();
        assert_eq!(signed_area_sign_q(&out.vertices), 1);
    }

    #[test]
    fn bowtie_crossing_becomes_vertex() {
        let p = poly(&[(0, 0), (2, 2), (2, 0), (0, 2)]);
        let (g, rep) = subdivide_walk(&p).unwrap();
        assert_eq!(rep.s, 1);
        let x = QPoint::from(Point::new(1, 1));
        let v = g.vertices.iter().position(|q| *q == x).unwrap();
        assert_eq!(g.degree(v), 4);
        let (out, _) = uncross(&p).unwrap();
        assert_eq!(out.vertices.len(), 6);
        assert!((out.weight() - p.weight()).abs() < 1e-12);
    }

    #[test]
    fn fork_is_subdivided() {
        // the edge (0,0)-(4,0) passes through the walk vertex (2,0)
        let p = poly(&[(0, 0), (4, 0), (4, 2), (2, 0), (2, -2)]);
        let (g, rep) = subdivide_walk(&p).unwrap();
        assert_eq!(rep.s, 0);
        assert_eq!(rep.forks, 1);
        assert!(g.vertices.contains(&QPoint::from(Point::new(2, 0))));
    }

    #[test]
    fn multiplicities() {
        let mut g = PlaneMultigraph::<f64> {
            vertices: vec![Point::new(0, 0).into(), Point::new(1, 0).into()],
            edges: vec![MultiEdge { a: 0, b: 1, weights: vec![4.0, 1.0, 3.0, 2.0] }],
            walk: Vec::new(),
        };
        assert_eq!(reduce_multiplicities(&mut g).unwrap(), 1);
        assert_eq!(g.edges[0].weights, vec![1.0, 2.0]);
        g.edges[0].weights = vec![5.0, 1.0, 3.0];
        assert_eq!(reduce_multiplicities(&mut g).unwrap(), 1);
        assert_eq!(g.edges[0].weights, vec![1.0]);
    }

    #[test]
    fn doubled_path() {
        let p = poly(&[(0, 0), (1, 0), (2, 0), (1, 0)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep.discarded_pairs, 0);
        assert_eq!(out.vertices.len(), 4);
        assert!((out.weight() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn square_twice_keeps_both_copies() {
        let p = poly(&[(0, 0), (1, 0), (1, 1), (0, 1), (0, 0), (1, 0), (1, 1), (0, 1)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep.discarded_pairs, 0);
        assert_eq!(out.edge_count(), 8);
        assert!((out.weight() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn triangles_sharing_a_vertex() {
        let p = poly(&[(0, 0), (2, 0), (1, 1), (0, 2), (2, 2), (1, 1)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep.s, 0);
        assert_eq!(out.edge_count(), 6);
        // both lobes keep winding 1 and the far side stays outside
        let inside = |x: i64, y: i64, den: i64| QPoint::from_ratio(x as i128, y as i128, den as i128);
        assert_eq!(out.winding_number(&inside(4, 1, 4)).unwrap().abs(), 1);
        assert_eq!(out.winding_number(&inside(4, 7, 4)).unwrap().abs(), 1);
        assert_eq!(out.winding_number(&inside(1, 4, 4)).unwrap(), 0);
    }

    #[test]
    fn quadruple_segment_drops_a_pair() {
        let p = poly(&[(0, 0), (1, 0), (0, 0), (1, 0)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep.discarded_pairs, 1);
        assert_eq!(out.edge_count(), 2);
    }

    #[test]
    fn point_walk() {
        let p = poly(&[(3, 3)]);
        let (out, rep) = uncross(&p).unwrap();
        assert_eq!(rep.t, 0);
        assert_eq!(out.vertices.len(), 1);
    }
}
