//! Independent checks of solution polygons: weak simplicity, free-space
//! containment, feasibility and cost.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    on_segment_q, orient_q, param_on_q, segments_properly_cross_q, winding_number_q, QPoint,
};
use crate::instance::{Instance, Kind, Mode};
use crate::scalar::Weight;
use crate::uncross::{subdivide_walk, PlaneMultigraph, Polygon};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WeakSimplicityReport {
    pub weakly_simple: bool,
    /// Distinct points where two edges cross properly.
    pub proper_crossings: usize,
    /// Largest number of traversals of a segment after subdivision.
    pub max_multiplicity: usize,
    /// Distinct winding numbers over one sample point on each side of every segment.
    pub winding_values: Vec<i64>,
    pub windings_ok: bool,
    /// Whether successive visits to each vertex can be drawn without crossing.
    pub pairing_ok: bool,
    pub samples: usize,
}

/// Runs the four weak-simplicity checks on a closed polygon. Conservative:
/// a polygon that passes can be perturbed into a simple one.
pub fn check_weak_simplicity<S: Weight>(poly: &Polygon<S>) -> Result<WeakSimplicityReport> {
    let (g, rep) = subdivide_walk(poly)?;
    let mut out = WeakSimplicityReport {
        proper_crossings: rep.s,
        max_multiplicity: g.edges.iter().map(|e| e.weights.len()).max().unwrap_or(0),
        ..Default::default()
    };
    let (values, samples) = side_windings(&g, poly)?;
    out.samples = samples;
    out.windings_ok = values.iter().all(|w| *w == 0 || *w == 1) || values.iter().all(|w| *w == 0 || *w == -1);
    out.winding_values = values.into_iter().collect();
    out.pairing_ok = out.max_multiplicity <= 2 && pairing_is_non_crossing(&g);
    out.weakly_simple = out.proper_crossings == 0 && out.max_multiplicity <= 2 && out.windings_ok && out.pairing_ok;
    Ok(out)
}

pub fn is_weakly_simple<S: Weight>(poly: &Polygon<S>) -> bool {
    check_weak_simplicity(poly).is_ok_and(|r| r.weakly_simple)
}

/// Winding numbers just off both sides of every segment's midpoint. The sample
/// lies halfway to the nearest other segment along the normal, so it is in the
/// face adjacent to that side.
fn side_windings<S: Weight>(g: &PlaneMultigraph<S>, poly: &Polygon<S>) -> Result<(BTreeSet<i64>, usize)> {
    let mut values = BTreeSet::new();
    let mut samples = 0;
    let two = BigRational::from_integer(2.into());
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = (&g.vertices[e.a], &g.vertices[e.b]);
        let m = QPoint::new((&a.x + &b.x) / &two, (&a.y + &b.y) / &two);
        let nx = -(&b.y - &a.y);
        let ny = &b.x - &a.x;
        let mut pos: Option<BigRational> = None;
        let mut neg: Option<BigRational> = None;
        let mut hit = |s: BigRational| {
            if s.is_positive() {
                if pos.as_ref().is_none_or(|p| s < *p) {
                    pos = Some(s);
                }
            } else if s.is_negative() && neg.as_ref().is_none_or(|p| s > *p) {
                neg = Some(s);
            }
        };
        for (j, f) in g.edges.iter().enumerate() {
            if i == j {
                continue;
            }
            let (c, d) = (&g.vertices[f.a], &g.vertices[f.b]);
            let ex = &d.x - &c.x;
            let ey = &d.y - &c.y;
            let den = &nx * &ey - &ny * &ex;
            let wx = &c.x - &m.x;
            let wy = &c.y - &m.y;
            if den.is_zero() {
                // parallel to the normal: hits only if on the normal line
                if (&wx * &ny - &wy * &nx).is_zero() {
                    let nn = &nx * &nx + &ny * &ny;
                    hit((&wx * &nx + &wy * &ny) / &nn);
                    let (vx, vy) = (&d.x - &m.x, &d.y - &m.y);
                    hit((&vx * &nx + &vy * &ny) / &nn);
                }
                continue;
            }
            let s = (&wx * &ey - &wy * &ex) / &den;
            let u = (&wx * &ny - &wy * &nx) / &den;
            if !u.is_negative() && u <= BigRational::one() {
                hit(s);
            }
        }
        let half_pos = pos.map_or_else(BigRational::one, |s| s / &two);
        let half_neg = neg.map_or_else(|| -BigRational::one(), |s| s / &two);
        for s in [half_pos, half_neg] {
            let x = QPoint::new(&m.x + &s * &nx, &m.y + &s * &ny);
            let w = winding_number_q(&poly.vertices, &x)
                .map_err(|_| Error::Internal("side sample landed on the polygon".into()))?;
            values.insert(w);
            samples += 1;
        }
    }
    Ok((values, samples))
}

/// Parity union-find: each node stores its parity relative to its parent.
struct ParityUf {
    parent: Vec<usize>,
    parity: Vec<u8>,
}

impl ParityUf {
    fn new(n: usize) -> Self {
        ParityUf { parent: (0..n).collect(), parity: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let (r, p) = self.find(self.parent[x]);
        self.parent[x] = r;
        self.parity[x] ^= p;
        (r, self.parity[x])
    }

    /// Records `value(a) ^ value(b) == rel`; false on contradiction.
    fn relate(&mut self, a: usize, b: usize, rel: u8) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == rel;
        }
        self.parent[ra] = rb;
        self.parity[ra] = pa ^ pb ^ rel;
        true
    }
}

/// Decides whether the order of the two copies of each doubled segment can be
/// chosen so that, at every vertex, the pairs of edge ends used by successive
/// visits are non-crossing in the rotation order.
fn pairing_is_non_crossing<S: Weight>(g: &PlaneMultigraph<S>) -> bool {
    if g.walk.is_empty() {
        return true;
    }
    // copy index of each step
    let mut seen = vec![0usize; g.edges.len()];
    let steps: Vec<(usize, usize, bool)> = g
        .walk
        .iter()
        .map(|&(e, fwd)| {
            let c = seen[e];
            seen[e] += 1;
            (e, c, fwd)
        })
        .collect();
    let rot = g.rotation();
    // end key: (edge, copy, at_a)
    let mut pos: HashMap<(usize, usize, bool), (usize, usize)> = HashMap::new();
    for (v, ends) in rot.iter().enumerate() {
        for (i, &end) in ends.iter().enumerate() {
            pos.insert(end, (v, i));
        }
    }
    let mut partner: HashMap<(usize, usize, bool), (usize, usize, bool)> = HashMap::new();
    let t = steps.len();
    for i in 0..t {
        let (e1, c1, f1) = steps[i];
        let (e2, c2, f2) = steps[(i + 1) % t];
        let arrive = (e1, c1, !f1);
        let leave = (e2, c2, f2);
        partner.insert(arrive, leave);
        partner.insert(leave, arrive);
    }

    let doubled: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].weights.len() == 2).collect();
    let var: HashMap<usize, usize> = doubled.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let zero = doubled.len();
    let mut uf = ParityUf::new(doubled.len() + 1);

    for ends in &rot {
        let d = ends.len();
        let block_start = |end: (usize, usize, bool)| {
            let (_, i) = pos[&end];
            let (e, c, at_a) = end;
            let twin = (e, 1 - c, at_a);
            match pos.get(&twin) {
                Some(&(_, j)) if g.edges[e].weights.len() == 2 => i.min(j),
                _ => i,
            }
        };
        for x in 0..d {
            let (e, c0, at_a) = ends[x];
            if g.edges[e].weights.len() != 2 || x + 1 >= d || ends[x + 1].0 != e {
                continue;
            }
            let c1 = ends[x + 1].1;
            debug_assert_eq!(c1, 1 - c0);
            let t0 = partner[&(e, c0, at_a)];
            let t1 = partner[&(e, c1, at_a)];
            if t0.0 == e && t1.0 == e {
                continue;
            }
            let (b0, b1) = (block_start(t0), block_start(t1));
            let var_e = var[&e];
            if b0 == b1 {
                // both visits continue along the same doubled segment f:
                // nested pairing puts the copy at x + 1 against the first copy of f
                let f = t0.0;
                let y0 = ends[b0];
                let d0 = y0.1;
                // partner copy of the copy sitting at x + 1 (without swaps)
                let tau = partner[&(e, c1, at_a)].1;
                let rel = (tau ^ d0) as u8;
                if !uf.relate(var_e, var[&f], rel) {
                    return false;
                }
            } else {
                let key = |b: usize| (b + d - x) % d;
                let first = if key(b0) < key(b1) { c0 } else { c1 };
                // the copy at x + 1 must be the one heading to the nearer block
                let rel = (c1 ^ first) as u8;
                if !uf.relate(var_e, zero, rel) {
                    return false;
                }
            }
        }
    }

    // concrete copy orders, then a stack check at each vertex
    let (rz, pz) = uf.find(zero);
    let mut flip = vec![false; g.edges.len()];
    for (i, &e) in doubled.iter().enumerate() {
        let (r, p) = uf.find(i);
        flip[e] = if r == rz { (p ^ pz) == 1 } else { p == 1 };
    }
    for ends in &rot {
        let actual = |(e, c, a): (usize, usize, bool)| (e, if flip[e] { 1 - c } else { c }, a);
        let mut at: HashMap<(usize, usize, bool), usize> = HashMap::new();
        for (i, &end) in ends.iter().enumerate() {
            at.insert(actual(end), i);
        }
        let mut stack: Vec<usize> = Vec::new();
        for (i, &end) in ends.iter().enumerate() {
            let me = actual(end);
            let other = at[&partner[&me]];
            if other > i {
                stack.push(i);
            } else if stack.pop() != Some(other) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution<S> {
    #[serde(skip)]
    pub polygon: Polygon<S>,
    pub cost: S,
    pub weight: S,
    pub penalty: S,
    pub enclosed_optional: Vec<String>,
    pub feasible: bool,
    pub mode: Mode,
}

/// Recomputes the cost of `poly` from the instance: edge lengths (squeezed
/// weights prorated where an edge runs along a squeezed edge) plus the
/// penalties owed under the instance's mode. Enclosure means nonzero winding.
pub fn evaluate_solution<S: Weight>(inst: &Instance<S>, poly: &Polygon<S>) -> Result<Solution<S>> {
    let rings: Vec<Vec<QPoint>> = inst
        .polygons
        .iter()
        .map(|p| p.vertices.iter().map(|&v| v.into()).collect())
        .collect();
    let vertices: Vec<QPoint> = inst.distinct_vertices().into_iter().map(QPoint::from).collect();
    let squeezed: Vec<(QPoint, QPoint, S)> = inst
        .squeezed_edges
        .iter()
        .map(|s| (s.segment.a.into(), s.segment.b.into(), s.weight))
        .collect();
    let strictly_inside = |x: &QPoint| {
        inst.polygons.iter().zip(&rings).any(|(p, ring)| match winding_number_q(ring, x) {
            Err(_) => false,
            Ok(w) => (w != 0) != p.unbounded,
        })
    };

    let mut weight = S::zero();
    if poly.vertices.len() == 1 && strictly_inside(&poly.vertices[0]) {
        let v = poly.vertices[0].to_point().unwrap_or_default();
        return Err(Error::FreeSpaceViolation { a: v, b: v });
    }
    let two = BigRational::from_integer(2.into());
    for i in 0..poly.edge_count() {
        let (a, b) = poly.edge(i);
        let mut cuts: Vec<(BigRational, QPoint)> = vertices
            .iter()
            .filter(|v| *v != a && *v != b && on_segment_q(v, a, b))
            .map(|v| (param_on_q(v, a, b), v.clone()))
            .collect();
        cuts.push((BigRational::zero(), a.clone()));
        cuts.push((BigRational::one(), b.clone()));
        cuts.sort_by(|x, y| x.0.cmp(&y.0));
        for w in cuts.windows(2) {
            let (p0, p1) = (&w[0].1, &w[1].1);
            let violation = || Error::FreeSpaceViolation {
                a: a.to_point().unwrap_or_default(),
                b: b.to_point().unwrap_or_default(),
            };
            let crosses = rings.iter().any(|ring| {
                (0..ring.len()).any(|j| segments_properly_cross_q(p0, p1, &ring[j], &ring[(j + 1) % ring.len()]))
            });
            let mid = QPoint::new((&p0.x + &p1.x) / &two, (&p0.y + &p1.y) / &two);
            if crosses || strictly_inside(&mid) {
                return Err(violation());
            }
            let along = squeezed
                .iter()
                .find(|(c, d, _)| orient_q(c, d, p0) == 0 && on_segment_q(p0, c, d) && on_segment_q(p1, c, d));
            let piece = match along {
                Some((c, d, sw)) => {
                    let frac = (param_on_q(p1, c, d) - param_on_q(p0, c, d)).abs();
                    *sw * S::from_f64_lossy(frac.to_f64().unwrap_or(f64::NAN))
                }
                None => S::from_f64_lossy(p0.dist(p1) / inst.units_per_length()),
            };
            weight = weight + piece;
        }
    }

    let mut penalty = S::zero();
    let mut feasible = true;
    let mut enclosed_optional = Vec::new();
    for (i, p) in inst.polygons.iter().enumerate() {
        if p.unbounded {
            if inst.mode == Mode::Invert && p.kind == Kind::Optional {
                penalty = S::add_inf(penalty, p.penalty);
            }
            continue;
        }
        let r: QPoint = inst.reference(i).into();
        let enclosed = winding_number_q(&poly.vertices, &r)
            .map_err(|_| Error::ReferenceOnWalk(p.id.clone()))?
            != 0;
        match (p.kind, inst.mode) {
            (Kind::Required, Mode::Enclose) => feasible &= enclosed,
            (Kind::Required, Mode::Invert) => feasible &= !enclosed,
            (Kind::Optional, mode) => {
                if enclosed {
                    enclosed_optional.push(p.id.clone());
                }
                if enclosed == (mode == Mode::Enclose) {
                    penalty = S::add_inf(penalty, p.penalty);
                }
            }
        }
    }
    Ok(Solution {
        polygon: poly.clone(),
        cost: S::add_inf(weight, penalty),
        weight,
        penalty,
        enclosed_optional,
        feasible,
        mode: inst.mode,
    })
}
