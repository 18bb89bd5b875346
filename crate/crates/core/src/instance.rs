//! Problem instances: polygons, squeezed edges and validation.

mod graph;
mod json;
mod refpoint;

use std::collections::{BTreeSet, HashMap};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    locate, locate_scaled, on_segment, segments_properly_cross, signed_area2,
    strictly_inside_segment, Location, Point, Segment,
};
use crate::scalar::Weight;

pub use graph::{graph_to_instance, FaceTag, PlaneGraphInput};
pub use json::{load_instance, parse_instance, parse_value};
pub use refpoint::{pick_reference_point, RefPick, REFINE_FACTOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enclose,
    Invert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Required,
    Optional,
}

#[derive(Clone, Debug)]
pub struct InputPolygon<S> {
    pub id: String,
    /// Counterclockwise for bounded polygons, clockwise for the unbounded one.
    pub vertices: Vec<Point>,
    pub kind: Kind,
    /// Zero for required polygons.
    pub penalty: S,
    pub reference_point: Option<Point>,
    /// The polygon is the closure of the complement of the region its ring bounds.
    pub unbounded: bool,
}

impl<S: Weight> InputPolygon<S> {
    pub fn required(id: impl Into<String>, vertices: Vec<Point>) -> Self {
        InputPolygon {
            id: id.into(),
            vertices,
            kind: Kind::Required,
            penalty: S::zero(),
            reference_point: None,
            unbounded: false,
        }
    }

    pub fn optional(id: impl Into<String>, vertices: Vec<Point>, penalty: S) -> Self {
        InputPolygon {
            id: id.into(),
            vertices,
            kind: Kind::Optional,
            penalty,
            reference_point: None,
            unbounded: false,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Whether `x` lies in the open interior of this polygon.
    pub fn strictly_contains(&self, x: Point) -> bool {
        let loc = locate(x, &self.vertices);
        if self.unbounded {
            loc == Location::Outside
        } else {
            loc == Location::Inside
        }
    }

    /// [`Self::strictly_contains`] for the point `xn / den`.
    pub fn strictly_contains_scaled(&self, xn: (i128, i128), den: i64) -> bool {
        let loc = locate_scaled(xn, den, &self.vertices);
        if self.unbounded {
            loc == Location::Outside
        } else {
            loc == Location::Inside
        }
    }

    fn bbox(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SqueezedEdge<S> {
    pub segment: Segment,
    pub weight: S,
}

#[derive(Clone, Debug)]
pub struct Instance<S> {
    pub polygons: Vec<InputPolygon<S>>,
    pub squeezed_edges: Vec<SqueezedEdge<S>>,
    pub mode: Mode,
    /// Input coordinate units per unit of length.
    pub scale: i64,
    /// Internal coordinates are input coordinates times this factor.
    pub refinement: i64,
}

impl<S: Weight> Instance<S> {
    pub fn new(polygons: Vec<InputPolygon<S>>, mode: Mode) -> Self {
        Instance {
            polygons,
            squeezed_edges: Vec::new(),
            mode,
            scale: 1,
            refinement: 1,
        }
    }

    pub fn with_squeezed(mut self, a: Point, b: Point, weight: S) -> Self {
        self.squeezed_edges.push(SqueezedEdge {
            segment: Segment::new(a, b),
            weight,
        });
        self
    }

    /// Number of required polygons.
    pub fn k(&self) -> usize {
        self.polygons.iter().filter(|p| p.kind == Kind::Required).count()
    }

    /// Total number of polygon vertices, counted per polygon.
    pub fn n(&self) -> usize {
        self.polygons.iter().map(|p| p.vertices.len()).sum()
    }

    /// Indices of required polygons; position `i` corresponds to mask bit `i`.
    pub fn required_indices(&self) -> Vec<usize> {
        (0..self.polygons.len())
            .filter(|&i| self.polygons[i].kind == Kind::Required)
            .collect()
    }

    /// Reference points of required polygons in mask-bit order.
    pub fn required_refs(&self) -> Vec<Point> {
        self.required_indices()
            .into_iter()
            .map(|i| self.reference(i))
            .collect()
    }

    /// Reference points and penalties of bounded optional polygons.
    pub fn optional_refs(&self) -> Vec<(Point, S)> {
        self.polygons
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == Kind::Optional && !p.unbounded)
            .map(|(i, p)| (self.reference(i), p.penalty))
            .collect()
    }

    /// Penalty of the unbounded polygon, zero if there is none.
    pub fn unbounded_penalty(&self) -> S {
        self.polygons
            .iter()
            .find(|p| p.unbounded)
            .map_or(S::zero(), |p| p.penalty)
    }

    /// Reference point of a bounded polygon. Panics before validation.
    pub fn reference(&self, i: usize) -> Point {
        self.polygons[i]
            .reference_point
            .unwrap_or_else(|| panic!("polygon `{}` has no reference point", self.polygons[i].id))
    }

    /// Internal grid units per unit of length.
    pub fn units_per_length(&self) -> f64 {
        self.scale as f64 * self.refinement as f64
    }

    /// Converts an internal point back to input coordinates.
    pub fn to_input_units(&self, p: Point) -> (f64, f64) {
        let r = self.refinement as f64;
        (p.x as f64 / r, p.y as f64 / r)
    }

    /// Sorted distinct polygon vertices.
    pub fn distinct_vertices(&self) -> Vec<Point> {
        let set: BTreeSet<Point> = self
            .polygons
            .iter()
            .flat_map(|p| p.vertices.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Euclidean length of `ab` in length units.
    pub fn euclidean(&self, a: Point, b: Point) -> S {
        S::from_f64_lossy(a.dist(b) / self.units_per_length())
    }

    /// Multiplies every coordinate by `f`.
    pub fn rescale(&mut self, f: i64) -> Result<()> {
        let limit = crate::geometry::COORD_LIMIT / f;
        let ok = |p: &Point| p.x.abs() <= limit && p.y.abs() <= limit;
        let in_range = self.polygons.iter().all(|p| {
            p.vertices.iter().all(ok) && p.reference_point.as_ref().is_none_or(ok)
        }) && self
            .squeezed_edges
            .iter()
            .all(|e| ok(&e.segment.a) && ok(&e.segment.b));
        if !in_range {
            return Err(Error::Schema(vec![format!(
                "coordinates exceed the supported range after refinement by {f}"
            )]));
        }
        for p in &mut self.polygons {
            for v in &mut p.vertices {
                *v = v.scaled(f);
            }
            if let Some(r) = &mut p.reference_point {
                *r = r.scaled(f);
            }
        }
        for e in &mut self.squeezed_edges {
            e.segment = Segment::new(e.segment.a.scaled(f), e.segment.b.scaled(f));
        }
        self.refinement *= f;
        Ok(())
    }

    /// Weight of a squeezed piece `ab`, if `ab` is one.
    pub fn squeezed_weight(&self, a: Point, b: Point) -> Option<S> {
        let key = Segment::new(a, b).normalized();
        self.squeezed_edges
            .iter()
            .find(|e| e.segment.normalized() == key)
            .map(|e| e.weight)
    }

    /// Squeezed pieces indexed by their normalized segment.
    pub fn squeezed_map(&self) -> HashMap<Segment, S> {
        self.squeezed_edges
            .iter()
            .map(|e| (e.segment.normalized(), e.weight))
            .collect()
    }

    /// Whether `x` lies in the open interior of some polygon.
    pub fn strictly_inside_any(&self, x: Point) -> bool {
        self.polygons.iter().any(|p| p.strictly_contains(x))
    }
}

/// Normalizes orientation, splits edges at touching vertices, checks
/// disjointness of interiors, re-splits squeezed edges and assigns reference points.
/// Running it twice is the identity.
pub fn validate_and_subdivide<S: Weight>(mut inst: Instance<S>) -> Result<Instance<S>> {
    normalize_polygons(&mut inst)?;
    subdivide(&mut inst);
    check_disjoint(&inst)?;
    split_squeezed(&mut inst)?;
    assign_reference_points(&mut inst)?;
    check_reference_points(&inst)?;
    Ok(inst)
}

fn normalize_polygons<S: Weight>(inst: &mut Instance<S>) -> Result<()> {
    let mut errors = Vec::new();
    if inst.polygons.iter().filter(|p| p.unbounded).count() > 1 {
        errors.push("at most one polygon may be unbounded".to_string());
    }
    for p in &mut inst.polygons {
        if p.unbounded && p.kind == Kind::Required {
            errors.push(format!("unbounded polygon `{}` must be optional", p.id));
        }
        if p.vertices.iter().any(|v| !v.in_range()) {
            errors.push(format!("polygon `{}` has out-of-range coordinates", p.id));
            continue;
        }
        p.vertices.dedup();
        while p.vertices.len() > 1 && p.vertices.first() == p.vertices.last() {
            p.vertices.pop();
        }
        let area = signed_area2(&p.vertices);
        if p.vertices.len() < 3 || area == 0 {
            return Err(Error::DegeneratePolygon(p.id.clone()));
        }
        if (area < 0) != p.unbounded {
            p.vertices.reverse();
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema(errors))
    }
}

fn subdivide<S: Weight>(inst: &mut Instance<S>) {
    let all = inst.distinct_vertices();
    for p in &mut inst.polygons {
        let n = p.vertices.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (p.vertices[i], p.vertices[(i + 1) % n]);
            out.push(a);
            let mut inner: Vec<Point> = all
                .iter()
                .copied()
                .filter(|&x| strictly_inside_segment(x, a, b))
                .collect();
            inner.sort_by_key(|x| {
                (x.x as i128 - a.x as i128).abs() + (x.y as i128 - a.y as i128).abs()
            });
            out.extend(inner);
        }
        p.vertices = out;
    }
}

fn boxes_overlap(a: (Point, Point), b: (Point, Point)) -> bool {
    a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y
}

fn check_disjoint<S: Weight>(inst: &Instance<S>) -> Result<()> {
    let polys = &inst.polygons;
    let boxes: Vec<_> = polys.iter().map(|p| p.bbox()).collect();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let (p, q) = (&polys[i], &polys[j]);
            if !p.unbounded && !q.unbounded && !boxes_overlap(boxes[i], boxes[j]) {
                continue;
            }
            if interiors_meet(p, q) || interiors_meet(q, p) {
                return Err(Error::Overlap {
                    first: p.id.clone(),
                    second: q.id.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Whether some vertex, edge or interior sample of `p` lies in the open interior of `q`.
fn interiors_meet<S: Weight>(p: &InputPolygon<S>, q: &InputPolygon<S>) -> bool {
    for e in p.edges() {
        if q.strictly_contains(e.a) || q.strictly_contains_scaled(e.mid2(), 2) {
            return true;
        }
        if q.edges().any(|f| segments_properly_cross(e, f)) {
            return true;
        }
    }
    if !p.unbounded {
        if let Some((xn, den)) = refpoint::interior_sample(&p.vertices) {
            if q.strictly_contains_scaled(xn, den) {
                return true;
            }
        }
    }
    false
}

fn split_squeezed<S: Weight>(inst: &mut Instance<S>) -> Result<()> {
    let mut sides: HashMap<Segment, usize> = HashMap::new();
    for p in &inst.polygons {
        for e in p.edges() {
            *sides.entry(e.normalized()).or_default() += 1;
        }
    }
    let all = inst.distinct_vertices();
    let mut errors = Vec::new();
    let mut pieces: Vec<SqueezedEdge<S>> = Vec::new();
    for e in &inst.squeezed_edges {
        let (a, b) = (e.segment.a, e.segment.b);
        if a == b {
            errors.push(format!("squeezed edge {a}-{b} has zero length"));
            continue;
        }
        let mut cuts: Vec<Point> = all
            .iter()
            .copied()
            .filter(|&x| strictly_inside_segment(x, a, b))
            .collect();
        cuts.sort_by_key(|x| (x.x as i128 - a.x as i128).abs() + (x.y as i128 - a.y as i128).abs());
        let mut chain = vec![a];
        chain.extend(cuts);
        chain.push(b);
        let total = a.dist(b);
        for w in chain.windows(2) {
            let seg = Segment::new(w[0], w[1]).normalized();
            if sides.get(&seg).copied().unwrap_or(0) < 2 {
                errors.push(format!(
                    "squeezed edge {a}-{b} is not a polygon edge with polygons on both sides"
                ));
                break;
            }
            let frac = S::from_f64_lossy(seg.len() / total);
            pieces.push(SqueezedEdge {
                segment: seg,
                weight: e.weight * frac,
            });
        }
    }
    if !errors.is_empty() {
        return Err(Error::Schema(errors));
    }
    pieces.sort_by_key(|e| (e.segment.a, e.segment.b));
    pieces.dedup_by_key(|e| e.segment);
    inst.squeezed_edges = pieces;
    Ok(())
}

fn assign_reference_points<S: Weight>(inst: &mut Instance<S>) -> Result<()> {
    for p in &inst.polygons {
        if let Some(r) = p.reference_point {
            if p.unbounded || !p.strictly_contains(r) {
                return Err(Error::Schema(vec![format!(
                    "reference point {r} of `{}` is not strictly interior",
                    p.id
                )]));
            }
        }
    }
    for pass in 0..2 {
        let all = inst.distinct_vertices();
        let mut picks = Vec::with_capacity(inst.polygons.len());
        let mut retry = false;
        for p in &inst.polygons {
            if p.unbounded || p.reference_point.is_some() {
                picks.push(None);
                continue;
            }
            let pick = pick_reference_point(&p.vertices, &all)?;
            match pick {
                RefPick::General(_) => {}
                RefPick::Degenerate(_) | RefPick::None => retry = true,
            }
            picks.push(Some(pick));
        }
        if retry && pass == 0 {
            inst.rescale(REFINE_FACTOR)?;
            continue;
        }
        for (p, pick) in inst.polygons.iter_mut().zip(picks) {
            match pick {
                None => {}
                Some(RefPick::General(r)) => p.reference_point = Some(r),
                Some(RefPick::Degenerate(r)) => {
                    warn!(
                        "reference point {r} of `{}` is collinear with two polygon vertices",
                        p.id
                    );
                    p.reference_point = Some(r);
                }
                Some(RefPick::None) => {
                    return Err(Error::Internal(format!(
                        "no interior reference point found for `{}`",
                        p.id
                    )))
                }
            }
        }
        return Ok(());
    }
    unreachable!()
}

fn check_reference_points<S: Weight>(inst: &Instance<S>) -> Result<()> {
    for (i, p) in inst.polygons.iter().enumerate() {
        let Some(r) = p.reference_point else { continue };
        for (j, q) in inst.polygons.iter().enumerate() {
            if i == j {
                continue;
            }
            let on_q = q.edges().any(|e| on_segment(r, e.a, e.b));
            if on_q || q.strictly_contains(r) {
                return Err(Error::Overlap {
                    first: p.id.clone(),
                    second: q.id.clone(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn square(x: i64, y: i64, s: i64) -> Vec<Point> {
        vec![
            Point::new(x, y),
            Point::new(x + s, y),
            Point::new(x + s, y + s),
            Point::new(x, y + s),
        ]
    }

    #[test]
    fn shared_edge_needs_no_split() {
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 2)),
                InputPolygon::optional("b", square(2, 0, 2), 1.0),
            ],
            Mode::Enclose,
        )
        .with_squeezed(Point::new(2, 0), Point::new(2, 2), 9.0);
        let v = validate_and_subdivide(inst).unwrap();
        assert_eq!(v.n(), 8);
        assert_eq!(v.squeezed_edges.len(), 1);
    }

    #[test]
    fn touching_vertex_splits_edge() {
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 4)),
                InputPolygon::optional(
                    "b",
                    vec![Point::new(4, 2), Point::new(6, 0), Point::new(8, 2), Point::new(6, 4)],
                    1.0,
                ),
            ],
            Mode::Enclose,
        );
        let before = inst.n();
        let v = validate_and_subdivide(inst).unwrap();
        assert_eq!(v.n(), before + 1);
        assert!(v.polygons[0].vertices.contains(&Point::new(4, 2).scaled(v.refinement)));
    }

    #[test]
    fn overlapping_squares_rejected() {
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 4)),
                InputPolygon::optional("b", square(2, 2, 4), 1.0),
            ],
            Mode::Enclose,
        );
        match validate_and_subdivide(inst) {
            Err(Error::Overlap { first, second }) => {
                assert_eq!((first.as_str(), second.as_str()), ("a", "b"))
            }
            other => panic!("expected overlap, got {other:?}"),
        }
    }

    #[test]
    fn identical_squares_rejected() {
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 4)),
                InputPolygon::required("b", square(0, 0, 4)),
            ],
            Mode::Enclose,
        );
        assert!(matches!(validate_and_subdivide(inst), Err(Error::Overlap { .. })));
    }

    #[test]
    fn nested_square_rejected() {
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 10)),
                InputPolygon::required("b", square(3, 3, 2)),
            ],
            Mode::Enclose,
        );
        assert!(matches!(validate_and_subdivide(inst), Err(Error::Overlap { .. })));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let mut sq = square(0, 0, 2);
        sq.reverse();
        let v = validate_and_subdivide(Instance::<f64>::new(
            vec![InputPolygon::required("a", sq)],
            Mode::Enclose,
        ))
        .unwrap();
        assert!(signed_area2(&v.polygons[0].vertices) > 0);
    }

    #[test]
    fn flat_polygon_is_degenerate() {
        let inst: Instance<f64> = Instance::new(
            vec![InputPolygon::required(
                "flat",
                vec![Point::new(0, 0), Point::new(1, 1), Point::new(2, 2)],
            )],
            Mode::Enclose,
        );
        assert!(matches!(validate_and_subdivide(inst), Err(Error::DegeneratePolygon(_))));
    }

    #[test]
    fn squeezed_edge_must_have_two_sides() {
        let inst: Instance<f64> = Instance::new(
            vec![InputPolygon::required("a", square(0, 0, 2))],
            Mode::Enclose,
        )
        .with_squeezed(Point::new(0, 0), Point::new(2, 0), 1.0);
        assert!(matches!(validate_and_subdivide(inst), Err(Error::Schema(_))));
    }

    #[test]
    fn squeezed_edge_split_proportionally() {
        // b's vertex (2,4) splits the shared edge x = 4... use a taller neighbour.
        let inst: Instance<f64> = Instance::new(
            vec![
                InputPolygon::required("a", square(0, 0, 4)),
                InputPolygon::optional("b", square(4, 0, 2), 0.0),
                InputPolygon::optional("c", square(4, 2, 2), 0.0),
            ],
            Mode::Enclose,
        )
        .with_squeezed(Point::new(4, 0), Point::new(4, 4), 8.0);
        let v = validate_and_subdivide(inst).unwrap();
        assert_eq!(v.squeezed_edges.len(), 2);
        for e in &v.squeezed_edges {
            assert!((e.weight - 4.0).abs() < 1e-12);
        }
        let again = validate_and_subdivide(v.clone()).unwrap();
        assert_eq!(again.squeezed_edges.len(), 2);
        assert_eq!(again.polygons[0].vertices, v.polygons[0].vertices);
        assert_eq!(again.refinement, v.refinement);
    }

    #[test]
    fn reference_points_are_interior() {
        let v = validate_and_subdivide(Instance::<f64>::new(
            vec![
                InputPolygon::required("a", square(0, 0, 2)),
                InputPolygon::optional(
                    "t",
                    vec![Point::new(10, 0), Point::new(14, 0), Point::new(14, 1)],
                    1.0,
                ),
            ],
            Mode::Enclose,
        ))
        .unwrap();
        for (i, p) in v.polygons.iter().enumerate() {
            assert_eq!(locate(v.reference(i), &p.vertices), Location::Inside);
        }
    }
}
