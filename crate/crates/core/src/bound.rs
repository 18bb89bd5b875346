//! Lower bounds on the cost still needed to complete a label, used to skip
//! labels that cannot be part of any walk cheaper than a threshold.
//!
//! A label `M(ab, B)` describes a walk `S` from `a` to `b` whose closure by the
//! chord `ba` winds around exactly the required points in `B`. Any completion
//! `T` from `b` back to `a` must therefore make `ab + T` wind around every
//! other required point, so `|T| >= perimeter(hull(rest + {a, b})) - |ab|`.
//! For `C(p, B)` the completion is a closed walk through `p` and the bound is
//! the hull perimeter of the rest plus `p`.

use crate::freespace::FreeSpaceGraph;
use crate::geometry::{on_segment, orient, Point};
use crate::scalar::Weight;

/// Relative slack so that rounding never prunes an optimal label.
const SLACK: f64 = 1e-9;

pub(crate) struct HullBound {
    /// Per mask: the usable required points outside it.
    rest: Vec<Vec<Point>>,
    /// Lower bound on weight per unit of Euclidean length, over all edges.
    ratio: f64,
    pub threshold: f64,
}

fn perimeter(mut pts: Vec<Point>) -> f64 {
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return 0.0;
    }
    if pts.len() == 2 {
        return 2.0 * pts[0].dist(pts[1]);
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    (0..hull.len()).map(|i| hull[i].dist(hull[(i + 1) % hull.len()])).sum()
}

impl HullBound {
    /// `None` when no edge length bound holds (zero-weight edges) or no
    /// required point is usable, since the bound would then be zero anyway.
    pub fn new<S: Weight>(fsg: &FreeSpaceGraph<S>, required: &[Point]) -> Option<Self> {
        let mut ratio = f64::INFINITY;
        for e in &fsg.edges {
            let len = fsg.point(e.a).dist(fsg.point(e.b));
            ratio = ratio.min(e.weight.to_f64_lossy() / len);
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return None;
        }
        // a point on an edge could sit on the label's own walk, where the
        // winding argument says nothing
        let usable: Vec<bool> = required
            .iter()
            .map(|&r| !fsg.edges.iter().any(|e| on_segment(r, fsg.point(e.a), fsg.point(e.b))))
            .collect();
        if !usable.iter().any(|&u| u) {
            return None;
        }
        let k = required.len();
        let rest = (0..1u32 << k)
            .map(|mask| {
                (0..k)
                    .filter(|&i| usable[i] && mask >> i & 1 == 0)
                    .map(|i| required[i])
                    .collect()
            })
            .collect();
        Some(HullBound { rest, ratio: ratio * (1.0 - SLACK), threshold: f64::INFINITY })
    }

    /// Bound for the empty label, a lower bound on the optimum.
    pub fn lower_bound(&self) -> f64 {
        self.ratio * perimeter(self.rest[0].clone())
    }

    pub fn closed(&self, p: Point, mask: u32) -> f64 {
        let rest = &self.rest[mask as usize];
        if rest.is_empty() {
            return 0.0;
        }
        let mut pts = rest.clone();
        pts.push(p);
        self.ratio * perimeter(pts)
    }

    pub fn open(&self, a: Point, b: Point, mask: u32) -> f64 {
        let rest = &self.rest[mask as usize];
        if rest.is_empty() {
            return 0.0;
        }
        let mut pts = rest.clone();
        pts.push(a);
        pts.push(b);
        (self.ratio * (perimeter(pts) - a.dist(b))).max(0.0)
    }

    /// True when a label of value `g` with completion bound `h` cannot beat
    /// the threshold.
    pub fn exceeds(&self, g: f64, h: f64) -> bool {
        g + h > self.threshold * (1.0 + SLACK) + SLACK
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_perimeters() {
        let sq = vec![Point::new(0, 0), Point::new(3, 0), Point::new(3, 3), Point::new(0, 3), Point::new(1, 1)];
        assert!((perimeter(sq) - 12.0).abs() < 1e-12);
        assert_eq!(perimeter(vec![Point::new(2, 2)]), 0.0);
        assert!((perimeter(vec![Point::new(0, 0), Point::new(0, 4)]) - 8.0).abs() < 1e-12);
        let line = vec![Point::new(0, 0), Point::new(1, 1), Point::new(2, 2)];
        assert!((perimeter(line) - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
