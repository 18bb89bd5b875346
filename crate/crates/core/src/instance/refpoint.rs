//! Interior reference points.
//!
//! Candidates are weighted centroids of ear triangles. At the current grid a
//! candidate is rounded to the nearest lattice point and kept only if it stays
//! strictly interior. Otherwise the instance is refined by [`REFINE_FACTOR`],
//! the least common multiple of all candidate denominators, after which every
//! candidate is an exact lattice point.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::{locate, locate_scaled, orient, signed_area2, Location, Point};

/// Barycentric weights of the candidates tried inside each ear.
const WEIGHTS: [(i128, i128, i128); 9] = [
    (1, 1, 1),
    (2, 1, 1),
    (1, 2, 1),
    (1, 1, 2),
    (1, 2, 4),
    (4, 1, 2),
    (2, 4, 1),
    (2, 3, 6),
    (3, 5, 9),
];

/// Least common multiple of the weight sums 3, 4, 7, 11 and 17.
pub const REFINE_FACTOR: i64 = 15708;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefPick {
    /// Strictly interior and not collinear with any two vertices.
    General(Point),
    /// Strictly interior, but collinear with some pair of vertices.
    Degenerate(Point),
    /// No lattice candidate is strictly interior at this grid.
    None,
}

/// Convex corners `(a, b, c)` whose closed triangle holds no other vertex.
fn ears(poly: &[Point]) -> Vec<(Point, Point, Point)> {
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = poly[(i + n - 1) % n];
        let b = poly[i];
        let c = poly[(i + 1) % n];
        if orient(a, b, c) != 1 {
            continue;
        }
        let blocked = poly.iter().any(|&x| {
            x != a
                && x != b
                && x != c
                && orient(a, b, x) >= 0
                && orient(b, c, x) >= 0
                && orient(c, a, x) >= 0
        });
        if !blocked {
            out.push((a, b, c));
        }
    }
    out
}

fn weighted(a: Point, b: Point, c: Point, w: (i128, i128, i128)) -> ((i128, i128), i128) {
    let s = w.0 + w.1 + w.2;
    (
        (
            w.0 * a.x as i128 + w.1 * b.x as i128 + w.2 * c.x as i128,
            w.0 * a.y as i128 + w.1 * b.y as i128 + w.2 * c.y as i128,
        ),
        s,
    )
}

fn round_div(n: i128, d: i128) -> i128 {
    (2 * n + d).div_euclid(2 * d)
}

/// An exact strictly interior point `xn / den` of a counterclockwise polygon.
pub(crate) fn interior_sample(poly: &[Point]) -> Option<((i128, i128), i64)> {
    for (a, b, c) in ears(poly) {
        let (xn, d) = weighted(a, b, c, WEIGHTS[0]);
        if locate_scaled(xn, d as i64, poly) == Location::Inside {
            return Some((xn, d as i64));
        }
    }
    None
}

fn in_general_position(x: Point, vertices: &[Point]) -> bool {
    let mut dirs = HashSet::with_capacity(vertices.len());
    for &v in vertices {
        let (mut dx, mut dy) = (v.x as i128 - x.x as i128, v.y as i128 - x.y as i128);
        let g = gcd(dx.abs(), dy.abs());
        dx /= g;
        dy /= g;
        if dx < 0 || (dx == 0 && dy < 0) {
            dx = -dx;
            dy = -dy;
        }
        if !dirs.insert((dx, dy)) {
            return false;
        }
    }
    true
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Picks a lattice point strictly inside the counterclockwise polygon `poly`,
/// preferring one not collinear with any two of `vertices`.
pub fn pick_reference_point(poly: &[Point], vertices: &[Point]) -> Result<RefPick> {
    if poly.len() < 3 || signed_area2(poly) <= 0 {
        return Err(Error::DegeneratePolygon(format!("{poly:?}")));
    }
    let mut fallback = None;
    let mut seen = HashSet::new();
    for (a, b, c) in ears(poly) {
        for w in WEIGHTS {
            let ((nx, ny), s) = weighted(a, b, c, w);
            let x = Point::new(round_div(nx, s) as i64, round_div(ny, s) as i64);
            if !seen.insert(x) || locate(x, poly) != Location::Inside {
                continue;
            }
            if in_general_position(x, vertices) {
                return Ok(RefPick::General(x));
            }
            fallback.get_or_insert(x);
        }
    }
    Ok(fallback.map_or(RefPick::None, RefPick::Degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn square_of_side_two() {
        let sq = [p(0, 0), p(2, 0), p(2, 2), p(0, 2)];
        match pick_reference_point(&sq, &sq).unwrap() {
            RefPick::Degenerate(x) => assert_eq!(x, p(1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn refined_square_is_general() {
        let sq: Vec<Point> = [p(0, 0), p(2, 0), p(2, 2), p(0, 2)]
            .iter()
            .map(|v| v.scaled(REFINE_FACTOR))
            .collect();
        match pick_reference_point(&sq, &sq).unwrap() {
            RefPick::General(x) => assert_eq!(locate(x, &sq), Location::Inside),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thin_triangle() {
        let t = [p(0, 0), p(4, 0), p(4, 1)];
        // No lattice point is strictly inside.
        assert_eq!(pick_reference_point(&t, &t).unwrap(), RefPick::None);
        let t: Vec<Point> = t.iter().map(|v| v.scaled(REFINE_FACTOR)).collect();
        match pick_reference_point(&t, &t).unwrap() {
            RefPick::General(x) => assert_eq!(locate(x, &t), Location::Inside),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn l_shaped_hexagon() {
        let l = [p(0, 0), p(6, 0), p(6, 2), p(2, 2), p(2, 6), p(0, 6)];
        let pick = pick_reference_point(&l, &l).unwrap();
        let x = match pick {
            RefPick::General(x) | RefPick::Degenerate(x) => x,
            RefPick::None => panic!("no point"),
        };
        assert_eq!(locate(x, &l), Location::Inside);
        let ((xn, yn), d) = interior_sample(&l).unwrap();
        assert_eq!(locate_scaled((xn, yn), d, &l), Location::Inside);
    }

    #[test]
    fn degenerate_polygon() {
        assert!(pick_reference_point(&[p(0, 0), p(1, 1), p(2, 2)], &[]).is_err());
    }
}
