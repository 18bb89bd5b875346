//! Exact planar predicates on integer and rational points.
//!
//! All integer predicates evaluate determinants in `i128`. They are exact as
//! long as every coordinate satisfies `|c| <= COORD_LIMIT`, which also leaves
//! headroom for the small fixed denominators used by [`locate_scaled`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bound on the absolute value of any coordinate.
pub const COORD_LIMIT: i64 = 1 << 56;

/// Lattice point. The derived order is lexicographic in `(x, y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn in_range(self) -> bool {
        self.x.abs() <= COORD_LIMIT && self.y.abs() <= COORD_LIMIT
    }

    pub fn scaled(self, f: i64) -> Point {
        Point::new(self.x * f, self.y * f)
    }

    /// Euclidean distance in grid units.
    pub fn dist(self, o: Point) -> f64 {
        let dx = (o.x as i128 - self.x as i128) as f64;
        let dy = (o.y as i128 - self.y as i128) as f64;
        dx.hypot(dy)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    /// Endpoints in lexicographic order, so that `ab` and `ba` compare equal.
    pub fn normalized(self) -> Segment {
        if self.a <= self.b {
            self
        } else {
            Segment::new(self.b, self.a)
        }
    }

    pub fn len(self) -> f64 {
        self.a.dist(self.b)
    }

    /// Twice the midpoint.
    pub fn mid2(self) -> (i128, i128) {
        (
            self.a.x as i128 + self.b.x as i128,
            self.a.y as i128 + self.b.y as i128,
        )
    }
}

#[inline]
fn sign(v: i128) -> i32 {
    (v > 0) as i32 - (v < 0) as i32
}

#[inline]
fn cross3(p: (i128, i128), q: (i128, i128), r: (i128, i128)) -> i128 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

#[inline]
fn wide(p: Point) -> (i128, i128) {
    (p.x as i128, p.y as i128)
}

/// Sign of the turn `p -> q -> r`: `+1` left (counterclockwise), `-1` right, `0` collinear.
#[inline]
pub fn orient(p: Point, q: Point, r: Point) -> i32 {
    sign(cross3(wide(p), wide(q), wide(r)))
}

/// Twice the signed area of the closed polygon through `pts`.
pub fn signed_area2(pts: &[Point]) -> i128 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (wide(pts[i]), wide(pts[(i + 1) % n]));
            a.0 * b.1 - a.1 * b.0
        })
        .sum()
}

/// Whether `x` lies on the closed segment `ab`.
pub fn on_segment(x: Point, a: Point, b: Point) -> bool {
    orient(a, b, x) == 0
        && x.x >= a.x.min(b.x)
        && x.x <= a.x.max(b.x)
        && x.y >= a.y.min(b.y)
        && x.y <= a.y.max(b.y)
}

/// Whether `x` lies on segment `ab` but is neither endpoint.
pub fn strictly_inside_segment(x: Point, a: Point, b: Point) -> bool {
    x != a && x != b && on_segment(x, a, b)
}

/// Whether segments `s` and `t` cross at a single point interior to both.
pub fn segments_properly_cross(s: Segment, t: Segment) -> bool {
    let o1 = orient(s.a, s.b, t.a);
    let o2 = orient(s.a, s.b, t.b);
    let o3 = orient(t.a, t.b, s.a);
    let o4 = orient(t.a, t.b, s.b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Half-open triangle membership. The triangle `prq` must be strictly
/// counterclockwise; it is closed along `pr` and `rq` and open along `pq`,
/// so `p` and `q` themselves are excluded.
pub fn point_in_triangle_halfopen(x: Point, p: Point, r: Point, q: Point) -> Result<bool> {
    if orient(p, r, q) != 1 {
        return Err(Error::DegenerateTriangle);
    }
    Ok(orient(p, r, x) >= 0 && orient(r, q, x) >= 0 && orient(q, p, x) > 0)
}

/// Winding number of the closed walk through `walk` around `x`.
///
/// Consecutive vertices are joined and the last is joined back to the first.
/// A repeated closing vertex is harmless. Fails with [`Error::OnBoundary`] if
/// `x` lies on the walk.
pub fn winding_number(walk: &[Point], x: Point) -> Result<i64> {
    let n = walk.len();
    if n == 0 {
        return Ok(0);
    }
    if n == 1 {
        return if walk[0] == x { Err(Error::OnBoundary) } else { Ok(0) };
    }
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (walk[i], walk[(i + 1) % n]);
        if on_segment(x, a, b) {
            return Err(Error::OnBoundary);
        }
        w += crossing_contribution(wide(a), wide(b), wide(x));
    }
    Ok(w)
}

/// Signed crossing of edge `ab` with the ray from `x` toward `+x`, counting an
/// edge iff exactly one endpoint lies strictly below `x`. Assumes `x` is not on `ab`.
#[inline]
fn crossing_contribution(a: (i128, i128), b: (i128, i128), x: (i128, i128)) -> i64 {
    let a_below = a.1 < x.1;
    let b_below = b.1 < x.1;
    if a_below == b_below {
        return 0;
    }
    let o = sign(cross3(a, b, x));
    if a_below && o > 0 {
        1
    } else if b_below && o < 0 {
        -1
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Locates a point relative to the region bounded by a closed polygon,
/// counting every point of nonzero winding as inside.
pub fn locate(x: Point, poly: &[Point]) -> Location {
    match winding_number(poly, x) {
        Err(_) => Location::Boundary,
        Ok(0) => Location::Outside,
        Ok(_) => Location::Inside,
    }
}

/// Like [`locate`] for the rational point `(xn.0 / den, xn.1 / den)`.
/// `den` must be a small positive integer (at most 16).
pub fn locate_scaled(xn: (i128, i128), den: i64, poly: &[Point]) -> Location {
    debug_assert!((1..=16).contains(&den));
    let d = den as i128;
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = wide(poly[i]);
        let b = wide(poly[(i + 1) % n]);
        let (a, b) = ((a.0 * d, a.1 * d), (b.0 * d, b.1 * d));
        if cross3(a, b, xn) == 0
            && xn.0 >= a.0.min(b.0)
            && xn.0 <= a.0.max(b.0)
            && xn.1 >= a.1.min(b.1)
            && xn.1 <= a.1.max(b.1)
        {
            return Location::Boundary;
        }
        w += crossing_contribution(a, b, xn);
    }
    if w == 0 {
        Location::Outside
    } else {
        Location::Inside
    }
}

/// Point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl QPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        QPoint { x, y }
    }

    pub fn from_ratio(xn: i128, yn: i128, den: i128) -> Self {
        QPoint::new(
            BigRational::new(BigInt::from(xn), BigInt::from(den)),
            BigRational::new(BigInt::from(yn), BigInt::from(den)),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// The lattice point, if both coordinates are integers.
    pub fn to_point(&self) -> Option<Point> {
        use num_traits::ToPrimitive;
        if !self.is_integral() {
            return None;
        }
        Some(Point::new(
            self.x.to_integer().to_i64()?,
            self.y.to_integer().to_i64()?,
        ))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (
            self.x.to_f64().unwrap_or(f64::NAN),
            self.y.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn dist(&self, o: &QPoint) -> f64 {
        let (ax, ay) = self.to_f64();
        let (bx, by) = o.to_f64();
        (bx - ax).hypot(by - ay)
    }
}

impl From<Point> for QPoint {
    fn from(p: Point) -> Self {
        QPoint::new(
            BigRational::from_integer(BigInt::from(p.x)),
            BigRational::from_integer(BigInt::from(p.y)),
        )
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub fn cross_q(p: &QPoint, q: &QPoint, r: &QPoint) -> BigRational {
    (&q.x - &p.x) * (&r.y - &p.y) - (&q.y - &p.y) * (&r.x - &p.x)
}

pub fn orient_q(p: &QPoint, q: &QPoint, r: &QPoint) -> i32 {
    let c = cross_q(p, q, r);
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}

pub fn on_segment_q(x: &QPoint, a: &QPoint, b: &QPoint) -> bool {
    orient_q(a, b, x) == 0
        && x.x >= *min_ref(&a.x, &b.x)
        && x.x <= *max_ref(&a.x, &b.x)
        && x.y >= *min_ref(&a.y, &b.y)
        && x.y <= *max_ref(&a.y, &b.y)
}

fn min_ref<'a>(a: &'a BigRational, b: &'a BigRational) -> &'a BigRational {
    if a <= b {
        a
    } else {
        b
    }
}

fn max_ref<'a>(a: &'a BigRational, b: &'a BigRational) -> &'a BigRational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn segments_properly_cross_q(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> bool {
    orient_q(a, b, c) * orient_q(a, b, d) < 0 && orient_q(c, d, a) * orient_q(c, d, b) < 0
}

/// Intersection point of the lines through `ab` and `cd`, if not parallel.
pub fn line_intersection_q(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> Option<QPoint> {
    let rx = &b.x - &a.x;
    let ry = &b.y - &a.y;
    let sx = &d.x - &c.x;
    let sy = &d.y - &c.y;
    let denom = &rx * &sy - &ry * &sx;
    if denom.is_zero() {
        return None;
    }
    let t = ((&c.x - &a.x) * &sy - (&c.y - &a.y) * &sx) / denom;
    Some(QPoint::new(&a.x + &t * &rx, &a.y + &t * &ry))
}

/// Parameter `t` with `x = a + t (b - a)`, for `x` on the line through `ab`.
pub fn param_on_q(x: &QPoint, a: &QPoint, b: &QPoint) -> BigRational {
    let dx = &b.x - &a.x;
    let dy = &b.y - &a.y;
    let num = (&x.x - &a.x) * &dx + (&x.y - &a.y) * &dy;
    let den = &dx * &dx + &dy * &dy;
    num / den
}

/// Winding number of a closed rational walk around `x`; same rule as [`winding_number`].
pub fn winding_number_q(walk: &[QPoint], x: &QPoint) -> Result<i64> {
    let n = walk.len();
    if n == 0 {
        return Ok(0);
    }
    if n == 1 {
        return if walk[0] == *x { Err(Error::OnBoundary) } else { Ok(0) };
    }
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (&walk[i], &walk[(i + 1) % n]);
        if on_segment_q(x, a, b) {
            return Err(Error::OnBoundary);
        }
        let a_below = a.y < x.y;
        let b_below = b.y < x.y;
        if a_below == b_below {
            continue;
        }
        let o = orient_q(a, b, x);
        if a_below && o > 0 {
            w += 1;
        } else if b_below && o < 0 {
            w -= 1;
        }
    }
    Ok(w)
}

/// Sign of twice the signed area of a closed rational polygon.
pub fn signed_area_sign_q(pts: &[QPoint]) -> i32 {
    let n = pts.len();
    let mut s = BigRational::zero();
    for i in 0..n {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        s += &a.x * &b.y - &a.y * &b.x;
    }
    if s.is_positive() {
        1
    } else if s.is_negative() {
        -1
    } else {
        0
    }
}
