//! Deterministic SVG rendering of an instance and its solution polygon.

use std::collections::HashMap;
use std::fmt::Write;

use crate::instance::{Instance, Kind};
use crate::scalar::Weight;
use crate::uncross::Polygon;

fn fmt(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// SVG in input coordinates (y up). Segments traversed twice are drawn as
/// two strokes offset by 0.5% of the bounding-box diagonal.
pub fn render_svg<S: Weight>(inst: &Instance<S>, polygon: Option<&Polygon<S>>) -> String {
    let f = inst.refinement as f64;
    let to_input = |x: f64, y: f64| (x / f, y / f);
    let poly_pts: Vec<(f64, f64)> = polygon
        .map(|p| {
            p.vertices
                .iter()
                .map(|q| {
                    let (x, y) = q.to_f64();
                    to_input(x, y)
                })
                .collect()
        })
        .unwrap_or_default();

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for p in &inst.polygons {
        for v in &p.vertices {
            let (x, y) = to_input(v.x as f64, v.y as f64);
            xs.push(x);
            ys.push(y);
        }
    }
    for &(x, y) in &poly_pts {
        xs.push(x);
        ys.push(y);
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1, y0, y1) = if xs.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        (min(&xs), max(&xs), min(&ys), max(&ys))
    };
    let (w, h) = ((x1 - x0).max(1e-9), (y1 - y0).max(1e-9));
    let margin = 0.1 * w.max(h);
    let diag = w.hypot(h);
    let stroke = diag * 0.004;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        fmt(x0 - margin),
        fmt(-(y1 + margin)),
        fmt(w + 2.0 * margin),
        fmt(h + 2.0 * margin)
    );
    let _ = writeln!(
        s,
        r##"<defs><pattern id="hatch" width="{0}" height="{0}" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="{0}" stroke="#b8860b" stroke-width="{1}"/></pattern></defs>"##,
        fmt(diag * 0.02),
        fmt(stroke)
    );
    for p in &inst.polygons {
        let pts: Vec<String> = p
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = to_input(v.x as f64, v.y as f64);
                format!("{},{}", fmt(x), fmt(-y))
            })
            .collect();
        let fill = if p.unbounded {
            "none"
        } else {
            match p.kind {
                Kind::Required => "url(#hatch)",
                Kind::Optional => "#c8c8c8",
            }
        };
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="{}" stroke="#555555" stroke-width="{}"><title>{}</title></polygon>"##,
            pts.join(" "),
            fill,
            fmt(stroke * 0.5),
            p.id
        );
    }
    for (i, p) in inst.polygons.iter().enumerate() {
        if p.unbounded {
            continue;
        }
        let r = inst.reference(i);
        let (x, y) = to_input(r.x as f64, r.y as f64);
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#333333"/>"##,
            fmt(x),
            fmt(-y),
            fmt(stroke)
        );
    }

    if let Some(poly) = polygon {
        let m = poly_pts.len();
        if m == 1 {
            let (x, y) = poly_pts[0];
            let _ = writeln!(
                s,
                r##"<circle cx="{}" cy="{}" r="{}" fill="#d62728"/>"##,
                fmt(x),
                fmt(-y),
                fmt(stroke * 3.0)
            );
        } else if m > 1 {
            let key = |i: usize| {
                let (a, b) = (&poly.vertices[i], &poly.vertices[(i + 1) % m]);
                if a <= b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                }
            };
            let mut count: HashMap<_, usize> = HashMap::new();
            for i in 0..m {
                *count.entry(key(i)).or_default() += 1;
            }
            let mut seen: HashMap<_, usize> = HashMap::new();
            let offset = 0.005 * diag;
            for i in 0..m {
                let (ax, ay) = poly_pts[i];
                let (bx, by) = poly_pts[(i + 1) % m];
                let k = key(i);
                let (mut dx, mut dy) = (0.0, 0.0);
                if count[&k] > 1 {
                    let j = seen.entry(k.clone()).or_default();
                    // perpendicular to the canonical direction, so copies separate
                    let forward = poly.vertices[i] == k.0;
                    let (ux, uy) = if forward { (bx - ax, by - ay) } else { (ax - bx, ay - by) };
                    let len = ux.hypot(uy).max(1e-12);
                    let sign = if *j == 0 { 0.5 } else { -0.5 };
                    dx = -uy / len * offset * sign;
                    dy = ux / len * offset * sign;
                    *j += 1;
                }
                let _ = writeln!(
                    s,
                    r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d62728" stroke-width="{}" stroke-linecap="round"/>"##,
                    fmt(ax + dx),
                    fmt(-(ay + dy)),
                    fmt(bx + dx),
                    fmt(-(by + dy)),
                    fmt(stroke)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::instance::{validate_and_subdivide, InputPolygon, Mode};

    fn inst() -> Instance<f64> {
        let sq = vec![Point::new(0, 0), Point::new(1, 0), Point::new(1, 1), Point::new(0, 1)];
        validate_and_subdivide(Instance::new(vec![InputPolygon::required("a", sq)], Mode::Enclose)).unwrap()
    }

    #[test]
    fn point_solution_has_marker() {
        let i = inst();
        let p = Polygon::<f64>::from_points(&[Point::new(0, 0)]);
        let svg = render_svg(&i, Some(&p));
        assert!(svg.contains(r##"fill="#d62728""##));
        assert!(!svg.lines().any(|l| l.starts_with("<line")));
    }

    #[test]
    fn doubled_segment_is_offset() {
        let i = inst();
        let f = i.refinement;
        let p = Polygon::<f64>::from_points(&[Point::new(0, 0), Point::new(2 * f, 0)]);
        let svg = render_svg(&i, Some(&p));
        let lines: Vec<&str> = svg.lines().filter(|l| l.starts_with("<line")).collect();
        assert_eq!(lines.len(), 2);
        assert_ne!(lines[0].split("y1=").nth(1), lines[1].split("y1=").nth(1));
        assert_eq!(svg, render_svg(&i, Some(&p)));
    }
}
