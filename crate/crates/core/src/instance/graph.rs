//! Plane graphs as instances: faces become polygons, edges become squeezed edges.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_rational::BigRational;

use super::{InputPolygon, Instance, Kind, Mode, SqueezedEdge};
use crate::error::{Error, Result};
use crate::geometry::{
    on_segment_q, segments_properly_cross, signed_area2, strictly_inside_segment,
    winding_number_q, Point, QPoint, Segment,
};
use crate::scalar::Weight;

#[derive(Clone, Debug)]
pub struct FaceTag<S> {
    /// Any point strictly inside the face.
    pub point: (f64, f64),
    pub kind: Kind,
    pub penalty: S,
}

/// A straight-line drawing of a connected plane graph.
#[derive(Clone, Debug)]
pub struct PlaneGraphInput<S> {
    pub vertices: Vec<Point>,
    pub edges: Vec<(usize, usize, S)>,
    pub faces: Vec<FaceTag<S>>,
}

/// Counterclockwise angular comparison of direction vectors, starting at the +x axis.
pub(crate) fn angle_cmp(a: (i128, i128), b: (i128, i128)) -> Ordering {
    let half = |d: (i128, i128)| (d.1 < 0 || (d.1 == 0 && d.0 < 0)) as u8;
    half(a).cmp(&half(b)).then_with(|| {
        let c = a.0 * b.1 - a.1 * b.0;
        0.cmp(&c)
    })
}

fn check_embedding<S: Weight>(g: &PlaneGraphInput<S>) -> Result<()> {
    let n = g.vertices.len();
    let distinct: HashSet<Point> = g.vertices.iter().copied().collect();
    if distinct.len() != n {
        return Err(Error::Embedding("two vertices share a position".into()));
    }
    let mut seen = HashSet::new();
    for &(u, v, w) in &g.edges {
        if u >= n || v >= n {
            return Err(Error::Schema(vec![format!("edge ({u}, {v}) has an invalid endpoint")]));
        }
        if u == v {
            return Err(Error::Embedding(format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::Embedding(format!("duplicate edge ({u}, {v})")));
        }
        if w.is_nan() || w <= S::zero() {
            return Err(Error::Schema(vec![format!(
                "edge ({u}, {v}) must have a positive weight"
            )]));
        }
    }
    let seg = |&(u, v, _): &(usize, usize, S)| Segment::new(g.vertices[u], g.vertices[v]);
    for (i, e) in g.edges.iter().enumerate() {
        let s = seg(e);
        for f in &g.edges[i + 1..] {
            if segments_properly_cross(s, seg(f)) {
                return Err(Error::Embedding(format!(
                    "edges ({}, {}) and ({}, {}) cross",
                    e.0, e.1, f.0, f.1
                )));
            }
        }
        if let Some(x) = g.vertices.iter().position(|&x| strictly_inside_segment(x, s.a, s.b)) {
            return Err(Error::Embedding(format!(
                "vertex {x} lies on edge ({}, {})",
                e.0, e.1
            )));
        }
    }
    // connectivity
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in &g.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut mark = vec![false; n];
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        if std::mem::replace(&mut mark[u], true) {
            continue;
        }
        stack.extend(adj[u].iter().copied().filter(|&v| !mark[v]));
    }
    if n == 0 || mark.contains(&false) {
        return Err(Error::Embedding("graph is not connected".into()));
    }
    Ok(())
}

/// Face boundary walks of a connected plane graph, each with the face on its left.
pub(crate) fn trace_faces(vertices: &[Point], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let n = vertices.len();
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        rot[u].push(v);
        rot[v].push(u);
    }
    for (u, nb) in rot.iter_mut().enumerate() {
        let p = vertices[u];
        nb.sort_by(|&a, &b| {
            let da = (vertices[a].x as i128 - p.x as i128, vertices[a].y as i128 - p.y as i128);
            let db = (vertices[b].x as i128 - p.x as i128, vertices[b].y as i128 - p.y as i128);
            angle_cmp(da, db)
        });
    }
    let pos = |u: usize, v: usize| rot[u].iter().position(|&x| x == v).unwrap();
    let mut used: Vec<Vec<bool>> = rot.iter().map(|r| vec![false; r.len()]).collect();
    let mut faces = Vec::new();
    for u0 in 0..n {
        for i0 in 0..rot[u0].len() {
            if used[u0][i0] {
                continue;
            }
            let mut face = Vec::new();
            let (mut u, mut i) = (u0, i0);
            while !used[u][i] {
                used[u][i] = true;
                face.push(u);
                let v = rot[u][i];
                let d = rot[v].len();
                let j = (pos(v, u) + d - 1) % d;
                (u, i) = (v, j);
            }
            faces.push(face);
        }
    }
    faces
}

/// Converts a plane graph into an (unvalidated) instance: bounded faces become
/// almost-simple polygons, the outer face the unbounded optional polygon, and
/// every edge a squeezed edge with its weight.
pub fn graph_to_instance<S: Weight>(g: &PlaneGraphInput<S>) -> Result<Instance<S>> {
    check_embedding(g)?;
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let faces = trace_faces(&g.vertices, &pairs);
    let ring = |f: &Vec<usize>| f.iter().map(|&i| g.vertices[i]).collect::<Vec<_>>();
    let (bounded, outer): (Vec<_>, Vec<_>) =
        faces.iter().partition(|f| signed_area2(&ring(f)) > 0);
    if outer.len() != 1 {
        return Err(Error::Internal(format!("{} unbounded faces traced", outer.len())));
    }
    if g.vertices.len() + bounded.len() + 1 != g.edges.len() + 2 {
        return Err(Error::Internal("face count violates Euler's formula".into()));
    }
    if bounded.is_empty() {
        return Err(Error::Embedding("graph has no bounded face".into()));
    }

    let mut polygons: Vec<InputPolygon<S>> = bounded
        .iter()
        .enumerate()
        .map(|(i, f)| InputPolygon::optional(format!("f{i}"), ring(f), S::zero()))
        .collect();

    let qpoints: Vec<QPoint> = g.vertices.iter().map(|&p| p.into()).collect();
    let mut tagged = vec![false; polygons.len()];
    for tag in &g.faces {
        let (Some(x), Some(y)) = (
            BigRational::from_float(tag.point.0),
            BigRational::from_float(tag.point.1),
        ) else {
            return Err(Error::Tag(format!("tag point {:?} is not finite", tag.point)));
        };
        let x = QPoint::new(x, y);
        if pairs.iter().any(|&(u, v)| on_segment_q(&x, &qpoints[u], &qpoints[v])) {
            return Err(Error::Tag(format!("tag point {:?} lies on an edge", tag.point)));
        }
        let hit = bounded.iter().position(|f| {
            let w: Vec<QPoint> = f.iter().map(|&i| qpoints[i].clone()).collect();
            winding_number_q(&w, &x).is_ok_and(|w| w != 0)
        });
        let Some(fi) = hit else {
            return Err(Error::Tag(format!("tag point {:?} matches no bounded face", tag.point)));
        };
        if std::mem::replace(&mut tagged[fi], true) {
            return Err(Error::Tag(format!("face containing {:?} is tagged twice", tag.point)));
        }
        polygons[fi].kind = tag.kind;
        polygons[fi].penalty = tag.penalty;
    }

    let mut outer_ring = ring(outer[0]);
    // the traced walk already runs clockwise
    if signed_area2(&outer_ring) > 0 {
        outer_ring.reverse();
    }
    polygons.push(InputPolygon {
        id: "outer".into(),
        vertices: outer_ring,
        kind: Kind::Optional,
        penalty: S::zero(),
        reference_point: None,
        unbounded: true,
    });
    let squeezed_edges = g
        .edges
        .iter()
        .map(|&(u, v, w)| SqueezedEdge {
            segment: Segment::new(g.vertices[u], g.vertices[v]),
            weight: w,
        })
        .collect();
    Ok(Instance {
        polygons,
        squeezed_edges,
        mode: Mode::Enclose,
        scale: 1,
        refinement: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_and_subdivide;

    fn grid(cols: i64, rows: i64) -> PlaneGraphInput<f64> {
        let idx = |i: i64, j: i64| (j * (cols + 1) + i) as usize;
        let mut vertices = Vec::new();
        for j in 0..=rows {
            for i in 0..=cols {
                vertices.push(Point::new(i, j));
            }
        }
        let mut edges = Vec::new();
        for j in 0..=rows {
            for i in 0..=cols {
                if i < cols {
                    edges.push((idx(i, j), idx(i + 1, j), 1.0));
                }
                if j < rows {
                    edges.push((idx(i, j), idx(i, j + 1), 1.0));
                }
            }
        }
        PlaneGraphInput { vertices, edges, faces: Vec::new() }
    }

    #[test]
    fn triangle_graph() {
        let g = PlaneGraphInput {
            vertices: vec![Point::new(0, 0), Point::new(4, 0), Point::new(0, 4)],
            edges: vec![(0, 1, 2.0), (1, 2, 3.0), (2, 0, 4.0)],
            faces: vec![FaceTag { point: (1.0, 1.0), kind: Kind::Required, penalty: 0.0 }],
        };
        let inst = validate_and_subdivide(graph_to_instance(&g).unwrap()).unwrap();
        assert_eq!(inst.k(), 1);
        let mut w: Vec<f64> = inst.squeezed_edges.iter().map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn grid_faces_and_edges() {
        let mut g = grid(2, 2);
        g.faces.push(FaceTag { point: (0.5, 0.5), kind: Kind::Required, penalty: 0.0 });
        let inst = graph_to_instance(&g).unwrap();
        assert_eq!(inst.polygons.iter().filter(|p| !p.unbounded).count(), 4);
        assert_eq!(inst.squeezed_edges.len(), 12);
        let inst = validate_and_subdivide(inst).unwrap();
        assert_eq!(inst.k(), 1);
    }

    #[test]
    fn bridge_is_shared_by_one_face() {
        // square with a pendant edge into its interior
        let g = PlaneGraphInput {
            vertices: vec![
                Point::new(0, 0),
                Point::new(4, 0),
                Point::new(4, 4),
                Point::new(0, 4),
                Point::new(2, 2),
            ],
            edges: vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 4, 1.0)],
            faces: vec![],
        };
        let inst = graph_to_instance(&g).unwrap();
        let bounded: Vec<_> = inst.polygons.iter().filter(|p| !p.unbounded).collect();
        assert_eq!(bounded.len(), 1);
        let f = &bounded[0].vertices;
        assert_eq!(f.len(), 6);
        let bridge = Segment::new(Point::new(0, 0), Point::new(2, 2)).normalized();
        let uses = bounded[0].edges().filter(|e| e.normalized() == bridge).count();
        assert_eq!(uses, 2);
        let inst = validate_and_subdivide(inst).unwrap();
        assert!(inst.squeezed_edges.iter().any(|e| e.segment == bridge));
    }

    #[test]
    fn crossing_edges_rejected() {
        let g = PlaneGraphInput {
            vertices: vec![Point::new(0, 0), Point::new(2, 2), Point::new(0, 2), Point::new(2, 0)],
            edges: vec![(0, 1, 1.0), (2, 3, 1.0), (0, 2, 1.0)],
            faces: vec![],
        };
        assert!(matches!(graph_to_instance(&g), Err(Error::Embedding(_))));
    }

    #[test]
    fn tag_on_edge_rejected() {
        let mut g = grid(1, 1);
        g.faces.push(FaceTag { point: (0.5, 0.0), kind: Kind::Required, penalty: 0.0 });
        assert!(matches!(graph_to_instance(&g), Err(Error::Tag(_))));
        let mut g = grid(1, 1);
        g.faces.push(FaceTag { point: (5.0, 5.0), kind: Kind::Required, penalty: 0.0 });
        assert!(matches!(graph_to_instance(&g), Err(Error::Tag(_))));
    }

    #[test]
    fn euler_formula_on_grids() {
        for (c, r) in [(1, 1), (2, 3), (3, 3)] {
            let g = grid(c, r);
            let inst = graph_to_instance(&g).unwrap();
            let bounded = inst.polygons.iter().filter(|p| !p.unbounded).count();
            assert_eq!(bounded, g.edges.len() - g.vertices.len() + 1);
        }
    }
}
