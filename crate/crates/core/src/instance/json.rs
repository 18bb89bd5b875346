//! JSON instance format.

use serde_json::{Map, Value};

use super::{
    graph_to_instance, validate_and_subdivide, FaceTag, InputPolygon, Instance, Kind, Mode,
    PlaneGraphInput, SqueezedEdge,
};
use crate::error::{Error, Result};
use crate::geometry::{Point, Segment};
use crate::scalar::Weight;

const DEFAULT_POINT_REFINEMENT: i64 = 10_000;

/// Parses and validates an instance in one step.
pub fn load_instance<S: Weight>(bytes: &[u8]) -> Result<Instance<S>> {
    validate_and_subdivide(parse_instance(bytes)?)
}

/// Parses the JSON instance format into a structurally valid, unvalidated instance.
/// Point objects become small triangles; graph input is converted to polygons.
pub fn parse_instance<S: Weight>(bytes: &[u8]) -> Result<Instance<S>> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    parse_value(&value)
}

struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }
}

pub fn parse_value<S: Weight>(value: &Value) -> Result<Instance<S>> {
    let mut errs = Errors(Vec::new());
    let Some(root) = value.as_object() else {
        return Err(Error::Schema(vec!["top level must be an object".into()]));
    };
    let scale = match root.get("scale") {
        None => 1,
        Some(v) => match v.as_i64() {
            Some(s) if s >= 1 => s,
            _ => {
                errs.push("`scale` must be a positive integer");
                1
            }
        },
    };
    let mode = match root.get("mode").map(|v| v.as_str()) {
        None | Some(Some("enclose")) => Mode::Enclose,
        Some(Some("invert")) => Mode::Invert,
        _ => {
            errs.push("`mode` must be \"enclose\" or \"invert\"");
            Mode::Enclose
        }
    };

    if let Some(g) = root.get("graph") {
        let graph = parse_graph(g, &mut errs);
        finish(&errs)?;
        let mut inst = graph_to_instance(&graph)?;
        inst.mode = mode;
        inst.scale = scale;
        return Ok(inst);
    }

    let mut polygons = Vec::new();
    match root.get("polygons") {
        None => {}
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                if let Some(p) = parse_polygon(item, i, &mut errs) {
                    polygons.push(p);
                }
            }
        }
        Some(_) => errs.push("`polygons` must be an array"),
    }

    let refinement = match root.get("point_refinement") {
        None => DEFAULT_POINT_REFINEMENT,
        Some(v) => v.as_i64().filter(|&r| r >= 1).unwrap_or_else(|| {
            errs.push("`point_refinement` must be a positive integer");
            1
        }),
    };
    let eps = match root.get("point_epsilon") {
        None => 1,
        Some(v) => v.as_i64().filter(|&e| e >= 1).unwrap_or_else(|| {
            errs.push("`point_epsilon` must be a positive integer");
            1
        }),
    };
    let mut points = Vec::new();
    match root.get("points") {
        None => {}
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                if let Some(p) = parse_point_object(item, i, &mut errs) {
                    points.push(p);
                }
            }
        }
        Some(_) => errs.push("`points` must be an array"),
    }

    let mut squeezed = Vec::new();
    match root.get("squeezed_edges") {
        None => {}
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                let ctx = format!("squeezed_edges[{i}]");
                let Some(obj) = object(item, &ctx, &mut errs) else { continue };
                let a = field_point(obj, "a", &ctx, &mut errs);
                let b = field_point(obj, "b", &ctx, &mut errs);
                let w = match obj.get("weight").and_then(Value::as_f64) {
                    Some(w) if w.is_finite() => Some(w),
                    _ => {
                        errs.push(format!("{ctx}.weight must be a finite number"));
                        None
                    }
                };
                if let (Some(a), Some(b), Some(w)) = (a, b, w) {
                    squeezed.push(SqueezedEdge {
                        segment: Segment::new(a, b),
                        weight: S::from_f64_lossy(w),
                    });
                }
            }
        }
        Some(_) => errs.push("`squeezed_edges` must be an array"),
    }
    finish(&errs)?;

    let mut inst = Instance {
        polygons,
        squeezed_edges: squeezed,
        mode,
        scale,
        refinement: 1,
    };
    if !points.is_empty() {
        inst.rescale(refinement)?;
        for (id, kind, penalty, at) in points {
            let c = at.scaled(refinement);
            let tri = vec![
                Point::new(c.x - eps, c.y - eps),
                Point::new(c.x + eps, c.y - eps),
                Point::new(c.x, c.y + eps),
            ];
            inst.polygons.push(InputPolygon {
                id,
                vertices: tri,
                kind,
                penalty,
                reference_point: None,
                unbounded: false,
            });
        }
    }
    Ok(inst)
}

fn finish(errs: &Errors) -> Result<()> {
    if errs.0.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema(errs.0.clone()))
    }
}

fn object<'a>(v: &'a Value, ctx: &str, errs: &mut Errors) -> Option<&'a Map<String, Value>> {
    let o = v.as_object();
    if o.is_none() {
        errs.push(format!("{ctx} must be an object"));
    }
    o
}

fn as_point(v: &Value) -> Option<Point> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    let p = Point::new(arr[0].as_i64()?, arr[1].as_i64()?);
    p.in_range().then_some(p)
}

fn field_point(obj: &Map<String, Value>, key: &str, ctx: &str, errs: &mut Errors) -> Option<Point> {
    match obj.get(key) {
        None => {
            errs.push(format!("{ctx}.{key} is missing"));
            None
        }
        Some(v) => {
            let p = as_point(v);
            if p.is_none() {
                errs.push(format!("{ctx}.{key} must be an [x, y] integer pair"));
            }
            p
        }
    }
}

fn parse_kind(obj: &Map<String, Value>, ctx: &str, errs: &mut Errors) -> Option<Kind> {
    match obj.get("kind").and_then(Value::as_str) {
        Some("required") => Some(Kind::Required),
        Some("optional") => Some(Kind::Optional),
        Some(other) => {
            errs.push(format!("{ctx}.kind `{other}` is not required/optional"));
            None
        }
        None => {
            errs.push(format!("{ctx}.kind is missing"));
            None
        }
    }
}

fn parse_penalty<S: Weight>(v: &Value, ctx: &str, errs: &mut Errors) -> Option<S> {
    match v {
        Value::String(s) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
            Some(S::infinity())
        }
        Value::Number(n) => match n.as_f64() {
            Some(x) if x >= 0.0 && x.is_finite() => Some(S::from_f64_lossy(x)),
            _ => {
                errs.push(format!("{ctx}.penalty must be nonnegative"));
                None
            }
        },
        _ => {
            errs.push(format!("{ctx}.penalty must be a number or \"inf\""));
            None
        }
    }
}

/// Penalty for an object of the given kind; required objects must not carry one.
fn kind_penalty<S: Weight>(
    obj: &Map<String, Value>,
    kind: Kind,
    ctx: &str,
    errs: &mut Errors,
) -> Option<S> {
    match (kind, obj.get("penalty")) {
        (Kind::Required, None) => Some(S::zero()),
        (Kind::Required, Some(_)) => {
            errs.push(format!("{ctx}: required objects carry no penalty"));
            None
        }
        (Kind::Optional, None) => {
            errs.push(format!("{ctx}.penalty is missing"));
            None
        }
        (Kind::Optional, Some(v)) => parse_penalty(v, ctx, errs),
    }
}

fn parse_polygon<S: Weight>(v: &Value, i: usize, errs: &mut Errors) -> Option<InputPolygon<S>> {
    let ctx = format!("polygons[{i}]");
    let obj = object(v, &ctx, errs)?;
    let id = match obj.get("id") {
        None => format!("P{i}"),
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            errs.push(format!("{ctx}.id must be a string"));
            return None;
        }
    };
    let ctx = format!("polygon `{id}`");
    let kind = parse_kind(obj, &ctx, errs)?;
    let penalty = kind_penalty(obj, kind, &ctx, errs)?;
    let vertices: Option<Vec<Point>> = obj
        .get("vertices")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(as_point).collect());
    let Some(vertices) = vertices else {
        errs.push(format!("{ctx}.vertices must be a list of [x, y] integer pairs"));
        return None;
    };
    let unbounded = match obj.get("unbounded") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            errs.push(format!("{ctx}.unbounded must be a boolean"));
            return None;
        }
    };
    let reference_point = match obj.get("reference_point") {
        None => None,
        Some(r) => match as_point(r) {
            Some(p) => Some(p),
            None => {
                errs.push(format!("{ctx}.reference_point must be an [x, y] integer pair"));
                return None;
            }
        },
    };
    Some(InputPolygon {
        id,
        vertices,
        kind,
        penalty,
        reference_point,
        unbounded,
    })
}

fn parse_point_object<S: Weight>(
    v: &Value,
    i: usize,
    errs: &mut Errors,
) -> Option<(String, Kind, S, Point)> {
    let ctx = format!("points[{i}]");
    let obj = object(v, &ctx, errs)?;
    let id = obj
        .get("id")
        .and_then(Value::as_str)
        .map_or_else(|| format!("p{i}"), str::to_string);
    let kind = parse_kind(obj, &ctx, errs)?;
    let penalty = kind_penalty(obj, kind, &ctx, errs)?;
    let at = field_point(obj, "at", &ctx, errs)?;
    Some((id, kind, penalty, at))
}

fn parse_graph<S: Weight>(v: &Value, errs: &mut Errors) -> PlaneGraphInput<S> {
    let mut g = PlaneGraphInput {
        vertices: Vec::new(),
        edges: Vec::new(),
        faces: Vec::new(),
    };
    let Some(obj) = object(v, "graph", errs) else { return g };
    match obj.get("vertices").and_then(Value::as_array) {
        Some(vs) => {
            for (i, p) in vs.iter().enumerate() {
                match as_point(p) {
                    Some(p) => g.vertices.push(p),
                    None => errs.push(format!("graph.vertices[{i}] must be an [x, y] integer pair")),
                }
            }
        }
        None => errs.push("graph.vertices must be an array"),
    }
    match obj.get("edges").and_then(Value::as_array) {
        Some(es) => {
            for (i, e) in es.iter().enumerate() {
                let parsed = e.as_array().filter(|a| a.len() == 3).and_then(|a| {
                    Some((
                        a[0].as_u64()? as usize,
                        a[1].as_u64()? as usize,
                        a[2].as_f64()?,
                    ))
                });
                match parsed {
                    Some((u, v, w)) if w.is_finite() => {
                        g.edges.push((u, v, S::from_f64_lossy(w)))
                    }
                    _ => errs.push(format!("graph.edges[{i}] must be [i, j, weight]")),
                }
            }
        }
        None => errs.push("graph.edges must be an array"),
    }
    if let Some(fs) = obj.get("faces") {
        let Some(fs) = fs.as_array() else {
            errs.push("graph.faces must be an array");
            return g;
        };
        for (i, f) in fs.iter().enumerate() {
            let ctx = format!("graph.faces[{i}]");
            let Some(fo) = object(f, &ctx, errs) else { continue };
            let point = fo
                .get("point")
                .and_then(Value::as_array)
                .filter(|a| a.len() == 2)
                .and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
            let Some(point) = point else {
                errs.push(format!("{ctx}.point must be an [x, y] pair"));
                continue;
            };
            let Some(kind) = parse_kind(fo, &ctx, errs) else { continue };
            let penalty = match (kind, fo.get("penalty")) {
                (Kind::Optional, None) => Some(S::zero()),
                _ => kind_penalty(fo, kind, &ctx, errs),
            };
            if let Some(penalty) = penalty {
                g.faces.push(FaceTag { point, kind, penalty });
            }
        }
    }
    g
}
