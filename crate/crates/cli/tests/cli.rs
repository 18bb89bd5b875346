use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::str::FromStr;

use enclose_core::geometry::QPoint;
use enclose_core::instance::load_instance;
use enclose_core::verify::evaluate_solution;
use enclose_core::Polygon;
use num_rational::BigRational;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn enclose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enclose")).args(args).output().unwrap()
}

fn solve_json(args: &[&str]) -> (i32, Value) {
    let out = enclose(args);
    let code = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {stderr}"));
    (code, v)
}

#[test]
fn single_square_costs_its_perimeter() {
    let input = data("square.json");
    let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap(), "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 8.0);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["verification"]["weakly_simple"], true);
    assert_eq!(v["walk"].as_array().unwrap().len(), 4);
}

#[test]
fn all_solvers_agree_on_the_square() {
    let input = data("square.json");
    for solver in ["dp", "dijkstra", "oracle"] {
        let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap(), "--solver", solver]);
        assert_eq!(code, 0, "{solver}");
        assert_eq!(v["cost"], 8.0, "{solver}");
        assert_eq!(v["solver"], solver);
    }
    let (code, v) = solve_json(&["oracle", "--input", input.to_str().unwrap(), "--max-edges", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 8.0);
}

#[test]
fn ring_of_infinite_obstacles_is_still_enclosable() {
    // the required square's own boundary avoids every obstacle
    let input = data("ring.json");
    let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap(), "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 8.0);
}

#[test]
fn infinite_unbounded_penalty_when_inverted_is_infeasible() {
    let input = data("invert_unbounded_inf.json");
    let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["cost"], "inf");
    assert_eq!(v["feasible"], false);
}

#[test]
fn mode_flag_overrides_the_instance() {
    let input = data("square.json");
    // inverted, the required square stays outside and the optional one is cheaper to skip
    let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap(), "--mode", "invert", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["mode"], "invert");
    assert_eq!(v["cost"], 1.5);
}

#[test]
fn malformed_json_exits_1() {
    let input = data("malformed.json");
    let out = enclose(&["solve", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    let out = enclose(&["solve", "--input", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn walk_round_trips_through_the_verifier() {
    let input = data("connector.json");
    let (code, v) = solve_json(&["solve", "--input", input.to_str().unwrap(), "--verify"]);
    assert_eq!(code, 0);
    let inst = load_instance::<f64>(&std::fs::read(&input).unwrap()).unwrap();
    assert_eq!(v["internal_scale"], inst.refinement);
    let vertices: Vec<QPoint> = v["walk_internal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let c = |i: usize| BigRational::from_str(p[i].as_str().unwrap()).unwrap();
            QPoint::new(c(0), c(1))
        })
        .collect();
    let weights = (0..vertices.len())
        .map(|i| vertices[i].dist(&vertices[(i + 1) % vertices.len()]) / inst.units_per_length())
        .collect();
    let poly = Polygon::new(vertices, weights).unwrap();
    let sol = evaluate_solution(&inst, &poly).unwrap();
    assert!(sol.feasible);
    let reported = v["cost"].as_f64().unwrap();
    assert!((sol.cost - reported).abs() <= 1e-9 * reported.max(1.0), "{} vs {reported}", sol.cost);
}

#[test]
fn svg_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("connector.json");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let svg = dir.path().join(format!("run{i}.svg"));
        let json = dir.path().join("out.json");
        let out = enclose(&[
            "solve",
            "--input",
            input.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
            "--out",
            json.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        outputs.push(std::fs::read_to_string(svg).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/connector.svg");
    assert_eq!(outputs[0], std::fs::read_to_string(golden).unwrap());
    // the connector under the optional square is drawn twice, offset
    assert!(outputs[0].contains(r#"y1="-0.0127""#));
    assert!(outputs[0].contains(r#"y1="0.0127""#));
}

#[test]
fn generated_instance_with_oracle_check() {
    let (code, v) = solve_json(&[
        "solve",
        "--gen",
        "objects=2,required=1,shape=triangles,grid=6,size=2",
        "--seed",
        "3",
        "--oracle-check",
        "--verify",
        "--debug-freespace",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["oracle_check"]["agrees"], true, "{v}");
    assert!(v["free_space"]["edges"].as_array().unwrap().len() > 3);
}

#[test]
fn input_or_generator_is_required() {
    let out = enclose(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
    let out = enclose(&["solve", "--gen", "objects=2,colour=red"]);
    assert_eq!(out.status.code(), Some(1));
}
