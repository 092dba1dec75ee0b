use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn slicekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn square(dir: &Path) -> PathBuf {
    write(
        dir,
        "square.json",
        r#"{"n": 2, "rep": "V", "gens": [[1, 1], [1, -1]]}"#,
    )
}

fn disk(dir: &Path) -> PathBuf {
    let gens: Vec<Vec<f64>> = (0..256)
        .map(|j| {
            let t = std::f64::consts::PI * j as f64 / 256.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let body = serde_json::json!({"n": 2, "rep": "V", "gens": gens});
    write(dir, "disk.json", &body.to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn john_of_square_is_unit_disk() {
    let dir = TempDir::new().unwrap();
    let sq = square(dir.path());
    let v: Value = serde_json::from_str(&stdout(&slicekit(&["john", s(&sq)]))).unwrap();
    let m = &v["M"];
    for (i, j, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 1.0)] {
        assert!((m[i][j].as_f64().unwrap() - want).abs() < 1e-6);
    }
}

#[test]
fn lowner_and_slice_map_outputs() {
    let dir = TempDir::new().unwrap();
    let sq = square(dir.path());
    let csv = stdout(&slicekit(&["lowner", s(&sq), "--format", "csv"]));
    assert_eq!(csv, "0.5,0\n0,0.5\n");
    let v: Value = serde_json::from_str(&stdout(&slicekit(&["slice-map", s(&sq)]))).unwrap();
    assert!((v["P"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let pos: Value = serde_json::from_str(&stdout(&slicekit(&["john-position", s(&sq)]))).unwrap();
    assert_eq!(pos["rep"], "V");
}

#[test]
fn demo_remark_table() {
    let csv = stdout(&slicekit(&["demo-remark", "--format", "csv"]));
    let row = csv.lines().find(|l| l.starts_with("100,")).unwrap();
    assert_eq!(row, "100,0.1");
    assert!(csv.contains("hyperbola,ball(0,1;0.1),"));

    let v: Value = serde_json::from_str(&stdout(&slicekit(&["demo-remark"]))).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 100);
    assert_eq!(v["envelopes"][0]["envelope"]["unbounded_below"], true);
}

#[test]
fn banach_mazur_square_disk() {
    let dir = TempDir::new().unwrap();
    let (sq, dk) = (square(dir.path()), disk(dir.path()));
    let v: Value = serde_json::from_str(&stdout(&slicekit(&["bm-dist", s(&sq), s(&dk)]))).unwrap();
    let d = v["distance"].as_f64().unwrap();
    assert!((d - 2f64.sqrt()).abs() < 1e-3, "{d}");
}

#[test]
fn distance_matrices() {
    let dir = TempDir::new().unwrap();
    let bodies = stdout(&slicekit(&["gen", "--samples", "3"]));
    let path = write(dir.path(), "bodies.json", &bodies);
    let csv = stdout(&slicekit(&["quotient-dist", s(&path), "--format", "csv"]));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[i], 0.0);
        for (j, &x) in row.iter().enumerate() {
            assert_eq!(x, rows[j][i]);
        }
    }
    let sq = square(dir.path());
    let v: Value =
        serde_json::from_str(&stdout(&slicekit(&["hausdorff", s(&sq), s(&sq)]))).unwrap();
    assert_eq!(v["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn gen_round_trips_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = stdout(&slicekit(&[
        "gen",
        "--samples",
        "5",
        "--dim",
        "3",
        "--seed",
        "7",
    ]));
    let b = stdout(&slicekit(&[
        "gen",
        "--samples",
        "5",
        "--dim",
        "3",
        "--seed",
        "7",
    ]));
    assert_eq!(a, b);
    let c = stdout(&slicekit(&[
        "gen",
        "--samples",
        "5",
        "--dim",
        "3",
        "--seed",
        "8",
    ]));
    assert_ne!(a, c);
    let bodies: Vec<slicekit::body::SymBody> = serde_json::from_str(&a).unwrap();
    assert_eq!(bodies.len(), 5);
    assert!(bodies.iter().all(|b| b.dim() == 3));
    // each generated body feeds back into the solvers
    let one = serde_json::to_string(&bodies[0]).unwrap();
    let path = write(dir.path(), "one.json", &one);
    stdout(&slicekit(&["john", s(&path)]));
}

#[test]
fn net_report_is_deterministic_across_workers() {
    let args = ["net", "--samples", "12", "--radius", "0.3"];
    let serial = stdout(&slicekit(&[&args[..], &["--workers", "1"]].concat()));
    let parallel = stdout(&slicekit(&[&args[..], &["--workers", "4"]].concat()));
    assert_eq!(serial, parallel);
    let v: Value = serde_json::from_str(&serial).unwrap();
    assert_eq!(v["eps"].as_f64().unwrap(), 0.3);
    assert_eq!(v["coverage_fraction"].as_f64().unwrap(), 1.0);
    assert!(!v["centers"].as_array().unwrap().is_empty());
}

#[test]
fn slice_audit_reports_no_witnesses() {
    let v: Value =
        serde_json::from_str(&stdout(&slicekit(&["slice-audit", "--samples", "10"]))).unwrap();
    assert_eq!(v["members"].as_u64().unwrap(), 10);
    assert!(v["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn svg_output_for_planar_bodies() {
    let dir = TempDir::new().unwrap();
    let sq = square(dir.path());
    let out = dir.path().join("john.svg");
    stdout(&slicekit(&[
        "john",
        s(&sq),
        "--format",
        "svg",
        "--out",
        s(&out),
    ]));
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polygon").count(), 2);

    let cube = write(
        dir.path(),
        "cube.json",
        r#"{"n": 3, "rep": "V", "gens": [[1,0,0],[0,1,0],[0,0,1]]}"#,
    );
    let bad = slicekit(&["john", s(&cube), "--format", "svg"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn malformed_input_exits_one_with_position() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        "{\"n\": 2,\n \"rep\": \"V\",\n \"gens\": [[1, 1],, ]}",
    );
    let out = slicekit(&["john", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"n": 2, "rep": "V", "gens": [[0, 0], [1, 0]]}"#,
    );
    assert_eq!(slicekit(&["john", s(&zero)]).status.code(), Some(1));
    let sq = square(dir.path());
    assert_eq!(
        slicekit(&["john", s(&sq), "--eps", "0.5"]).status.code(),
        Some(1)
    );
    assert_eq!(slicekit(&["john", "missing.json"]).status.code(), Some(1));
}
