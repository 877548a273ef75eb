use std::fs;
use std::path::Path;
use std::process::Command;

use certmap::experiments::sample_tubes;
use certmap::rng::RngSpec;

fn certmap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_certmap"))
}

fn write_lines(path: &Path) {
    let mut csv = String::from("x,y\n");
    for y in [0.0, 10.0] {
        for i in 0..=30 {
            csv.push_str(&format!("{},{y}\n", i as f64 / 10.0));
        }
    }
    fs::write(path, csv).unwrap();
}

fn run_certify(input: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = certmap()
        .args(["certify", "--input"])
        .arg(input)
        .args([
            "--filter",
            "coord:0",
            "--intervals",
            "2",
            "--overlap",
            "0.5",
            "--sims",
            "19",
            "--out",
        ])
        .arg(out)
        .args(extra)
        .status()
        .unwrap();
    status.code().unwrap()
}

#[test]
fn separated_lines_certify_by_corollary() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out, dot) = (
        dir.path().join("pts.csv"),
        dir.path().join("cert.json"),
        dir.path().join("g.dot"),
    );
    write_lines(&input);
    assert_eq!(run_certify(&input, &out, &["--dot", dot.to_str().unwrap()]), 0);
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert["route"], "corollary");
    assert!(cert["test"].is_null());
    assert!(cert["verdict"]["certified"]["interleaving_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(cert["dataset_sha256"].as_str().unwrap().len(), 64);
    assert!(fs::read_to_string(&dot).unwrap().starts_with("graph"));
}

#[test]
fn certificates_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pts.csv");
    write_lines(&input);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let flags = ["--route", "statistical", "--seed", "5"];
    assert_eq!(run_certify(&input, &a, &flags), run_certify(&input, &b, &flags));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn tubes_are_obstructed() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out, svg) = (
        dir.path().join("tubes.csv"),
        dir.path().join("cert.json"),
        dir.path().join("s.svg"),
    );
    let cloud = sample_tubes(250, &mut RngSpec::new(1).stream_for(&[250])).unwrap();
    let body: Vec<String> = cloud
        .points()
        .iter()
        .map(|p| format!("{},{},{},{}", p[0], p[1], p[2], p[3]))
        .collect();
    fs::write(&input, body.join("\n")).unwrap();
    let code = certmap()
        .args(["certify", "--input"])
        .arg(&input)
        .args([
            "--filter",
            "coord:0",
            "--intervals",
            "10",
            "--overlap",
            "0.5",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out)
        .arg("--score-plot")
        .arg(&svg)
        .status()
        .unwrap()
        .code()
        .unwrap();
    assert_eq!(code, 2);
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!cert["verdict"]["obstructed"]["simplices"]
        .as_array()
        .unwrap()
        .is_empty());
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn too_few_points_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("pts.csv"), dir.path().join("cert.json"));
    fs::write(&input, "0\n10\n").unwrap();
    assert_eq!(run_certify(&input, &out, &["--route", "statistical"]), 3);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("pts.csv"), dir.path().join("cert.json"));
    fs::write(&input, "1,2\n3\n").unwrap();
    assert_eq!(run_certify(&input, &out, &[]), 1);
    write_lines(&input);
    assert_eq!(run_certify(&input, &out, &["--method", "bogus"]), 1);
}

#[test]
fn mapper_subcommand_writes_structure() {
    let dir = tempfile::tempdir().unwrap();
    let (input, dot, json) = (
        dir.path().join("pts.csv"),
        dir.path().join("g.dot"),
        dir.path().join("g.json"),
    );
    write_lines(&input);
    let out = certmap()
        .args(["mapper", "--input"])
        .arg(&input)
        .args(["--intervals", "2", "--dot"])
        .arg(&dot)
        .arg("--json")
        .arg(&json)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("4 vertices"));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(m["cover_elements"].as_array().unwrap().len(), 4);
    assert!(dot.exists());
}

#[test]
fn build_store_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("store.csv");
    let status = certmap()
        .args([
            "simulate",
            "build-store",
            "--count",
            "1",
            "--circle-count",
            "1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("family,sigma,width,height,n_points,cloud_id,hom_dim,kind,value"));
    // 18 null and 6 circle clouds, two dimensions each.
    assert_eq!(text.lines().count(), 1 + 2 * 24);
}
