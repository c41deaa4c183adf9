use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdelaunay"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed(dir: &Path) -> Vec<String> {
    manifest(dir)["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap().to_string()).collect()
}

#[test]
fn plateau_writes_mesh_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["plateau", "--kappa", "1", "--H", "1", "--lambda", "2.0", "--resolution", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = listed(dir.path());
    files.sort();
    assert_eq!(files, vec!["plateau.json", "plateau.obj", "plateau_vertices.csv"]);
    let m = manifest(dir.path());
    assert_eq!(m["command"], "plateau");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["input_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("plateau_vertices.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "vertex_id,tag,nu,u");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["conjugate", "--H", "0.8", "--lambda", "2.2", "--resolution", "10", "--copies", "2", "--format", "ply"];
    for d in [&a, &b] {
        assert_eq!(run(d.path(), &args).status.code(), Some(0));
    }
    let files = listed(a.path());
    assert!(files.iter().any(|f| f.ends_with(".ply")));
    assert_eq!(files, listed(b.path()));
    for f in &files {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(a.path())["outputs"], manifest(b.path())["outputs"]);
    assert_eq!(manifest(a.path())["input_hash"], manifest(b.path())["input_hash"]);
}

#[test]
fn observables_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["observables", "--H", "1", "--lambda", "0.5,2.5", "--resolution", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = listed(dir.path());
    let csv_name = files.iter().find(|f| f.ends_with(".csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join(csv_name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    for col in ["lambda", "ell0", "ell1", "ell2", "mu0", "mu1", "mu2", "quadrature_error", "holonomy"] {
        assert!(header.split(',').any(|h| h == col), "{col} missing from {header}");
    }
    assert_eq!(lines.count(), 2);
}

#[test]
fn find_lambda_reports_a_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["find-lambda", "--H", "0.7", "--m", "2", "--resolution", "12", "--width", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("find_lambda.json")).unwrap()).unwrap();
    let root = &v["roots"][0];
    let (lo, hi) = (root["bracket"][0].as_f64().unwrap(), root["bracket"][1].as_f64().unwrap());
    let lambda = root["lambda"].as_f64().unwrap();
    assert!(hi - lo < 0.01 && lo <= lambda && lambda <= hi);
    assert!(lambda > 0.0 && lambda < std::f64::consts::FRAC_PI_2);
}

#[test]
fn no_root_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["find-lambda", "--H", "0.45", "--m", "2", "--resolution", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda = pi/2 fails"));
    assert_eq!(manifest(dir.path())["exit_code"], 2);
    assert!(listed(dir.path()).contains(&"find_lambda.json".to_string()));
}

#[test]
fn invalid_values_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["plateau", "--kappa", "-1", "--H", "0.4", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["plateau", "--H", "-1", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["plateau", "--H", "1", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["plateau", "--H", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["polygon", "--H", "1", "--lambda", "1", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["verify", "--level", "thorough"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(dir.path(), &["plateau", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(dir.path(), &["plateau", "--resolution", "many"]).status.code(), Some(64));
    let help = Command::new(env!("CARGO_BIN_EXE_hdelaunay")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn cylinder_and_polygon_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cylinder", "--H", "0.6,1,2", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = listed(dir.path());
    for f in ["profile_0.csv", "profile_1.csv", "profile_2.csv", "certificate.csv", "certificate.json"] {
        assert!(files.contains(&f.to_string()), "{f} missing from {files:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["polygon", "--H", "1", "--lambda", "2"]).status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("polygon.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "arc_tag,s,x,y,z");
}

#[test]
fn moduli_scan_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["moduli-scan", "--H", "0.4,0.7", "--m", "2", "--resolution", "10", "--width", "0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = listed(dir.path());
    files.sort();
    assert_eq!(files, vec!["moduli.csv", "moduli.json", "moduli.svg"]);
    let csv = std::fs::read_to_string(dir.path().join("moduli.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().contains("unduloid"));
}

#[test]
fn verify_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--only", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}
