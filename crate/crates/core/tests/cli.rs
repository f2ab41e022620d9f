use std::process::{Command, Output};

use epsfix::cli::report::{ExtremalReport, PipelineReport, RadiusReport, SampledMapFile};
use epsfix::cli::{sampled_map_from_file, sampled_map_to_file};
use epsfix::maps::identity_map;
use epsfix::{PointSet, SampledMap};

fn epsfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsfix")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    epsfix(args).status.code().expect("exit code")
}

#[test]
fn radius_json() {
    let out = epsfix(&["radius", "--n", "3", "--eps", "1", "--format", "json"]);
    assert!(out.status.success());
    let report: RadiusReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.schema_version, "1");
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.rows[0].eps_over_radius, 0.5);
    assert!((report.rows[2].jung_radius - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn radius_text_and_csv() {
    let out = epsfix(&["radius", "--n", "2", "--eps", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,jung_radius,eps_over_radius"));
    assert_eq!(text.lines().nth(1), Some("1,2,1"));
}

#[test]
fn extremal_report() {
    let out = epsfix(&["extremal", "--n", "2", "--eps", "1", "--resolution", "201"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: ExtremalReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report.image_diameter - 1.0).abs() < 1e-9);
    assert!(report.tightness.min_displacement >= 1.0 / 3f64.sqrt() - 1e-9);
    assert!(report.modulus.iter().all(|m| m.value <= 1.0 + 1e-9));
    assert_eq!(report.image_points.len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["radius"]), 2);
    assert_eq!(code(&["radius", "--n", "0"]), 2);
    assert_eq!(code(&["extremal", "--n", "2", "--eps", "3"]), 2);
    assert_eq!(code(&["figure", "--format", "json"]), 2);
    // eps' = eps / R_1 exactly
    assert_eq!(code(&["pipeline", "--map", "step", "--eps", "1", "--eps-prime", "0.5"]), 3);
    assert_eq!(code(&["pipeline", "--map", "extremal", "--n", "2", "--eps", "1", "--eps-prime", "0.5"]), 3);
    assert_eq!(code(&["pipeline", "--map", "extremal", "--n", "3", "--eps", "1", "--eps-prime", "0.62", "--budget", "1000"]), 4);
    assert_eq!(code(&["verify", "--n", "3", "--eps", "1", "--resolution", "1000", "--budget", "1000"]), 4);
    assert_eq!(code(&["figure", "--out", "/nonexistent-dir/fig.svg"]), 5);
    assert_eq!(code(&["pipeline", "--map-file", "/nonexistent-dir/map.json", "--eps-prime", "0.6"]), 5);
}

#[test]
fn malformed_map_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"schema_version":"1","dim":1,"covering_radius":0.1,"points":[[0.0]],"values":[[0.0,1.0]]}"#).unwrap();
    assert_eq!(code(&["pipeline", "--map-file", path.to_str().unwrap(), "--eps", "0.5", "--eps-prime", "0.6"]), 2);
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(code(&["pipeline", "--map-file", path.to_str().unwrap(), "--eps", "0.5", "--eps-prime", "0.6"]), 2);
}

fn negated_grid_file() -> SampledMapFile {
    let h = 0.01;
    let rows: Vec<Vec<f64>> = (0..=200).map(|k| vec![-1.0 + k as f64 * h]).collect();
    let values: Vec<Vec<f64>> = rows.iter().map(|r| vec![-r[0]]).collect();
    SampledMapFile {
        schema_version: "1".into(),
        dim: 1,
        eps: Some(0.02),
        covering_radius: h / 2.0 + 1e-12,
        points: rows,
        values,
    }
}

#[test]
fn pipeline_from_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.json");
    std::fs::write(&path, serde_json::to_string(&negated_grid_file()).unwrap()).unwrap();
    let out = epsfix(&["pipeline", "--map-file", path.to_str().unwrap(), "--eps-prime", "0.05"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: PipelineReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.map.kind, "sampled");
    assert_eq!(report.eps, 0.02);
    assert!(report.verification.below_eps_prime);
    assert!(report.certificate.z[0].abs() < 0.05);
}

#[test]
fn map_file_round_trip() {
    let pts = PointSet::from_flat(2, vec![0.0, 0.0, 0.5, 0.5, -0.5, 0.25]).unwrap();
    let map = SampledMap::from_map(&identity_map(2), pts, 0.8).unwrap().with_eps(0.1).unwrap();
    let file = sampled_map_to_file(&map);
    let text = serde_json::to_string(&file).unwrap();
    let back: SampledMapFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, file);
    let rebuilt = sampled_map_from_file(back).unwrap();
    assert_eq!(rebuilt.points().flat(), map.points().flat());
    assert_eq!(rebuilt.eps(), Some(0.1));
}

#[test]
fn csv_sweep() {
    let out = epsfix(&["verify", "--n", "1", "--eps", "1", "--resolution", "11", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 12);
}
