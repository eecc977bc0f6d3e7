use std::path::Path;
use std::process::{Command, Output};

fn bvmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvmetric")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn golden(name: &str, args: &[&str], expected_code: i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = bvmetric(&full);
    assert_eq!(code(&out), expected_code, "{}", String::from_utf8_lossy(&out.stderr));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), want, "{}", path.display());
}

#[test]
fn golden_verify_reciprocal() {
    golden(
        "verify_reciprocal.json",
        &["verify", "--gallery", "reciprocal_space", "--n", "10", "--v", "3", "--s", "3"],
        0,
    );
}

#[test]
fn golden_contractive_naturals() {
    golden("contractive_naturals.json", &["contractive", "--gallery", "naturals_space", "--n", "40"], 1);
}

#[test]
fn golden_iterate_reciprocal() {
    golden(
        "iterate_reciprocal.json",
        &["iterate", "--gallery", "reciprocal_space", "--n", "10", "--x0", "1/2"],
        0,
    );
}

#[test]
fn golden_min_s_union() {
    golden("min_s_union.json", &["min-s", "--gallery", "union_space", "--n", "12", "--v", "3"], 0);
}

#[test]
fn golden_condition_b_naturals() {
    golden(
        "condition_b_naturals.json",
        &["condition-b", "--gallery", "naturals_space", "--n", "40", "--x0", "5", "--horizon", "4", "--epsilon", "3/2"],
        1,
    );
}

#[test]
fn verify_refutation_carries_witness() {
    let out = bvmetric(&["--format", "json", "verify", "--gallery", "union_space", "--n", "12", "--v", "3", "--s", "2"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "refuted");
    assert!(v["result"]["witness"]["chain"].as_array().unwrap().len() == 3);
}

#[test]
fn adjudicate_statuses() {
    for (g, n, expected) in [("naturals_space", "40", 1), ("reciprocal_space", "10", 0), ("union_space", "12", 1)] {
        let out = bvmetric(&["adjudicate", "--gallery", g, "--n", n]);
        assert_eq!(code(&out), expected, "{g}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"labels":["a","b"],"dist":[["0","1/0"],["1/0","0"]]}"#).unwrap();
    let out = bvmetric(&["verify", "--space", bad.to_str().unwrap(), "--v", "1", "--s", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let asym = dir.path().join("asym.json");
    std::fs::write(&asym, r#"{"labels":["a","b"],"dist":[["0","1"],["2","0"]]}"#).unwrap();
    assert_eq!(code(&bvmetric(&["min-s", "--space", asym.to_str().unwrap(), "--v", "1"])), 2);

    assert_eq!(code(&bvmetric(&["verify", "--gallery", "union_space", "--n", "12", "--v", "3", "--s", "0.5"])), 2);
    assert_eq!(code(&bvmetric(&["verify", "--gallery", "nope", "--n", "12", "--v", "3", "--s", "2"])), 2);
    assert_eq!(code(&bvmetric(&["frobnicate"])), 2);
    assert_eq!(code(&bvmetric(&["--help"])), 0);
}

#[test]
fn budget_guard_exits_2() {
    let out = bvmetric(&["verify", "--gallery", "naturals_space", "--n", "40", "--v", "3", "--s", "2", "--budget", "1000"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn explicit_space_round_trip_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("space.json");
    let out = bvmetric(&["--format", "json", "--output", doc.to_str().unwrap(), "export", "--gallery", "halving_space", "--n", "6"]);
    assert_eq!(code(&out), 0);
    let exported: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&doc).unwrap()).unwrap();
    let labels = exported["labels"].as_array().unwrap();
    assert_eq!(labels.len(), 8);

    let csv_path = dir.path().join("orbit.csv");
    let out = bvmetric(&[
        "iterate", "--gallery", "halving_space", "--n", "6", "--x0", "1", "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["n", "point", "step_dist", "dist_to_z"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][1], "1");
    assert_eq!(&rows[0][2], "1/2");
    assert_eq!(&rows[rows.len() - 1][3], "0");
}

#[test]
fn map_override_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    std::fs::write(&map, r#"{"1/2":"1/2","1/3":"1/2","1/4":"1/2","1/5":"1/2"}"#).unwrap();
    let out = bvmetric(&[
        "--format", "json", "contractive", "--gallery", "reciprocal_space", "--n", "5", "--map", map.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["holds"], true);
    assert_eq!(v["result"]["pairs_checked"], 6);
}
