use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn blockcoh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockcoh"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < tol
}

#[test]
fn construct_steiner_reports_one_third() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["construct", "--family", "steiner", "--v", "4", "--kron", "hadamard:1", "--name", "st"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("st.report.json"));
    assert!(close(&report["mu"], 1.0 / 3.0, 1e-12));
    assert_eq!(report["n"], 12);
    assert_eq!(report["m"], 16);
    assert!(dir.path().join("st.bfm").exists());
    assert!(dir.path().join("construct.manifest.json").exists());
}

#[test]
fn identity_hadamard_is_a_union_of_orthobases() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["construct", "--family", "id-hadamard", "--k", "3"]);
    assert!(out.status.success());
    let report = json(&dir.path().join("frame.report.json"));
    assert_eq!(report["is_union_of_orthobases"], true);
    assert!(close(&report["mu"], 1.0 / 8f64.sqrt(), 1e-12));
}

#[test]
fn analyze_reproduces_the_construct_report() {
    let dir = TempDir::new().unwrap();
    assert!(blockcoh(dir.path(), &["construct", "--family", "alltop", "--p", "7", "--name", "a7"]).status.success());
    let built = fs::read_to_string(dir.path().join("a7.report.json")).unwrap();
    let sub = dir.path().join("again");
    let out = blockcoh(&sub, &["analyze", dir.path().join("a7.bfm").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(sub.join("a7.report.json")).unwrap(), built);
    let gram = fs::read_to_string(sub.join("a7.gram.csv")).unwrap();
    assert!(gram.starts_with("i,j,norm\n"));
    let m = json(&sub.join("a7.report.json"))["m"].as_u64().unwrap() as usize;
    assert_eq!(gram.lines().count(), 1 + m * (m + 1) / 2);
}

#[test]
fn malformed_frame_file_exits_with_validation_code() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.bfm");
    fs::write(&bad, "this is not a frame\n").unwrap();
    let out = blockcoh(dir.path(), &["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bounds_for_a_small_complex_case() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["bounds", "--m", "16", "--n", "12", "--r", "2", "--field", "complex"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = json(&dir.path().join("bounds.json"));
    assert!(close(&b["welch_block_lower"], 1.0 / 3.0, 1e-12));
    assert_eq!(b["max_equiisoclinic"], 141);
}

#[test]
fn threshold_outside_its_domain_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["threshold", "--beta", "0.6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn threshold_json_uses_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["--format", "json", "threshold", "--beta", "0.25"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("threshold.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let a = v[0]["a_hat"].as_f64().unwrap();
    assert!(a > 1.0 && a < 4.0);
    let mantissa = text.split("\"a_hat\":").nth(1).unwrap().split('e').next().unwrap().trim();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{mantissa}");
}

#[test]
fn bfm_and_report_survive_a_round_trip() {
    let dir = TempDir::new().unwrap();
    assert!(blockcoh(dir.path(), &["construct", "--family", "chirp", "--p", "5", "--name", "c5"]).status.success());
    let bfm = fs::read_to_string(dir.path().join("c5.bfm")).unwrap();
    let report = fs::read_to_string(dir.path().join("c5.report.json")).unwrap();

    let copy = dir.path().join("copy");
    fs::create_dir(&copy).unwrap();
    fs::write(copy.join("c5.bfm"), &bfm).unwrap();
    let out = blockcoh(&copy, &["flip", copy.join("c5.bfm").to_str().unwrap(), "--name", "c5f"]);
    assert!(out.status.success());
    let out = blockcoh(&copy, &["analyze", copy.join("c5.bfm").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(copy.join("c5.report.json")).unwrap(), report);
    assert_eq!(fs::read_to_string(copy.join("c5.bfm")).unwrap(), bfm);

    let flip = json(&copy.join("c5f.flip.json"));
    assert_eq!(flip["mu_before"], flip["mu_after"]);
}

#[test]
fn manifest_lists_outputs_and_parameters() {
    let dir = TempDir::new().unwrap();
    assert!(blockcoh(dir.path(), &["--seed", "9", "threshold", "--points", "3"]).status.success());
    let m = json(&dir.path().join("threshold.manifest.json"));
    assert_eq!(m["command"], "threshold");
    assert_eq!(m["seed"], 9);
    let listed = m["outputs"].to_string();
    assert!(listed.contains("threshold.csv"), "{listed}");
    assert_eq!(m["params"]["points"], 3);
}

#[test]
fn same_seed_reproduces_random_outputs() {
    let run = |threads: &str| {
        let dir = TempDir::new().unwrap();
        let args = [
            "--seed", "5", "--trials", "3", "--threads", threads, "random-mu", "--n", "24", "--r-grid", "2,4,6", "--m-cap", "20",
        ];
        assert!(blockcoh(dir.path(), &args).status.success());
        let cs = [
            "--seed", "5", "--trials", "20", "--threads", threads, "cs", "--k-grid", "1,3", "--dynamic-range", "10",
        ];
        assert!(blockcoh(dir.path(), &cs).status.success());
        (
            fs::read_to_string(dir.path().join("random_mu.csv")).unwrap(),
            fs::read_to_string(dir.path().join("ndp.csv")).unwrap(),
        )
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("2"));
    assert!(first.0.starts_with("beta,mean_mu,max_mu,theory_mu\n"));
    assert_eq!(first.0.lines().count(), 4);
}

#[test]
fn small_flip_table_preserves_gram_maps() {
    let dir = TempDir::new().unwrap();
    let out = blockcoh(dir.path(), &["--trials", "2", "flip-table", "--n", "16", "--m", "32", "--r-set", "1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = json(&dir.path().join("flip_table.json"));
    assert_eq!(t["rows"].as_array().unwrap().len(), 2);
    for row in t["rows"].as_array().unwrap() {
        assert!(row["nu_after_mean"].as_f64().unwrap() <= row["nu_before_mean"].as_f64().unwrap());
    }
}
