use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn cfdim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfdim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CFDIM_THREADS")
        .output()
        .expect("spawn cfdim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_dir(o: &Output) -> PathBuf {
    let text = stdout(o);
    let line = text.lines().find_map(|l| l.strip_prefix("run ")).expect("run line");
    PathBuf::from(line)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).expect("read")).expect("json")
}

fn manifest_digests_match(dir: &Path) -> bool {
    let m = read_json(&dir.join("manifest.json"));
    m["outputs"].as_array().expect("outputs").iter().all(|o| {
        let bytes = fs::read(dir.join(o["file"].as_str().unwrap())).unwrap();
        hex::encode(Sha256::digest(&bytes)) == o["sha256"].as_str().unwrap()
            && bytes.len() as u64 == o["bytes"].as_u64().unwrap()
    })
}

#[test]
fn expand_examples() {
    let tmp = tempfile::tempdir().unwrap();
    for (x, digits) in [("3/7", "2 3"), ("0/1", ""), ("7/10", "1 2 3")] {
        let o = cfdim(tmp.path(), &["expand", x]);
        assert!(o.status.success(), "{x}");
        assert_eq!(stdout(&o).trim_end_matches('\n'), digits, "{x}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cfdim(tmp.path(), &["expand", "3/x"]).status.code(), Some(2));
    assert_eq!(cfdim(tmp.path(), &["expand", "3/2"]).status.code(), Some(3));
    assert_eq!(cfdim(tmp.path(), &["predict", "--psi", "lin:1"]).status.code(), Some(2));
    assert_eq!(cfdim(tmp.path(), &["predict", "--psi", "wobble", "--set", "sup"]).status.code(), Some(2));
    let o = cfdim(tmp.path(), &["estimate", "--em", "7", "--depth", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    assert!(fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn cylinder_prints_endpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cfdim(tmp.path(), &["cylinder", "2,3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.contains("left    3/7") && text.contains("right   4/9") && text.contains("length  1/63"),
        "{text}"
    );
}

#[test]
fn predict_examples() {
    let tmp = tempfile::tempdir().unwrap();
    for (psi, set, exact) in [("alt:2,3", "lim", "1/10"), ("exp:3", "inf", "1/4"), ("pow:0.5", "sup", "1")] {
        let o = cfdim(tmp.path(), &["predict", "--psi", psi, "--set", set, "--horizon", "512"]);
        assert!(o.status.success(), "{psi}");
        let dir = run_dir(&o);
        let doc = read_json(&dir.join("report.json"));
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["result"]["value"]["exact"], exact, "{psi}");
        assert_eq!(doc["result"]["method"], "closed_form");
        assert!(manifest_digests_match(&dir));
    }
}

#[test]
fn estimate_em_lies_in_jarnik_bracket() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cfdim(tmp.path(), &["estimate", "--em", "8", "--depth", "10"]);
    assert!(o.status.success());
    let dir = run_dir(&o);
    let v = read_json(&dir.join("report.json"))["result"]["value"]["value"].as_f64().unwrap();
    assert!((0.81966..=0.99249).contains(&v), "{v}");
    let csv = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("depth,value,lo,hi"));
    assert!(manifest_digests_match(&dir));
}

#[test]
fn construct_emits_admissible_word() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["construct", "--set", "e-lower", "--psi", "exp:2", "--depth", "20", "--sample", "min"];
    let o = cfdim(tmp.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("admissible true"));
    let dir = run_dir(&o);
    let sample = read_json(&dir.join("sample.json"));
    assert_eq!(sample["result"]["admissible"], true);
    assert_eq!(sample["result"]["digits"].as_array().unwrap().len(), 20);
    assert_eq!(fs::read_to_string(dir.join("trace.csv")).unwrap().lines().count(), 21);
    assert!(manifest_digests_match(&dir));
}

#[test]
fn construct_checks_small_em_set() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "construct",
        "--set",
        "e-m-psi",
        "--psi",
        "lin:1",
        "--m",
        "2",
        "--depth",
        "8",
        "--check-gap",
        "0,1,2",
    ];
    let o = cfdim(tmp.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let checks = read_json(&run_dir(&o).join("checks.json"));
    let gap = checks["result"]["gap"].as_array().unwrap();
    assert_eq!(gap.len(), 3);
    assert!(gap.iter().all(|g| g["violations"].as_array().unwrap().is_empty()));
}

#[test]
fn montecarlo_hits_match_log_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["montecarlo", "--bb", "--psi", "lin:1", "--n", "4096", "--samples", "1000", "--seed", "7"];
    let o = cfdim(tmp.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&o);
    let mean = read_json(&dir.join("report.json"))["result"]["summary"]["mean_hits"].as_f64().unwrap();
    assert!((mean - 12.0).abs() <= 3.0, "{mean}");
    assert_eq!(read_json(&dir.join("manifest.json"))["seed"], 7);
    assert!(manifest_digests_match(&dir));
}

#[test]
fn identical_parameters_give_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["montecarlo", "--bb", "--psi", "lin:2", "--n", "1024", "--samples", "100", "--seed", "3"];
    let a = run_dir(&cfdim(tmp.path(), &args));
    let b = run_dir(&cfdim(tmp.path(), &["--threads", "1"].iter().chain(&args).copied().collect::<Vec<_>>()));
    assert_ne!(a, b);
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["params_sha256"], mb["params_sha256"]);
    assert_eq!(ma["outputs"], mb["outputs"]);
}
