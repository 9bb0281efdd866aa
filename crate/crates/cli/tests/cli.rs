use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn loomlab(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_loomlab"))
        .args(args)
        .env_remove("LOOMLAB_BUDGET")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn loomlab");
    let mut pipe = child.stdin.take().expect("stdin");
    pipe.write_all(stdin.unwrap_or("").as_bytes()).expect("write stdin");
    drop(pipe);
    child.wait_with_output().expect("wait")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn thresholds_example() {
    let v = json(&loomlab(&["thresholds", "--k", "5", "--l", "3"], None));
    assert_eq!(v["lambda"], "1/6");
    assert_eq!(v["delta_k_minus_2"], "11/36");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["args"]["thresholds"]["k"], 5);
}

#[test]
fn barrier_piped_into_hamilton() {
    let sb = loomlab(&["barrier", "--k", "3", "--l", "1", "--n", "8", "--a", "1"], None);
    let text = String::from_utf8(sb.stdout.clone()).unwrap();
    let v = json(&loomlab(&["hamilton", "--l", "1"], Some(&text)));
    assert_eq!(v["found"], false);

    let sb = loomlab(&["barrier", "--k", "3", "--l", "1", "--n", "8", "--a", "2"], None);
    let v = json(&loomlab(&["hamilton", "--l", "1"], Some(&String::from_utf8(sb.stdout).unwrap())));
    assert_eq!(v["found"], true);
}

#[test]
fn hamilton_on_complete_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k63.json");
    let edges: Vec<Vec<usize>> = (0..6usize)
        .flat_map(|a| (a + 1..6).flat_map(move |b| (b + 1..6).map(move |c| vec![a, b, c])))
        .collect();
    std::fs::write(&p, serde_json::json!({ "n": 6, "k": 3, "edges": edges }).to_string()).unwrap();
    let v = json(&loomlab(&["hamilton", "--l", "1", "--input", p.to_str().unwrap()], None));
    assert_eq!(v["found"], true);
    let mut verts: Vec<u64> = v["verts"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    verts.sort_unstable();
    assert_eq!(verts, (0..6).collect::<Vec<_>>());
}

#[test]
fn exit_codes() {
    // precondition
    assert_eq!(code(&loomlab(&["thresholds", "--k", "4", "--l", "4"], None)), 2);
    assert_eq!(code(&loomlab(&["experiment", "no-such-suite"], None)), 2);
    // budget and timeout
    let sb = loomlab(&["barrier", "--k", "3", "--l", "1", "--n", "12", "--a", "3"], None);
    let text = String::from_utf8(sb.stdout).unwrap();
    assert_eq!(code(&loomlab(&["hamilton", "--l", "1", "--budget", "10"], Some(&text))), 3);
    // planted assembly takes seconds
    assert_eq!(code(&loomlab(&["assemble", "--b", "5", "--timeout-ms", "50"], None)), 3);
    // parse
    assert_eq!(code(&loomlab(&["degree", "--d", "1"], Some("{not json"))), 4);
    assert_eq!(code(&loomlab(&["thresholds", "--k", "3"], None)), 4);
    assert_eq!(code(&loomlab(&["no-such-command"], None)), 4);
    // io
    assert_eq!(code(&loomlab(&["degree", "--d", "1", "--input", "/no/such/file.json"], None)), 5);
    assert_eq!(code(&loomlab(&["thresholds", "--k", "3", "--l", "1", "--out", "/no/such/dir/x.json"], None)), 5);
    // help is not an error
    assert_eq!(code(&loomlab(&["--help"], None)), 0);
}

#[test]
fn errors_are_json_on_stderr() {
    let out = loomlab(&["thresholds", "--k", "4", "--l", "4"], None);
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "precondition");
    assert_eq!(v["schema_version"], 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn budget_env_is_used_unless_the_flag_overrides() {
    let sb = loomlab(&["barrier", "--k", "3", "--l", "1", "--n", "12", "--a", "3"], None);
    let text = String::from_utf8(sb.stdout).unwrap();
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["hamilton", "--l", "1"];
        args.extend(extra);
        let mut child = Command::new(env!("CARGO_BIN_EXE_loomlab"))
            .args(&args)
            .env("LOOMLAB_BUDGET", env)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
        child.wait_with_output().unwrap().status.code().unwrap()
    };
    assert_eq!(run("10", &[]), 3);
    assert_eq!(run("10", &["--budget", "50000000"]), 0);
    assert_eq!(run("ten", &[]), 4);
}

#[test]
fn persist_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    let out = loomlab(&["thresholds", "--k", "3", "--l", "1", "--out", p.to_str().unwrap()], None);
    let printed = json(&out);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(saved, printed);
    assert_eq!(saved["schema_version"], 1);
    // no temp files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn csv_output() {
    let out = loomlab(&["thresholds", "--k", "3", "--l", "1", "--format", "csv"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let at = headers.iter().position(|h| h == "lambda").unwrap();
    assert_eq!(&row[at], "1/4");
}

#[test]
fn cycle_output_validates_and_chains() {
    let c = loomlab(&["cycle", "--k", "3", "--l", "1", "--t", "4"], None);
    let v = json(&c);
    assert_eq!(v["verts"].as_array().unwrap().len(), 8);
    let comps = json(&loomlab(&["components", "--l", "1"], Some(&String::from_utf8(c.stdout).unwrap())));
    assert_eq!(comps["spanning"], true);
}

#[test]
fn gcd_and_lattice_verdicts() {
    assert_eq!(json(&loomlab(&["gcd", "--k", "3", "--l", "1", "--divisor"], None))["gcd"], "1");
    assert_eq!(json(&loomlab(&["gcd", "--k", "3", "--l", "1", "--t", "3"], None))["gcd"], "inf");
    let edge = r#"{"n":3,"k":3,"edges":[[0,1,2]]}"#;
    assert_eq!(json(&loomlab(&["lattice", "--l", "1", "--divisor"], Some(edge)))["verdict"], "complete");
    assert_eq!(json(&loomlab(&["lattice", "--l", "1", "--t", "3"], Some(edge)))["verdict"], "incomplete");
}

#[test]
fn squash_is_seeded() {
    let k84 = {
        let out = loomlab(&["barrier", "--k", "4", "--l", "1", "--n", "8", "--a", "8"], None);
        String::from_utf8(out.stdout).unwrap()
    };
    let a = json(&loomlab(&["squash", "--q", "2", "--seed", "5"], Some(&k84)));
    let b = json(&loomlab(&["squash", "--q", "2", "--seed", "5"], Some(&k84)));
    assert_eq!(a, b);
    assert_eq!(a["graph"]["n"], 4);
    let e = json(&loomlab(&["squash", "--q", "2", "--mode", "expectation"], Some(&k84)));
    assert_eq!(e["exact"], e["closed_form"]);
}

fn run_dirs(root: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn experiments_are_reproducible() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().to_str().unwrap();
    for suite in ["threshold-constants", "barrier-sweep", "squash-suite"] {
        let a = json(&loomlab(&["experiment", suite, "--seed", "9", "--out-dir", out], None));
        let b = json(&loomlab(&["experiment", suite, "--seed", "9", "--out-dir", out], None));
        assert_eq!(a["ok"], true, "{suite}");
        assert_eq!(a["rows"], b["rows"], "{suite}");
    }
    let dirs = run_dirs(root.path());
    assert_eq!(dirs.len(), 6);
    for pair in dirs.chunks(2) {
        let rows: Vec<String> = pair.iter().map(|d| std::fs::read_to_string(d.join("rows.csv")).unwrap()).collect();
        assert_eq!(rows[0], rows[1]);
        for d in pair {
            let s: Value = serde_json::from_str(&std::fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
            assert_eq!(s["schema_version"], 1);
            assert!(s["timestamp"].is_u64());
            let name = d.file_name().unwrap().to_str().unwrap();
            assert!(name.contains("-seed9"), "{name}");
        }
    }
}

#[test]
fn barrier_sweep_matches_lambda() {
    let root = tempfile::tempdir().unwrap();
    let v = json(&loomlab(&["experiment", "barrier-sweep", "--out-dir", root.path().to_str().unwrap()], None));
    for r in v["rows"].as_array().unwrap() {
        let (n, a) = (r["n"].as_u64().unwrap(), r["a"].as_u64().unwrap());
        assert_eq!(r["found"].as_bool().unwrap(), a >= n.div_ceil(4), "n={n}, a={a}");
    }
}

#[test]
fn threshold_suite_covers_k_up_to_nine() {
    let root = tempfile::tempdir().unwrap();
    let v = json(&loomlab(&["experiment", "threshold-constants", "--out-dir", root.path().to_str().unwrap()], None));
    let rows = v["rows"].as_array().unwrap();
    let ks: std::collections::BTreeSet<u64> = rows.iter().map(|r| r["k"].as_u64().unwrap()).collect();
    assert_eq!(ks, (3..=9).collect());
    let k5 = rows.iter().find(|r| r["k"] == 5 && r["l"] == 3).unwrap();
    assert_eq!(k5["delta_k_minus_2"], "11/36");
}
