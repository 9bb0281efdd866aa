//! Experiment suites. Each run writes `rows.csv` and `summary.json` into a
//! fresh directory `<suite>-<unix millis>-seed<seed>`; rows carry no timing,
//! so reruns differ only in the summary's timestamp.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use loomlab_core::alloc::{self, AllocParams, BlowupSpec};
use loomlab_core::cycwalk::{self, lambda};
use loomlab_core::framework::{self, Family, HamMode, Registry, Selector};
use loomlab_core::squash;
use loomlab_core::{Error, Hypergraph};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::output::{self, SCHEMA_VERSION};
use crate::Failure;

pub const SUITES: [&str; 5] = ["threshold-constants", "barrier-sweep", "framework-smalln", "squash-suite", "alloc-smoke"];

pub fn run(suite: &str, seed: u64, out_dir: &Path) -> Result<Value, Failure> {
    let rows = match suite {
        "threshold-constants" => threshold_constants()?,
        "barrier-sweep" => barrier_sweep()?,
        "framework-smalln" => framework_smalln()?,
        "squash-suite" => squash_suite(seed)?,
        "alloc-smoke" => alloc_smoke(seed)?,
        other => {
            return Err(Failure::Core(Error::InvalidInput(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))))
        }
    };
    let ok = rows.iter().all(|r| r.get("ok").and_then(Value::as_bool).unwrap_or(true));
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", out_dir.display()));
    std::fs::create_dir_all(out_dir).map_err(io)?;
    let mut dir = out_dir.join(format!("{suite}-{stamp}-seed{seed}"));
    let mut extra = 1;
    // create_dir fails on an existing directory, so concurrent runs never share one
    while let Err(e) = std::fs::create_dir(&dir) {
        if e.kind() != std::io::ErrorKind::AlreadyExists {
            return Err(io(e));
        }
        dir = out_dir.join(format!("{suite}-{stamp}-seed{seed}-{extra}"));
        extra += 1;
    }
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", dir.display()));
    output::persist(&dir.join("rows.csv"), &output::rows_csv(&rows)).map_err(io)?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "suite": suite,
        "seed": seed,
        "timestamp": stamp,
        "rows": rows.len(),
        "ok": ok,
    });
    output::persist(&dir.join("summary.json"), &format!("{summary}\n")).map_err(io)?;
    Ok(json!({ "suite": suite, "seed": seed, "ok": ok, "run_dir": dir.display().to_string(), "rows": rows }))
}

fn threshold_constants() -> Result<Vec<Value>, Failure> {
    let mut rows = Vec::new();
    for k in 3..=9 {
        for l in 1..k - 1 {
            let t = framework::thresholds(k, l)?;
            let v = serde_json::to_value(&t).expect("serializes");
            rows.push(json!({
                "k": k,
                "l": l,
                "lambda": v["lambda"],
                "delta_codegree": v["delta_codegree"],
                "delta_k_minus_2": v["delta_k_minus_2"],
                "ok": t.lambda == lambda(k, l),
            }));
        }
    }
    Ok(rows)
}

/// k=3, ℓ=1: a Hamilton cycle exists iff a ≥ ⌈n/4⌉.
fn barrier_sweep() -> Result<Vec<Value>, Failure> {
    let mut rows = Vec::new();
    for n in [8usize, 10, 12] {
        let need = n.div_ceil(4);
        for a in 1..=n {
            let sb = framework::space_barrier(3, 1, n, a)?;
            let found = framework::brute_hamilton(&sb.graph, 1, &HamMode::Cycle, framework::BRUTE_CAP, framework::BRUTE_BUDGET)?.is_some();
            rows.push(json!({
                "n": n,
                "a": a,
                "ceil_lambda_n": need,
                "found": found,
                "counting_allows": sb.counting_allows(),
                "ok": found == (a >= need),
            }));
        }
    }
    Ok(rows)
}

/// Framework checks on small families: complete graphs pass, a split graph
/// fails (F1).
fn framework_smalln() -> Result<Vec<Value>, Failure> {
    let reg = Registry::default();
    let split = {
        let mut e = Hypergraph::complete(4, 3).edges().to_vec();
        e.extend(Hypergraph::complete(4, 3).edges().iter().map(|x| x.iter().map(|v| v + 4).collect::<Vec<_>>()));
        Hypergraph::uniform(8, 3, e)?
    };
    let cases: Vec<(&str, Vec<Hypergraph>, &str, bool)> = vec![
        ("complete-6", vec![Hypergraph::complete(6, 3)], "edge", true),
        ("complete-7", vec![Hypergraph::complete(7, 3)], "edge", true),
        ("complete-8", vec![Hypergraph::complete(8, 3)], "and(edge,dcon:1)", true),
        ("split-8", vec![split], "edge", false),
    ];
    let mut rows = Vec::new();
    for (name, members, membership, expect) in cases {
        let s = members[0].n();
        let fam = Family { s, members, membership: reg.parse(membership)? };
        let v = framework::check_framework(&fam, &Selector::Identity, 1, 10_000)?;
        rows.push(json!({
            "family": name,
            "s": s,
            "membership": membership,
            "f1": v.f1.pass,
            "f2": v.f2.pass,
            "f3": v.f3.pass,
            "f3_candidates": v.f3_candidates,
            "expected": expect,
            "ok": v.pass() == expect,
        }));
    }
    Ok(rows)
}

/// q=2, qn ≤ 8: exact expectation against the closed form on random graphs of
/// every even uniformity, then one concentration run.
fn squash_suite(seed: u64) -> Result<Vec<Value>, Failure> {
    let mut rng = squash::trial_rng(seed, u64::MAX);
    let mut rows = Vec::new();
    for qn in [4usize, 6, 8] {
        for k in (2..=qn).step_by(2) {
            for i in 0..4 {
                let p = [0.25, 0.5, 0.75, 1.0][i];
                let g = framework::random_graph(qn, k, p, &mut rng);
                let r = squash::expectation_exact(&g, 2)?;
                let v = serde_json::to_value(&r).expect("serializes");
                rows.push(json!({
                    "kind": "expectation",
                    "qn": qn,
                    "k": k,
                    "edges": g.edge_count(),
                    "exact": v["exact"],
                    "closed_form": v["closed_form"],
                    "ok": r.exact == r.closed_form,
                }));
            }
        }
    }
    let big = framework::random_graph(24, 4, 0.5, &mut rng);
    let c = squash::concentration_experiment(&big, 2, 0.5, 200, seed)?;
    rows.push(json!({
        "kind": "concentration",
        "qn": 24,
        "k": 4,
        "edges": big.edge_count(),
        "frequency_mc": c.frequency,
        "bound": c.bound,
        "ok": c.consistent(),
    }));
    Ok(rows)
}

/// A few path and tiling allocations on complete bounded reduced graphs,
/// each checked by the cycle validator.
fn alloc_smoke(seed: u64) -> Result<Vec<Value>, Failure> {
    let mut rng = squash::trial_rng(seed, u64::MAX - 1);
    let (k, l) = (3, 1);
    let r = Hypergraph::complete_bounded(5, k);
    let params = AllocParams::default();
    let mut rows = Vec::new();
    for i in 0..4 {
        let sizes: Vec<usize> = (0..5).map(|_| rng.gen_range(36..=44)).collect();
        let mut spec = BlowupSpec::consecutive(r.clone(), &sizes);
        // path: total ≡ k mod (k−ℓ)
        let total: usize = sizes.iter().sum();
        if total % 2 == 0 {
            spec.clusters[0].pop();
        }
        let mut xs: Vec<usize> = (0..5).collect();
        xs.shuffle(&mut rng);
        let f1 = vec![spec.clusters[xs[0]][0]];
        let f2 = vec![spec.clusters[xs[1]][1]];
        let p = alloc::hamilton_path_allocation(&spec, l, &f1, &f2, &params)?;
        let ok = p.path.validate_in(&spec.oracle()).is_ok() && p.path.order() == spec.vertex_count();
        rows.push(json!({ "kind": "path", "instance": i, "vertices": spec.vertex_count(), "pieces": p.path.edge_count(), "ok": ok }));

        let mut spec = BlowupSpec::consecutive(r.clone(), &sizes);
        let total: usize = sizes.iter().sum();
        if total % 2 == 1 {
            spec.clusters[0].pop();
        }
        let t = alloc::perfect_tiling_allocation(&spec, l, &params)?;
        let covered: usize = t.cycles.iter().map(cycwalk::CyclePath::order).sum();
        let ok = covered == spec.vertex_count() && t.cycles.iter().all(|c| c.validate_in(&spec.oracle()).is_ok());
        rows.push(json!({ "kind": "tiling", "instance": i, "vertices": spec.vertex_count(), "pieces": t.cycles.len(), "ok": ok }));
    }
    Ok(rows)
}
