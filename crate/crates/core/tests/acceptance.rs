//! Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
//! bound. Exits non-zero when a criterion fails that is not a recorded
//! deviation.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use loomlab_core::alloc::{
    assemble_chain, hamilton_path_allocation, perfect_tiling_allocation, planted_cover, AllocParams, PlantedSizes,
};
use loomlab_core::cycwalk::build_cycle;
use loomlab_core::framework::{
    brute_hamilton, connectivity_check, hamcon_check, positive_min_degree, random_graph, space_barrier, thresholds,
    HamMode, BRUTE_BUDGET, BRUTE_CAP,
};
use loomlab_core::hcore::min_degree;
use loomlab_core::lattice::{divisor_cycle, gcd_of_cycle, gcd_of_graph, lattice_complete, Verdict};
use loomlab_core::rational::q;
use loomlab_core::squash::{closed_form, concentration_experiment, expectation_exact};
use loomlab_core::tiling::{frac_tiling, TilingOptions, TilingOutcome};
use loomlab_core::{Hypergraph, Q};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_thresholds() -> Outcome {
    for (k, l, lam) in [(3, 1, q(1, 4)), (5, 3, q(1, 6)), (7, 5, q(1, 8))] {
        let t = thresholds(k, l).map_err(|e| e.to_string())?;
        ensure(t.lambda == lam, || format!("λ({k},{l}) = {}", t.lambda))?;
    }
    for (k, d) in [(3, q(7, 16)), (5, q(11, 36)), (7, q(1, 4)), (9, q(1, 4)), (11, q(1, 4))] {
        let t = thresholds(k, k - 2).map_err(|e| e.to_string())?;
        ensure(t.delta_k_minus_2.as_ref() == Some(&d), || format!("δ_(k−2) for k={k} is {:?}", t.delta_k_minus_2))?;
    }
    Ok("λ = 1/4, 1/6, 1/8; δ_(k−2) = 7/16, 11/36, 1/4 for k = 7, 9, 11".into())
}

fn c2_barrier() -> Outcome {
    let mut rows = 0;
    for n in [6usize, 8, 10, 12] {
        for a in 1..=n {
            let sb = space_barrier(3, 1, n, a).map_err(|e| e.to_string())?;
            let found = brute_hamilton(&sb.graph, 1, &HamMode::Cycle, BRUTE_CAP, BRUTE_BUDGET).map_err(|e| e.to_string())?;
            // a < λn = n/4
            let below = 4 * a < n;
            ensure(found.is_none() == below, || format!("n={n}, a={a}: found={}", found.is_some()))?;
            if let Some(c) = found {
                common::check_hamilton_cycle(&sb.graph, &c).map_err(|e| format!("n={n}, a={a}: {e}"))?;
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} (n, a) pairs, n ∈ {{6, 8, 10, 12}}; no cycle iff a < n/4"))
}

fn c3_tiling() -> Outcome {
    for n in [6usize, 8, 10] {
        let g = Hypergraph::complete(n, 3);
        match frac_tiling(&g, 1, &TilingOptions::for_graph(&g, 1)).map_err(|e| e.to_string())? {
            TilingOutcome::Feasible(t) => ensure(t.verify(&g), || format!("K({n},3): tiling fails verification"))?,
            o => return Err(format!("K({n},3): {o:?}")),
        }
    }
    let sb = space_barrier(3, 1, 8, 1).map_err(|e| e.to_string())?.graph;
    match frac_tiling(&sb, 1, &TilingOptions::for_graph(&sb, 1)).map_err(|e| e.to_string())? {
        TilingOutcome::Infeasible(c) => {
            ensure(c.check_all_walks(&sb, 1).map_err(|e| e.to_string())?, || "dual certificate rejected".into())?
        }
        o => return Err(format!("SB(3,1,8,1): {o:?}")),
    }
    Ok("K(n,3) feasible for n = 6, 8, 10; SB(3,1,8,1) infeasible with a verified dual".into())
}

fn c4_lattice() -> Outcome {
    let edge = Hypergraph::uniform(3, 3, vec![vec![0, 1, 2]]).map_err(|e| e.to_string())?;
    let d = divisor_cycle(3, 1).map_err(|e| e.to_string())?;
    let c3 = build_cycle(3, 1, 3).map_err(|e| e.to_string())?;
    let ld = lattice_complete(&d.cycle, &edge, 10_000_000).map_err(|e| e.to_string())?;
    ensure(ld.verdict == Verdict::Complete, || format!("divisor cycle: {:?}", ld.verdict))?;
    let l3 = lattice_complete(&c3, &edge, 10_000_000).map_err(|e| e.to_string())?;
    ensure(matches!(l3.verdict, Verdict::Incomplete { .. }), || format!("C(3,1,3): {:?}", l3.verdict))?;

    // oracle: columns from exhaustive colourings, completeness from the minor gcd
    for (name, f, complete) in [("divisor cycle", &d.cycle, true), ("C(3,1,3)", &c3, false)] {
        let cols: Vec<Vec<u32>> = common::rainbow_colourings(f).into_iter().collect();
        let mine: Vec<Vec<u32>> = if complete { ld.columns.clone() } else { l3.columns.clone() };
        ensure(cols == mine, || format!("{name}: colouring columns differ from the enumeration"))?;
        let idx = common::lattice_index(3, &cols);
        ensure((idx == BigInt::from(f.order())) == complete, || format!("{name}: minor gcd {idx}"))?;
    }

    let gd = gcd_of_cycle(&d.cycle, 10_000_000).map_err(|e| e.to_string())?;
    let g3 = gcd_of_cycle(&c3, 10_000_000).map_err(|e| e.to_string())?;
    ensure(gd.gcd == Some(1), || format!("gcd(divisor cycle) = {}", gd.gcd_string()))?;
    ensure(g3.gcd.is_none(), || format!("gcd(C(3,1,3)) = {}", g3.gcd_string()))?;
    for (name, f, g) in [("divisor cycle", &d.cycle, gd.gcd), ("C(3,1,3)", &c3, g3.gcd)] {
        let oracle = common::gcd_of_counts(&common::rainbow_colourings(f));
        ensure(oracle.map(|x| x as usize) == g, || format!("{name}: oracle gcd {oracle:?}"))?;
        let as_graph = Hypergraph::uniform(f.order(), 3, f.windows()).map_err(|e| e.to_string())?;
        let gg = gcd_of_graph(&as_graph, 100_000_000).map_err(|e| e.to_string())?;
        ensure(gg.gcd == g, || format!("{name}: graph colouring gcd {}", gg.gcd_string()))?;
    }
    Ok("divisor cycle complete with gcd 1; C(3,1,3) incomplete with gcd ∞; colouring and minor-gcd oracles agree".into())
}

fn c5_allocation() -> Outcome {
    let r = Hypergraph::complete_bounded(5, 3);
    let params = AllocParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut with_exc = 0;
    for i in 0..100 {
        let m = rng.gen_range(30..=60);
        let exc = rng.gen_bool(0.5);
        with_exc += exc as usize;
        // paths need n ≡ k mod k−ℓ
        let spec = common::random_blowup(r.clone(), m, 2, 1, exc, &mut rng);
        let usable: Vec<usize> = (0..4).flat_map(|x| spec.clusters[x].iter().copied()).collect();
        let ends: Vec<usize> = rand::seq::index::sample(&mut rng, usable.len(), 2).into_iter().map(|j| usable[j]).collect();
        let (f1, f2) = ([ends[0]], [ends[1]]);
        let p = hamilton_path_allocation(&spec, 1, &f1, &f2, &params).map_err(|e| format!("path instance {i} (m={m}): {e}"))?;
        common::check_hamilton_path(&spec, &p.path, &f1, &f2).map_err(|e| format!("path instance {i}: {e}"))?;
    }
    for i in 0..100 {
        let m = rng.gen_range(30..=60);
        let spec = common::random_blowup(r.clone(), m, 2, 0, false, &mut rng);
        let t = perfect_tiling_allocation(&spec, 1, &params).map_err(|e| format!("tiling instance {i} (m={m}): {e}"))?;
        common::check_tiling(&spec, &t.cycles).map_err(|e| format!("tiling instance {i}: {e}"))?;
    }
    Ok(format!("100 Hamilton paths ({with_exc} with an exceptional vertex) and 100 perfect tilings validate"))
}

fn c6_assembly() -> Outcome {
    let params = AllocParams { q: 0, ..AllocParams::default() };
    let (k, l) = (3, 1);
    let mut max_trim = 0;
    for i in 0..25u64 {
        let b = 3 + (i % 3) as usize;
        let (g, cover) = planted_cover(k, l, b, PlantedSizes::default(), i).map_err(|e| format!("cover {i}: {e}"))?;
        let a = assemble_chain(&g, &cover, l, &params).map_err(|e| format!("cover {i} (b={b}): {e}"))?;
        common::check_hamilton_cycle(&g, &a.cycle).map_err(|e| format!("cover {i}: {e}"))?;
        let worst = a.trimmed.iter().copied().max().unwrap_or(0);
        ensure(worst < 2 * (k - l) - 1, || format!("cover {i}: trimmed {worst} vertices from a family"))?;
        max_trim = max_trim.max(worst);
    }
    Ok(format!("25 planted covers, b ∈ {{3, 4, 5}}; at most {max_trim} vertices trimmed per family"))
}

fn c7_squash() -> Outcome {
    let h = Hypergraph::uniform(6, 4, vec![vec![0, 1, 2, 3]]).map_err(|e| e.to_string())?;
    let r = expectation_exact(&h, 2).map_err(|e| e.to_string())?;
    ensure(r.exact == q(1, 5) && r.exact == Q::new(3.into(), 15.into()), || format!("single edge: {}", r.exact))?;

    // every single-edge H exhaustively, then random H, qn ≤ 8
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for qn in [2usize, 4, 6, 8] {
        for k in (2..=qn).step_by(2) {
            for e in (0..qn).combinations(k) {
                let h = Hypergraph::uniform(qn, k, vec![e]).map_err(|e| e.to_string())?;
                let r = expectation_exact(&h, 2).map_err(|e| e.to_string())?;
                ensure(r.exact == closed_form(&h, 2), || format!("qn={qn}, k={k}: {} vs {}", r.exact, r.closed_form))?;
                checked += 1;
            }
            for _ in 0..20 {
                let g = random_graph(qn, k, rng.gen_range(0.1..0.9), &mut rng);
                let r = expectation_exact(&g, 2).map_err(|e| e.to_string())?;
                ensure(r.exact == r.closed_form, || format!("random qn={qn}, k={k}: {} vs {}", r.exact, r.closed_form))?;
                checked += 1;
            }
        }
    }
    let big = random_graph(40, 4, 0.5, &mut rng);
    let c = concentration_experiment(&big, 2, 0.5, 1000, 11).map_err(|e| e.to_string())?;
    ensure(c.consistent(), || format!("violation frequency {} > bound {}", c.frequency, c.bound))?;
    Ok(format!("E = 1/5 on one edge; {checked} graphs match the closed form; {} violations in 1000 trials (bound {:.3})", c.violations, c.bound))
}

fn c8_connectivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0;
    while done < 200 {
        let k = rng.gen_range(3..=4);
        let l = rng.gen_range(1..k - 1);
        let d = rng.gen_range(l + 1..k);
        let n = rng.gen_range(k + 2..=10);
        let g = random_graph(n, k, rng.gen_range(0.2..0.8), &mut rng);
        if !positive_min_degree(&g, d) {
            continue;
        }
        let rep = connectivity_check(&g, l, d).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("k={k}, ℓ={l}, d={d}, n={n}: {} components", rep.components))?;
        done += 1;
    }
    let mut dense = 0;
    while dense < 50 {
        let n = rng.gen_range(7..=12);
        let g = random_graph(n, 3, rng.gen_range(0.3..0.9), &mut rng);
        if min_degree(&g, 1).map_err(|e| e.to_string())?.ratio < q(3, 10) {
            continue;
        }
        let rep = connectivity_check(&g, 1, 1).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("dense n={n}: {} components", rep.components))?;
        dense += 1;
    }
    Ok("200 graphs with ℓ < d, δ_d > 0 and 50 dense 3-graphs are connected".into())
}

const S5_TAG: &str = "s=5 only";

fn c9_hamcon() -> Outcome {
    let mut notes = Vec::new();
    let mut failed = None;
    for s in [5usize, 7] {
        let g = Hypergraph::complete_bounded(s, 3);
        let rep = hamcon_check(&g, 1, BRUTE_BUDGET).map_err(|e| e.to_string())?;
        notes.push(format!("s={s}: {}", if rep.pass { "pass" } else { "fail" }));
        if !rep.pass {
            ensure(s == 5, || format!("s={s}: {}", rep.reason))?;
            failed = Some(format!("{S5_TAG}: {}", rep.reason));
        }
    }
    // remove the edges a (0)-(1) path must start with
    let g = Hypergraph::complete_bounded(7, 3);
    let gone: Vec<Vec<usize>> = g.level(3).filter(|e| e.contains(&0) && !e.contains(&1)).map(|e| e.to_vec()).collect();
    let cut = g.without_edges(&gone);
    let rep = hamcon_check(&cut, 1, BRUTE_BUDGET).map_err(|e| e.to_string())?;
    let (e, f) = rep.witness.clone().ok_or("no witness for the cut graph")?;
    let again = brute_hamilton(&cut, 1, &HamMode::Path { f1: e.clone(), f2: f.clone() }, BRUTE_CAP, BRUTE_BUDGET)
        .map_err(|e| e.to_string())?;
    ensure(!rep.pass && again.is_none() && e.iter().all(|v| !f.contains(v)), || format!("witness {e:?}, {f:?} not confirmed"))?;
    notes.push(format!("cut graph fails at witness {e:?} → {f:?}"));
    match failed {
        None => Ok(notes.join("; ")),
        Some(why) => Err(format!("{}; {why}", notes.join("; "))),
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    bound: Duration,
    run: fn() -> Outcome,
    /// Failure explained in the decisions ledger: (tag the error must carry, reason).
    deviation: Option<(&'static str, &'static str)>,
}

fn main() -> ExitCode {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let min = |m: u64| Duration::from_secs(60 * m);
    let all = [
        Criterion { id: 1, name: "threshold constants", bound: Duration::from_secs(1), run: c1_thresholds, deviation: None },
        Criterion { id: 2, name: "space barrier", bound: min(2), run: c2_barrier, deviation: None },
        Criterion { id: 3, name: "fractional tiling dichotomy", bound: min(1), run: c3_tiling, deviation: None },
        Criterion { id: 4, name: "lattice and gcd", bound: min(5), run: c4_lattice, deviation: None },
        Criterion { id: 5, name: "allocation validity", bound: min(10), run: c5_allocation, deviation: None },
        Criterion { id: 6, name: "chain assembly", bound: min(10), run: c6_assembly, deviation: None },
        Criterion { id: 7, name: "squashing", bound: min(5), run: c7_squash, deviation: None },
        Criterion { id: 8, name: "connectivity", bound: min(2), run: c8_connectivity, deviation: None },
        Criterion {
            id: 9,
            name: "Hamilton connectedness",
            bound: min(2),
            run: c9_hamcon,
            deviation: Some((S5_TAG, "a 5-vertex 3-graph has no Hamilton 1-path: its two edges always meet")),
        },
    ];
    let mut unexplained = 0;
    for c in all.iter().filter(|c| only.map_or(true, |o| o == c.id)) {
        let t = Instant::now();
        let out = (c.run)();
        let el = t.elapsed();
        let in_time = el <= c.bound;
        match (&out, in_time) {
            (Ok(detail), true) => println!("PASS {} {} ({:.2?} ≤ {:?}): {detail}", c.id, c.name, el, c.bound),
            _ => {
                let why = match &out {
                    Ok(d) => format!("over the time bound: {d}"),
                    Err(e) => e.clone(),
                };
                match c.deviation {
                    Some((tag, dev)) if in_time && why.contains(tag) => {
                        println!("FAIL {} {} ({:.2?} ≤ {:?}): {why} [recorded deviation: {dev}]", c.id, c.name, el, c.bound)
                    }
                    _ => {
                        unexplained += 1;
                        println!("FAIL {} {} ({:.2?}, bound {:?}): {why}", c.id, c.name, el, c.bound)
                    }
                }
            }
        }
    }
    if unexplained > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
