//! Allocation inside blow-ups: balancing matchings, perfect ℓ-cycle tilings,
//! Hamilton paths between prescribed end tuples, splicing, and assembly of a
//! Hamilton cycle along a chain of blow-ups.
//!
//! Everything is planned in cluster coordinates first (closed walks of the
//! reduced graph and their multiplicities) and only then lifted, taking the
//! lowest unused vertex of each cluster.

use std::collections::{BTreeMap, HashMap, HashSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cycwalk::{self, min_cycle_edges, ClosedWalk, CyclePath, Kind, WalkDigraph};
use crate::error::{invalid, precondition, Error, Result};
use crate::framework::{Dcon, Dspa, Property};
use crate::hcore::{induced, BlowUp, EdgeOracle, Hypergraph, Partition};
use crate::lattice::{full_generators, Hnf};
use crate::rational::{self, Q};
use crate::tiling::{self, IndicatorColumn, TilingOptions, TilingOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Balance {
    pub m: usize,
    #[serde(with = "rational")]
    pub eta: Q,
}

/// A reduced graph together with the clusters of its blow-up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupSpec {
    pub r: Hypergraph,
    /// `clusters[x]` is `V_x`; vertex labels are arbitrary.
    pub clusters: Vec<Vec<usize>>,
    #[serde(default)]
    pub exceptional: Option<usize>,
    #[serde(default)]
    pub balance: Option<Balance>,
}

impl BlowupSpec {
    pub fn new(r: Hypergraph, clusters: Vec<Vec<usize>>) -> Self {
        BlowupSpec { r, clusters, exceptional: None, balance: None }
    }

    /// Consecutive clusters of the given sizes.
    pub fn consecutive(r: Hypergraph, sizes: &[usize]) -> Self {
        BlowupSpec::new(r, Partition::consecutive(sizes).clusters)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters.len() != self.r.n() {
            return invalid(format!("{} clusters for {} reduced vertices", self.clusters.len(), self.r.n()));
        }
        let mut seen = HashSet::new();
        for (x, c) in self.clusters.iter().enumerate() {
            if c.is_empty() {
                return invalid(format!("cluster {x} is empty"));
            }
            if let Some(v) = c.iter().find(|v| !seen.insert(**v)) {
                return invalid(format!("vertex {v} lies in two clusters"));
            }
        }
        if let Some(x) = self.exceptional {
            if x >= self.clusters.len() || self.clusters[x].len() != 1 {
                return invalid(format!("exceptional cluster {x} must exist and be a singleton"));
            }
        }
        if let Some(b) = &self.balance {
            let m = rational::qi(b.m as i64);
            let lo = &m * (rational::one() - &b.eta);
            let hi = &m * (rational::one() + &b.eta);
            for (x, c) in self.clusters.iter().enumerate() {
                if Some(x) == self.exceptional {
                    continue;
                }
                let sz = rational::qi(c.len() as i64);
                if sz < lo || sz > hi {
                    return invalid(format!("cluster {x} has {} vertices, outside (1±η)m", c.len()));
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn partition(&self) -> Partition {
        Partition { clusters: self.clusters.clone() }
    }

    pub fn oracle(&self) -> BlowUp<'_> {
        BlowUp::new(&self.r, &self.partition())
    }

    fn owner(&self) -> HashMap<usize, usize> {
        self.clusters.iter().enumerate().flat_map(|(x, c)| c.iter().map(move |&v| (v, x))).collect()
    }
}

/// One audited step of an allocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub step: String,
    pub detail: String,
}

pub type Ledger = Vec<Step>;

fn note(ledger: &mut Ledger, step: &str, detail: impl Into<String>) {
    ledger.push(Step { step: step.into(), detail: detail.into() });
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocParams {
    /// Reservoir copies per generator walk.
    pub q: usize,
    /// Enumerated closed walks reach `(t_min + gen_extra)·(k−ℓ)` vertices.
    pub gen_extra: usize,
    pub enum_budget: u64,
    /// Node budget of one exact decomposition attempt.
    pub dfs_budget: u64,
    /// Cover cycles handed back to the decomposition before giving up.
    pub unplace_rounds: usize,
    /// Skeleton re-plans with demand-driven reservations.
    pub max_replans: usize,
    /// Step cap of connecting walks.
    pub walk_max: usize,
    pub path_budget: u64,
}

impl Default for AllocParams {
    fn default() -> Self {
        AllocParams {
            q: 1,
            gen_extra: 2,
            enum_budget: 2_000_000,
            dfs_budget: 500_000,
            unplace_rounds: 16,
            max_replans: 6,
            walk_max: 64,
            path_budget: 5_000_000,
        }
    }
}

/// Perfect matching of the blow-up of the complete k-graph on k+1 clusters:
/// `N − |V_x|` edges miss cluster x, where `N` is the number of edges.
pub fn balancing_matching(spec: &BlowupSpec) -> Result<Vec<Vec<usize>>> {
    spec.validate()?;
    let k = spec.r.k();
    let c = spec.clusters.len();
    if c != k + 1 || spec.r.level(k).count() != k + 1 {
        return precondition(format!("reduced graph must be the complete {k}-graph on {} vertices", k + 1));
    }
    let total = spec.vertex_count();
    if total % k != 0 {
        return precondition(format!("{total} vertices not divisible by k={k}"));
    }
    let n_edges = total / k;
    if let Some((x, cl)) = spec.clusters.iter().enumerate().find(|(_, cl)| cl.len() > n_edges) {
        return Err(Error::ImbalanceTooLarge(format!(
            "cluster {x} has {} vertices but only {n_edges} = total/k edges can cover it",
            cl.len()
        )));
    }
    let mut next = vec![0usize; c];
    let mut out = Vec::with_capacity(n_edges);
    for x in 0..c {
        for _ in 0..n_edges - spec.clusters[x].len() {
            let mut e: Vec<usize> = (0..c)
                .filter(|&y| y != x)
                .map(|y| {
                    next[y] += 1;
                    spec.clusters[y][next[y] - 1]
                })
                .collect();
            e.sort_unstable();
            out.push(e);
        }
    }
    debug_assert!((0..c).all(|y| next[y] == spec.clusters[y].len()));
    Ok(out)
}

/// Unused vertices per cluster; `take` returns the lowest.
#[derive(Debug, Clone)]
struct Pools {
    free: Vec<Vec<usize>>,
}

impl Pools {
    fn new(clusters: &[Vec<usize>], used: &HashSet<usize>) -> Pools {
        let free = clusters
            .iter()
            .map(|c| {
                let mut f: Vec<usize> = c.iter().copied().filter(|v| !used.contains(v)).collect();
                f.sort_unstable_by(|a, b| b.cmp(a));
                f
            })
            .collect();
        Pools { free }
    }

    fn take(&mut self, x: usize) -> Result<usize> {
        self.free[x]
            .pop()
            .ok_or_else(|| Error::ParamsTooSmall(format!("cluster {x} ran out of unused vertices")))
    }

    fn size(&self, x: usize) -> usize {
        self.free[x].len()
    }

    fn total(&self) -> usize {
        self.free.iter().map(|f| f.len()).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TilingAllocation {
    pub cycles: Vec<CyclePath>,
    /// Number of cycles of each order.
    pub lengths: BTreeMap<usize, usize>,
    pub ledger: Ledger,
}

/// Perfect ℓ-cycle tiling of `R(𝒱)`.
pub fn perfect_tiling_allocation(spec: &BlowupSpec, l: usize, params: &AllocParams) -> Result<TilingAllocation> {
    spec.validate()?;
    let k = spec.r.k();
    check_kl(k, l)?;
    if spec.exceptional.is_some() {
        return precondition("perfect tiling takes no exceptional cluster");
    }
    let s = k - l;
    let total = spec.vertex_count();
    if total % s != 0 {
        return precondition(format!("{total} vertices not divisible by k−ℓ={s}"));
    }
    let mut ledger = Ledger::new();
    check_reduced(&spec.r, l, None, &mut ledger)?;
    let active: Vec<usize> = (0..spec.r.n()).collect();
    let mut pools = Pools::new(&spec.clusters, &HashSet::new());
    let cycles = tile_pools(&spec.r, l, &active, &mut pools, params, &mut ledger)?;
    let oracle = spec.oracle();
    for c in &cycles {
        c.validate_in(&oracle)?;
    }
    let lengths = length_histogram(&cycles);
    note(&mut ledger, "lengths", serde_json::to_string(&lengths).expect("map serializes"));
    Ok(TilingAllocation { cycles, lengths, ledger })
}

fn length_histogram(cycles: &[CyclePath]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for c in cycles {
        *h.entry(c.order()).or_insert(0) += 1;
    }
    h
}

fn check_kl(k: usize, l: usize) -> Result<()> {
    if k < 2 || l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    Ok(())
}

/// The deletion-closure facts the allocation actually consumes: `R` (when
/// there is an exceptional cluster) is dcon, `R' = R − x*` is dcon and dspa,
/// and `R' − y` is dspa for every y. The last one only feeds the cover step,
/// so its failure is recorded rather than fatal.
fn check_reduced(r: &Hypergraph, l: usize, x_star: Option<usize>, ledger: &mut Ledger) -> Result<bool> {
    if let Some(x) = x_star {
        if !Dcon(l).holds(r) {
            return precondition("R is not dcon");
        }
        note(ledger, "check", format!("R dcon (exceptional cluster {x})"));
    }
    let keep: Vec<usize> = (0..r.n()).filter(|&y| Some(y) != x_star).collect();
    let rp = induced(r, &keep);
    if !Dcon(l).holds(&rp) {
        return precondition("R − x* is not dcon");
    }
    if !Dspa(l).holds(&rp) {
        return precondition("R − x* is not dspa");
    }
    let bad: Vec<usize> = (0..rp.n()).filter(|&y| !Dspa(l).holds(&rp.remove_vertices(&[y]).0)).map(|y| keep[y]).collect();
    if bad.is_empty() {
        note(ledger, "check", "R − x* dcon and dspa; R − x* − y dspa for every y");
        Ok(true)
    } else {
        note(ledger, "check", format!("R − x* dcon and dspa; R − x* − y not dspa for y in {bad:?}"));
        Ok(false)
    }
}

fn floor_u32(x: &Q) -> u32 {
    x.floor().to_integer().to_u32().unwrap_or(0)
}

fn add_counts(acc: &mut [u32], c: &[u32], times: u32) {
    for (a, &b) in acc.iter_mut().zip(c) {
        *a += b * times;
    }
}

/// Tiles the unused vertices of the `active` clusters by ℓ-cycles.
fn tile_pools(
    r: &Hypergraph,
    l: usize,
    active: &[usize],
    pools: &mut Pools,
    params: &AllocParams,
    ledger: &mut Ledger,
) -> Result<Vec<CyclePath>> {
    let k = r.k();
    let s = k - l;
    let tmin = min_cycle_edges(k, l);
    let a = active.len();
    let b0: Vec<u32> = active.iter().map(|&x| pools.size(x) as u32).collect();
    let total: u32 = b0.iter().sum();
    if total == 0 {
        return Ok(vec![]);
    }
    if total as usize % s != 0 {
        return precondition(format!("{total} vertices to tile, not divisible by k−ℓ={s}"));
    }
    let ra = induced(&r.top(), active);
    let wd = WalkDigraph::of_graph(&ra, l)?;
    let cols = short_columns(&wd, a, params);
    if cols.is_empty() {
        return precondition("the reduced graph has no closed ℓ-walk");
    }

    // generators: short walks taken greedily while they enlarge the lattice
    let big = |c: &[u32]| c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by_key(|&i| (cols[i].order(), cols[i].counts.clone()));
    let mut gens: Vec<usize> = Vec::new();
    let mut gen_big: Vec<Vec<BigInt>> = Vec::new();
    let full = full_generators(a, s);
    for &i in &order {
        let h = Hnf::new(a, &gen_big, false);
        if full.iter().all(|f| h.contains(f)) {
            break;
        }
        if gen_big.is_empty() || !h.contains(&big(&cols[i].counts)) {
            gens.push(i);
            gen_big.push(big(&cols[i].counts));
        }
    }
    let hnf = Hnf::new(a, &gen_big, true);
    let complete = full.iter().all(|f| hnf.contains(f));
    note(
        ledger,
        "generators",
        format!("{} generator walks, lattice {}", gens.len(), if complete { "complete" } else { "incomplete" }),
    );

    // reservoir
    let q = params.q as u32;
    let mut res = vec![0u32; a];
    for &g in &gens {
        add_counts(&mut res, &cols[g].counts, q);
    }
    if let Some(x) = (0..a).find(|&x| res[x] > b0[x]) {
        return Err(Error::ParamsTooSmall(format!(
            "reservoir q·Σ_g |g|_x = {} exceeds |V_x| = {} for cluster {} (q={q})",
            res[x], b0[x], active[x]
        )));
    }
    let b1: Vec<u32> = (0..a).map(|x| b0[x] - res[x]).collect();
    note(ledger, "reservoir", format!("q={q}, stock per cluster {res:?}"));

    // cover: trim X, balancing matching, per-x fractional tilings floored
    let mut cover: Vec<(usize, u32)> = Vec::new();
    let mut cover_walks: Vec<ClosedWalk> = Vec::new();
    let mut cover_counts = vec![0u32; a];
    if a >= 3 {
        let t1: u32 = b1.iter().sum();
        let xs = (t1 % (a as u32 - 1)) as usize;
        let mut b2 = b1.clone();
        let mut by_size: Vec<usize> = (0..a).collect();
        by_size.sort_by_key(|&x| (std::cmp::Reverse(b2[x]), x));
        for &x in by_size.iter().take(xs) {
            b2[x] = b2[x].saturating_sub(1);
        }
        let n_edges = b2.iter().sum::<u32>() / (a as u32 - 1);
        if b2.iter().any(|&v| v > n_edges) {
            note(ledger, "matching", "imbalance exceeds the matching range; cover skipped");
        } else {
            let m: Vec<u32> = b2.iter().map(|&v| n_edges - v).collect();
            note(ledger, "matching", format!("trimmed {xs}, m_x = {m:?}"));
            let mut ok = true;
            let mut planned: Vec<(ClosedWalk, u32)> = Vec::new();
            for x in 0..a {
                if m[x] == 0 {
                    continue;
                }
                let sub: Vec<usize> = (0..a).filter(|&y| y != x).collect();
                let rx = induced(&ra, &sub);
                let opts = TilingOptions { max_verts: tmin * s, ..TilingOptions::for_graph(&rx, l) };
                match tiling::frac_tiling(&rx, l, &opts)? {
                    TilingOutcome::Feasible(t) => {
                        for (c, w) in t.columns.iter().zip(&t.weights) {
                            let copies = floor_u32(&(w * rational::qi(m[x] as i64)));
                            if copies > 0 {
                                let verts = c.walk.verts.iter().map(|&v| sub[v]).collect();
                                planned.push((ClosedWalk { k, l, verts }, copies));
                            }
                        }
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for (w, copies) in planned {
                    add_counts(&mut cover_counts, &w.counts(a), copies);
                    cover.push((cover_walks.len(), copies));
                    cover_walks.push(w);
                }
            } else {
                note(ledger, "cover", "some R − x has no fractional tiling; cover skipped");
            }
        }
    }
    assert!((0..a).all(|x| cover_counts[x] <= b1[x]), "floored cover stays inside the clusters");
    let b: Vec<u32> = (0..a).map(|x| b1[x] - cover_counts[x]).collect();
    note(
        ledger,
        "cover",
        format!("{} cycles over {} walk types, leftover {b:?}", cover.iter().map(|c| c.1).sum::<u32>(), cover.len()),
    );

    // lattice correction with the reservoir
    let mut plan: Vec<(ClosedWalk, u32)> = Vec::new();
    let corr = hnf.solve_short(&big(&b)).filter(|c| c.iter().all(|x| x + BigInt::from(q) >= BigInt::zero()));
    match corr {
        Some(c) => {
            let worst = c.iter().filter(|x| x.is_negative()).map(|x| x.abs()).max().unwrap_or_default();
            note(ledger, "lattice", format!("leftover = Σ c_g·1_g with max(−c_g) = {worst} ≤ q"));
            for (&(i, copies), _) in cover.iter().zip(0..) {
                plan.push((cover_walks[i].clone(), copies));
            }
            for (g, cg) in gens.iter().zip(c) {
                let times = (cg + BigInt::from(q)).to_u32().expect("small coefficient");
                if times > 0 {
                    plan.push((cols[*g].walk.clone(), times));
                }
            }
        }
        None => {
            note(ledger, "lattice", "no correction within the reservoir; exact decomposition");
            let mut target: Vec<u32> = (0..a).map(|x| b[x] + res[x]).collect();
            let mut rounds = 0;
            let found = loop {
                if let Some(idx) = decompose(&target, &cols, params.dfs_budget) {
                    break idx;
                }
                let Some(pos) = (0..cover.len()).filter(|&i| cover[i].1 > 0).max_by_key(|&i| (cover[i].1, i)) else {
                    return Err(Error::NotFound("no exact decomposition of the leftover".into()));
                };
                if rounds == params.unplace_rounds {
                    return Err(Error::NotFound(format!("no exact decomposition after un-placing {rounds} cover cycles")));
                }
                rounds += 1;
                cover[pos].1 -= 1;
                add_counts(&mut target, &cover_walks[cover[pos].0].counts(a), 1);
            };
            note(ledger, "decomposition", format!("{} cycles, {rounds} cover cycles un-placed", found.len()));
            for &(i, copies) in &cover {
                if copies > 0 {
                    plan.push((cover_walks[i].clone(), copies));
                }
            }
            for i in found {
                plan.push((cols[i].walk.clone(), 1));
            }
        }
    }

    let mut out = Vec::new();
    for (w, copies) in plan {
        for _ in 0..copies {
            let verts = w.verts.iter().map(|&v| pools.take(active[v])).collect::<Result<Vec<_>>>()?;
            out.push(CyclePath { k, l, kind: Kind::Cycle, verts });
        }
    }
    assert!(active.iter().all(|&x| pools.size(x) == 0), "plan consumes the clusters exactly");
    Ok(out)
}

/// Closed walks: every order cap whose enumeration finishes within budget,
/// plus what the first truncated cap reached (a truncated enumeration only
/// sees walks through the first states, so it supplements but never replaces).
fn short_columns(wd: &WalkDigraph, n: usize, params: &AllocParams) -> Vec<IndicatorColumn> {
    let s = wd.k - wd.l;
    let tmin = min_cycle_edges(wd.k, wd.l);
    let mut best: Vec<IndicatorColumn> = Vec::new();
    for extra in 0..=params.gen_extra {
        let set = tiling::enum_columns_in(wd, n, (tmin + extra) * s, params.enum_budget);
        let have: HashSet<Vec<u32>> = best.iter().map(|c| c.counts.clone()).collect();
        best.extend(set.columns.into_iter().filter(|c| !have.contains(&c.counts)));
        if !set.complete {
            break;
        }
    }
    best
}

/// Squared cosine between a column and the target, up to the target's norm.
fn alignment(dot: u64, c: &[u32]) -> u64 {
    let norm: u64 = c.iter().map(|&a| a as u64 * a as u64).sum();
    dot * dot * 1000 / norm.max(1)
}

/// Exact decomposition of `target` as a sum of columns (indices, with
/// repetition). Depth-first with a memo of failed remainders.
pub fn decompose(target: &[u32], cols: &[IndicatorColumn], budget: u64) -> Option<Vec<usize>> {
    let n = target.len();
    let by: Vec<Vec<usize>> = (0..n).map(|v| (0..cols.len()).filter(|&i| cols[i].counts[v] > 0).collect()).collect();
    let min_order = cols.iter().map(|c| c.order()).min()?;

    struct Dfs<'a> {
        cols: &'a [IndicatorColumn],
        by: Vec<Vec<usize>>,
        min_order: usize,
        failed: HashSet<Vec<u32>>,
        nodes: u64,
        budget: u64,
        out: Vec<usize>,
    }
    impl Dfs<'_> {
        fn run(&mut self, rem: &mut Vec<u32>) -> bool {
            let total: u32 = rem.iter().sum();
            if total == 0 {
                return true;
            }
            if (total as usize) < self.min_order || self.failed.contains(rem) || self.nodes > self.budget {
                return false;
            }
            let v = (0..rem.len()).max_by_key(|&v| (rem[v], std::cmp::Reverse(v))).expect("nonempty");
            // columns fitting the remainder, most aligned with it first
            let mut cand: Vec<(u64, usize)> = self.by[v]
                .iter()
                .copied()
                .filter(|&i| self.cols[i].counts.iter().zip(rem.iter()).all(|(a, b)| a <= b))
                .map(|i| {
                    let c = &self.cols[i].counts;
                    let dot: u64 = c.iter().zip(rem.iter()).map(|(&a, &b)| a as u64 * b as u64).sum();
                    (alignment(dot, c), i)
                })
                .collect();
            cand.sort_by(|a, b| b.cmp(a));
            for (_, i) in cand {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return false;
                }
                for (r, a) in rem.iter_mut().zip(&self.cols[i].counts) {
                    *r -= a;
                }
                self.out.push(i);
                if self.run(rem) {
                    return true;
                }
                self.out.pop();
                for (r, a) in rem.iter_mut().zip(&self.cols[i].counts) {
                    *r += a;
                }
            }
            self.failed.insert(rem.clone());
            false
        }
    }
    let mut d = Dfs { cols, by, min_order, failed: HashSet::new(), nodes: 0, budget, out: vec![] };
    let mut rem = target.to_vec();
    d.run(&mut rem).then_some(d.out)
}

/// Window class: the cluster set of the first k−ℓ positions, then the cluster
/// set of positions `k−ℓ..p` for each `p ≡ ℓ mod (k−ℓ)` with `k−ℓ < p ≤ k`.
/// Two windows of the same class are interchangeable splice sites.
pub fn window_key(w: &[usize], k: usize, l: usize) -> Vec<Vec<usize>> {
    let s = k - l;
    let sorted = |x: &[usize]| {
        let mut v = x.to_vec();
        v.sort_unstable();
        v
    };
    let mut key = vec![sorted(&w[..s])];
    for p in s + 1..=k {
        if (p + s - l % s) % s == 0 {
            key.push(sorted(&w[s..p]));
        }
    }
    key
}

/// The cycle traversed backwards, re-rotated so its windows align.
pub fn reverse_cycle(c: &CyclePath) -> CyclePath {
    let r = c.verts.len() as isize;
    let k = c.k as isize;
    let verts = (0..r).map(|i| c.verts[(k - 1 - i).rem_euclid(r) as usize]).collect();
    CyclePath { verts, ..c.clone() }
}

fn orientations(c: &CyclePath) -> Vec<Vec<usize>> {
    let s = c.s();
    let mut out = Vec::new();
    for base in [c.clone(), reverse_cycle(c)] {
        for j in 0..base.verts.len() / s {
            let mut v = base.verts.clone();
            v.rotate_left(j * s);
            out.push(v);
        }
    }
    out
}

fn splice_seq(path: &[usize], i: usize, s: usize, oc: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(path.len() + oc.len());
    out.extend(&path[..i + s]);
    out.extend(&oc[s..]);
    out.extend(&oc[..s]);
    out.extend(&path[i + s..]);
    out
}

/// Inserts `c` into `p` at window `site`:
/// `… y_1…y_s v_{s+1}…v_r v_1…v_s y_{s+1}…y_k …` with `s = k−ℓ`.
/// The result is validated against `g`; a cycle whose first window does not
/// realize the site is rejected.
pub fn splice_cycle(p: &CyclePath, c: &CyclePath, site: usize, g: &dyn EdgeOracle) -> Result<CyclePath> {
    if p.kind != Kind::Path || c.kind != Kind::Cycle || p.k != c.k || p.l != c.l {
        return invalid("splice takes a path and a cycle of the same (k, ℓ)");
    }
    let s = p.s();
    let i = site * s;
    if site >= p.edge_count() || i + s < p.l {
        return Err(Error::NotFound(format!("site {site} is not an interior window of the path")));
    }
    let pv: HashSet<usize> = p.verts.iter().copied().collect();
    if c.verts.iter().any(|v| pv.contains(v)) {
        return invalid("path and cycle share vertices");
    }
    let out = CyclePath { verts: splice_seq(&p.verts, i, s, &c.verts), ..p.clone() };
    out.validate_in(g)
        .map_err(|e| Error::NotFound(format!("site {site}: cycle does not realize the window ({e})")))?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathAllocation {
    pub path: CyclePath,
    pub ledger: Ledger,
}

struct PathPlanner<'a> {
    spec: &'a BlowupSpec,
    k: usize,
    l: usize,
    s: usize,
    wd: &'a WalkDigraph,
    cols: &'a [IndicatorColumn],
    classes: &'a BTreeMap<Vec<Vec<usize>>, Vec<usize>>,
    through: &'a Option<Vec<usize>>,
    owner: HashMap<usize, usize>,
    params: &'a AllocParams,
}

impl PathPlanner<'_> {
    fn key_of(&self, verts: &[usize]) -> Vec<Vec<usize>> {
        let cl: Vec<usize> = verts.iter().map(|v| self.owner[v]).collect();
        window_key(&cl, self.k, self.l)
    }

    fn connect(&self, seq: &mut Vec<usize>, cur: usize, to: usize, min_steps: usize) -> Result<usize> {
        if cur == to && min_steps == 0 {
            return Ok(0);
        }
        let tr = self.wd.shortest(cur, to, min_steps.max(1), self.params.walk_max).ok_or_else(|| {
            Error::PreconditionFailed(format!("no walk {:?} → {:?} in R − x*", self.wd.states[cur], self.wd.states[to]))
        })?;
        for t in &tr {
            seq.extend(&t.app);
        }
        Ok(tr.len())
    }

    /// Cluster sequence of the skeleton: cl(f1), the reserved windows, the
    /// exceptional path, cl(f2), joined by shortest walks.
    fn skeleton(&self, c1: &[usize], c2: &[usize], need: &[Vec<usize>]) -> Result<Vec<usize>> {
        let (k, l, s) = (self.k, self.l, self.s);
        let st = |t: &[usize]| {
            self.wd
                .state(t)
                .ok_or_else(|| Error::PreconditionFailed(format!("tuple {t:?} is not supported in R − x*")))
        };
        let mut seq = c1.to_vec();
        let mut cur = st(c1)?;
        let mut windows = 0;
        for w in need {
            windows += self.connect(&mut seq, cur, st(&w[..l])?, 0)?;
            seq.extend(&w[l..]);
            windows += 1;
            cur = st(&w[s..])?;
        }
        if let Some(t) = &self.through {
            windows += self.connect(&mut seq, cur, st(&t[..l]).map_err(|_| not_found_through())?, 0)?;
            seq.extend(&t[l..]);
            windows += (t.len() - k) / s + 1;
            cur = st(&t[t.len() - l..]).map_err(|_| not_found_through())?;
        }
        let tmin = min_cycle_edges(k, l);
        let target = st(c2)?;
        self.connect(&mut seq, cur, target, tmin.saturating_sub(windows))?;
        Ok(seq)
    }

    fn splice_all(&self, path: &mut Vec<usize>, pending: Vec<CyclePath>) -> Vec<CyclePath> {
        let mut pending = pending;
        loop {
            let mut progress = false;
            let mut rest = Vec::new();
            for c in pending {
                match self.find_site(path, &c) {
                    Some((i, oc)) => {
                        *path = splice_seq(path, i, self.s, &oc);
                        progress = true;
                    }
                    None => rest.push(c),
                }
            }
            pending = rest;
            if pending.is_empty() || !progress {
                return pending;
            }
        }
    }

    fn site_keys(&self, path: &[usize]) -> HashMap<Vec<Vec<usize>>, usize> {
        let (k, s) = (self.k, self.s);
        let mut keys = HashMap::new();
        let mut i = 0;
        while i + k <= path.len() {
            if i + s >= self.l {
                keys.entry(self.key_of(&path[i..i + k])).or_insert(i);
            }
            i += s;
        }
        keys
    }

    fn find_site(&self, path: &[usize], c: &CyclePath) -> Option<(usize, Vec<usize>)> {
        let keys = self.site_keys(path);
        orientations(c).into_iter().find_map(|oc| keys.get(&self.key_of(&oc[..self.k])).map(|&i| (i, oc)))
    }

    fn walk_keys(&self, w: &ClosedWalk) -> Vec<Vec<Vec<usize>>> {
        let c = CyclePath { k: self.k, l: self.l, kind: Kind::Cycle, verts: w.verts.clone() };
        orientations(&c).iter().map(|oc| window_key(&oc[..self.k], self.k, self.l)).collect()
    }

    /// A closed walk with exactly the given cluster counts and a splice site
    /// among `keys`.
    fn walk_with_counts(&self, counts: &[u32], keys: &HashMap<Vec<Vec<usize>>, usize>, budget: &mut u64) -> Option<Vec<usize>> {
        fn rec(
            p: &PathPlanner,
            start: usize,
            st: usize,
            seq: &mut Vec<usize>,
            rem: &mut Vec<u32>,
            keys: &HashMap<Vec<Vec<usize>>, usize>,
            budget: &mut u64,
        ) -> Option<Vec<usize>> {
            for tr in &p.wd.succ[st] {
                if *budget == 0 {
                    return None;
                }
                *budget -= 1;
                if tr.app.iter().any(|&x| rem[x] == 0) {
                    continue;
                }
                // an app may repeat a cluster only if the counts allow it
                for &x in &tr.app {
                    rem[x] -= 1;
                }
                let fits = rem.iter().all(|&r| r < u32::MAX / 2);
                if fits {
                    seq.extend(&tr.app);
                    let done = rem.iter().all(|&r| r == 0);
                    if done && tr.to == start {
                        let verts = seq[..seq.len() - p.l].to_vec();
                        let w = ClosedWalk { k: p.k, l: p.l, verts: verts.clone() };
                        if p.walk_keys(&w).iter().any(|key| keys.contains_key(key)) {
                            return Some(verts);
                        }
                    } else if !done {
                        if let Some(v) = rec(p, start, tr.to, seq, rem, keys, budget) {
                            return Some(v);
                        }
                    }
                    seq.truncate(seq.len() - tr.app.len());
                }
                for &x in &tr.app {
                    rem[x] += 1;
                }
            }
            None
        }
        for (a, st) in self.wd.states.iter().enumerate() {
            let mut need = vec![0u32; counts.len()];
            for &x in st {
                need[x] += 1;
            }
            if need.iter().zip(counts).any(|(a, b)| a > b) {
                continue;
            }
            let mut seq = st.clone();
            let mut rem = counts.to_vec();
            if let Some(v) = rec(self, a, a, &mut seq, &mut rem, keys, budget) {
                return Some(v);
            }
        }
        None
    }

    /// Re-tiles the vertices of stuck cycles one walk at a time: each walk
    /// has a splice site on the current path and leaves a remainder that still
    /// decomposes exactly. Splicing it adds sites for the next one.
    fn retile(&self, path: &mut Vec<usize>, stuck: &[CyclePath]) -> Option<()> {
        let n = self.spec.r.n();
        let mut pool_sets: Vec<Vec<usize>> = vec![vec![]; n];
        for c in stuck {
            for &v in &c.verts {
                pool_sets[self.owner[&v]].push(v);
            }
        }
        let mut pools = Pools::new(&pool_sets, &HashSet::new());
        let mut target: Vec<u32> = (0..n).map(|x| pools.size(x) as u32).collect();
        while target.iter().any(|&t| t > 0) {
            let keys = self.site_keys(path);
            let mut cand: Vec<(u64, usize)> = (0..self.cols.len())
                .filter(|&i| self.cols[i].counts.iter().zip(&target).all(|(a, b)| a <= b))
                .map(|i| {
                    let dot: u64 = self.cols[i].counts.iter().zip(&target).map(|(&a, &b)| a as u64 * b as u64).sum();
                    (alignment(dot, &self.cols[i].counts), i)
                })
                .collect();
            cand.sort_by(|a, b| b.cmp(a));
            let mut budget = self.params.dfs_budget;
            let (pick, walk) = cand.into_iter().map(|(_, i)| i).find_map(|i| {
                let counts = &self.cols[i].counts;
                let walk = self.walk_with_counts(counts, &keys, &mut budget)?;
                let rem: Vec<u32> = target.iter().zip(counts).map(|(a, b)| a - b).collect();
                let ok = rem.iter().all(|&r| r == 0) || decompose(&rem, &self.cols, self.params.dfs_budget / 8).is_some();
                ok.then_some((i, walk))
            })?;
            let verts = walk.iter().map(|&x| pools.take(x)).collect::<Result<Vec<_>>>().ok()?;
            let c = CyclePath { k: self.k, l: self.l, kind: Kind::Cycle, verts };
            let (i, oc) = self.find_site(path, &c)?;
            *path = splice_seq(path, i, self.s, &oc);
            for (t, a) in target.iter_mut().zip(&self.cols[pick].counts) {
                *t -= a;
            }
        }
        Some(())
    }

    /// Classes covering the stuck cycles greedily.
    fn demand(&self, stuck: &[CyclePath], need: &mut Vec<Vec<usize>>) -> bool {
        let have: HashSet<Vec<Vec<usize>>> = need.iter().map(|w| window_key(w, self.k, self.l)).collect();
        let cl = |c: &CyclePath| c.verts.iter().map(|v| self.owner[v]).collect::<Vec<_>>();
        let mut open: Vec<Vec<Vec<Vec<usize>>>> = stuck
            .iter()
            .map(|c| {
                let w = ClosedWalk { k: self.k, l: self.l, verts: cl(c) };
                self.walk_keys(&w)
            })
            .collect();
        let mut added = false;
        while !open.is_empty() {
            let mut count: BTreeMap<&Vec<Vec<usize>>, usize> = BTreeMap::new();
            for ks in &open {
                for key in ks.iter().unique() {
                    *count.entry(key).or_insert(0) += 1;
                }
            }
            let best = count.iter().max_by_key(|(key, c)| (**c, std::cmp::Reverse(*key))).map(|(key, _)| (*key).clone());
            let Some(best) = best else { break };
            if !have.contains(&best) {
                if let Some(w) = self.classes.get(&best) {
                    need.push(w.clone());
                    added = true;
                }
            }
            open.retain(|ks| !ks.contains(&best));
        }
        added
    }
}

fn not_found_through() -> Error {
    Error::NotFound("the exceptional-vertex path does not start and end in R − x*".into())
}

/// Hamilton ℓ-path of `R(𝒱)` from `f1` to `f2`.
pub fn hamilton_path_allocation(
    spec: &BlowupSpec,
    l: usize,
    f1: &[usize],
    f2: &[usize],
    params: &AllocParams,
) -> Result<PathAllocation> {
    path_allocation_cached(spec, l, f1, f2, params, &mut Vec::new())
}

/// Work that depends only on the reduced graph and its exceptional cluster.
struct Prep {
    edges: Vec<Vec<usize>>,
    n: usize,
    x_star: Option<usize>,
    ledger: Ledger,
    wd: WalkDigraph,
    /// Closed walks of `R − x*` in cluster labels.
    cols: Vec<IndicatorColumn>,
    /// Oriented representative window of every class of `R − x*`.
    classes: BTreeMap<Vec<Vec<usize>>, Vec<usize>>,
    through: Option<Vec<usize>>,
}

impl Prep {
    fn new(r: &Hypergraph, l: usize, x_star: Option<usize>, params: &AllocParams) -> Result<Prep> {
        let k = r.k();
        let mut ledger = Ledger::new();
        check_reduced(r, l, x_star, &mut ledger)?;
        let edges: Vec<&[usize]> = r.level(k).filter(|e| x_star.map_or(true, |x| !e.contains(&x))).collect();
        let wd = WalkDigraph::from_edges(k, l, edges.iter().copied())?;
        let cols = short_columns(&wd, r.n(), params);
        let mut classes = BTreeMap::new();
        for e in &edges {
            for w in e.iter().copied().permutations(k) {
                classes.entry(window_key(&w, k, l)).or_insert(w);
            }
        }
        let through = match x_star {
            Some(x) => {
                let t = cycwalk::path_through_vertex(r, l, x, params.path_budget)?;
                note(&mut ledger, "exceptional", format!("path of order {} through cluster {x}", t.len()));
                Some(t)
            }
            None => {
                note(&mut ledger, "exceptional", "no exceptional cluster; steps skipped");
                None
            }
        };
        let edges = r.level(k).map(|e| e.to_vec()).collect();
        Ok(Prep { edges, n: r.n(), x_star, ledger, wd, cols, classes, through })
    }

    fn matches(&self, r: &Hypergraph, x_star: Option<usize>) -> bool {
        self.n == r.n() && self.x_star == x_star && r.level(r.k()).eq(self.edges.iter().map(|e| &e[..]))
    }
}

fn path_allocation_cached(
    spec: &BlowupSpec,
    l: usize,
    f1: &[usize],
    f2: &[usize],
    params: &AllocParams,
    cache: &mut Vec<Prep>,
) -> Result<PathAllocation> {
    spec.validate()?;
    let r = &spec.r;
    let k = r.k();
    check_kl(k, l)?;
    let s = k - l;
    if k % s == 0 {
        return precondition(format!("k−ℓ={s} divides k={k}"));
    }
    let n = spec.vertex_count();
    if n < k || (n - k) % s != 0 {
        return precondition(format!("{n} vertices, not ≡ k mod k−ℓ"));
    }
    if f1.len() != l || f2.len() != l {
        return precondition(format!("end tuples must have ℓ={l} vertices"));
    }
    let ends: HashSet<usize> = f1.iter().chain(f2).copied().collect();
    if ends.len() != 2 * l {
        return precondition("end tuples repeat a vertex or intersect");
    }
    let owner = spec.owner();
    let x_star = spec.exceptional;
    let cl_of = |f: &[usize]| -> Result<Vec<usize>> {
        let c: Vec<usize> = f
            .iter()
            .map(|v| owner.get(v).copied().ok_or_else(|| Error::PreconditionFailed(format!("vertex {v} is in no cluster"))))
            .collect::<Result<_>>()?;
        if c.iter().any(|&x| Some(x) == x_star) {
            return precondition("end tuple meets the exceptional cluster");
        }
        let mut sorted = c.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || (r.is_bounded() && !r.contains_edge(&sorted)) {
            return precondition(format!("end tuple {f:?} is not an ℓ-edge of the blow-up"));
        }
        Ok(c)
    };
    let c1 = cl_of(f1)?;
    let c2 = cl_of(f2)?;

    let mut ledger = Ledger::new();
    let prep = match cache.iter().position(|c| c.matches(r, x_star)) {
        Some(i) => &cache[i],
        None => {
            cache.push(Prep::new(r, l, x_star, params)?);
            cache.last().expect("just pushed")
        }
    };
    ledger.extend(prep.ledger.iter().cloned());
    let Prep { wd, cols, classes, through, .. } = prep;
    let planner = PathPlanner { spec, k, l, s, wd, cols, classes, through, owner: owner.clone(), params };
    let active: Vec<usize> = (0..r.n()).filter(|&x| Some(x) != x_star).collect();
    let oracle = spec.oracle();

    let mut need: Vec<Vec<usize>> = Vec::new();
    let mut full = false;
    for attempt in 0..=params.max_replans + 1 {
        let seq = planner.skeleton(&c1, &c2, &need)?;
        let len = seq.len();
        let mut pools = Pools::new(&spec.clusters, &ends);
        let mut path = Vec::with_capacity(n);
        for (i, &x) in seq.iter().enumerate() {
            path.push(if i < l {
                f1[i]
            } else if i >= len - l {
                f2[i + l - len]
            } else {
                pools.take(x)?
            });
        }
        let rest = pools.total();
        assert_eq!(rest % s, 0, "remainder after the skeleton is divisible by k−ℓ");
        note(
            &mut ledger,
            "skeleton",
            format!("attempt {attempt}: {} reserved windows, order {len}, remainder {rest}", need.len()),
        );
        let cycles = tile_pools(r, l, &active, &mut pools, params, &mut ledger)?;
        let ncyc = cycles.len();
        let stuck = planner.splice_all(&mut path, cycles);
        let stuck = if stuck.is_empty() || planner.retile(&mut path, &stuck).is_some() { vec![] } else { stuck };
        if stuck.is_empty() {
            note(&mut ledger, "splice", format!("{ncyc} cycles spliced"));
            let p = CyclePath { k, l, kind: Kind::Path, verts: path };
            p.validate_in(&oracle)?;
            assert_eq!(p.order(), n, "path spans the blow-up");
            return Ok(PathAllocation { path: p, ledger });
        }
        note(&mut ledger, "splice", format!("{} of {ncyc} cycles found no site", stuck.len()));
        if full {
            break;
        }
        if attempt >= params.max_replans || !planner.demand(&stuck, &mut need) {
            need = planner.classes.values().cloned().collect();
            full = true;
            note(&mut ledger, "reserve", format!("reserving all {} window classes", need.len()));
        }
    }
    Err(Error::NotFound("some tiling cycle has no splice site".into()))
}

/// Vertex family of a cover: a blow-up with an exceptional singleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexFamily {
    pub r: Hypergraph,
    pub clusters: Vec<Vec<usize>>,
    pub exceptional: Option<usize>,
}

/// Edge family on the shape edge `(i, i+1 mod b)`. `hit_lo[j]` is the cluster
/// of this family lying inside cluster j of vertex family i (None for the
/// exceptional cluster); `hit_hi` likewise for vertex family i+1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFamily {
    pub r: Hypergraph,
    pub clusters: Vec<Vec<usize>>,
    pub hit_lo: Vec<Option<usize>>,
    pub hit_hi: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub b: usize,
    pub vertex_families: Vec<VertexFamily>,
    pub edge_families: Vec<EdgeFamily>,
    pub m1: usize,
    pub m2: usize,
    #[serde(with = "rational")]
    pub eta: Q,
}

fn cover_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::CoverInvalid(msg.into()))
}

fn within(size: usize, m: usize, eta: &Q) -> bool {
    let m = rational::qi(m as i64);
    let sz = rational::qi(size as i64);
    sz >= &m * (rational::one() - eta) && sz <= &m * (rational::one() + eta)
}

impl CoverSpec {
    /// Shape edges `(i, i+1 mod b)`.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        (0..self.b).map(|i| (i, (i + 1) % self.b)).collect()
    }

    /// Checks sizes, disjointness, hitting, the partition of V(G), and that
    /// G restricted to each family is exactly the blow-up of its reduced graph.
    pub fn validate(&self, g: &Hypergraph) -> Result<()> {
        let b = self.b;
        if b < 3 || self.vertex_families.len() != b || self.edge_families.len() != b {
            return cover_err("the shape must be a cycle of length ≥ 3 with one family per vertex and edge");
        }
        let k = g.k();
        let s1 = self.vertex_families[0].clusters.len();
        let mut vfam = vec![usize::MAX; g.n()];
        let mut vcl = vec![usize::MAX; g.n()];
        for (i, f) in self.vertex_families.iter().enumerate() {
            if f.clusters.len() != s1 || f.r.n() != s1 || f.r.k() != k {
                return cover_err(format!("vertex family {i}: expected {s1} clusters and a reduced {k}-graph"));
            }
            for (j, c) in f.clusters.iter().enumerate() {
                if Some(j) == f.exceptional {
                    if c.len() != 1 {
                        return cover_err(format!("vertex family {i}: exceptional cluster is not a singleton"));
                    }
                } else if !within(c.len(), self.m1, &self.eta) {
                    return cover_err(format!("vertex family {i}, cluster {j}: size {} outside (1±η)m1", c.len()));
                }
                for &v in c {
                    if v >= g.n() || vfam[v] != usize::MAX {
                        return cover_err(format!("vertex {v} out of range or in two vertex clusters"));
                    }
                    vfam[v] = i;
                    vcl[v] = j;
                }
            }
        }
        let s2 = self.edge_families[0].clusters.len();
        let mut wfam = vec![usize::MAX; g.n()];
        for (i, f) in self.edge_families.iter().enumerate() {
            if f.clusters.len() != s2 || f.r.n() != s2 || f.r.k() != k {
                return cover_err(format!("edge family {i}: expected {s2} clusters and a reduced {k}-graph"));
            }
            for (j, c) in f.clusters.iter().enumerate() {
                if !within(c.len(), self.m2, &self.eta) {
                    return cover_err(format!("edge family {i}, cluster {j}: size {} outside (1±η)m2", c.len()));
                }
                for &v in c {
                    if v >= g.n() || wfam[v] != usize::MAX {
                        return cover_err(format!("vertex {v} out of range or in two edge clusters"));
                    }
                    wfam[v] = i;
                }
            }
            let mut hitting = HashSet::new();
            for (side, hit, vi) in [("lo", &f.hit_lo, i), ("hi", &f.hit_hi, (i + 1) % b)] {
                let vf = &self.vertex_families[vi];
                if hit.len() != s1 {
                    return cover_err(format!("edge family {i}: {side} hitting map has the wrong length"));
                }
                for (j, h) in hit.iter().enumerate() {
                    match (*h, Some(j) == vf.exceptional) {
                        (None, true) => {}
                        (Some(w), false) => {
                            if w >= s2 || !hitting.insert(w) {
                                return cover_err(format!("edge family {i}: hitting cluster {w} invalid or reused"));
                            }
                            if f.clusters[w].iter().any(|&v| vfam[v] != vi || vcl[v] != j) {
                                return cover_err(format!("edge family {i}: cluster {w} not inside cluster {j} of vertex family {vi}"));
                            }
                        }
                        _ => return cover_err(format!("edge family {i}: {side} hitting map wrong at cluster {j}")),
                    }
                }
            }
            for (w, c) in f.clusters.iter().enumerate() {
                if !hitting.contains(&w) && c.iter().any(|&v| vfam[v] != usize::MAX) {
                    return cover_err(format!("edge family {i}: non-hitting cluster {w} meets a vertex family"));
                }
            }
        }
        if let Some(v) = (0..g.n()).find(|&v| vfam[v] == usize::MAX && wfam[v] == usize::MAX) {
            return cover_err(format!("vertex {v} is covered by no family"));
        }
        // G[family] = R(family)
        let vor: Vec<BlowUp> =
            self.vertex_families.iter().map(|f| BlowUp::new(&f.r, &Partition { clusters: f.clusters.clone() })).collect();
        let wor: Vec<BlowUp> =
            self.edge_families.iter().map(|f| BlowUp::new(&f.r, &Partition { clusters: f.clusters.clone() })).collect();
        let mut vcount = vec![0usize; b];
        let mut wcount = vec![0usize; b];
        for e in g.level(k) {
            let fv = vfam[e[0]];
            if fv != usize::MAX && e.iter().all(|&v| vfam[v] == fv) {
                if !vor[fv].contains_edge(e) {
                    return cover_err(format!("edge {e:?} inside vertex family {fv} is not a blow-up edge"));
                }
                vcount[fv] += 1;
            }
            let fw = wfam[e[0]];
            if fw != usize::MAX && e.iter().all(|&v| wfam[v] == fw) {
                if !wor[fw].contains_edge(e) {
                    return cover_err(format!("edge {e:?} inside edge family {fw} is not a blow-up edge"));
                }
                wcount[fw] += 1;
            }
        }
        let expected = |r: &Hypergraph, cl: &[Vec<usize>]| -> usize {
            r.level(k).map(|e| e.iter().map(|&x| cl[x].len()).product::<usize>()).sum()
        };
        for i in 0..b {
            if vcount[i] != expected(&self.vertex_families[i].r, &self.vertex_families[i].clusters) {
                return cover_err(format!("G misses blow-up edges of vertex family {i}"));
            }
            if wcount[i] != expected(&self.edge_families[i].r, &self.edge_families[i].clusters) {
                return cover_err(format!("G misses blow-up edges of edge family {i}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainAssembly {
    pub cycle: CyclePath,
    /// Vertices trimmed from each edge family.
    pub trimmed: Vec<usize>,
    pub ledger: Ledger,
}

/// Removes `d` vertices from the given clusters, one per cluster in turn,
/// largest cluster first, never emptying a cluster.
fn trim(clusters: &mut [Vec<usize>], which: &[usize], d: usize) -> Result<()> {
    for _ in 0..d {
        let &w = which
            .iter()
            .filter(|&&w| clusters[w].len() > 1)
            .max_by_key(|&&w| (clusters[w].len(), std::cmp::Reverse(w)))
            .ok_or_else(|| Error::ParamsTooSmall("hitting clusters too small to trim".into()))?;
        clusters[w].pop();
    }
    Ok(())
}

/// End tuple for the junction of vertex family `vf` and edge family `ef`:
/// ℓ hitting clusters whose tuples are supported in both reduced graphs.
fn junction_tuple(vf: &VertexFamily, ef: &EdgeFamily, hit: &[Option<usize>], wclusters: &[Vec<usize>], l: usize) -> Result<Vec<usize>> {
    let k = vf.r.k();
    let vx: Vec<&[usize]> = vf.r.level(k).filter(|e| vf.exceptional.map_or(true, |x| !e.contains(&x))).collect();
    let wdv = WalkDigraph::from_edges(k, l, vx.into_iter())?;
    let wdw = WalkDigraph::of_graph(&ef.r, l)?;
    let js: Vec<usize> = (0..hit.len()).filter(|&j| hit[j].is_some()).collect();
    for t in js.into_iter().permutations(l) {
        let wt: Vec<usize> = t.iter().map(|&j| hit[j].expect("hitting")).collect();
        if wdv.state(&t).is_some() && wdw.state(&wt).is_some() {
            return Ok(wt.iter().map(|&w| wclusters[w][0]).collect());
        }
    }
    Err(Error::CoverInvalid("no ℓ-tuple of hitting clusters is supported in both reduced graphs".into()))
}

/// Hamilton ℓ-cycle of `G` from a cover: trim for divisibility, pick junction
/// tuples, then a Hamilton path in every edge family and every vertex family,
/// glued around the shape cycle.
pub fn assemble_chain(g: &Hypergraph, cover: &CoverSpec, l: usize, params: &AllocParams) -> Result<ChainAssembly> {
    let k = g.k();
    check_kl(k, l)?;
    let s = k - l;
    if g.n() % s != 0 {
        return precondition(format!("{} vertices not divisible by k−ℓ={s}", g.n()));
    }
    cover.validate(g)?;
    let b = cover.b;
    let mut ledger = Ledger::new();
    let mut w: Vec<Vec<Vec<usize>>> = cover.edge_families.iter().map(|f| f.clusters.clone()).collect();
    let lo_idx = |i: usize| cover.edge_families[i].hit_lo.iter().flatten().copied().collect::<Vec<_>>();
    let hi_idx = |i: usize| cover.edge_families[i].hit_hi.iter().flatten().copied().collect::<Vec<_>>();
    let part = |w: &[Vec<usize>], idx: &[usize]| idx.iter().map(|&j| w[j].len()).sum::<usize>();
    let modp = |x: isize| x.rem_euclid(s as isize) as usize;

    // walk around the shape: fix vertex family i through the lo part of edge
    // family i, then edge family i through its hi part
    let mut trimmed = vec![0usize; b];
    for i in 0..b {
        let prev = (i + b - 1) % b;
        let vsize: usize = cover.vertex_families[i].clusters.iter().map(|c| c.len()).sum();
        let qv = vsize as isize - part(&w[prev], &hi_idx(prev)) as isize - part(&w[i], &lo_idx(i)) as isize;
        let d = modp(-(l as isize) - qv);
        trim(&mut w[i], &lo_idx(i), d)?;
        let wsize: usize = w[i].iter().map(|c| c.len()).sum();
        let d2 = modp(wsize as isize - k as isize);
        if i == b - 1 {
            assert_eq!(d2, 0, "the last edge family is divisible once the rest are");
        }
        trim(&mut w[i], &hi_idx(i), d2)?;
        trimmed[i] = d + d2;
    }
    note(&mut ledger, "trim", format!("vertices trimmed per edge family {trimmed:?}"));

    // junction tuples: f_i in edge family i inside vertex family i, e_{i+1}
    // in edge family i inside vertex family i+1
    let mut f = Vec::with_capacity(b);
    let mut e = vec![vec![]; b];
    for i in 0..b {
        let ef = &cover.edge_families[i];
        f.push(junction_tuple(&cover.vertex_families[i], ef, &ef.hit_lo, &w[i], l)?);
        e[(i + 1) % b] = junction_tuple(&cover.vertex_families[(i + 1) % b], ef, &ef.hit_hi, &w[i], l)?;
    }

    let mut cache = Vec::new();
    let mut wpaths = Vec::with_capacity(b);
    let mut used: HashSet<usize> = HashSet::new();
    for i in 0..b {
        let spec = BlowupSpec::new(cover.edge_families[i].r.clone(), w[i].clone());
        let p = path_allocation_cached(&spec, l, &f[i], &e[(i + 1) % b], params, &mut cache)?;
        note(&mut ledger, "edge-path", format!("family {i}: order {}", p.path.order()));
        used.extend(p.path.verts.iter().copied());
        wpaths.push(p.path);
    }
    let mut vpaths = Vec::with_capacity(b);
    for i in 0..b {
        let vf = &cover.vertex_families[i];
        let keep: HashSet<usize> = e[i].iter().chain(&f[i]).copied().collect();
        let clusters: Vec<Vec<usize>> =
            vf.clusters.iter().map(|c| c.iter().copied().filter(|v| !used.contains(v) || keep.contains(v)).collect()).collect();
        let spec = BlowupSpec { r: vf.r.clone(), clusters, exceptional: vf.exceptional, balance: None };
        let p = path_allocation_cached(&spec, l, &e[i], &f[i], params, &mut cache)?;
        note(&mut ledger, "vertex-path", format!("family {i}: order {}", p.path.order()));
        vpaths.push(p.path);
    }
    let mut seq: Vec<usize> = Vec::with_capacity(g.n() + l);
    for i in 0..b {
        seq.extend(if i == 0 { &vpaths[i].verts[..] } else { &vpaths[i].verts[l..] });
        seq.extend(&wpaths[i].verts[l..]);
    }
    debug_assert_eq!(&seq[seq.len() - l..], &seq[..l]);
    seq.truncate(seq.len() - l);
    let cycle = CyclePath { k, l, kind: Kind::Cycle, verts: seq };
    cycle.validate_in(g)?;
    if cycle.order() != g.n() {
        return Err(Error::NotFound(format!("cycle misses {} vertices", g.n() - cycle.order())));
    }
    Ok(ChainAssembly { cycle, trimmed, ledger })
}

/// Sizes of a planted cover: `s1` clusters per vertex family (one of them the
/// exceptional singleton) of about `m1` vertices, `s2` clusters of `m2`
/// vertices per edge family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSizes {
    pub s1: usize,
    pub s2: usize,
    pub m1: usize,
    pub m2: usize,
}

impl Default for PlantedSizes {
    fn default() -> Self {
        PlantedSizes { s1: 5, s2: 8, m1: 30, m2: 10 }
    }
}

/// Union of complete blow-ups on a b-cycle with hitting subfamilies; vertex
/// labels are shuffled by `seed` and cluster sizes jittered within η = 1/10.
pub fn planted_cover(k: usize, l: usize, b: usize, sizes: PlantedSizes, seed: u64) -> Result<(Hypergraph, CoverSpec)> {
    check_kl(k, l)?;
    let PlantedSizes { s1, s2, m1, m2 } = sizes;
    let s = k - l;
    if b < 3 {
        return invalid("the shape cycle needs b ≥ 3");
    }
    if s1 < 2 || s2 < 2 * (s1 - 1) || s2 < k {
        return invalid(format!("need s2 ≥ 2(s1−1) and s2 ≥ k (s1={s1}, s2={s2})"));
    }
    let jit1 = m1 / 10;
    if m2 == 0 || m1 < 2 * m2 + jit1 + 1 {
        return invalid(format!("need m1 > 2·m2 + m1/10 (m1={m1}, m2={m2})"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut own: Vec<Vec<usize>> =
        (0..b).map(|_| (0..s1 - 1).map(|_| m1 - 2 * m2 + rng.gen_range(0..=2 * jit1) - jit1).collect()).collect();
    let extra = s2 - 2 * (s1 - 1);
    let n0: usize = own.iter().flatten().sum::<usize>() + b * (1 + 2 * (s1 - 1) * m2 + extra * m2);
    // move the first cluster up or down to the nearest multiple of s
    let up = own[0][0] + (s - n0 % s) % s;
    let ok = |x: usize| within(x + 2 * m2, m1, &rational::q(1, 10));
    own[0][0] = if ok(up) { up } else { own[0][0] - n0 % s };
    if !ok(own[0][0]) {
        return invalid("sizes cannot be made divisible within the balance");
    }

    // layout in a fixed order, then relabel through a random permutation
    let mut next = 0usize;
    let mut fresh = |cnt: usize| -> Vec<usize> {
        let v = (next..next + cnt).collect();
        next += cnt;
        v
    };
    let mut vclusters: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut lo_parts: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut hi_parts: Vec<Vec<Vec<usize>>> = vec![vec![]; b];
    for i in 0..b {
        let mut cl = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for j in 0..s1 - 1 {
            let a = fresh(m2);
            let h = fresh(m2);
            let o = fresh(own[i][j]);
            cl.push(a.iter().chain(&h).chain(&o).copied().collect::<Vec<_>>());
            lo.push(a);
            hi.push(h);
        }
        cl.push(fresh(1));
        vclusters.push(cl);
        lo_parts.push(lo);
        hi_parts[(i + b - 1) % b] = hi;
    }
    let mut wclusters: Vec<Vec<Vec<usize>>> = Vec::new();
    for i in 0..b {
        let mut cl: Vec<Vec<usize>> = lo_parts[i].clone();
        cl.extend(hi_parts[i].iter().cloned());
        for _ in 0..extra {
            cl.push(fresh(m2));
        }
        wclusters.push(cl);
    }
    let n = next;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let relabel = |cl: Vec<Vec<usize>>| -> Vec<Vec<usize>> { cl.into_iter().map(|c| c.into_iter().map(|v| perm[v]).collect()).collect() };

    let rv = Hypergraph::complete_bounded(s1, k);
    let rw = Hypergraph::complete_bounded(s2, k);
    let mut vertex_families = Vec::new();
    let mut edge_families = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let blow = |r: &Hypergraph, cl: &[Vec<usize>], edges: &mut Vec<Vec<usize>>| {
        for e in r.level(k) {
            for t in e.iter().map(|&x| cl[x].iter().copied()).multi_cartesian_product() {
                let mut t = t;
                t.sort_unstable();
                edges.push(t);
            }
        }
    };
    for cl in vclusters {
        let cl = relabel(cl);
        blow(&rv, &cl, &mut edges);
        vertex_families.push(VertexFamily { r: rv.clone(), clusters: cl, exceptional: Some(s1 - 1) });
    }
    for cl in wclusters {
        let cl = relabel(cl);
        blow(&rw, &cl, &mut edges);
        let hit_lo = (0..s1).map(|j| (j < s1 - 1).then_some(j)).collect();
        let hit_hi = (0..s1).map(|j| (j < s1 - 1).then_some(s1 - 1 + j)).collect();
        edge_families.push(EdgeFamily { r: rw.clone(), clusters: cl, hit_lo, hit_hi });
    }
    edges.sort_unstable();
    edges.dedup();
    let g = Hypergraph::uniform(n, k, edges)?;
    let cover = CoverSpec { b, vertex_families, edge_families, m1, m2, eta: rational::q(1, 10) };
    Ok((g, cover))
}
