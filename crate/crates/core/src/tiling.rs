//! Indicator columns of closed ℓ-walks and perfect fractional ℓ-cycle tilings.
//!
//! Feasibility is decided by an exact Phase I simplex over an enumerated seed
//! of columns, extended by column generation: the pricing step searches the
//! walk digraph for a closed walk of positive dual weight (a positive cycle),
//! which ranges over closed walks of every length. An `Infeasible` verdict is
//! therefore certified against all closed walks, not only the enumerated ones.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cycwalk::{min_cycle_edges, ClosedWalk, Trans, WalkDigraph};
use crate::error::{invalid, Result};
use crate::hcore::Hypergraph;
use crate::lp::{Phase1, Phase1Result};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorColumn {
    pub counts: Vec<u32>,
    /// One closed walk realizing the column.
    pub walk: ClosedWalk,
}

impl IndicatorColumn {
    pub fn from_walk(walk: ClosedWalk, n: usize) -> Self {
        IndicatorColumn { counts: walk.counts(n), walk }
    }

    pub fn order(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    fn as_q(&self) -> Vec<Q> {
        self.counts.iter().map(|&c| rational::qi(c as i64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSet {
    pub columns: Vec<IndicatorColumn>,
    /// False when the enumeration budget ran out.
    pub complete: bool,
}

/// All distinct indicator vectors of closed ℓ-walks of order ≤ `max_verts`.
pub fn enum_cycle_columns(g: &Hypergraph, l: usize, max_verts: usize, budget: u64) -> Result<ColumnSet> {
    let wd = WalkDigraph::of_graph(g, l)?;
    Ok(enum_columns_in(&wd, g.n(), max_verts, budget))
}

pub fn enum_columns_in(wd: &WalkDigraph, n: usize, max_verts: usize, budget: u64) -> ColumnSet {
    let (k, l) = (wd.k, wd.l);
    let s = k - l;
    let tmin = min_cycle_edges(k, l);
    let mut found: BTreeMap<Vec<u32>, ClosedWalk> = BTreeMap::new();
    let mut nodes = 0u64;
    let mut complete = true;
    'starts: for a in 0..wd.states.len() {
        let mut seen: HashSet<(usize, Vec<u32>)> = HashSet::new();
        let mut frontier: Vec<(usize, Vec<u32>, Vec<usize>)> = vec![(a, vec![0; n], wd.states[a].clone())];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (st, counts, seq) in frontier {
                for tr in &wd.succ[st] {
                    nodes += 1;
                    if nodes > budget {
                        complete = false;
                        break 'starts;
                    }
                    let total = seq.len() - l + s;
                    if total > max_verts {
                        continue;
                    }
                    let mut c = counts.clone();
                    for &v in &tr.app {
                        c[v] += 1;
                    }
                    let mut sq = seq.clone();
                    sq.extend(&tr.app);
                    if tr.to == a && total / s >= tmin && !found.contains_key(&c) {
                        let mut verts = sq.clone();
                        verts.truncate(verts.len() - l);
                        found.insert(c.clone(), ClosedWalk { k, l, verts });
                    }
                    if seen.insert((tr.to, c.clone())) {
                        next.push((tr.to, c, sq));
                    }
                }
            }
            frontier = next;
        }
    }
    let columns = found.into_iter().map(|(counts, walk)| IndicatorColumn { counts, walk }).collect();
    ColumnSet { columns, complete }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FracTiling {
    pub columns: Vec<IndicatorColumn>,
    #[serde(with = "crate::rational::vec")]
    pub weights: Vec<Q>,
}

impl FracTiling {
    /// Nonnegative weights, unit per-vertex sums, and valid witness walks.
    pub fn verify(&self, g: &Hypergraph) -> bool {
        let n = g.n();
        if self.weights.len() != self.columns.len() || self.weights.iter().any(|w| w.is_negative()) {
            return false;
        }
        let sums = self.vertex_sums(n);
        sums.iter().all(|x| x.is_one())
            && self.columns.iter().all(|c| c.walk.is_valid_in(g) && c.walk.counts(n) == c.counts)
    }

    pub fn vertex_sums(&self, n: usize) -> Vec<Q> {
        let mut sums = vec![Q::zero(); n];
        for (c, w) in self.columns.iter().zip(&self.weights) {
            for v in 0..n {
                if c.counts[v] > 0 {
                    sums[v] += w * rational::qi(c.counts[v] as i64);
                }
            }
        }
        sums
    }

    /// Merges columns with identical count vectors.
    pub fn normalized(self) -> FracTiling {
        let mut m: BTreeMap<Vec<u32>, (IndicatorColumn, Q)> = BTreeMap::new();
        for (c, w) in self.columns.into_iter().zip(self.weights) {
            if w.is_zero() {
                continue;
            }
            match m.get_mut(&c.counts) {
                Some(slot) => slot.1 += w,
                None => {
                    m.insert(c.counts.clone(), (c, w));
                }
            }
        }
        let (columns, weights) = m.into_values().unzip();
        FracTiling { columns, weights }
    }
}

/// Farkas certificate: `yᵀ 1_φ ≤ 0` for every closed walk and `Σ y > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCertificate {
    #[serde(with = "crate::rational::vec")]
    pub y: Vec<Q>,
}

impl DualCertificate {
    pub fn check_columns(&self, cols: &[IndicatorColumn]) -> bool {
        let total = self.y.iter().fold(Q::zero(), |a, b| a + b);
        total.is_positive()
            && cols.iter().all(|c| {
                let d = c.counts.iter().zip(&self.y).fold(Q::zero(), |a, (&n, y)| a + y * rational::qi(n as i64));
                !d.is_positive()
            })
    }

    /// Exact check against every closed ℓ-walk of `g` of any length.
    pub fn check_all_walks(&self, g: &Hypergraph, l: usize) -> Result<bool> {
        let total = self.y.iter().fold(Q::zero(), |a, b| a + b);
        let wd = WalkDigraph::of_graph(g, l)?;
        Ok(total.is_positive() && positive_cycle(&wd, &self.y).is_none())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum TilingOutcome {
    Feasible(FracTiling),
    Infeasible(DualCertificate),
    Unknown { reason: String },
}

#[derive(Debug, Clone)]
pub struct TilingOptions {
    /// Order cap for the enumerated seed columns.
    pub max_verts: usize,
    /// Node budget for the seed enumeration.
    pub enum_budget: u64,
    /// Column-generation rounds.
    pub max_rounds: usize,
    pub max_pivots: u64,
    /// Seed columns kept (an even spread of the enumeration).
    pub max_seed: usize,
}

impl TilingOptions {
    /// Seed columns of the minimum cycle length; column generation supplies
    /// the rest.
    pub fn for_graph(g: &Hypergraph, l: usize) -> Self {
        let k = g.k();
        let s = k - l;
        TilingOptions {
            max_verts: min_cycle_edges(k, l) * s,
            enum_budget: 200_000,
            max_rounds: 10_000,
            max_pivots: 1_000_000,
            max_seed: 4 * g.n(),
        }
    }
}

/// Order cap k²·n^ℓ under which bounded tilings always exist.
pub fn bounded_cap(k: usize, n: usize, l: usize) -> usize {
    k * k * n.pow(l as u32)
}

/// Exact perfect fractional ℓ-cycle tiling of the top level of `g`.
pub fn frac_tiling(g: &Hypergraph, l: usize, opts: &TilingOptions) -> Result<TilingOutcome> {
    let top = g.top();
    let wd = WalkDigraph::of_graph(&top, l)?;
    frac_tiling_in(&wd, top.n(), opts)
}

pub fn frac_tiling_in(wd: &WalkDigraph, n: usize, opts: &TilingOptions) -> Result<TilingOutcome> {
    let seed = enum_columns_in(wd, n, opts.max_verts, opts.enum_budget);
    let step = seed.columns.len().div_ceil(opts.max_seed.max(1)).max(1);
    let mut cols: Vec<IndicatorColumn> = seed.columns.into_iter().step_by(step).collect();
    let mut lp = Phase1::ones(n);
    for c in &cols {
        lp.add_column(c.as_q());
    }
    for _ in 0..opts.max_rounds {
        match lp.solve(opts.max_pivots) {
            Phase1Result::Stalled => return Ok(TilingOutcome::Unknown { reason: "pivot budget exhausted".into() }),
            Phase1Result::Feasible(x) => {
                let t = FracTiling { columns: cols, weights: x }.normalized();
                return Ok(TilingOutcome::Feasible(t));
            }
            Phase1Result::Infeasible(y) => match positive_cycle(wd, &y) {
                None => return Ok(TilingOutcome::Infeasible(DualCertificate { y })),
                Some(walk) => {
                    let c = IndicatorColumn::from_walk(walk, n);
                    lp.add_column(c.as_q());
                    cols.push(c);
                }
            },
        }
    }
    Ok(TilingOutcome::Unknown { reason: "column generation round limit".into() })
}

/// A closed walk of positive `y`-weight, if any (Bellman–Ford on the walk
/// digraph, maximizing). The walk is repeated to reach the minimum cycle length.
pub fn positive_cycle(wd: &WalkDigraph, y: &[Q]) -> Option<ClosedWalk> {
    let nst = wd.states.len();
    if nst == 0 {
        return None;
    }
    // integer weights: scale by the common denominator
    let den = y.iter().fold(BigInt::one(), |a, q| num_integer::Integer::lcm(&a, q.denom()));
    let yi: Vec<BigInt> = y.iter().map(|q| q.numer() * (&den / q.denom())).collect();
    let w = |t: &Trans| t.app.iter().fold(BigInt::zero(), |a, &v| a + &yi[v]);
    let weights: Vec<Vec<BigInt>> = wd.succ.iter().map(|ts| ts.iter().map(w).collect()).collect();
    let mut dist = vec![BigInt::zero(); nst];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; nst];
    let mut last = None;
    for _ in 0..nst {
        last = None;
        for u in 0..nst {
            for (ti, t) in wd.succ[u].iter().enumerate() {
                let cand = &dist[u] + &weights[u][ti];
                if cand > dist[t.to] {
                    dist[t.to] = cand;
                    pred[t.to] = Some((u, ti));
                    last = Some(t.to);
                }
            }
        }
        last?;
    }
    let mut x = last?;
    for _ in 0..nst {
        x = pred[x].expect("updated node has a predecessor").0;
    }
    // x lies on a positive cycle of the predecessor graph
    let mut cyc: Vec<(usize, usize)> = Vec::new();
    let mut cur = x;
    loop {
        let (p, ti) = pred[cur].unwrap();
        cyc.push((p, ti));
        cur = p;
        if cur == x {
            break;
        }
    }
    cyc.reverse();
    let trans: Vec<&Trans> = cyc.iter().map(|&(u, ti)| &wd.succ[u][ti]).collect();
    let tmin = min_cycle_edges(wd.k, wd.l);
    let reps = tmin.div_ceil(trans.len());
    let full: Vec<&Trans> = (0..reps).flat_map(|_| trans.iter().copied()).collect();
    let walk = ClosedWalk { k: wd.k, l: wd.l, verts: wd.closed_sequence(cyc[0].0, &full) };
    Some(walk)
}

/// Replaces every column longer than `cap` vertices by shorter closed walks,
/// splitting at two window positions carrying the same oriented state.
pub fn bound_tiling(t: &FracTiling, cap: usize) -> Result<FracTiling> {
    let mut stack: Vec<(ClosedWalk, Q)> = t.columns.iter().map(|c| c.walk.clone()).zip(t.weights.iter().cloned()).collect();
    let n = t.columns.first().map_or(0, |c| c.counts.len());
    let mut out_c = Vec::new();
    let mut out_w = Vec::new();
    while let Some((w, wt)) = stack.pop() {
        if w.verts.len() <= cap {
            out_c.push(IndicatorColumn::from_walk(w, n));
            out_w.push(wt);
            continue;
        }
        let Some((a, b)) = split_walk(&w) else {
            return invalid(format!("walk of order {} has no repeated state to split at", w.verts.len()));
        };
        for piece in [a, b] {
            let (piece, reps) = lengthen(piece);
            stack.push((piece, &wt / rational::qi(reps as i64)));
        }
    }
    Ok(FracTiling { columns: out_c, weights: out_w }.normalized())
}

fn state_at(w: &ClosedWalk, i: usize) -> Vec<usize> {
    let (m, s) = (w.verts.len(), w.k - w.l);
    (0..w.l).map(|j| w.verts[(i * s + j) % m]).collect()
}

/// Two closed walks whose columns sum to the column of `w`.
fn split_walk(w: &ClosedWalk) -> Option<(ClosedWalk, ClosedWalk)> {
    let s = w.k - w.l;
    let t = w.edge_count();
    let tmin = min_cycle_edges(w.k, w.l);
    let mut first: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for i in 0..t {
        first.entry(state_at(w, i)).or_default().push(i);
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for pos in first.values() {
        for (x, &i) in pos.iter().enumerate() {
            for &j in &pos[x + 1..] {
                let short = (j - i).min(t - (j - i));
                if best.map_or(true, |b| (short >= tmin) as usize > (b.2 >= tmin) as usize || (short > b.2)) {
                    best = Some((i, j, short));
                }
            }
        }
    }
    let (i, j, _) = best?;
    let m = w.verts.len();
    let a: Vec<usize> = (i * s..j * s).map(|p| w.verts[p % m]).collect();
    let b: Vec<usize> = (j * s..i * s + m).map(|p| w.verts[p % m]).collect();
    Some((ClosedWalk { k: w.k, l: w.l, verts: a }, ClosedWalk { k: w.k, l: w.l, verts: b }))
}

/// Repeats a short closed walk until it has the minimum cycle length.
fn lengthen(w: ClosedWalk) -> (ClosedWalk, usize) {
    let tmin = min_cycle_edges(w.k, w.l);
    let reps = tmin.div_ceil(w.edge_count());
    if reps <= 1 {
        return (w, 1);
    }
    let verts = (0..reps).flat_map(|_| w.verts.iter().copied()).collect();
    (ClosedWalk { k: w.k, l: w.l, verts }, reps)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum MatchingOutcome {
    Feasible {
        edges: Vec<Vec<usize>>,
        #[serde(with = "crate::rational::vec")]
        weights: Vec<Q>,
    },
    Infeasible(DualCertificate),
}

/// Perfect fractional matching of a uniform graph.
pub fn frac_matching(p: &Hypergraph) -> Result<MatchingOutcome> {
    let n = p.n();
    let mut lp = Phase1::ones(n);
    for e in p.edges() {
        let mut c = vec![Q::zero(); n];
        for &v in e {
            c[v] = Q::one();
        }
        lp.add_column(c);
    }
    match lp.solve(u64::MAX) {
        Phase1Result::Feasible(x) => Ok(MatchingOutcome::Feasible { edges: p.edges().to_vec(), weights: x }),
        Phase1Result::Infeasible(y) => Ok(MatchingOutcome::Infeasible(DualCertificate { y })),
        Phase1Result::Stalled => unreachable!("unbounded pivot budget"),
    }
}
