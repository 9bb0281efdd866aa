//! Integer lattices spanned by homomorphism indicator vectors.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cycwalk::{self, Colouring, CyclePath, Kind, WalkDigraph};
use crate::error::{invalid, precondition, Error, Result};
use crate::hcore::Hypergraph;

/// Column-style Hermite normal form `A·U = [H | 0]`.
#[derive(Debug, Clone)]
pub struct Hnf {
    pub rows: usize,
    /// Nonzero columns of H, each with its pivot row.
    pub cols: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    /// Transform restricted to the nonzero part: original-coefficients of each
    /// H column (only when tracked).
    pub transform: Option<Vec<Vec<BigInt>>>,
    /// Integer kernel vectors of the original columns (only when tracked).
    pub kernel: Vec<Vec<BigInt>>,
}

impl Hnf {
    pub fn new(rows: usize, columns: &[Vec<BigInt>], track: bool) -> Hnf {
        let c = columns.len();
        let mut w: Vec<Vec<BigInt>> = columns.to_vec();
        let mut u: Vec<Vec<BigInt>> = if track {
            (0..c).map(|j| (0..c).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
        } else {
            vec![]
        };
        let sub = |w: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, f: &BigInt| {
            if f.is_zero() {
                return;
            }
            for i in 0..w[dst].len() {
                let d = &w[src][i] * f;
                w[dst][i] -= d;
            }
            if !u.is_empty() {
                for i in 0..u[dst].len() {
                    let d = &u[src][i] * f;
                    u[dst][i] -= d;
                }
            }
        };
        let mut pc = 0;
        let mut pivots = Vec::new();
        for row in 0..rows {
            if pc == c {
                break;
            }
            loop {
                let best = (pc..c).filter(|&j| !w[j][row].is_zero()).min_by_key(|&j| w[j][row].abs());
                let Some(b) = best else { break };
                w.swap(pc, b);
                if track {
                    u.swap(pc, b);
                }
                let mut done = true;
                for j in pc + 1..c {
                    if !w[j][row].is_zero() {
                        let f = w[j][row].div_floor(&w[pc][row]);
                        sub(&mut w, &mut u, j, pc, &f);
                        if !w[j][row].is_zero() {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if pc < c && !w[pc][row].is_zero() {
                if w[pc][row].is_negative() {
                    for x in w[pc].iter_mut() {
                        *x = -x.clone();
                    }
                    if track {
                        for x in u[pc].iter_mut() {
                            *x = -x.clone();
                        }
                    }
                }
                for j in 0..pc {
                    let f = w[j][row].div_floor(&w[pc][row]);
                    sub(&mut w, &mut u, j, pc, &f);
                }
                pivots.push(row);
                pc += 1;
            }
        }
        let kernel = if track { u[pc..].to_vec() } else { vec![] };
        let transform = if track { Some(u[..pc].to_vec()) } else { None };
        w.truncate(pc);
        Hnf { rows, cols: w, pivots, transform, kernel }
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// Coefficients over the HNF columns, if `b` lies in the lattice.
    pub fn solve_hnf(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut r: Vec<BigInt> = b.to_vec();
        let mut z = Vec::with_capacity(self.rank());
        let mut checked = 0;
        for (j, &p) in self.pivots.iter().enumerate() {
            if r[checked..p].iter().any(|x| !x.is_zero()) {
                return None;
            }
            let (qz, rem) = r[p].div_rem(&self.cols[j][p]);
            if !rem.is_zero() {
                return None;
            }
            for i in p..self.rows {
                let d = &self.cols[j][i] * &qz;
                r[i] -= d;
            }
            z.push(qz);
            checked = p + 1;
        }
        if r.iter().any(|x| !x.is_zero()) {
            return None;
        }
        Some(z)
    }

    pub fn contains(&self, b: &[BigInt]) -> bool {
        self.solve_hnf(b).is_some()
    }

    /// Coefficients over the original columns (requires a tracked transform).
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let z = self.solve_hnf(b)?;
        let t = self.transform.as_ref()?;
        let c = t.first().map_or(0, |v| v.len());
        let mut x = vec![BigInt::zero(); c];
        for (zj, col) in z.iter().zip(t) {
            for i in 0..c {
                x[i] += zj * &col[i];
            }
        }
        Some(x)
    }

    /// `solve` followed by greedy max-norm reduction along kernel vectors.
    pub fn solve_short(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut x = self.solve(b)?;
        let norm = |v: &[BigInt]| v.iter().map(|a| a.abs()).max().unwrap_or_default();
        let l1 = |v: &[BigInt]| v.iter().map(|a| a.abs()).fold(BigInt::zero(), |a, b| a + b);
        loop {
            let mut improved = false;
            for kv in &self.kernel {
                for sign in [1i32, -1] {
                    let cand: Vec<BigInt> = x.iter().zip(kv).map(|(a, k)| a + k * sign).collect();
                    if (norm(&cand), l1(&cand)) < (norm(&x), l1(&x)) {
                        x = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                return Some(x);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Complete,
    Incomplete { witness: Vec<String> },
    Unknown { reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeBasis {
    /// Coordinate sums of members of a complete lattice are multiples of this.
    pub vf: usize,
    pub columns: Vec<Vec<u32>>,
    /// HNF columns as decimal strings.
    pub hnf: Vec<Vec<String>>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

fn big_cols(cols: &[Vec<u32>]) -> Vec<Vec<BigInt>> {
    cols.iter().map(|c| c.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Generators of the full lattice `{b : Σb ≡ 0 mod modulus}`.
pub fn full_generators(n: usize, modulus: usize) -> Vec<Vec<BigInt>> {
    let mut g = Vec::new();
    if n == 0 {
        return g;
    }
    let mut first = vec![BigInt::zero(); n];
    first[0] = BigInt::from(modulus);
    g.push(first);
    for i in 1..n {
        let mut v = vec![BigInt::zero(); n];
        v[i] = BigInt::one();
        v[0] = -BigInt::one();
        g.push(v);
    }
    g
}

/// Decides whether the columns span every vector with coordinate sum ≡ 0 mod `modulus`.
pub fn lattice_of(n: usize, columns: Vec<Vec<u32>>, modulus: usize) -> LatticeBasis {
    let h = Hnf::new(n, &big_cols(&columns), false);
    let verdict = match full_generators(n, modulus).into_iter().find(|g| !h.contains(g)) {
        None => Verdict::Complete,
        Some(w) => Verdict::Incomplete { witness: w.iter().map(|x| x.to_string()).collect() },
    };
    let hnf = h.cols.iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect();
    LatticeBasis { vf: modulus, columns, hnf, verdict }
}

/// Indicator vectors of all homomorphisms of a `t`-edge ℓ-cycle into `wd`'s graph.
pub fn hom_columns(wd: &WalkDigraph, n: usize, t: usize, budget: u64) -> Option<Vec<Vec<u32>>> {
    let mut out: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut nodes = 0u64;
    for a in 0..wd.states.len() {
        let mut layer: HashSet<(usize, Vec<u32>)> = HashSet::from([(a, vec![0u32; n])]);
        for _ in 0..t {
            let mut next = HashSet::new();
            for (st, c) in &layer {
                for tr in &wd.succ[*st] {
                    nodes += 1;
                    if nodes > budget {
                        return None;
                    }
                    let mut c2 = c.clone();
                    for &v in &tr.app {
                        c2[v] += 1;
                    }
                    next.insert((tr.to, c2));
                }
            }
            layer = next;
        }
        out.extend(layer.into_iter().filter(|(st, _)| *st == a).map(|(_, c)| c));
    }
    Some(out.into_iter().collect())
}

/// Completeness of the lattice of `F = f` (an ℓ-cycle) in the k-graph `g`.
pub fn lattice_complete(f: &CyclePath, g: &Hypergraph, budget: u64) -> Result<LatticeBasis> {
    if f.kind != Kind::Cycle {
        return invalid("F must be a cycle");
    }
    f.validate()?;
    if g.k() != f.k {
        return invalid(format!("F is {}-uniform but G is {}-uniform", f.k, g.k()));
    }
    let wd = WalkDigraph::of_graph(&g.top(), f.l)?;
    match hom_columns(&wd, g.n(), f.edge_count(), budget) {
        Some(cols) => Ok(lattice_of(g.n(), cols, f.order())),
        None => Ok(LatticeBasis {
            vf: f.order(),
            columns: vec![],
            hnf: vec![],
            verdict: Verdict::Unknown { reason: format!("enumeration exceeded {budget} nodes") },
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcdReport {
    pub chi: usize,
    /// Values |class₁| − |class₂| found (all of them when `exhaustive`).
    pub d: Vec<usize>,
    /// `None` encodes ∞.
    pub gcd: Option<usize>,
    pub exhaustive: bool,
}

impl GcdReport {
    fn from_d(chi: usize, d: BTreeSet<usize>, exhaustive: bool) -> Self {
        let gcd = d.iter().filter(|&&x| x > 0).fold(None, |acc: Option<usize>, &x| Some(acc.map_or(x, |a| a.gcd(&x))));
        GcdReport { chi, d: d.into_iter().collect(), gcd, exhaustive }
    }

    pub fn gcd_string(&self) -> String {
        self.gcd.map_or("inf".to_string(), |g| g.to_string())
    }
}

/// gcd of an ℓ-cycle via transfer DP over window colourings, tracking the
/// sizes of colour classes 1 and 2.
pub fn gcd_of_cycle(f: &CyclePath, budget: u64) -> Result<GcdReport> {
    if f.kind != Kind::Cycle {
        return invalid("expected a cycle");
    }
    f.validate()?;
    let (k, l) = (f.k, f.l);
    let colours = Hypergraph::complete(k, k);
    let wd = WalkDigraph::of_graph(&colours, l)?;
    let t = f.edge_count();
    let mut d = BTreeSet::new();
    let mut nodes = 0u64;
    for a in 0..wd.states.len() {
        let mut layer: HashSet<(usize, usize, usize)> = HashSet::from([(a, 0, 0)]);
        for _ in 0..t {
            let mut next = HashSet::new();
            for &(st, c1, c2) in &layer {
                for tr in &wd.succ[st] {
                    nodes += 1;
                    if nodes > budget {
                        return Err(Error::BudgetExceeded(format!("gcd DP exceeded {budget} nodes")));
                    }
                    let a1 = tr.app.iter().filter(|&&v| v == 0).count();
                    let a2 = tr.app.iter().filter(|&&v| v == 1).count();
                    next.insert((tr.to, c1 + a1, c2 + a2));
                }
            }
            layer = next;
        }
        d.extend(layer.into_iter().filter(|x| x.0 == a).map(|(_, c1, c2)| c1.abs_diff(c2)));
    }
    if d.is_empty() {
        return Err(Error::NotFound("cycle is not k-partite".into()));
    }
    Ok(GcdReport::from_d(k, d, true))
}

/// Smallest c admitting a colouring with every edge rainbow, and all such colourings' D.
pub fn gcd_of_graph(f: &Hypergraph, budget: u64) -> Result<GcdReport> {
    let n = f.n();
    let max_edge = f.edges().iter().map(|e| e.len()).max().unwrap_or(1);
    let mut nodes = 0u64;
    for chi in max_edge.max(1)..=n.max(1) {
        let mut d = BTreeSet::new();
        let mut col = vec![usize::MAX; n];
        let mut sizes = vec![0usize; chi];
        colour_all(f, 0, chi, &mut col, &mut sizes, &mut d, &mut nodes, budget)?;
        if !d.is_empty() {
            return Ok(GcdReport::from_d(chi, d, true));
        }
    }
    Ok(GcdReport::from_d(n, BTreeSet::from([0]), true))
}

#[allow(clippy::too_many_arguments)]
fn colour_all(
    f: &Hypergraph,
    v: usize,
    chi: usize,
    col: &mut Vec<usize>,
    sizes: &mut Vec<usize>,
    d: &mut BTreeSet<usize>,
    nodes: &mut u64,
    budget: u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::BudgetExceeded(format!("colouring search exceeded {budget} nodes")));
    }
    if v == f.n() {
        d.insert(sizes[0].abs_diff(*sizes.get(1).unwrap_or(&0)));
        return Ok(());
    }
    for c in 0..chi {
        let clash = f.edges().iter().any(|e| e.contains(&v) && e.iter().any(|&u| u < v && col[u] == c));
        if clash {
            continue;
        }
        col[v] = c;
        sizes[c] += 1;
        colour_all(f, v + 1, chi, col, sizes, d, nodes, budget)?;
        sizes[c] -= 1;
        col[v] = usize::MAX;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorCycle {
    pub cycle: CyclePath,
    pub colouring: Colouring,
    pub gcd: GcdReport,
}

/// The k-partite ℓ-cycle with k²ℓ + ⌈k/(k−ℓ)⌉ edges, with the colouring from
/// its construction. Two of its colour classes differ in size by one, which
/// certifies gcd = 1.
pub fn divisor_cycle(k: usize, l: usize) -> Result<DivisorCycle> {
    if l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    let s = k - l;
    if k % s == 0 {
        return precondition(format!("k−ℓ={s} divides k={k}"));
    }
    let m = k.div_ceil(s);
    let qx = m * s - k;
    let p = cycwalk::partite_part_size(k, l);
    // parts are 1-based in the construction; part i occupies (i−1)p..ip
    let part_idx = |i: usize| (i - 1) % k;
    let f1: Vec<usize> = (1..=l).map(|i| part_idx(l + qx + i) * p).collect();
    let f2: Vec<usize> = (1..=l).map(|i| part_idx(i) * p + p - 1).collect();
    let path = cycwalk::partite_spanning_path(l, &vec![p; k], &f1, &f2, 50_000_000)?;
    let mut verts = path.verts;
    let mut colours_of = vec![0usize; k * p + qx];
    for v in 0..k * p {
        colours_of[v] = v / p + 1;
    }
    for j in 1..=qx {
        let u = k * p + j - 1;
        verts.push(u);
        colours_of[u] = part_idx(l + j) + 1;
    }
    let cycle = CyclePath { k, l, kind: Kind::Cycle, verts };
    cycle.validate()?;
    debug_assert_eq!(cycle.edge_count(), k * k * l + m);
    let colouring = Colouring::new((0..k * p + qx).collect(), colours_of, k);
    if !colouring.is_proper_on(&cycle) {
        return invalid("construction colouring is not proper");
    }
    let sz = &colouring.class_sizes;
    let diffs: BTreeSet<usize> = (0..k).flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b))).map(|(a, b)| sz[a].abs_diff(sz[b])).collect();
    let gcd = GcdReport::from_d(k, diffs, false);
    Ok(DivisorCycle { cycle, colouring, gcd })
}
