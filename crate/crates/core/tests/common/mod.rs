//! Independent oracles shared by the integration tests. Nothing here calls
//! the validators under test.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use loomlab_core::alloc::BlowupSpec;
use loomlab_core::{CyclePath, Hypergraph, Kind};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn min_edges(k: usize, l: usize) -> usize {
    k.div_ceil(k - l) + 1
}

/// Windows of a vertex sequence, stepping by k−ℓ (cyclically for cycles).
pub fn windows(verts: &[usize], k: usize, l: usize, cyclic: bool) -> Vec<Vec<usize>> {
    let s = k - l;
    let n = verts.len();
    let mut out = Vec::new();
    if cyclic {
        let mut i = 0;
        while i < n {
            out.push((0..k).map(|j| verts[(i + j) % n]).collect());
            i += s;
        }
    } else {
        let mut i = 0;
        while i + k <= n {
            out.push(verts[i..i + k].to_vec());
            i += s;
        }
    }
    out
}

fn distinct(v: &[usize]) -> bool {
    v.iter().collect::<HashSet<_>>().len() == v.len()
}

/// Is `w` an edge of the blow-up of `spec` (clusters distinct, cluster set an edge of R)?
pub fn blowup_edge(spec: &BlowupSpec, w: &[usize]) -> bool {
    let mut cl = Vec::new();
    for v in w {
        match spec.clusters.iter().position(|c| c.contains(v)) {
            Some(x) => cl.push(x),
            None => return false,
        }
    }
    cl.sort_unstable();
    distinct(&cl) && spec.r.level(w.len()).any(|e| e == cl.as_slice())
}

/// Hamilton ℓ-path of the blow-up from `f1` to `f2`, checked from scratch.
pub fn check_hamilton_path(spec: &BlowupSpec, p: &CyclePath, f1: &[usize], f2: &[usize]) -> Result<(), String> {
    let (k, l) = (p.k, p.l);
    let s = k - l;
    if p.kind != Kind::Path {
        return Err("not a path".into());
    }
    let v = &p.verts;
    let all: BTreeSet<usize> = spec.clusters.iter().flatten().copied().collect();
    if !distinct(v) || v.iter().copied().collect::<BTreeSet<_>>() != all {
        return Err(format!("path covers {} of {} vertices or repeats", v.len(), all.len()));
    }
    if v.len() < k || (v.len() - k) % s != 0 {
        return Err(format!("order {} is not k mod k−ℓ", v.len()));
    }
    let t = (v.len() - k) / s + 1;
    if t != 1 && t < min_edges(k, l) {
        return Err(format!("{t} edges: first and last edge meet"));
    }
    if &v[..l] != f1 || &v[v.len() - l..] != f2 {
        return Err("wrong endtuples".into());
    }
    for w in windows(v, k, l, false) {
        if !blowup_edge(spec, &w) {
            return Err(format!("window {w:?} is not a blow-up edge"));
        }
    }
    Ok(())
}

/// Vertex-disjoint ℓ-cycles partitioning the blow-up.
pub fn check_tiling(spec: &BlowupSpec, cycles: &[CyclePath]) -> Result<(), String> {
    let mut seen = HashSet::new();
    for c in cycles {
        let (k, l) = (c.k, c.l);
        if c.kind != Kind::Cycle || c.verts.len() % (k - l) != 0 || c.verts.len() / (k - l) < min_edges(k, l) {
            return Err(format!("bad cycle of order {}", c.verts.len()));
        }
        for &x in &c.verts {
            if !seen.insert(x) {
                return Err(format!("vertex {x} used twice"));
            }
        }
        for w in windows(&c.verts, k, l, true) {
            if !blowup_edge(spec, &w) {
                return Err(format!("window {w:?} is not a blow-up edge"));
            }
        }
    }
    let all: HashSet<usize> = spec.clusters.iter().flatten().copied().collect();
    if seen != all {
        return Err(format!("tiling covers {} of {} vertices", seen.len(), all.len()));
    }
    Ok(())
}

/// Hamilton ℓ-cycle of `g`.
pub fn check_hamilton_cycle(g: &Hypergraph, c: &CyclePath) -> Result<(), String> {
    let (k, l) = (c.k, c.l);
    let v = &c.verts;
    if c.kind != Kind::Cycle || !distinct(v) || v.len() != g.n() || v.iter().any(|&x| x >= g.n()) {
        return Err("not a spanning vertex sequence".into());
    }
    if v.len() % (k - l) != 0 || v.len() / (k - l) < min_edges(k, l) {
        return Err(format!("order {} is not a cycle order", v.len()));
    }
    let edges: HashSet<&[usize]> = g.level(k).collect();
    for mut w in windows(v, k, l, true) {
        w.sort_unstable();
        if !edges.contains(w.as_slice()) {
            return Err(format!("window {w:?} is not an edge"));
        }
    }
    Ok(())
}

/// Random blow-up of `r` with cluster sizes in m ± m/10 and the given total
/// residue mod `s`; the last cluster becomes an exceptional singleton when asked.
pub fn random_blowup(r: Hypergraph, m: usize, s: usize, residue: usize, exceptional: bool, rng: &mut impl Rng) -> BlowupSpec {
    let c = r.n();
    let j = m / 10;
    let mut sizes: Vec<usize> = (0..c).map(|_| m - j + rng.gen_range(0..=2 * j)).collect();
    if exceptional {
        sizes[c - 1] = 1;
    }
    let total: usize = sizes.iter().sum();
    let fix = (residue + s - total % s) % s;
    if sizes[0] + fix <= m + j {
        sizes[0] += fix;
    } else {
        sizes[0] -= (s - fix) % s;
    }
    let n: usize = sizes.iter().sum();
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut clusters = Vec::new();
    let mut at = 0;
    for &z in &sizes {
        clusters.push(labels[at..at + z].to_vec());
        at += z;
    }
    BlowupSpec { exceptional: exceptional.then_some(c - 1), ..BlowupSpec::new(r, clusters) }
}

/// All class-count vectors of rainbow colourings of a cycle's windows with k
/// colours, by depth-first search along the cycle.
pub fn rainbow_colourings(c: &CyclePath) -> BTreeSet<Vec<u32>> {
    let (k, l) = (c.k, c.l);
    let n = c.verts.len();
    let wins: Vec<Vec<usize>> = windows(&(0..n).collect::<Vec<_>>(), k, l, true);
    // windows to check once position p is coloured
    let mut due: Vec<Vec<usize>> = vec![vec![]; n];
    for (i, w) in wins.iter().enumerate() {
        due[*w.iter().max().expect("nonempty")].push(i);
    }
    let mut out = BTreeSet::new();
    let mut col = vec![usize::MAX; n];
    fn rec(p: usize, k: usize, col: &mut Vec<usize>, wins: &[Vec<usize>], due: &[Vec<usize>], out: &mut BTreeSet<Vec<u32>>) {
        if p == col.len() {
            let mut cnt = vec![0u32; k];
            for &x in col.iter() {
                cnt[x] += 1;
            }
            out.insert(cnt);
            return;
        }
        for x in 0..k {
            // symmetry: the first window is coloured 0, 1, …, k−1
            if p < k && x != p {
                continue;
            }
            col[p] = x;
            let ok = due[p].iter().all(|&i| distinct(&wins[i].iter().map(|&v| col[v]).collect::<Vec<_>>()));
            if ok {
                rec(p + 1, k, col, wins, due, out);
            }
        }
        col[p] = usize::MAX;
    }
    rec(0, k, &mut col, &wins, &due, &mut out);
    // undo the symmetry breaking: every permutation of the colours
    let mut all = BTreeSet::new();
    for v in out {
        for perm in permutations(k) {
            all.insert(perm.iter().map(|&i| v[i]).collect());
        }
    }
    all
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigInt>> = m[1..].iter().map(|row| (0..n).filter(|&c| c != j).map(|c| row[c].clone()).collect()).collect();
        let term = &m[0][j] * det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Index of the lattice spanned by `cols` in Z^n as the gcd of the maximal
/// minors; zero when the columns do not have full rank.
pub fn lattice_index(n: usize, cols: &[Vec<u32>]) -> BigInt {
    let mut g = BigInt::zero();
    let idx: Vec<usize> = (0..cols.len()).collect();
    for pick in combinations(&idx, n) {
        let m: Vec<Vec<BigInt>> = (0..n).map(|i| pick.iter().map(|&j| BigInt::from(cols[j][i])).collect()).collect();
        g = g.gcd(&det(&m).abs());
    }
    g
}

pub fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    if items.len() < r {
        return vec![];
    }
    let mut out: Vec<Vec<usize>> = combinations(&items[1..], r - 1)
        .into_iter()
        .map(|mut c| {
            c.insert(0, items[0]);
            c
        })
        .collect();
    out.extend(combinations(&items[1..], r));
    out
}

/// gcd of the differences of the first two class sizes; `None` for ∞.
pub fn gcd_of_counts(counts: &BTreeSet<Vec<u32>>) -> Option<u64> {
    let g = counts.iter().map(|c| (c[0] as i64 - c[1] as i64).unsigned_abs()).fold(0u64, |a, b| a.gcd(&b));
    (g > 0).then_some(g)
}
