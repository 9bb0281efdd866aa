//! Hypergraphs and their elementary operations.
//!
//! Vertices are `0..n`. Edges are stored sorted and deduplicated. A graph is
//! either uniform (every edge has `k` vertices) or bounded (edges of sizes
//! `1..=k`), in which case each size class is a *level*.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Uniformity {
    Uniform(usize),
    Bounded(usize),
}

impl Uniformity {
    pub fn k(self) -> usize {
        match self {
            Uniformity::Uniform(k) | Uniformity::Bounded(k) => k,
        }
    }
}

#[derive(Debug, Clone)]
enum EdgeIndex {
    Bits(HashSet<u128>),
    Sets(HashSet<Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct Hypergraph {
    n: usize,
    uniformity: Uniformity,
    edges: Vec<Vec<usize>>,
    index: OnceLock<EdgeIndex>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.uniformity == other.uniformity && self.edges == other.edges
    }
}
impl Eq for Hypergraph {}

pub(crate) fn mask(e: &[usize]) -> u128 {
    e.iter().fold(0u128, |m, &v| m | (1u128 << v))
}

impl Hypergraph {
    /// Validating constructor. Edges are sorted; duplicates are rejected.
    pub fn new(n: usize, uniformity: Uniformity, edges: Vec<Vec<usize>>) -> Result<Self> {
        let k = uniformity.k();
        if k == 0 {
            return invalid("uniformity must be at least 1");
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parse { pos: format!("edges[{i}]"), msg: "repeated vertex".into() });
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::Parse { pos: format!("edges[{i}]"), msg: format!("vertex {v} out of range 0..{n}") });
            }
            let ok = match uniformity {
                Uniformity::Uniform(k) => e.len() == k,
                Uniformity::Bounded(k) => !e.is_empty() && e.len() <= k,
            };
            if !ok {
                return Err(Error::Parse { pos: format!("edges[{i}]"), msg: format!("edge size {} not allowed for {:?}", e.len(), uniformity) });
            }
            if !seen.insert(e.clone()) {
                return Err(Error::Parse { pos: format!("edges[{i}]"), msg: "duplicate edge".into() });
            }
            out.push(e);
        }
        out.sort();
        Ok(Hypergraph { n, uniformity, edges: out, index: OnceLock::new() })
    }

    /// Like [`Hypergraph::new`] but silently merges duplicate edges.
    pub fn from_edges_dedup(n: usize, uniformity: Uniformity, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut es: Vec<Vec<usize>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        es.sort();
        es.dedup();
        Self::new(n, uniformity, es)
    }

    pub fn uniform(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(n, Uniformity::Uniform(k), edges)
    }

    pub fn bounded(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(n, Uniformity::Bounded(k), edges)
    }

    pub fn empty(n: usize, k: usize) -> Self {
        Hypergraph { n, uniformity: Uniformity::Uniform(k), edges: vec![], index: OnceLock::new() }
    }

    /// The complete k-graph K(n,k).
    pub fn complete(n: usize, k: usize) -> Self {
        let edges = (0..n).combinations(k).collect();
        Hypergraph { n, uniformity: Uniformity::Uniform(k), edges, index: OnceLock::new() }
    }

    /// The bounded graph containing every set of size 1..=k.
    pub fn complete_bounded(n: usize, k: usize) -> Self {
        let mut edges: Vec<Vec<usize>> = (1..=k).flat_map(|j| (0..n).combinations(j)).collect();
        edges.sort();
        Hypergraph { n, uniformity: Uniformity::Bounded(k), edges, index: OnceLock::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.uniformity.k()
    }

    pub fn uniformity(&self) -> Uniformity {
        self.uniformity
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.uniformity, Uniformity::Bounded(_))
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges of size `i` (a view).
    pub fn level(&self, i: usize) -> impl Iterator<Item = &[usize]> + '_ {
        self.edges.iter().filter(move |e| e.len() == i).map(|e| e.as_slice())
    }

    /// The level `G^{(i)}` as its own uniform graph.
    pub fn level_graph(&self, i: usize) -> Hypergraph {
        let edges = self.level(i).map(|e| e.to_vec()).collect();
        Hypergraph { n: self.n, uniformity: Uniformity::Uniform(i), edges, index: OnceLock::new() }
    }

    /// The top level (`G` itself when uniform).
    pub fn top(&self) -> Hypergraph {
        match self.uniformity {
            Uniformity::Uniform(_) => self.clone(),
            Uniformity::Bounded(k) => self.level_graph(k),
        }
    }

    fn index(&self) -> &EdgeIndex {
        self.index.get_or_init(|| {
            if self.n <= 128 {
                EdgeIndex::Bits(self.edges.iter().map(|e| mask(e)).collect())
            } else {
                EdgeIndex::Sets(self.edges.iter().cloned().collect())
            }
        })
    }

    /// Membership test; `e` may be in any order but must be duplicate-free.
    pub fn contains_edge(&self, e: &[usize]) -> bool {
        if e.iter().any(|&v| v >= self.n) {
            return false;
        }
        match self.index() {
            EdgeIndex::Bits(s) => {
                let m = mask(e);
                m.count_ones() as usize == e.len() && s.contains(&m)
            }
            EdgeIndex::Sets(s) => {
                let mut v = e.to_vec();
                v.sort_unstable();
                s.contains(&v)
            }
        }
    }

    /// Vertices lying in at least one edge.
    pub fn covered_vertices(&self) -> Vec<bool> {
        let mut c = vec![false; self.n];
        for e in &self.edges {
            for &v in e {
                c[v] = true;
            }
        }
        c
    }

    /// Adds edges (used by fixtures and generators).
    pub fn with_edges(&self, extra: Vec<Vec<usize>>) -> Result<Hypergraph> {
        let mut es = self.edges.clone();
        es.extend(extra);
        Self::from_edges_dedup(self.n, self.uniformity, es)
    }

    /// Removes the given edges if present.
    pub fn without_edges(&self, gone: &[Vec<usize>]) -> Hypergraph {
        let gone: HashSet<Vec<usize>> = gone
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.sort_unstable();
                e
            })
            .collect();
        let edges = self.edges.iter().filter(|e| !gone.contains(*e)).cloned().collect();
        Hypergraph { n: self.n, uniformity: self.uniformity, edges, index: OnceLock::new() }
    }

    /// `G − X`, relabelled; returns the graph and the kept vertices in order.
    pub fn remove_vertices(&self, x: &[usize]) -> (Hypergraph, Vec<usize>) {
        let xs: HashSet<usize> = x.iter().copied().collect();
        let keep: Vec<usize> = (0..self.n).filter(|v| !xs.contains(v)).collect();
        (induced(self, &keep), keep)
    }

    /// The bounded graph `G ∪ ∂_ℓ G` (top level plus its ℓ-shadow).
    pub fn with_shadow_level(&self, l: usize) -> Result<Hypergraph> {
        let k = self.k();
        if l == 0 || l >= k {
            return invalid(format!("shadow level {l} must lie in 1..{k}"));
        }
        let sh = shadow(self, l)?;
        let mut edges: Vec<Vec<usize>> = self.level(k).map(|e| e.to_vec()).collect();
        edges.extend(sh.edges);
        Hypergraph::from_edges_dedup(self.n, Uniformity::Bounded(k), edges)
    }
}

#[derive(Serialize, Deserialize)]
struct HypergraphJson {
    n: usize,
    k: usize,
    #[serde(default)]
    bounded: bool,
    edges: Vec<Vec<usize>>,
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HypergraphJson { n: self.n, k: self.k(), bounded: self.is_bounded(), edges: self.edges.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = HypergraphJson::deserialize(d)?;
        let u = if j.bounded { Uniformity::Bounded(j.k) } else { Uniformity::Uniform(j.k) };
        Hypergraph::new(j.n, u, j.edges).map_err(serde::de::Error::custom)
    }
}

impl Hypergraph {
    /// Parses the JSON format with position-precise errors.
    pub fn from_json(s: &str) -> Result<Hypergraph> {
        let j: HypergraphJson = serde_json::from_str(s).map_err(|e| Error::Parse {
            pos: format!("line {} column {}", e.line(), e.column()),
            msg: e.to_string(),
        })?;
        let u = if j.bounded { Uniformity::Bounded(j.k) } else { Uniformity::Uniform(j.k) };
        Hypergraph::new(j.n, u, j.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hypergraph serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub d: usize,
    pub min_deg: u64,
    #[serde(with = "crate::rational")]
    pub ratio: Q,
    pub argmin: Vec<usize>,
}

/// Number of edges containing each d-set, keyed by the sorted d-set.
fn d_degrees(g: &Hypergraph, k: usize, d: usize) -> HashMap<Vec<usize>, u64> {
    let mut deg = HashMap::new();
    for e in g.level(k) {
        for s in e.iter().copied().combinations(d) {
            *deg.entry(s).or_insert(0u64) += 1;
        }
    }
    deg
}

/// Minimum d-degree of the top level, with the exact normalized ratio.
pub fn min_degree(g: &Hypergraph, d: usize) -> Result<DegreeReport> {
    let k = g.k();
    if d == 0 || d >= k {
        return invalid(format!("degree order d={d} outside 1..{}", k - 1));
    }
    if g.n() < k {
        return invalid(format!("n={} smaller than k={k}", g.n()));
    }
    let deg = d_degrees(g, k, d);
    let mut best: Option<(u64, Vec<usize>)> = None;
    for s in (0..g.n()).combinations(d) {
        let c = deg.get(&s).copied().unwrap_or(0);
        if best.as_ref().map_or(true, |(b, _)| c < *b) {
            best = Some((c, s));
            if c == 0 {
                break;
            }
        }
    }
    let (min_deg, argmin) = best.expect("n >= k > d so a d-set exists");
    let denom = rational::binom(g.n() - d, k - d);
    let ratio = Q::new(min_deg.into(), denom);
    Ok(DegreeReport { d, min_deg, ratio, argmin })
}

/// All ℓ-sets contained in a top-level edge.
pub fn shadow(g: &Hypergraph, l: usize) -> Result<Hypergraph> {
    let k = g.k();
    if l == 0 || l >= k {
        return invalid(format!("shadow level {l} must lie in 1..{k}"));
    }
    let mut set: HashSet<Vec<usize>> = HashSet::new();
    for e in g.level(k) {
        for s in e.iter().copied().combinations(l) {
            set.insert(s);
        }
    }
    let mut edges: Vec<Vec<usize>> = set.into_iter().collect();
    edges.sort();
    Ok(Hypergraph { n: g.n(), uniformity: Uniformity::Uniform(l), edges, index: OnceLock::new() })
}

/// The link of `x`: sets `Y` disjoint from `X` with `X ∪ Y` a top-level edge.
/// Vertices keep their original labels.
pub fn link(g: &Hypergraph, x: &[usize]) -> Result<Hypergraph> {
    let k = g.k();
    if x.len() >= k {
        return invalid(format!("|X|={} must be below k={k}", x.len()));
    }
    let xs: HashSet<usize> = x.iter().copied().collect();
    if xs.len() != x.len() {
        return invalid("X has repeated vertices");
    }
    let edges: Vec<Vec<usize>> = g
        .level(k)
        .filter(|e| x.iter().all(|v| e.contains(v)))
        .map(|e| e.iter().copied().filter(|v| !xs.contains(v)).collect())
        .collect();
    Hypergraph::new(g.n(), Uniformity::Uniform(k - x.len()), edges)
}

/// `G[S]` relabelled to `0..|S|` in the order of `s`.
pub fn induced(g: &Hypergraph, s: &[usize]) -> Hypergraph {
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in s.iter().enumerate() {
        pos[v] = i;
    }
    let mut edges: Vec<Vec<usize>> = g
        .edges()
        .iter()
        .filter(|e| e.iter().all(|&v| pos[v] != usize::MAX))
        .map(|e| {
            let mut f: Vec<usize> = e.iter().map(|&v| pos[v]).collect();
            f.sort_unstable();
            f
        })
        .collect();
    edges.sort();
    Hypergraph { n: s.len(), uniformity: g.uniformity(), edges, index: OnceLock::new() }
}

/// Cluster partition of a blow-up: `clusters[x]` lists the vertices of `V_x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub clusters: Vec<Vec<usize>>,
}

impl Partition {
    /// Consecutive clusters of the given sizes.
    pub fn consecutive(sizes: &[usize]) -> Partition {
        let mut next = 0;
        let clusters = sizes
            .iter()
            .map(|&s| {
                let c: Vec<usize> = (next..next + s).collect();
                next += s;
                c
            })
            .collect();
        Partition { clusters }
    }

    pub fn vertex_count(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    /// `owner[v]` = cluster of `v` (or `usize::MAX`).
    pub fn owner(&self, n: usize) -> Vec<usize> {
        let mut o = vec![usize::MAX; n];
        for (x, c) in self.clusters.iter().enumerate() {
            for &v in c {
                o[v] = x;
            }
        }
        o
    }
}

/// The blow-up `R(𝒱)`: every edge of `R` replaced by all its partite transversals.
pub fn blow_up(r: &Hypergraph, sizes: &[usize]) -> Result<(Hypergraph, Partition)> {
    if sizes.len() != r.n() {
        return invalid(format!("{} sizes given for {} reduced vertices", sizes.len(), r.n()));
    }
    if let Some(x) = sizes.iter().position(|&s| s == 0) {
        return invalid(format!("cluster {x} has size zero"));
    }
    let part = Partition::consecutive(sizes);
    let mut edges = Vec::new();
    for e in r.edges() {
        for t in e.iter().map(|&x| part.clusters[x].iter().copied()).multi_cartesian_product() {
            edges.push(t);
        }
    }
    let g = Hypergraph::new(part.vertex_count(), r.uniformity(), edges)?;
    Ok((g, part))
}

/// Implicit blow-up: edge membership decided through the cluster map without
/// materializing the edge list.
#[derive(Debug, Clone)]
pub struct BlowUp<'a> {
    pub r: &'a Hypergraph,
    pub owner: Vec<usize>,
}

impl<'a> BlowUp<'a> {
    pub fn new(r: &'a Hypergraph, part: &Partition) -> Self {
        let n = part.clusters.iter().flatten().copied().max().map_or(0, |m| m + 1);
        BlowUp { r, owner: part.owner(n) }
    }

    pub fn contains_edge(&self, e: &[usize]) -> bool {
        let mut cl = Vec::with_capacity(e.len());
        for &v in e {
            match self.owner.get(v) {
                Some(&x) if x != usize::MAX => cl.push(x),
                _ => return false,
            }
        }
        let mut sorted = cl.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        self.r.contains_edge(&sorted)
    }
}

/// Anything that can answer "is this vertex set an edge".
pub trait EdgeOracle {
    fn is_edge(&self, e: &[usize]) -> bool;
}

impl EdgeOracle for Hypergraph {
    fn is_edge(&self, e: &[usize]) -> bool {
        self.contains_edge(e)
    }
}

impl EdgeOracle for BlowUp<'_> {
    fn is_edge(&self, e: &[usize]) -> bool {
        self.contains_edge(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn degrees() {
        let k = Hypergraph::complete(5, 3);
        let r = min_degree(&k, 2).unwrap();
        assert_eq!(r.min_deg, 3);
        assert_eq!(r.ratio, q(1, 1));
        let e = Hypergraph::empty(6, 3);
        assert_eq!(min_degree(&e, 1).unwrap().min_deg, 0);
        assert!(min_degree(&k, 3).is_err());
    }

    #[test]
    fn shadows_and_links() {
        let g = Hypergraph::uniform(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(shadow(&g, 2).unwrap().edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(shadow(&g, 1).unwrap().edge_count(), 3);
        let two = Hypergraph::uniform(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(shadow(&two, 2).unwrap().edge_count(), 6);
        let l = link(&Hypergraph::complete(5, 3), &[0]).unwrap();
        assert_eq!(l.edge_count(), 6);
        assert!(l.edges().iter().all(|e| !e.contains(&0)));
    }

    #[test]
    fn induced_and_blowups() {
        let k6 = Hypergraph::complete(6, 3);
        assert_eq!(induced(&k6, &[1, 3, 4, 5]), Hypergraph::complete(4, 3));
        assert_eq!(induced(&k6, &[]).edge_count(), 0);
        let r = Hypergraph::uniform(3, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(blow_up(&r, &[2, 3, 1]).unwrap().0.edge_count(), 6);
        let r2 = Hypergraph::uniform(2, 2, vec![vec![0, 1]]).unwrap();
        assert_eq!(blow_up(&r2, &[2, 2]).unwrap().0.edge_count(), 4);
        assert_eq!(blow_up(&Hypergraph::complete(3, 2), &[2, 2, 2]).unwrap().0.edge_count(), 12);
        assert!(blow_up(&r, &[1, 0, 1]).is_err());
    }

    #[test]
    fn implicit_blowup_agrees() {
        let r = Hypergraph::complete_bounded(4, 3);
        let (g, p) = blow_up(&r, &[2, 1, 2, 3]).unwrap();
        let b = BlowUp::new(&r, &p);
        for e in (0..g.n()).combinations(3) {
            assert_eq!(g.contains_edge(&e), b.contains_edge(&e));
        }
    }

    #[test]
    fn parser_errors() {
        let err = Hypergraph::from_json(r#"{"n":4,"k":3,"edges":[[0,1,2],[2,1,0]]}"#).unwrap_err();
        assert_eq!(err, Error::Parse { pos: "edges[1]".into(), msg: "duplicate edge".into() });
        let err = Hypergraph::from_json(r#"{"n":4,"k":3,"edges":[[0,1,7]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref pos, .. } if pos == "edges[0]"));
        let g = Hypergraph::complete_bounded(4, 2);
        assert_eq!(Hypergraph::from_json(&g.to_json()).unwrap(), g);
    }
}
