//! Threshold constants, property graphs and robustness, Hamilton frameworks,
//! extremal constructions and the brute-force Hamiltonicity oracles.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cycwalk::{self, lambda, min_cycle_edges, CyclePath, Kind, WalkDigraph};
use crate::error::{invalid, precondition, Error, Result};
use crate::hcore::{self, DegreeReport, Hypergraph, Uniformity};
use crate::rational::{self, q, Q};
use crate::tiling::{self, FracTiling, TilingOptions, TilingOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub k: usize,
    #[serde(rename = "ℓ", alias = "l")]
    pub l: usize,
    #[serde(with = "rational")]
    pub lambda: Q,
    /// `None` when k−ℓ divides k.
    #[serde(with = "opt_q")]
    pub delta_codegree: Option<Q>,
    #[serde(with = "opt_q")]
    pub delta_k_minus_2: Option<Q>,
}

mod opt_q {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_str(&rational::to_string(v)),
            None => s.serialize_str("not_applicable"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "not_applicable" {
            return Ok(None);
        }
        rational::parse(&s).map(Some).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

/// 1 − (1 − λ)².
pub fn k_minus_2_bound(lam: &Q) -> Q {
    let c = Q::one() - lam;
    Q::one() - &c * &c
}

pub fn thresholds(k: usize, l: usize) -> Result<ThresholdTable> {
    if k < 3 || l == 0 || l + 2 > k {
        return invalid(format!("need k ≥ 3 and 1 ≤ ℓ ≤ k−2, got k={k}, ℓ={l}"));
    }
    let lam = lambda(k, l);
    let applicable = k % (k - l) != 0;
    let (dc, d2) = if applicable {
        let base = k_minus_2_bound(&lam);
        let d2 = if l == k - 2 { base.max(q(1, 4)) } else { base };
        (Some(lam.clone()), Some(d2))
    } else {
        (None, None)
    };
    Ok(ThresholdTable { k, l, lambda: lam, delta_codegree: dc, delta_k_minus_2: d2 })
}

/// Like [`thresholds`] but fails with `NotApplicable` when k−ℓ divides k.
pub fn thresholds_strict(k: usize, l: usize) -> Result<ThresholdTable> {
    let t = thresholds(k, l)?;
    if t.delta_codegree.is_none() {
        return Err(Error::NotApplicable(format!("k−ℓ={} divides k={k}", k - l)));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// properties

/// A family of (bounded) hypergraphs, given by membership.
pub trait Property: Send + Sync {
    fn name(&self) -> String;
    fn holds(&self, g: &Hypergraph) -> bool;
}

impl fmt::Debug for dyn Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub type BoxProperty = Arc<dyn Property>;

pub struct Always;
impl Property for Always {
    fn name(&self) -> String {
        "true".into()
    }
    fn holds(&self, _: &Hypergraph) -> bool {
        true
    }
}

pub struct HasEdge;
impl Property for HasEdge {
    fn name(&self) -> String {
        "edge".into()
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        g.edge_count() > 0
    }
}

/// `Deg_d^δ`: δ_d of the top level at least δ·C(n−d, k−d).
pub struct Deg {
    pub d: usize,
    pub delta: Q,
}

impl Property for Deg {
    fn name(&self) -> String {
        format!("deg:{}:{}", self.d, rational::to_string(&self.delta))
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        hcore::min_degree(&g.top(), self.d).map(|r| r.ratio >= self.delta).unwrap_or(false)
    }
}

pub struct Dcon(pub usize);
impl Property for Dcon {
    fn name(&self) -> String {
        format!("dcon:{}", self.0)
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        cycwalk::adherence(g, self.0).map(|a| a.dcon).unwrap_or(false)
    }
}

pub struct Dspa(pub usize);
impl Property for Dspa {
    fn name(&self) -> String {
        format!("dspa:{}", self.0)
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        let Ok(adh) = cycwalk::adherence(g, self.0) else { return false };
        let opts = TilingOptions::for_graph(&adh.graph, self.0);
        matches!(tiling::frac_tiling(&adh.graph, self.0, &opts), Ok(TilingOutcome::Feasible(_)))
    }
}

pub struct And(pub Vec<BoxProperty>);
impl Property for And {
    fn name(&self) -> String {
        format!("and({})", self.0.iter().map(|p| p.name()).join(","))
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        self.0.iter().all(|p| p.holds(g))
    }
}

/// `Del_q(P)`: membership survives deleting any ≤ q vertices.
pub struct Del {
    pub q: usize,
    pub inner: BoxProperty,
}
impl Property for Del {
    fn name(&self) -> String {
        format!("del:{}({})", self.q, self.inner.name())
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        del_q_closure(g, self.inner.as_ref(), self.q).map(|r| r.pass).unwrap_or(false)
    }
}

/// Closure-backed property for ad hoc families.
pub struct FnProperty<F: Fn(&Hypergraph) -> bool + Send + Sync> {
    pub label: String,
    pub f: F,
}
impl<F: Fn(&Hypergraph) -> bool + Send + Sync> Property for FnProperty<F> {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn holds(&self, g: &Hypergraph) -> bool {
        (self.f)(g)
    }
}

type Ctor = Box<dyn Fn(&[&str]) -> Result<BoxProperty> + Send + Sync>;

/// Named property constructors. Syntax: `name[:arg]*`, `and(p,q,…)`, `del:q(p)`.
pub struct Registry {
    ctors: HashMap<String, Ctor>,
}

fn num(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse { pos: "property".into(), msg: format!("expected an integer, got {s:?}") })
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { ctors: HashMap::new() };
        r.register("true", |_| Ok(Arc::new(Always)));
        r.register("edge", |_| Ok(Arc::new(HasEdge)));
        r.register("deg", |a| {
            let [d, delta] = a else { return invalid("deg takes d and δ") };
            let delta = rational::parse(delta)
                .ok_or_else(|| Error::Parse { pos: "property".into(), msg: format!("bad rational {delta:?}") })?;
            Ok(Arc::new(Deg { d: num(d)?, delta }))
        });
        r.register("dcon", |a| {
            let [l] = a else { return invalid("dcon takes ℓ") };
            Ok(Arc::new(Dcon(num(l)?)))
        });
        r.register("dspa", |a| {
            let [l] = a else { return invalid("dspa takes ℓ") };
            Ok(Arc::new(Dspa(num(l)?)))
        });
        r
    }
}

fn split_top(s: &str) -> Vec<&str> {
    let mut out = vec![];
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl Registry {
    pub fn register(&mut self, name: &str, ctor: impl Fn(&[&str]) -> Result<BoxProperty> + Send + Sync + 'static) {
        self.ctors.insert(name.to_string(), Box::new(ctor));
    }

    pub fn parse(&self, spec: &str) -> Result<BoxProperty> {
        let spec = spec.trim();
        if let Some(body) = spec.strip_prefix("and(").and_then(|b| b.strip_suffix(')')) {
            let parts = split_top(body).into_iter().map(|p| self.parse(p)).collect::<Result<Vec<_>>>()?;
            return Ok(Arc::new(And(parts)));
        }
        if let Some(rest) = spec.strip_prefix("del:") {
            if let Some(open) = rest.find('(') {
                if let Some(inner) = rest[open + 1..].strip_suffix(')') {
                    return Ok(Arc::new(Del { q: num(&rest[..open])?, inner: self.parse(inner)? }));
                }
            }
            return Err(Error::Parse { pos: "property".into(), msg: format!("malformed del wrapper {spec:?}") });
        }
        let mut it = spec.split(':');
        let name = it.next().unwrap_or_default();
        let args: Vec<&str> = it.collect();
        match self.ctors.get(name) {
            Some(c) => c(&args),
            None => Err(Error::InvalidInput(format!("unknown predicate {name:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyGraph {
    pub graph: Hypergraph,
    /// Whether every s-set was evaluated.
    pub exact: bool,
    pub evaluated: u64,
}

#[derive(Debug, Clone)]
pub struct PropertyGraphOptions {
    pub exact_limit: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for PropertyGraphOptions {
    fn default() -> Self {
        PropertyGraphOptions { exact_limit: 1_000_000, samples: 100_000, seed: 0 }
    }
}

/// The s-graph of sets `S` with `G[S]` in `p`.
pub fn property_graph(g: &Hypergraph, p: &dyn Property, s: usize, opts: &PropertyGraphOptions) -> Result<PropertyGraph> {
    if s == 0 || s > g.n() {
        return invalid(format!("s={s} must lie in 1..={}", g.n()));
    }
    let total = rational::binom_u64(g.n(), s);
    let mut edges = Vec::new();
    if total <= opts.exact_limit {
        for set in (0..g.n()).combinations(s) {
            if p.holds(&hcore::induced(g, &set)) {
                edges.push(set);
            }
        }
        let graph = Hypergraph::uniform(g.n(), s, edges)?;
        return Ok(PropertyGraph { graph, exact: true, evaluated: total });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let verts: Vec<usize> = (0..g.n()).collect();
    let mut seen = HashSet::new();
    for _ in 0..opts.samples {
        let mut set: Vec<usize> = verts.choose_multiple(&mut rng, s).copied().collect();
        set.sort_unstable();
        if seen.insert(set.clone()) && p.holds(&hcore::induced(g, &set)) {
            edges.push(set);
        }
    }
    let evaluated = seen.len() as u64;
    Ok(PropertyGraph { graph: Hypergraph::uniform(g.n(), s, edges)?, exact: false, evaluated })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub degree: DegreeReport,
    #[serde(with = "rational")]
    pub delta: Q,
    pub pass: bool,
}

/// Minimum r-degree of a property s-graph against δ·C(n−r, s−r); δ defaults to 1 − 1/s².
pub fn robustness_degree(p: &Hypergraph, r: usize, delta: Option<Q>) -> Result<RobustnessReport> {
    let s = p.k();
    if r == 0 || r >= s {
        return invalid(format!("r={r} must lie in 1..{s}"));
    }
    let delta = delta.unwrap_or_else(|| Q::one() - q(1, (s * s) as i64));
    let degree = hcore::min_degree(p, r)?;
    let pass = degree.ratio >= delta;
    Ok(RobustnessReport { degree, delta, pass })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelReport {
    pub pass: bool,
    /// A deleted set whose removal leaves the family.
    pub witness: Option<Vec<usize>>,
    pub checked: u64,
}

/// Exhaustive check that `G − X ∈ P` for every |X| ≤ q.
pub fn del_q_closure(g: &Hypergraph, p: &dyn Property, q: usize) -> Result<DelReport> {
    if q >= g.n().max(1) {
        return invalid(format!("q={q} must be below n={}", g.n()));
    }
    let mut checked = 0;
    for size in 0..=q {
        for x in (0..g.n()).combinations(size) {
            checked += 1;
            let rest: Vec<usize> = (0..g.n()).filter(|v| !x.contains(v)).collect();
            if !p.holds(&hcore::induced(g, &rest)) {
                return Ok(DelReport { pass: false, witness: Some(x), checked });
            }
        }
    }
    Ok(DelReport { pass: true, witness: None, checked })
}

// ---------------------------------------------------------------------------
// frameworks

/// Spanning-subgraph selectors.
#[derive(Clone)]
pub enum Selector {
    Identity,
    /// The ℓ-component with the most edges.
    LargestComponent(usize),
    Custom(String, Arc<dyn Fn(&Hypergraph) -> Hypergraph + Send + Sync>),
}

impl Selector {
    pub fn name(&self) -> String {
        match self {
            Selector::Identity => "identity".into(),
            Selector::LargestComponent(l) => format!("largest-component:{l}"),
            Selector::Custom(n, _) => n.clone(),
        }
    }

    pub fn apply(&self, g: &Hypergraph) -> Hypergraph {
        match self {
            Selector::Identity => g.clone(),
            Selector::LargestComponent(l) => {
                let comps = cycwalk::components(g, *l).map(|r| r.components).unwrap_or_default();
                let best = comps.into_iter().max_by_key(|c| c.len()).unwrap_or_default();
                Hypergraph::new(g.n(), g.uniformity(), best).expect("component edges are edges")
            }
            Selector::Custom(_, f) => f(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameworkVerdict {
    pub f1: Check,
    pub f2: Check,
    pub f3: Check,
    /// One tiling per member, replayable with `FracTiling::verify`.
    pub f2_certificates: Vec<FracTiling>,
    pub members: usize,
    pub f3_candidates: u64,
    pub f3_restriction: String,
    pub complete_coverage: bool,
}

impl FrameworkVerdict {
    pub fn pass(&self) -> bool {
        self.f1.pass && self.f2.pass && self.f3.pass
    }
}

/// A family of s-vertex k-graphs, given by a membership test plus the members
/// to check.
pub struct Family {
    pub s: usize,
    pub members: Vec<Hypergraph>,
    pub membership: BoxProperty,
}

/// Relabel `g` (on `V(H) − x`, in increasing order) back into the labels of H.
fn lift_minus(g: &Hypergraph, n: usize, x: usize) -> Vec<Vec<usize>> {
    let back: Vec<usize> = (0..n).filter(|&v| v != x).collect();
    g.edges().iter().map(|e| e.iter().map(|&v| back[v]).sorted().collect()).collect()
}

/// Checks (F1)–(F3). F3 ranges over H = G + w where the link of w is the link
/// of some vertex of some member (so H − w = G); `max_candidates` caps the count.
pub fn check_framework(fam: &Family, sel: &Selector, l: usize, max_candidates: u64) -> Result<FrameworkVerdict> {
    let s = fam.s;
    let mut f1 = Check { pass: true, witness: None };
    let mut f2 = Check { pass: true, witness: None };
    let mut certs = Vec::new();
    for (i, g) in fam.members.iter().enumerate() {
        if g.n() != s {
            return invalid(format!("member {i} has {} vertices, expected {s}", g.n()));
        }
        let fg = sel.apply(g);
        let rep = cycwalk::components(&fg, l)?;
        if f1.pass && !rep.spanning {
            f1 = Check {
                pass: false,
                witness: Some(format!("member {i}: {} ℓ-components, spanning={}", rep.components.len(), rep.spanning)),
            };
        }
        let opts = TilingOptions::for_graph(&fg, l);
        match tiling::frac_tiling(&fg, l, &opts)? {
            TilingOutcome::Feasible(t) => certs.push(t),
            other if f2.pass => {
                let w = match other {
                    TilingOutcome::Infeasible(c) => format!(
                        "member {i}: infeasible, dual y = [{}]",
                        c.y.iter().map(rational::to_string).join(",")
                    ),
                    _ => format!("member {i}: LP undecided"),
                };
                f2 = Check { pass: false, witness: Some(w) };
            }
            _ => {}
        }
    }
    let k = fam.members.first().map_or(0, |g| g.k());
    let mut sources: Vec<Hypergraph> = Vec::new();
    for g in &fam.members {
        for u in 0..s {
            let lk = hcore::link(g, &[u])?;
            if !sources.contains(&lk) {
                sources.push(lk);
            }
        }
    }
    let mut f3 = Check { pass: true, witness: None };
    let mut count = 0u64;
    let mut complete = true;
    'outer: for (gi, g) in fam.members.iter().enumerate() {
        for lk in &sources {
            if count >= max_candidates {
                complete = false;
                break 'outer;
            }
            count += 1;
            let mut edges: Vec<Vec<usize>> = g.edges().to_vec();
            edges.extend(lk.edges().iter().map(|e| {
                let mut f = e.clone();
                f.push(s);
                f
            }));
            let h = Hypergraph::new(s + 1, Uniformity::Uniform(k), edges)?;
            let mut inside: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
            for x in 0..=s {
                let rest: Vec<usize> = (0..=s).filter(|&v| v != x).collect();
                let hx = hcore::induced(&h, &rest);
                if fam.membership.holds(&hx) {
                    inside.push((x, lift_minus(&sel.apply(&hx), s + 1, x)));
                }
            }
            for (a, b) in inside.iter().tuple_combinations() {
                let mut u: Vec<Vec<usize>> = a.1.iter().chain(&b.1).cloned().collect();
                u.sort();
                u.dedup();
                let un = Hypergraph::new(s + 1, Uniformity::Uniform(k), u)?;
                if !cycwalk::is_l_connected(&un, l) {
                    f3 = Check {
                        pass: false,
                        witness: Some(format!("H = member {gi} + w with edges {:?}; x={}, y={}", h.edges(), a.0, b.0)),
                    };
                    break 'outer;
                }
            }
        }
    }
    Ok(FrameworkVerdict {
        f1,
        f2,
        f3,
        f2_certificates: certs,
        members: fam.members.len(),
        f3_candidates: count,
        f3_restriction: "H = G + w, link of w drawn from member links".into(),
        complete_coverage: complete,
    })
}

// ---------------------------------------------------------------------------
// extremal constructions and oracles

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceBarrier {
    pub graph: Hypergraph,
    pub a: usize,
    pub codegree: DegreeReport,
    /// Edges of a Hamilton ℓ-cycle: n/(k−ℓ).
    pub cycle_edges: usize,
    /// Upper bound on cycle edges meeting A: a·⌈k/(k−ℓ)⌉.
    pub coverable: usize,
}

impl SpaceBarrier {
    /// Necessary condition from counting: every cycle edge must meet A.
    pub fn counting_allows(&self) -> bool {
        self.coverable >= self.cycle_edges
    }
}

/// All k-sets meeting A = {0, …, a−1}.
pub fn space_barrier(k: usize, l: usize, n: usize, a: usize) -> Result<SpaceBarrier> {
    if l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    if a == 0 || a > n || n < k {
        return invalid(format!("need 1 ≤ a ≤ n and n ≥ k, got n={n}, a={a}"));
    }
    let edges: Vec<Vec<usize>> = (0..n).combinations(k).filter(|e| e[0] < a).collect();
    let graph = Hypergraph::uniform(n, k, edges)?;
    let codegree = hcore::min_degree(&graph, k - 1)?;
    let s = k - l;
    Ok(SpaceBarrier { graph, a, codegree, cycle_edges: n / s, coverable: a * k.div_ceil(s) })
}

/// Slot for the extremal graph behind the 1/4 lower bound when ℓ = k−2.
/// The construction is not reproduced here; the slot always reports
/// `NotApplicable`.
pub fn k_minus_2_barrier(k: usize, l: usize, n: usize) -> Result<Hypergraph> {
    if l + 2 != k {
        return invalid(format!("only defined for ℓ = k−2, got k={k}, ℓ={l}"));
    }
    Err(Error::NotApplicable(format!("no construction shipped for k={k}, n={n}")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HamMode {
    Cycle,
    Path { f1: Vec<usize>, f2: Vec<usize> },
}

pub const BRUTE_CAP: usize = 24;
pub const BRUTE_BUDGET: u64 = 50_000_000;

struct Brute<'a> {
    wd: &'a WalkDigraph,
    n: usize,
    end: Option<&'a [usize]>,
    seq: Vec<usize>,
    dead: HashSet<(u64, usize)>,
    nodes: u64,
    budget: u64,
}

impl Brute<'_> {
    fn fits(&self, app: &[usize], mask: u64) -> bool {
        let p = self.seq.len();
        let mut m = mask;
        for (j, &u) in app.iter().enumerate() {
            let pos = p + j;
            if pos < self.n {
                if m >> u & 1 == 1 {
                    return false;
                }
                if let Some(f2) = self.end {
                    let l = f2.len();
                    if let Some(i) = f2.iter().position(|&v| v == u) {
                        if pos != self.n - l + i {
                            return false;
                        }
                    }
                }
                m |= 1 << u;
            } else if self.end.is_some() || u != self.seq[pos - self.n] {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, state: usize, mask: u64) -> Result<bool> {
        let target = match self.end {
            Some(_) => self.n,
            None => self.n + self.wd.l,
        };
        if self.seq.len() == target {
            return Ok(true);
        }
        if self.dead.contains(&(mask, state)) {
            return Ok(false);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(format!("brute search exceeded {} nodes", self.budget)));
        }
        let s = self.wd.k - self.wd.l;
        let first = self.seq.len() == self.wd.l;
        for tr in &self.wd.succ[state] {
            if !self.fits(&tr.app, mask) {
                continue;
            }
            if self.end.is_none() && first {
                // rotate so vertex 0 sits in the first k−ℓ positions
                let head: Vec<usize> = self.seq.iter().chain(&tr.app).take(s).copied().collect();
                if !head.contains(&0) {
                    continue;
                }
            }
            let mut m = mask;
            for &u in &tr.app {
                m |= 1 << u;
            }
            self.seq.extend_from_slice(&tr.app);
            if self.dfs(tr.to, m)? {
                return Ok(true);
            }
            self.seq.truncate(self.seq.len() - s);
        }
        self.dead.insert((mask, state));
        Ok(false)
    }
}

/// Exhaustive Hamilton ℓ-cycle / (f1,f2,ℓ)-path search in the top level of `g`.
pub fn brute_hamilton(g: &Hypergraph, l: usize, mode: &HamMode, cap: usize, budget: u64) -> Result<Option<CyclePath>> {
    let (n, k) = (g.n(), g.k());
    if l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    if n > cap.min(64) {
        return Err(Error::BudgetExceeded(format!("n={n} exceeds the brute-force cap {cap}")));
    }
    let s = k - l;
    let tmin = min_cycle_edges(k, l);
    let top = g.top();
    let wd = WalkDigraph::of_graph(&top, l)?;
    match mode {
        HamMode::Cycle => {
            if n % s != 0 {
                return precondition(format!("n={n} is not divisible by k−ℓ={s}"));
            }
            if n / s < tmin {
                return Ok(None);
            }
            let mut b = Brute { wd: &wd, n, end: None, seq: vec![], dead: HashSet::new(), nodes: 0, budget };
            for a in 0..wd.states.len() {
                b.seq = wd.states[a].clone();
                b.dead.clear();
                let mask = b.seq.iter().fold(0u64, |m, &v| m | 1 << v);
                if b.dfs(a, mask)? {
                    let mut verts = b.seq.clone();
                    verts.truncate(n);
                    let c = CyclePath { k, l, kind: Kind::Cycle, verts };
                    c.validate_in(&top)?;
                    return Ok(Some(c));
                }
            }
            Ok(None)
        }
        HamMode::Path { f1, f2 } => {
            if n < k || (n - k) % s != 0 {
                return precondition(format!("n={n} is not ≡ k={k} mod {s}"));
            }
            if f1.len() != l || f2.len() != l || f1.iter().any(|v| f2.contains(v)) {
                return precondition("endtuples must be disjoint ℓ-tuples");
            }
            if f1.iter().chain(f2).any(|&v| v >= n) {
                return invalid("endtuple vertex out of range");
            }
            let t = (n - k) / s + 1;
            if t > 1 && t < tmin {
                return Ok(None);
            }
            let Some(a) = wd.state(f1) else { return Ok(None) };
            let mut b = Brute { wd: &wd, n, end: Some(f2), seq: f1.clone(), dead: HashSet::new(), nodes: 0, budget };
            let mask = f1.iter().fold(0u64, |m, &v| m | 1 << v);
            if b.dfs(a, mask)? {
                let p = CyclePath { k, l, kind: Kind::Path, verts: b.seq };
                p.validate_in(&top)?;
                return Ok(Some(p));
            }
            Ok(None)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamconReport {
    pub pass: bool,
    /// Ordered endtuple pairs checked.
    pub pairs: u64,
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub reason: String,
}

/// Hamilton connectedness: two disjoint ℓ-edges exist, and every oriented
/// pair of disjoint ℓ-edges is joined by a Hamilton path of the top level.
pub fn hamcon_check(g: &Hypergraph, l: usize, budget: u64) -> Result<HamconReport> {
    let (n, k) = (g.n(), g.k());
    if l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    if n < k || (n - k) % (k - l) != 0 {
        return precondition(format!("v(G)={n} is not ≡ k mod k−ℓ"));
    }
    let ledges: Vec<&[usize]> = g.level(l).collect();
    let disjoint: Vec<(&[usize], &[usize])> = ledges
        .iter()
        .flat_map(|e| ledges.iter().map(move |f| (*e, *f)))
        .filter(|(e, f)| e.iter().all(|v| !f.contains(v)))
        .collect();
    if disjoint.is_empty() {
        return Ok(HamconReport { pass: false, pairs: 0, witness: None, reason: "G^(ℓ) has no two disjoint edges".into() });
    }
    let mut pairs = 0;
    for (e, f) in disjoint {
        for eo in e.iter().copied().permutations(l) {
            for fo in f.iter().copied().permutations(l) {
                pairs += 1;
                let mode = HamMode::Path { f1: eo.clone(), f2: fo.clone() };
                if brute_hamilton(g, l, &mode, BRUTE_CAP, budget)?.is_none() {
                    return Ok(HamconReport {
                        pass: false,
                        pairs,
                        witness: Some((eo, fo)),
                        reason: "no Hamilton path between the witness tuples".into(),
                    });
                }
            }
        }
    }
    Ok(HamconReport { pass: true, pairs, witness: None, reason: "all oriented pairs joined".into() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub pass: bool,
    pub components: usize,
    pub isolated: Vec<usize>,
    pub min_degree: Option<u64>,
}

/// ℓ-connectivity (one ℓ-component, no isolated vertices), with δ_d for context.
pub fn connectivity_check(g: &Hypergraph, l: usize, d: usize) -> Result<ConnectivityReport> {
    let rep = cycwalk::components(g, l)?;
    let cov = g.top().covered_vertices();
    let isolated: Vec<usize> = (0..g.n()).filter(|&v| !cov[v]).collect();
    let min_degree = if d >= 1 && d < g.k() && g.n() >= g.k() { Some(hcore::min_degree(&g.top(), d)?.min_deg) } else { None };
    Ok(ConnectivityReport { pass: rep.spanning, components: rep.components.len(), isolated, min_degree })
}

/// Random k-graph with each k-set present independently with probability `p`.
pub fn random_graph(n: usize, k: usize, p: f64, rng: &mut impl rand::Rng) -> Hypergraph {
    let edges = (0..n).combinations(k).filter(|_| rng.gen_bool(p)).collect();
    Hypergraph::uniform(n, k, edges).expect("combinations are valid edges")
}

/// True when δ_d(g) > 0.
pub fn positive_min_degree(g: &Hypergraph, d: usize) -> bool {
    hcore::min_degree(g, d).map(|r| !r.ratio.is_zero()).unwrap_or(false)
}
