//! ℓ-cycles and ℓ-paths, proper colourings, partite spanning paths,
//! ℓ-components, adherence, and closed ℓ-walks.

use std::collections::{HashMap, HashSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::hcore::{EdgeOracle, Hypergraph, Uniformity};
use crate::rational::{q, Q};

/// Smallest number of edges of a valid ℓ-cycle: ⌈k/(k−ℓ)⌉ + 1.
pub fn min_cycle_edges(k: usize, l: usize) -> usize {
    let s = k - l;
    k.div_ceil(s) + 1
}

/// λ(k,ℓ) = 1/(⌈k/(k−ℓ)⌉(k−ℓ)).
pub fn lambda(k: usize, l: usize) -> Q {
    let s = k - l;
    q(1, (k.div_ceil(s) * s) as i64)
}

fn check_params(k: usize, l: usize) -> Result<()> {
    if k < 2 || l == 0 || l >= k {
        return invalid(format!("need 1 ≤ ℓ < k, got k={k}, ℓ={l}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cycle,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePath {
    pub k: usize,
    #[serde(rename = "ℓ", alias = "l")]
    pub l: usize,
    pub kind: Kind,
    pub verts: Vec<usize>,
}

impl CyclePath {
    pub fn s(&self) -> usize {
        self.k - self.l
    }

    pub fn order(&self) -> usize {
        self.verts.len()
    }

    /// Number of windows (edges).
    pub fn edge_count(&self) -> usize {
        let (m, s) = (self.verts.len(), self.s());
        match self.kind {
            Kind::Cycle => m / s,
            Kind::Path if m >= self.k => (m - self.k) / s + 1,
            Kind::Path => 0,
        }
    }

    /// Window `i` as an ordered vertex list.
    pub fn window(&self, i: usize) -> Vec<usize> {
        let m = self.verts.len();
        let st = i * self.s();
        (0..self.k).map(|j| self.verts[(st + j) % m]).collect()
    }

    /// Windows as ordered vertex lists.
    pub fn windows(&self) -> Vec<Vec<usize>> {
        (0..self.edge_count()).map(|i| self.window(i)).collect()
    }

    pub fn first_tuple(&self) -> &[usize] {
        &self.verts[..self.l]
    }

    pub fn last_tuple(&self) -> &[usize] {
        &self.verts[self.verts.len() - self.l..]
    }

    /// Structural validation: distinct vertices, order arithmetic, exact
    /// consecutive intersections, distinct windows, disjoint end edges.
    pub fn validate(&self) -> Result<()> {
        check_params(self.k, self.l)?;
        let (k, l, s, m) = (self.k, self.l, self.s(), self.verts.len());
        let mut seen = HashSet::new();
        if let Some(v) = self.verts.iter().find(|v| !seen.insert(**v)) {
            return invalid(format!("vertex {v} repeated"));
        }
        match self.kind {
            Kind::Cycle => {
                if m == 0 || m % s != 0 {
                    return invalid(format!("cycle order {m} not divisible by k−ℓ={s}"));
                }
                if m < k {
                    return invalid(format!("cycle order {m} below k={k}"));
                }
            }
            Kind::Path => {
                if m < k || (m - k) % s != 0 {
                    return invalid(format!("path order {m} not ≡ k mod k−ℓ (k={k}, k−ℓ={s})"));
                }
            }
        }
        let ws: Vec<HashSet<usize>> = self.windows().into_iter().map(|w| w.into_iter().collect()).collect();
        let t = ws.len();
        let pairs: Vec<(usize, usize)> = match self.kind {
            Kind::Cycle => (0..t).map(|i| (i, (i + 1) % t)).collect(),
            Kind::Path => (0..t.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        };
        for (i, j) in pairs {
            let c = ws[i].intersection(&ws[j]).count();
            if c != l {
                return invalid(format!("windows {i} and {j} meet in {c} vertices, expected {l}"));
            }
        }
        let mut distinct: HashSet<Vec<usize>> = HashSet::new();
        for (i, w) in ws.iter().enumerate() {
            let mut v: Vec<usize> = w.iter().copied().collect();
            v.sort_unstable();
            if !distinct.insert(v) {
                return invalid(format!("window {i} repeats an earlier window"));
            }
        }
        if self.kind == Kind::Path && t >= 2 && !ws[0].is_disjoint(&ws[t - 1]) {
            return invalid("first and last edges of the path intersect");
        }
        Ok(())
    }

    /// Structural validation plus membership of every window in `g`.
    pub fn validate_in(&self, g: &dyn EdgeOracle) -> Result<()> {
        self.validate()?;
        for (i, w) in self.windows().iter().enumerate() {
            if !g.is_edge(w) {
                return invalid(format!("window {i} = {w:?} is not an edge"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cyclepath serializes")
    }
}

/// The canonical ℓ-cycle on `0..t(k−ℓ)`.
pub fn build_cycle(k: usize, l: usize, t: usize) -> Result<CyclePath> {
    check_params(k, l)?;
    let c = CyclePath { k, l, kind: Kind::Cycle, verts: (0..t * (k - l)).collect() };
    c.validate()?;
    Ok(c)
}

/// The canonical ℓ-path with `t` edges on `0..k+(t−1)(k−ℓ)`.
pub fn build_path(k: usize, l: usize, t: usize) -> Result<CyclePath> {
    check_params(k, l)?;
    if t == 0 {
        return invalid("a path needs at least one edge");
    }
    let p = CyclePath { k, l, kind: Kind::Path, verts: (0..k + (t - 1) * (k - l)).collect() };
    p.validate()?;
    Ok(p)
}

/// A colouring given as parallel arrays over the listed vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colouring {
    pub verts: Vec<usize>,
    pub colours: Vec<usize>,
    pub class_sizes: Vec<usize>,
}

impl Colouring {
    pub fn new(verts: Vec<usize>, colours: Vec<usize>, k: usize) -> Colouring {
        let mut class_sizes = vec![0; k];
        for &c in &colours {
            class_sizes[c - 1] += 1;
        }
        Colouring { verts, colours, class_sizes }
    }

    pub fn colour_of(&self) -> HashMap<usize, usize> {
        self.verts.iter().copied().zip(self.colours.iter().copied()).collect()
    }

    /// True when no window of `c` repeats a colour.
    pub fn is_proper_on(&self, c: &CyclePath) -> bool {
        let col = self.colour_of();
        c.windows().iter().all(|w| {
            let mut seen = HashSet::new();
            w.iter().all(|v| col.get(v).is_some_and(|&x| seen.insert(x)))
        })
    }
}

/// Proper k-colouring of an ℓ-path where colour k has about λm members and the
/// other colours are balanced.
///
/// Colour k sits at positions ≡ (⌈k/(k−ℓ)⌉−1)(k−ℓ) modulo 1/λ, so every
/// window holds exactly one of them; the remaining positions cycle 1..k−1.
pub fn path_colouring(p: &CyclePath) -> Result<Colouring> {
    if p.kind != Kind::Path {
        return invalid("path_colouring expects a path");
    }
    p.validate()?;
    let (k, s) = (p.k, p.s());
    let a = k.div_ceil(s);
    let period = a * s;
    let c0 = (a - 1) * s;
    let mut colours = Vec::with_capacity(p.order());
    let mut next = 0;
    for pos in 0..p.order() {
        if pos % period == c0 {
            colours.push(k);
        } else {
            colours.push(next + 1);
            next = (next + 1) % (k - 1);
        }
    }
    let col = Colouring::new(p.verts.clone(), colours, k);
    debug_assert!(col.is_proper_on(p));
    Ok(col)
}

/// Spanning ℓ-path with rainbow windows in the complete k-partite k-graph whose
/// part `i` is the vertex range starting at `Σ_{j<i} sizes[j]`.
pub fn partite_spanning_path(
    l: usize,
    part_sizes: &[usize],
    f1: &[usize],
    f2: &[usize],
    budget: u64,
) -> Result<CyclePath> {
    let k = part_sizes.len();
    check_params(k, l)?;
    let s = k - l;
    let n: usize = part_sizes.iter().sum();
    if f1.len() != l || f2.len() != l {
        return invalid("endtuples must have ℓ vertices");
    }
    let mut offs = vec![0];
    for &z in part_sizes {
        offs.push(offs.last().unwrap() + z);
    }
    let part_of = |v: usize| (0..k).find(|&i| v >= offs[i] && v < offs[i + 1]);
    let mut used = HashSet::new();
    for &v in f1.iter().chain(f2) {
        if v >= n || !used.insert(v) {
            return invalid(format!("endtuple vertex {v} out of range or repeated"));
        }
    }
    let pf1: Vec<usize> = f1.iter().map(|&v| part_of(v).unwrap()).collect();
    let pf2: Vec<usize> = f2.iter().map(|&v| part_of(v).unwrap()).collect();
    if pf1.iter().collect::<HashSet<_>>().len() < l || pf2.iter().collect::<HashSet<_>>().len() < l {
        return invalid("an endtuple has two vertices in one part");
    }
    if n < k || (n - k) % s != 0 {
        return Err(Error::NotFound(format!("order {n} is not ≡ k mod k−ℓ")));
    }
    if n != k && (n - k) / s + 1 < min_cycle_edges(k, l) {
        return Err(Error::NotFound("too few vertices for disjoint end edges".into()));
    }
    let mut seq: Vec<Option<usize>> = vec![None; n];
    let mut rem = part_sizes.to_vec();
    for (i, &c) in pf1.iter().enumerate() {
        seq[i] = Some(c);
        rem[c] -= 1;
    }
    for (i, &c) in pf2.iter().enumerate() {
        let pos = n - l + i;
        if let Some(old) = seq[pos] {
            if old != c {
                return Err(Error::NotFound("endtuples overlap inconsistently".into()));
            }
        } else {
            seq[pos] = Some(c);
            if rem[c] == 0 {
                return Err(Error::NotFound("endtuple parts exhausted".into()));
            }
            rem[c] -= 1;
        }
    }
    // end windows must be rainbow too
    let mut search = ColourSearch { k, s, n, seq, rem, nodes: 0, budget, failed: HashSet::new() };
    if !search.fits_windows() {
        return Err(Error::NotFound("endtuples violate a window".into()));
    }
    let free: Vec<usize> = (0..n).filter(|&p| search.seq[p].is_none()).collect();
    match search.run(&free, 0) {
        Some(true) => {}
        Some(false) => return Err(Error::NotFound("no spanning path exists (search exhausted)".into())),
        None => return Err(Error::BudgetExceeded(format!("partite path search exceeded {budget} nodes"))),
    }
    let colours: Vec<usize> = search.seq.iter().map(|c| c.unwrap()).collect();
    let mut pool: Vec<Vec<usize>> = (0..k)
        .map(|i| (offs[i]..offs[i + 1]).filter(|v| !used.contains(v)).rev().collect())
        .collect();
    let mut verts = vec![0; n];
    for p in 0..n {
        verts[p] = if p < l {
            f1[p]
        } else if p >= n - l {
            f2[p - (n - l)]
        } else {
            pool[colours[p]].pop().expect("counts match part sizes")
        };
    }
    let path = CyclePath { k, l, kind: Kind::Path, verts };
    path.validate()?;
    Ok(path)
}

struct ColourSearch {
    k: usize,
    s: usize,
    n: usize,
    seq: Vec<Option<usize>>,
    rem: Vec<usize>,
    nodes: u64,
    budget: u64,
    failed: HashSet<(usize, Vec<usize>, Vec<Option<usize>>)>,
}

impl ColourSearch {
    /// Window starts covering position `p`.
    fn windows_at(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = (p + 1).saturating_sub(self.k);
        let last = self.n - self.k;
        (lo..=p.min(last)).filter(move |w| w % self.s == 0)
    }

    fn ok_at(&self, p: usize, c: usize) -> bool {
        self.windows_at(p).all(|w| (w..w + self.k).all(|q| q == p || self.seq[q] != Some(c)))
    }

    fn fits_windows(&self) -> bool {
        (0..self.n).all(|p| self.seq[p].map_or(true, |c| self.ok_at(p, c)))
    }

    /// Some(true) found, Some(false) exhausted, None out of budget.
    fn run(&mut self, free: &[usize], i: usize) -> Option<bool> {
        if i == free.len() {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let p = free[i];
        let lo = p.saturating_sub(self.k);
        let hi = (p + self.k).min(self.n);
        let key = (i, self.rem.clone(), self.seq[lo..hi].to_vec());
        if self.failed.contains(&key) {
            return Some(false);
        }
        let mut order: Vec<usize> = (0..self.k).filter(|&c| self.rem[c] > 0).collect();
        order.sort_by_key(|&c| std::cmp::Reverse(self.rem[c]));
        for c in order {
            if !self.ok_at(p, c) {
                continue;
            }
            self.seq[p] = Some(c);
            self.rem[c] -= 1;
            let r = self.run(free, i + 1);
            self.rem[c] += 1;
            self.seq[p] = None;
            match r {
                Some(true) => {
                    self.seq[p] = Some(c);
                    self.rem[c] -= 1;
                    return Some(true);
                }
                None => return None,
                Some(false) => {}
            }
        }
        self.failed.insert(key);
        Some(false)
    }
}

/// Size of each closing part: kℓ(k−ℓ)+1.
pub fn partite_part_size(k: usize, l: usize) -> usize {
    k * l * (k - l) + 1
}

/// A k-partite ℓ-cycle on t(k−ℓ) vertices whose colour class 1 has about λm
/// members and whose other classes are balanced.
pub fn balanced_cycle(k: usize, l: usize, t: usize, eps: f64) -> Result<(CyclePath, Colouring)> {
    check_params(k, l)?;
    let s = k - l;
    if k % s == 0 {
        return precondition(format!("k−ℓ={s} divides k={k}"));
    }
    let m = t * s;
    let part = partite_part_size(k, l);
    let b = part * k - 2 * l;
    if m < b + k {
        return invalid(format!("b={b} closing vertices leave no room in m={m}"));
    }
    let plen = m - b;
    let p = build_path(k, l, (plen - k) / s + 1)?;
    let pc = path_colouring(&p)?;
    // colour k is the small class; relabel it as colour 1
    let relabel = |c: usize| if c == k { 1 } else if c == 1 { k } else { c };
    let pcol: Vec<usize> = pc.colours.iter().map(|&c| relabel(c)).collect();
    // closing host: part c holds P's endtuple vertices of colour c plus fresh ones
    let ends: Vec<usize> = (0..l).chain(plen - l..plen).collect();
    let mut local_of = HashMap::new();
    let mut global = vec![0usize; part * k];
    let mut fresh = plen;
    for c in 1..=k {
        let base = (c - 1) * part;
        let mut slot = 0;
        for &v in &ends {
            if pcol[v] == c {
                local_of.insert(v, base + slot);
                global[base + slot] = v;
                slot += 1;
            }
        }
        while slot < part {
            global[base + slot] = fresh;
            fresh += 1;
            slot += 1;
        }
    }
    debug_assert_eq!(fresh, m);
    let f1: Vec<usize> = (0..l).map(|v| local_of[&v]).collect();
    let f2: Vec<usize> = (plen - l..plen).map(|v| local_of[&v]).collect();
    let qpath = partite_spanning_path(l, &vec![part; k], &f2, &f1, 10_000_000)?;
    let mut verts: Vec<usize> = (0..plen).collect();
    let qv = &qpath.verts;
    verts.extend(qv[l..qv.len() - l].iter().map(|&x| global[x]));
    let mut colours = vec![0usize; m];
    for v in 0..plen {
        colours[v] = pcol[v];
    }
    for x in 0..part * k {
        colours[global[x]] = x / part + 1;
    }
    let cyc = CyclePath { k, l, kind: Kind::Cycle, verts };
    cyc.validate()?;
    let col = Colouring::new((0..m).collect(), colours, k);
    if !col.is_proper_on(&cyc) {
        return Err(Error::InvalidInput("closing produced an improper colouring".into()));
    }
    let lam = crate::rational::to_f64(&lambda(k, l));
    let rest = (1.0 - lam) / (k as f64 - 1.0);
    let alpha: Vec<f64> = col.class_sizes.iter().map(|&z| z as f64 / m as f64).collect();
    if (alpha[0] - lam).abs() > eps || alpha[1..].iter().any(|a| (a - rest).abs() > eps) {
        return invalid(format!("t={t} too small for ε={eps}: fractions {alpha:?}"));
    }
    Ok((cyc, col))
}

/// ℓ-components of the top level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub components: Vec<Vec<Vec<usize>>>,
    /// Exactly one component, covering every vertex.
    pub spanning: bool,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let nx = self.0[y];
            self.0[y] = r;
            y = nx;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Component id per edge of `edges`; edges are adjacent when they share ℓ vertices.
fn component_ids(edges: &[&[usize]], l: usize) -> Vec<usize> {
    let mut dsu = Dsu::new(edges.len());
    let mut bucket: HashMap<Vec<usize>, usize> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        for sub in e.iter().copied().combinations(l) {
            match bucket.get(&sub) {
                Some(&j) => dsu.union(i, j),
                None => {
                    bucket.insert(sub, i);
                }
            }
        }
    }
    (0..edges.len()).map(|i| dsu.find(i)).collect()
}

pub fn components(g: &Hypergraph, l: usize) -> Result<ComponentReport> {
    let k = g.k();
    if l == 0 || l > k {
        return invalid(format!("ℓ={l} outside 1..={k}"));
    }
    let edges: Vec<&[usize]> = g.level(k).collect();
    let ids = component_ids(&edges, l);
    let mut groups: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
    let mut where_: HashMap<usize, usize> = HashMap::new();
    for (e, id) in edges.iter().zip(ids) {
        let slot = *where_.entry(id).or_insert_with(|| {
            groups.push((id, vec![]));
            groups.len() - 1
        });
        groups[slot].1.push(e.to_vec());
    }
    let components: Vec<Vec<Vec<usize>>> = groups.into_iter().map(|g| g.1).collect();
    let spanning = components.len() == 1 && {
        let mut cov = vec![false; g.n()];
        components[0].iter().flatten().for_each(|&v| cov[v] = true);
        cov.iter().all(|&c| c)
    };
    Ok(ComponentReport { components, spanning })
}

/// ℓ-connected: a single ℓ-component covering every vertex.
pub fn is_l_connected(g: &Hypergraph, l: usize) -> bool {
    components(g, l).map(|r| r.spanning).unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adherence {
    pub graph: Hypergraph,
    pub dcon: bool,
}

/// Union of the ℓ-components of top-level edges containing each ℓ-level edge.
pub fn adherence(g: &Hypergraph, l: usize) -> Result<Adherence> {
    let k = g.k();
    if l == 0 || l >= k {
        return invalid(format!("ℓ={l} outside 1..{k}"));
    }
    let edges: Vec<&[usize]> = g.level(k).collect();
    let ids = component_ids(&edges, l);
    let mut by_sub: HashMap<Vec<usize>, usize> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        for sub in e.iter().copied().combinations(l) {
            by_sub.entry(sub).or_insert(ids[i]);
        }
    }
    let mut keep: HashSet<usize> = HashSet::new();
    for f in g.level(l) {
        if let Some(&id) = by_sub.get(f) {
            keep.insert(id);
        }
    }
    let adh: Vec<Vec<usize>> = edges
        .iter()
        .zip(&ids)
        .filter(|(_, id)| keep.contains(id))
        .map(|(e, _)| e.to_vec())
        .collect();
    let graph = Hypergraph::new(g.n(), Uniformity::Uniform(k), adh)?;
    let dcon = keep.len() == 1 && is_l_connected(&graph, l);
    Ok(Adherence { graph, dcon })
}

/// A transition of the walk digraph: append `app` to reach state `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trans {
    pub to: usize,
    pub app: Vec<usize>,
}

/// Walk digraph on supported ordered ℓ-tuples.
#[derive(Debug, Clone)]
pub struct WalkDigraph {
    pub k: usize,
    pub l: usize,
    pub states: Vec<Vec<usize>>,
    pub index: HashMap<Vec<usize>, usize>,
    pub succ: Vec<Vec<Trans>>,
}

impl WalkDigraph {
    /// Built from the k-edges yielded by `edges`.
    pub fn from_edges<'a>(k: usize, l: usize, edges: impl Iterator<Item = &'a [usize]>) -> Result<Self> {
        check_params(k, l)?;
        let s = k - l;
        let mut wd = WalkDigraph { k, l, states: vec![], index: HashMap::new(), succ: vec![] };
        let mut trans: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
        for e in edges {
            debug_assert_eq!(e.len(), k);
            for st in e.iter().copied().permutations(l) {
                let from = wd.intern(st.clone());
                let rest: Vec<usize> = e.iter().copied().filter(|v| !st.contains(v)).collect();
                for app in rest.iter().copied().permutations(s) {
                    let mut full = st.clone();
                    full.extend(&app);
                    let to = full[k - l..].to_vec();
                    trans.push((from, to, app));
                }
            }
        }
        wd.succ = vec![vec![]; wd.states.len()];
        for (from, to, app) in trans {
            let to = wd.index[&to];
            wd.succ[from].push(Trans { to, app });
        }
        for s in &mut wd.succ {
            s.sort_by(|a, b| a.app.cmp(&b.app));
        }
        Ok(wd)
    }

    pub fn of_graph(g: &Hypergraph, l: usize) -> Result<Self> {
        let k = g.k();
        Self::from_edges(k, l, g.level(k))
    }

    fn intern(&mut self, st: Vec<usize>) -> usize {
        if let Some(&i) = self.index.get(&st) {
            return i;
        }
        self.states.push(st.clone());
        self.index.insert(st, self.states.len() - 1);
        self.states.len() - 1
    }

    pub fn state(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Shortest transition sequence from `a` to `b` with at least `min_steps`
    /// steps; returns the transitions taken.
    pub fn shortest(&self, a: usize, b: usize, min_steps: usize, max_steps: usize) -> Option<Vec<&Trans>> {
        // BFS over (state, min(steps, min_steps))
        let layer = |d: usize| d.min(min_steps);
        let key = |st: usize, d: usize| st * (min_steps + 1) + layer(d);
        let mut prev: HashMap<usize, (usize, usize, usize)> = HashMap::new();
        let mut q = VecDeque::new();
        q.push_back((a, 0usize));
        let start = key(a, 0);
        let mut seen = HashSet::from([start]);
        while let Some((st, d)) = q.pop_front() {
            if d >= max_steps {
                continue;
            }
            for (ti, tr) in self.succ[st].iter().enumerate() {
                let nk = key(tr.to, d + 1);
                if !seen.insert(nk) {
                    continue;
                }
                prev.insert(nk, (key(st, d), st, ti));
                if tr.to == b && d + 1 >= min_steps {
                    let mut out = Vec::new();
                    let mut cur = nk;
                    while cur != start {
                        let (pk, pst, ti) = prev[&cur];
                        out.push(&self.succ[pst][ti]);
                        cur = pk;
                    }
                    out.reverse();
                    return Some(out);
                }
                q.push_back((tr.to, d + 1));
            }
        }
        None
    }

    /// The cyclic vertex sequence of the closed walk starting in state `a`
    /// and following `trans` (which must return to `a`).
    pub fn closed_sequence(&self, a: usize, trans: &[&Trans]) -> Vec<usize> {
        let mut seq = self.states[a].clone();
        for t in trans {
            seq.extend(&t.app);
        }
        seq.truncate(seq.len() - self.l);
        seq
    }
}

/// A closed ℓ-walk: cyclic vertex sequence whose windows are edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedWalk {
    pub k: usize,
    pub l: usize,
    pub verts: Vec<usize>,
}

impl ClosedWalk {
    pub fn edge_count(&self) -> usize {
        self.verts.len() / (self.k - self.l)
    }

    pub fn windows(&self) -> Vec<Vec<usize>> {
        let (m, s) = (self.verts.len(), self.k - self.l);
        (0..m / s).map(|i| (0..self.k).map(|j| self.verts[(i * s + j) % m]).collect()).collect()
    }

    /// Every window is an edge of `g` (k distinct vertices) and the walk has
    /// at least the minimum number of cycle edges.
    pub fn is_valid_in(&self, g: &dyn EdgeOracle) -> bool {
        let s = self.k - self.l;
        !self.verts.is_empty()
            && self.verts.len() % s == 0
            && self.edge_count() >= min_cycle_edges(self.k, self.l)
            && self.windows().iter().all(|w| {
                let set: HashSet<_> = w.iter().collect();
                set.len() == self.k && g.is_edge(w)
            })
    }

    /// Count vector over `0..n`.
    pub fn counts(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0; n];
        for &v in &self.verts {
            c[v] += 1;
        }
        c
    }

    /// State tuples at window-aligned positions.
    pub fn visits(&self, t: &[usize]) -> bool {
        let (m, s) = (self.verts.len(), self.k - self.l);
        (0..m / s).any(|i| (0..self.l).all(|j| self.verts[(i * s + j) % m] == t[j]))
    }
}

/// A closed ℓ-walk through states `a` then `b` with at most `max_len` edges.
pub fn walk_between(g: &Hypergraph, l: usize, a: &[usize], b: &[usize], max_len: usize) -> Result<ClosedWalk> {
    let wd = WalkDigraph::of_graph(g, l)?;
    walk_between_in(&wd, a, b, max_len)
}

pub fn walk_between_in(wd: &WalkDigraph, a: &[usize], b: &[usize], max_len: usize) -> Result<ClosedWalk> {
    let (k, l) = (wd.k, wd.l);
    let sa = wd.state(a).ok_or_else(|| Error::PreconditionFailed(format!("{a:?} is not supported")))?;
    let sb = wd.state(b).ok_or_else(|| Error::PreconditionFailed(format!("{b:?} is not supported")))?;
    let there = wd.shortest(sa, sb, 1, max_len).ok_or_else(|| Error::NotFound(format!("no walk {a:?} → {b:?}")))?;
    let back: Vec<&Trans> = if sa == sb {
        vec![]
    } else {
        wd.shortest(sb, sa, 1, max_len).ok_or_else(|| Error::NotFound(format!("no walk {b:?} → {a:?}")))?
    };
    let mut lap: Vec<&Trans> = there;
    lap.extend(back);
    let tmin = min_cycle_edges(k, l);
    let reps = tmin.div_ceil(lap.len());
    let full: Vec<&Trans> = (0..reps).flat_map(|_| lap.iter().copied()).collect();
    if full.len() > max_len {
        return Err(Error::NotFound(format!("closed walk needs {} > {max_len} edges", full.len())));
    }
    Ok(ClosedWalk { k, l, verts: wd.closed_sequence(sa, &full) })
}

/// Admissible orders of the target path: 2k < v ≤ 3k and v ≡ k mod (k−ℓ).
pub fn cover_path_orders(k: usize, l: usize) -> Vec<usize> {
    let s = k - l;
    (2 * k + 1..=3 * k).filter(|v| (v - k) % s == 0).collect()
}

/// Walk sequence realizing an ℓ-path whose windows are edges of `R^{(k)}` and
/// in which `x` occurs exactly once, at an interior position.
///
/// Edges `e ∌ x` and `f ∋ x` with |e∩f| ≥ ℓ are located first; the search then
/// runs inside `e ∪ f` before falling back to the whole graph.
pub fn path_through_vertex(r: &Hypergraph, l: usize, x: usize, budget: u64) -> Result<Vec<usize>> {
    let k = r.k();
    check_params(k, l)?;
    if x >= r.n() {
        return invalid(format!("vertex {x} out of range"));
    }
    let top: Vec<&[usize]> = r.level(k).collect();
    let pair = top.iter().filter(|f| f.contains(&x)).find_map(|f| {
        top.iter()
            .find(|e| !e.contains(&x) && e.iter().filter(|v| f.contains(v)).count() >= l)
            .map(|e| (e.to_vec(), f.to_vec()))
    });
    let (e, f) = pair.ok_or_else(|| Error::NotFound(format!("no edges e ∌ {x}, f ∋ {x} sharing ℓ vertices")))?;
    let ef: HashSet<usize> = e.iter().chain(&f).copied().collect();
    let local: Vec<&[usize]> = top.iter().copied().filter(|g| g.iter().all(|v| ef.contains(v))).collect();
    let mut nodes = 0u64;
    for edges in [local, top.clone()] {
        let wd = WalkDigraph::from_edges(k, l, edges.into_iter())?;
        for order in cover_path_orders(k, l) {
            if let Some(seq) = through_search(&wd, x, order, budget, &mut nodes) {
                return Ok(seq);
            }
        }
    }
    if nodes > budget {
        return Err(Error::BudgetExceeded("path_through_vertex".into()));
    }
    Err(Error::NotFound(format!("no admissible path through {x}")))
}

fn through_search(wd: &WalkDigraph, x: usize, order: usize, budget: u64, nodes: &mut u64) -> Option<Vec<usize>> {
    let (k, l) = (wd.k, wd.l);
    let steps = (order - k) / (k - l) + 1;
    for (si, st) in wd.states.iter().enumerate() {
        if st.contains(&x) {
            continue;
        }
        let mut seq = st.clone();
        if dfs_through(wd, si, steps, x, order, &mut seq, budget, nodes) {
            return Some(seq);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn dfs_through(
    wd: &WalkDigraph,
    st: usize,
    left: usize,
    x: usize,
    order: usize,
    seq: &mut Vec<usize>,
    budget: u64,
    nodes: &mut u64,
) -> bool {
    *nodes += 1;
    if *nodes > budget {
        return false;
    }
    let l = wd.l;
    if left == 0 {
        let hits: Vec<usize> = (0..seq.len()).filter(|&i| seq[i] == x).collect();
        return hits.len() == 1 && hits[0] >= l && hits[0] < order - l;
    }
    let have_x = seq.contains(&x);
    for tr in &wd.succ[st] {
        let cnt = tr.app.iter().filter(|&&v| v == x).count();
        if have_x && cnt > 0 {
            continue;
        }
        // x may not land in the final ℓ positions
        if left == 1 && cnt > 0 && tr.app[tr.app.len().saturating_sub(l)..].contains(&x) {
            continue;
        }
        let len = seq.len();
        seq.extend(&tr.app);
        if dfs_through(wd, tr.to, left - 1, x, order, seq, budget, nodes) {
            return true;
        }
        seq.truncate(len);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cycles_and_paths() {
        let c = build_cycle(3, 1, 3).unwrap();
        assert_eq!(c.windows(), vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 0]]);
        assert_eq!(build_cycle(5, 3, 4).unwrap().order(), 8);
        assert!(build_cycle(3, 1, 2).is_err());
        assert!(build_cycle(5, 3, 3).is_err());
        assert_eq!(build_path(3, 1, 3).unwrap().order(), 7);
        assert!(build_path(3, 1, 2).is_err());
        assert_eq!(build_path(5, 3, 5).unwrap().order(), 13);
        assert_eq!(build_path(3, 1, 1).unwrap().order(), 3);
    }

    #[test]
    fn colourings() {
        let c = path_colouring(&build_path(3, 1, 3).unwrap()).unwrap();
        assert!([1, 2].contains(&c.class_sizes[2]));
        let c = path_colouring(&build_path(5, 3, 5).unwrap()).unwrap();
        assert!([2, 3].contains(&c.class_sizes[4]));
        let c = path_colouring(&build_path(4, 1, 1).unwrap()).unwrap();
        assert_eq!(c.class_sizes, vec![1, 1, 1, 1]);
    }

    #[test]
    fn partite_paths() {
        let p = partite_spanning_path(1, &[7, 7, 7], &[0], &[20], 1_000_000).unwrap();
        assert_eq!(p.edge_count(), 10);
        let p = partite_spanning_path(1, &[1, 1, 1], &[0], &[2], 1000).unwrap();
        assert_eq!(p.verts, vec![0, 1, 2]);
        assert!(matches!(partite_spanning_path(1, &[2, 1, 1], &[0], &[3], 1000), Err(Error::NotFound(_))));
    }

    #[test]
    fn balanced() {
        let (c, col) = balanced_cycle(3, 1, 60, 0.05).unwrap();
        assert_eq!(c.order(), 120);
        assert!(col.is_proper_on(&c));
        assert!(balanced_cycle(3, 1, 4, 0.01).is_err());
        assert!(balanced_cycle(4, 2, 60, 0.05).is_err());
    }

    #[test]
    fn comps() {
        let two = Hypergraph::uniform(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(components(&two, 1).unwrap().components.len(), 2);
        let c = build_cycle(3, 1, 3).unwrap();
        let g = Hypergraph::uniform(6, 3, c.windows()).unwrap();
        assert!(components(&g, 1).unwrap().spanning);
        let p = Hypergraph::uniform(5, 3, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert_eq!(components(&p, 2).unwrap().components.len(), 2);
    }

    #[test]
    fn adherences() {
        let g = Hypergraph::complete_bounded(6, 3);
        let a = adherence(&g, 1).unwrap();
        assert!(a.dcon);
        assert_eq!(a.graph.edge_count(), 20);
        let mut edges: Vec<Vec<usize>> = vec![vec![0, 1, 2], vec![3, 4, 5], vec![0]];
        let g = Hypergraph::bounded(6, 3, std::mem::take(&mut edges)).unwrap();
        let a = adherence(&g, 1).unwrap();
        assert_eq!(a.graph.edges(), &[vec![0, 1, 2]]);
        assert!(!a.dcon);
        let g = Hypergraph::bounded(6, 3, vec![vec![0, 1, 2]]).unwrap();
        assert!(!adherence(&g, 1).unwrap().dcon);
    }

    #[test]
    fn walks() {
        let g = Hypergraph::complete(4, 3);
        let w = walk_between(&g, 1, &[0], &[2], 3usize.pow(4) * 4).unwrap();
        assert!(w.is_valid_in(&g));
        assert!(w.visits(&[0]) && w.visits(&[2]));
        let w = walk_between(&g, 1, &[1], &[1], 100).unwrap();
        assert!(w.is_valid_in(&g));
        let two = Hypergraph::uniform(6, 3, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert!(matches!(walk_between(&two, 1, &[0], &[3], 100), Err(Error::NotFound(_))));
    }

    #[test]
    fn through_vertex() {
        let r = Hypergraph::complete_bounded(5, 3);
        let seq = path_through_vertex(&r, 1, 0, 1_000_000).unwrap();
        assert!([7, 9].contains(&seq.len()));
        assert_eq!(seq.iter().filter(|&&v| v == 0).count(), 1);
        let r = Hypergraph::bounded(7, 3, vec![vec![1, 2, 3], vec![3, 4, 5], vec![0]]).unwrap();
        assert!(matches!(path_through_vertex(&r, 1, 0, 1000), Err(Error::NotFound(_))));
    }
}
