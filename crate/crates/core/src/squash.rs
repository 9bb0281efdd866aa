//! Squashing a qk-graph along a partition into q-blocks.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hcore::{self, Hypergraph};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub q: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(q: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if q == 0 {
            return invalid("block size must be positive");
        }
        let total = q * blocks.len();
        let mut seen = vec![false; total];
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != q {
                return invalid(format!("block {i} has {} vertices, expected {q}", b.len()));
            }
            for &v in b {
                if v >= total || seen[v] {
                    return invalid(format!("block {i}: vertex {v} out of range or repeated"));
                }
                seen[v] = true;
            }
        }
        Ok(BlockPartition { q, blocks })
    }

    /// Consecutive q-blocks of a permutation.
    pub fn from_permutation(q: usize, perm: &[usize]) -> Result<Self> {
        if q == 0 || perm.len() % q != 0 {
            return invalid(format!("{} vertices do not split into {q}-blocks", perm.len()));
        }
        BlockPartition::new(q, perm.chunks(q).map(|c| c.to_vec()).collect())
    }

    pub fn random(q: usize, n_blocks: usize, rng: &mut impl rand::Rng) -> Self {
        let mut perm: Vec<usize> = (0..q * n_blocks).collect();
        perm.shuffle(rng);
        BlockPartition::from_permutation(q, &perm).expect("a permutation splits cleanly")
    }

    fn owner(&self) -> Vec<usize> {
        let mut o = vec![0; self.q * self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                o[v] = i;
            }
        }
        o
    }
}

/// `H_Q`: a k-set of blocks is an edge when its union is an edge of H.
pub fn squash(h: &Hypergraph, p: &BlockPartition) -> Result<Hypergraph> {
    let q = p.q;
    if h.is_bounded() || h.k() % q != 0 {
        return invalid(format!("H must be uniform with uniformity divisible by q={q}"));
    }
    if h.n() != q * p.blocks.len() {
        return invalid(format!("partition covers {} vertices, H has {}", q * p.blocks.len(), h.n()));
    }
    let owner = p.owner();
    let mut edges = Vec::new();
    let mut cnt = vec![0usize; p.blocks.len()];
    for e in h.edges() {
        let mut bl: Vec<usize> = e.iter().map(|&v| owner[v]).collect();
        bl.iter().for_each(|&b| cnt[b] += 1);
        bl.sort_unstable();
        bl.dedup();
        if bl.iter().all(|&b| cnt[b] == q) {
            edges.push(bl.clone());
        }
        bl.iter().for_each(|&b| cnt[b] = 0);
    }
    edges.sort();
    Hypergraph::uniform(p.blocks.len(), h.k() / q, edges)
}

/// Calls `f` on every partition of `0..m` into q-blocks.
pub fn for_each_partition(m: usize, q: usize, mut f: impl FnMut(&BlockPartition)) {
    fn rec(free: &mut Vec<usize>, q: usize, cur: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&BlockPartition)) {
        if free.is_empty() {
            f(&BlockPartition { q, blocks: cur.clone() });
            return;
        }
        let first = free.remove(0);
        let rest = free.clone();
        for others in itertools::Itertools::combinations(rest.iter().copied(), q - 1) {
            let mut block = vec![first];
            block.extend(&others);
            free.retain(|v| !others.contains(v));
            cur.push(block);
            rec(free, q, cur, f);
            cur.pop();
            *free = rest.clone();
        }
        free.insert(0, first);
    }
    if q == 0 || m % q != 0 {
        return;
    }
    let mut free: Vec<usize> = (0..m).collect();
    rec(&mut free, q, &mut vec![], &mut f);
}

/// (qn)! / (q!^n n!).
pub fn partition_count(n: usize, q: usize) -> BigInt {
    let fact = |x: usize| (1..=x).fold(BigInt::from(1), |a, i| a * i);
    fact(q * n) / (fact(q).pow(n as u32) * fact(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationReport {
    #[serde(with = "rational")]
    pub exact: Q,
    /// C(n,k)·|H| / C(qn,qk).
    #[serde(with = "rational")]
    pub closed_form: Q,
    pub partitions: u64,
}

pub const EXACT_CAP: usize = 12;

/// Average of |H_Q| over every partition into q-blocks.
pub fn expectation_exact(h: &Hypergraph, q: usize) -> Result<ExpectationReport> {
    if h.n() > EXACT_CAP {
        return Err(Error::BudgetExceeded(format!("qn={} exceeds the exhaustive cap {EXACT_CAP}", h.n())));
    }
    if q == 0 || h.n() % q != 0 || h.k() % q != 0 {
        return invalid(format!("q={q} must divide both v(H)={} and the uniformity {}", h.n(), h.k()));
    }
    let n = h.n() / q;
    let mut total = BigInt::zero();
    let mut count = 0u64;
    let mut err = None;
    for_each_partition(h.n(), q, |p| match squash(h, p) {
        Ok(s) => {
            total += s.edge_count();
            count += 1;
        }
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    debug_assert_eq!(BigInt::from(count), partition_count(n, q));
    let exact = Q::new(total, BigInt::from(count));
    let closed_form = closed_form(h, q);
    Ok(ExpectationReport { exact, closed_form, partitions: count })
}

pub fn closed_form(h: &Hypergraph, q: usize) -> Q {
    let (n, k) = (h.n() / q, h.k() / q);
    Q::new(rational::binom(n, k) * h.edge_count(), rational::binom(h.n(), h.k()))
}

/// Per-trial RNG: stream `trial` of the seed, so trials are independent of order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub trials: u64,
    pub violations: u64,
    /// Empirical violation frequency (float, Monte Carlo).
    pub frequency: f64,
    /// 2·exp(−ε²n/(16q)).
    pub bound: f64,
    /// Threshold C(n,k)/C(qn,qk)·|H| − εn^k.
    pub threshold: f64,
    pub mean: f64,
    pub sizes: Vec<usize>,
}

impl ConcentrationReport {
    pub fn consistent(&self) -> bool {
        self.frequency <= self.bound
    }
}

pub fn concentration_experiment(h: &Hypergraph, q: usize, eps: f64, trials: u64, seed: u64) -> Result<ConcentrationReport> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if q == 0 || h.n() % q != 0 || h.k() % q != 0 {
        return invalid(format!("q={q} must divide both v(H) and the uniformity"));
    }
    let (n, k) = (h.n() / q, h.k() / q);
    let expected = rational::to_f64(&closed_form(h, q));
    let threshold = expected - eps * (n as f64).powi(k as i32);
    let mut sizes = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let p = BlockPartition::random(q, n, &mut trial_rng(seed, t));
        sizes.push(squash(h, &p)?.edge_count());
    }
    let violations = sizes.iter().filter(|&&s| (s as f64) < threshold).count() as u64;
    let mean = sizes.iter().sum::<usize>() as f64 / trials as f64;
    Ok(ConcentrationReport {
        trials,
        violations,
        frequency: violations as f64 / trials as f64,
        bound: 2.0 * (-eps * eps * n as f64 / (16.0 * q as f64)).exp(),
        threshold,
        mean,
        sizes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeReportSummary {
    /// Minimum qd-degree ratio of H (exact).
    #[serde(with = "rational")]
    pub rho: Q,
    /// Minimum d-degree ratio of each squash (floats, Monte Carlo).
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    /// Fraction of trials with ratio ≥ ρ − ε.
    pub within: f64,
}

pub fn degree_preservation_experiment(
    h: &Hypergraph,
    q: usize,
    d: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<DegreeReportSummary> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if q == 0 || h.n() % q != 0 || h.k() % q != 0 {
        return invalid(format!("q={q} must divide both v(H) and the uniformity"));
    }
    let (n, k) = (h.n() / q, h.k() / q);
    if d == 0 || d >= k {
        return invalid(format!("d={d} must lie in 1..{k}"));
    }
    let rho = hcore::min_degree(h, q * d)?.ratio;
    let rf = rational::to_f64(&rho);
    let mut ratios = Vec::new();
    for t in 0..trials {
        let p = BlockPartition::random(q, n, &mut trial_rng(seed, t));
        let r = hcore::min_degree(&squash(h, &p)?, d)?.ratio;
        ratios.push(r.to_f64().unwrap_or(0.0));
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_ratio = ratios.iter().sum::<f64>() / trials as f64;
    let within = ratios.iter().filter(|&&r| r >= rf - eps).count() as f64 / trials as f64;
    Ok(DegreeReportSummary { rho, ratios, min_ratio, mean_ratio, within })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q as rq;

    #[test]
    fn squash_examples() {
        let h = Hypergraph::uniform(6, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let p = BlockPartition::new(2, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(squash(&h, &p).unwrap().edges(), &[vec![0, 1]]);
        let p = BlockPartition::new(2, vec![vec![0, 2], vec![1, 4], vec![3, 5]]).unwrap();
        assert_eq!(squash(&h, &p).unwrap().edge_count(), 0);
        let c = Hypergraph::complete(6, 4);
        assert_eq!(squash(&c, &p).unwrap(), Hypergraph::complete(3, 2));
    }

    #[test]
    fn expectation_single_edge() {
        let h = Hypergraph::uniform(6, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        let r = expectation_exact(&h, 2).unwrap();
        assert_eq!(r.partitions, 15);
        assert_eq!(r.exact, rq(1, 5));
        assert_eq!(r.closed_form, rq(1, 5));
        assert_eq!(partition_count(3, 2), BigInt::from(15));
    }

    #[test]
    fn trials_zero_rejected() {
        let h = Hypergraph::complete(8, 4);
        assert!(concentration_experiment(&h, 2, 0.1, 0, 1).is_err());
        let r = degree_preservation_experiment(&h, 2, 1, 0.1, 5, 1).unwrap();
        assert_eq!(r.min_ratio, 1.0);
    }
}
