mod common;

use std::collections::BTreeMap;

use loomlab_core::alloc::{
    perfect_tiling_allocation, reverse_cycle, splice_cycle, window_key, AllocParams, BlowupSpec,
};
use loomlab_core::cycwalk::{build_cycle, build_path, lambda, min_cycle_edges};
use loomlab_core::framework::thresholds;
use loomlab_core::hcore::{induced, min_degree, shadow, BlowUp, Partition};
use loomlab_core::lattice::{lattice_of, Hnf, Verdict};
use loomlab_core::rational::q;
use loomlab_core::squash::{closed_form, expectation_exact, squash, BlockPartition};
use loomlab_core::{CyclePath, Hypergraph, Kind};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kl() -> impl Strategy<Value = (usize, usize)> {
    (3usize..=7).prop_flat_map(|k| (Just(k), 1..k))
}

fn graph(n: std::ops::RangeInclusive<usize>, k: usize) -> impl Strategy<Value = Hypergraph> {
    n.prop_flat_map(move |n| {
        let all: Vec<Vec<usize>> = common::combinations(&(0..n).collect::<Vec<_>>(), k);
        let m = all.len();
        (Just(n), Just(all), proptest::collection::vec(any::<bool>(), m))
    })
    .prop_map(move |(n, all, keep)| {
        let edges = all.into_iter().zip(keep).filter(|(_, b)| *b).map(|(e, _)| e).collect();
        Hypergraph::uniform(n, k, edges).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cycle_windows_overlap_in_l((k, l) in kl(), extra in 0usize..4) {
        let t = min_cycle_edges(k, l) + extra;
        let c = build_cycle(k, l, t).unwrap();
        let w = c.windows();
        prop_assert_eq!(w.len(), t);
        for i in 0..t {
            let a = &w[i];
            let b = &w[(i + 1) % t];
            prop_assert_eq!(a.iter().filter(|v| b.contains(v)).count(), l);
        }
        let p = build_path(k, l, t).unwrap();
        prop_assert_eq!(p.order(), k + (t - 1) * (k - l));
        prop_assert!(p.windows().first().unwrap().iter().all(|v| !p.windows().last().unwrap().contains(v)));
    }

    #[test]
    fn reversal_is_a_cycle_and_an_involution((k, l) in kl(), extra in 0usize..3) {
        let c = build_cycle(k, l, min_cycle_edges(k, l) + extra).unwrap();
        let r = reverse_cycle(&c);
        r.validate().unwrap();
        prop_assert_eq!(reverse_cycle(&r).verts, c.verts.clone());
        let g = Hypergraph::uniform(c.order(), k, c.windows().into_iter().map(|mut w| { w.sort_unstable(); w }).collect()).unwrap();
        prop_assert!(r.validate_in(&g).is_ok());
    }

    #[test]
    fn min_degree_matches_counting(g in graph(4..=7, 3), d in 1usize..3) {
        let rep = min_degree(&g, d).unwrap();
        let sets = common::combinations(&(0..g.n()).collect::<Vec<_>>(), d);
        let brute = sets.iter().map(|s| g.edges().iter().filter(|e| s.iter().all(|v| e.contains(v))).count()).min().unwrap();
        prop_assert_eq!(rep.min_deg as usize, brute);
    }

    #[test]
    fn shadow_and_induced(g in graph(4..=7, 3), pick in proptest::collection::vec(any::<bool>(), 7)) {
        let sh = shadow(&g, 2).unwrap();
        for e in g.edges() {
            for p in common::combinations(e, 2) {
                prop_assert!(sh.contains_edge(&p));
            }
        }
        let s: Vec<usize> = (0..g.n()).filter(|&v| pick[v]).collect();
        let h = induced(&g, &s);
        let inside = g.edges().iter().filter(|e| e.iter().all(|v| s.contains(v))).count();
        prop_assert_eq!(h.edge_count(), inside);
        prop_assert_eq!(Hypergraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn hnf_matches_minor_gcd(cols in proptest::collection::vec(proptest::collection::vec(0u32..6, 3), 3..6), m in 1usize..6) {
        // shift the last coordinate so every column sum is ≡ 0 mod m
        let cols: Vec<Vec<u32>> = cols.into_iter().map(|mut c| {
            let s: u32 = c.iter().sum();
            c[2] += (m as u32 - s % m as u32) % m as u32;
            c
        }).collect();
        let lb = lattice_of(3, cols.clone(), m);
        let idx = common::lattice_index(3, &cols);
        prop_assert_eq!(lb.verdict == Verdict::Complete, idx == BigInt::from(m));
    }

    #[test]
    fn hnf_solutions_reproduce_the_target(cols in proptest::collection::vec(proptest::collection::vec(-4i64..5, 3), 1..5), x in proptest::collection::vec(-3i64..4, 5)) {
        let big: Vec<Vec<BigInt>> = cols.iter().map(|c| c.iter().map(|&v| BigInt::from(v)).collect()).collect();
        let b: Vec<BigInt> = (0..3).map(|i| (0..cols.len()).fold(BigInt::zero(), |a, j| a + BigInt::from(cols[j][i] * x[j]))).collect();
        let h = Hnf::new(3, &big, true);
        prop_assert!(h.contains(&b));
        let y = h.solve(&b).unwrap();
        let back: Vec<BigInt> = (0..3).map(|i| (0..cols.len()).fold(BigInt::zero(), |a, j| a + &y[j] * &big[j][i])).collect();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn squash_expectation_closed_form(g in graph(4..=8, 4).prop_filter("even order", |g| g.n() % 2 == 0)) {
        let r = expectation_exact(&g, 2).unwrap();
        prop_assert_eq!(&r.exact, &closed_form(&g, 2));
    }

    #[test]
    fn squash_of_complete_is_complete(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = BlockPartition::random(2, 5, &mut rng);
        prop_assert_eq!(squash(&Hypergraph::complete(10, 4), &p).unwrap(), Hypergraph::complete(5, 2));
    }

    #[test]
    fn splice_keeps_endtuples_and_adds_the_cycle(t in 3usize..6, extra in 0usize..3, site in 0usize..8) {
        // a path and a cycle in K(n,3), spliced at an interior site
        let (k, l) = (3, 1);
        let p = build_path(k, l, t).unwrap();
        let c0 = build_cycle(k, l, min_cycle_edges(k, l) + extra).unwrap();
        let off = p.order();
        let c = CyclePath { verts: c0.verts.iter().map(|v| v + off).collect(), ..c0 };
        let g = Hypergraph::complete(off + c.order(), k);
        let site = 1 + site % (p.edge_count() - 1);
        let out = splice_cycle(&p, &c, site, &g).unwrap();
        prop_assert_eq!(out.order(), p.order() + c.order());
        prop_assert_eq!(out.first_tuple(), p.first_tuple());
        prop_assert_eq!(out.last_tuple(), p.last_tuple());
        prop_assert_eq!(out.kind, Kind::Path);
        out.validate_in(&g).unwrap();
    }

    #[test]
    fn window_keys_ignore_order_inside_blocks(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        // k=5, ℓ=2: blocks are positions 0..3 and 3..5
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<usize> = vec![10, 11, 12, 13, 14];
        let mut v = w.clone();
        v[..3].shuffle(&mut rng);
        v[3..].shuffle(&mut rng);
        prop_assert_eq!(window_key(&v, 5, 2), window_key(&w, 5, 2));
        let mut x = w.clone();
        x.swap(2, 3);
        prop_assert_ne!(window_key(&x, 5, 2), window_key(&w, 5, 2));
    }
}

#[test]
fn thresholds_invariants_up_to_twelve() {
    for k in 3..=12usize {
        for l in 1..=k - 2 {
            let s = k - l;
            let t = thresholds(k, l).unwrap();
            assert_eq!(t.lambda, q(1, (k.div_ceil(s) * s) as i64), "λ({k},{l})");
            assert_eq!(t.lambda, lambda(k, l));
            let applicable = k % s != 0;
            assert_eq!(t.delta_codegree.is_some(), applicable);
            if applicable {
                // ⌈k/s⌉s > k
                assert!(t.lambda < q(1, k as i64));
                let d = t.delta_k_minus_2.unwrap();
                assert!(d >= t.lambda && d < q(1, 1));
                if l == k - 2 {
                    assert!(d >= q(1, 4));
                }
            } else {
                assert_eq!(t.lambda, q(1, k as i64));
            }
        }
    }
}

#[test]
fn tiling_lengths_match_cycles() {
    let r = Hypergraph::complete_bounded(5, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let spec = common::random_blowup(r.clone(), 30, 2, 0, false, &mut rng);
        let t = perfect_tiling_allocation(&spec, 1, &AllocParams::default()).unwrap();
        let mut hist = BTreeMap::new();
        for c in &t.cycles {
            *hist.entry(c.order()).or_insert(0) += 1;
        }
        assert_eq!(hist, t.lengths);
        common::check_tiling(&spec, &t.cycles).unwrap();
        // the oracle agrees with the library's blow-up test
        let part = Partition { clusters: spec.clusters.clone() };
        let bu = BlowUp::new(&spec.r, &part);
        for c in &t.cycles {
            for w in c.windows() {
                assert_eq!(bu.contains_edge(&w), common::blowup_edge(&spec, &w));
            }
        }
    }
}

#[test]
fn blowup_specs_reject_overlap() {
    let r = Hypergraph::complete_bounded(3, 3);
    let bad = BlowupSpec::new(r, vec![vec![0, 1], vec![1, 2], vec![3]]);
    assert!(bad.validate().is_err());
}

#[test]
fn k_minus_2_comparison_matches_lambda_bound() {
    for k in 3..=12i64 {
        for l in 1..=k - 2 {
            let lam = lambda(k as usize, l as usize);
            let one = q(1, 1);
            let c = &one - &lam;
            let lhs = &one - &c * &c;
            let mid = &lam + &c / q(k - 1, 1);
            let rhs = &mid * &mid;
            assert_eq!(lhs > rhs, lam >= q(1, 2 * k * k - 6 * k + 5), "k={k}, ℓ={l}");
        }
    }
}
