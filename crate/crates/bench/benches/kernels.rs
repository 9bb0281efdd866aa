use criterion::{black_box, criterion_group, criterion_main, Criterion};
use loomlab_core::alloc::{hamilton_path_allocation, perfect_tiling_allocation, AllocParams, BlowupSpec};
use loomlab_core::cycwalk::{build_cycle, components};
use loomlab_core::framework::{brute_hamilton, space_barrier, HamMode, BRUTE_BUDGET, BRUTE_CAP};
use loomlab_core::lattice::{divisor_cycle, gcd_of_cycle, lattice_complete};
use loomlab_core::squash::expectation_exact;
use loomlab_core::tiling::{frac_tiling, TilingOptions};
use loomlab_core::Hypergraph;

fn search(c: &mut Criterion) {
    let yes = space_barrier(3, 1, 12, 3).unwrap().graph;
    let no = space_barrier(3, 1, 12, 2).unwrap().graph;
    c.bench_function("brute_hamilton/barrier12_found", |b| {
        b.iter(|| brute_hamilton(black_box(&yes), 1, &HamMode::Cycle, BRUTE_CAP, BRUTE_BUDGET).unwrap())
    });
    c.bench_function("brute_hamilton/barrier12_none", |b| {
        b.iter(|| brute_hamilton(black_box(&no), 1, &HamMode::Cycle, BRUTE_CAP, BRUTE_BUDGET).unwrap())
    });
    let k10 = Hypergraph::complete(10, 3);
    c.bench_function("components/K(10,3)", |b| b.iter(|| components(black_box(&k10), 1).unwrap()));
}

fn lp(c: &mut Criterion) {
    let k8 = Hypergraph::complete(8, 3);
    let sb = space_barrier(3, 1, 8, 1).unwrap().graph;
    c.bench_function("frac_tiling/K(8,3)", |b| b.iter(|| frac_tiling(black_box(&k8), 1, &TilingOptions::for_graph(&k8, 1)).unwrap()));
    c.bench_function("frac_tiling/barrier8_dual", |b| b.iter(|| frac_tiling(black_box(&sb), 1, &TilingOptions::for_graph(&sb, 1)).unwrap()));
}

fn lattice(c: &mut Criterion) {
    let edge = Hypergraph::uniform(3, 3, vec![vec![0, 1, 2]]).unwrap();
    let f = divisor_cycle(3, 1).unwrap().cycle;
    c.bench_function("lattice_complete/divisor(3,1)", |b| b.iter(|| lattice_complete(black_box(&f), &edge, 10_000_000).unwrap()));
    let c9 = build_cycle(5, 2, 6).unwrap();
    c.bench_function("gcd_of_cycle/C(5,2,6)", |b| b.iter(|| gcd_of_cycle(black_box(&c9), 10_000_000).unwrap()));
}

fn allocation(c: &mut Criterion) {
    let r = Hypergraph::complete_bounded(5, 3);
    let params = AllocParams::default();
    let spec = BlowupSpec::consecutive(r.clone(), &[31, 30, 30, 30, 30]);
    let (f1, f2) = ([spec.clusters[0][0]], [spec.clusters[2][0]]);
    let mut g = c.benchmark_group("allocation");
    g.sample_size(10);
    g.bench_function("path/5x30", |b| b.iter(|| hamilton_path_allocation(black_box(&spec), 1, &f1, &f2, &params).unwrap()));
    let spec = BlowupSpec::consecutive(r, &[30; 5]);
    g.bench_function("tiling/5x30", |b| b.iter(|| perfect_tiling_allocation(black_box(&spec), 1, &params).unwrap()));
    g.finish();
}

fn squashing(c: &mut Criterion) {
    let k84 = Hypergraph::complete(8, 4);
    c.bench_function("expectation_exact/K(8,4),q=2", |b| b.iter(|| expectation_exact(black_box(&k84), 2).unwrap()));
}

criterion_group!(benches, search, lp, lattice, allocation, squashing);
criterion_main!(benches);
