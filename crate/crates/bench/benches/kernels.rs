use criterion::{black_box, criterion_group, criterion_main, Criterion};

use symcover::backbone::{BackboneState, SweepOptions};
use symcover::dominance::{get_dominated, refine};
use symcover::graph::pair_count;
use symcover::pattern::compile_all;
use symcover::setcover::{build_matrix, BuildOptions};
use symcover::{Graph, PatternSet};
use symcover_bench::nontrivial_perms;

fn cover_tests(c: &mut Criterion) {
    let perms = compile_all(&nontrivial_perms(5));
    let graphs: Vec<Graph> = (0..1u64 << pair_count(5))
        .map(|w| Graph::from_word(5, w))
        .collect();
    c.bench_function("makes_smaller/S5 x all graphs", |b| {
        b.iter(|| {
            graphs
                .iter()
                .filter(|&&g| perms.iter().any(|p| p.covers(g)))
                .count()
        })
    });
    let sets: Vec<PatternSet> = nontrivial_perms(5).iter().map(PatternSet::of).collect();
    c.bench_function("pattern matches/S5 x all graphs", |b| {
        b.iter(|| {
            graphs
                .iter()
                .filter(|&&g| sets.iter().any(|s| s.covers(g)))
                .count()
        })
    });
}

fn dominance(c: &mut Criterion) {
    let s5 = nontrivial_perms(5);
    c.bench_function("get_dominated/one vs S5", |b| {
        b.iter(|| get_dominated(black_box(&s5[..1]), &s5[1..]).unwrap())
    });
    let s6 = nontrivial_perms(6);
    let mut group = c.benchmark_group("refine");
    group.sample_size(10);
    group.bench_function("S6", |b| b.iter(|| refine(black_box(&s6), &[]).unwrap()));
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("order 6", |b| {
        b.iter(|| {
            let mut state = BackboneState::new(6, SweepOptions::default()).unwrap();
            state.sweep(|_, _| {}).unwrap();
            state.beta().len()
        })
    });
    group.finish();
}

fn set_cover(c: &mut Criterion) {
    let matrix = build_matrix(&nontrivial_perms(5), &[], BuildOptions::default()).unwrap();
    c.bench_function("reduce/S5 matrix", |b| {
        b.iter(|| black_box(&matrix).reduce())
    });
    c.bench_function("build_matrix/S5", |b| {
        b.iter(|| build_matrix(&nontrivial_perms(5), &[], BuildOptions::default()).unwrap())
    });
}

criterion_group!(benches, cover_tests, dominance, sweep, set_cover);
criterion_main!(benches);
