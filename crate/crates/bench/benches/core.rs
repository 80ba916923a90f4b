use criterion::{black_box, criterion_group, criterion_main, Criterion};
use treeshift_core::fixtures::{self, ExampleDirection};
use treeshift_core::limits::{realize_cict_as_omega_w, realize_ibt_as_omega_fw};
use treeshift_core::orbits::shadow_sft_asymptotic;
use treeshift_core::transitivity::{edge_graph, is_cict, is_ict};
use treeshift_core::words::{Letter, Signature};
use treeshift_core::Dyadic;

fn words(c: &mut Criterion) {
    let sig = Signature::group(2);
    c.bench_function("ball group:2 n=7", |b| b.iter(|| sig.ball(black_box(7)).unwrap().len()));
}

fn shifts(c: &mut Criterion) {
    let sys = fixtures::golden_mean(Signature::group(2));
    c.bench_function("count_points golden-mean group:2 depth 3", |b| {
        b.iter(|| sys.count_points(black_box(3)).unwrap())
    });
}

fn orbits(c: &mut Criterion) {
    let (sys, orbit) = fixtures::asymptotic_counterexample(2, Letter::generator(0), 5).unwrap();
    c.bench_function("shadow_sft_asymptotic counterexample", |b| {
        b.iter(|| shadow_sft_asymptotic(&orbit, &sys, 4).unwrap())
    });
}

fn transitivity(c: &mut Criterion) {
    let y = fixtures::ict_not_cict(ExampleDirection::Corrected);
    let eps = Dyadic::pow2_neg(3);
    c.bench_function("edge_graph ict-not-cict D=5", |b| {
        b.iter(|| edge_graph(&y, eps, 5).unwrap())
    });
    c.bench_function("is_ict ict-not-cict D=5", |b| b.iter(|| is_ict(&y, eps, 5).unwrap()));
    c.bench_function("is_cict ict-not-cict D=5", |b| b.iter(|| is_cict(&y, eps, 5).unwrap()));
}

fn limits(c: &mut Criterion) {
    let g2 = Signature::group(2);
    let y = fixtures::parity_pair(g2);
    let sys = fixtures::golden_mean(g2);
    let mut group = c.benchmark_group("realize");
    group.sample_size(10);
    group.bench_function("cict parity pair k=3", |b| {
        b.iter(|| realize_cict_as_omega_w(&y, &sys, 3).unwrap())
    });
    group.bench_function("ibt parity pair k=3", |b| {
        b.iter(|| realize_ibt_as_omega_fw(&y, &sys, 3, None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, words, shifts, orbits, transitivity, limits);
criterion_main!(benches);
