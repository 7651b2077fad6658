use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use socialnet_core::analysis::{anarchy_vs_monarchy, monarchy_matrix};
use socialnet_core::equilibrium::{
    brute_force_social_optimum, enumerate_pne, linear_config, EdgeDecomposition, Method,
};
use socialnet_core::netgame::{induce_graph, make_profile, neighborhood_counts, Shape};
use socialnet_core::{rat, SocialRangeMatrix};

fn enumeration(c: &mut Criterion) {
    let config = linear_config(4, rat(3, 2), 1);
    let f = monarchy_matrix(4).unwrap();
    c.bench_function("exhaustive n=4", |b| {
        b.iter(|| enumerate_pne(black_box(&config), &f, 4, Method::Exhaustive).unwrap())
    });
    c.bench_function("per-pair n=4", |b| {
        b.iter(|| enumerate_pne(black_box(&config), &f, 4, Method::EdgeDecomposition).unwrap())
    });
    let f5 = SocialRangeMatrix::identity(5).unwrap();
    c.bench_function("per-pair count n=5", |b| b.iter(|| EdgeDecomposition::new(black_box(&f5), rat(1, 2)).count()));
    let r2 = linear_config(3, rat(3, 2), 2);
    let id3 = SocialRangeMatrix::identity(3).unwrap();
    c.bench_function("exhaustive n=3 R=2", |b| {
        b.iter(|| enumerate_pne(black_box(&r2), &id3, 4, Method::Exhaustive).unwrap())
    });
}

fn optimum(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimum");
    group.sample_size(10);
    for radius in [1, 2] {
        let config = linear_config(6, rat(3, 2), radius);
        group.bench_function(format!("n=6 R={radius}"), |b| {
            b.iter(|| brute_force_social_optimum(black_box(&config)).unwrap())
        });
    }
    group.bench_function("anarchy vs monarchy n=5", |b| {
        b.iter(|| anarchy_vs_monarchy(5, black_box(rat(3, 2))).unwrap())
    });
    group.finish();
}

fn neighborhoods(c: &mut Criterion) {
    let graph = induce_graph(&make_profile(Shape::Circulant { half_degree: 2 }, 32).unwrap());
    c.bench_function("neighborhoods n=32 R=4", |b| {
        b.iter(|| (0..32).map(|v| neighborhood_counts(black_box(&graph), v, 4).total()).sum::<usize>())
    });
}

criterion_group!(benches, enumeration, optimum, neighborhoods);
criterion_main!(benches);
