use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qcover::antichain::{enumerate_inextendible, generate};
use qcover::coevent::derived_antichain;
use qcover::cover::{decide, scan};
use qcover::measure::{identity_residuals, sample_spd};
use qcover::pks::{search_consistent_coloring, witness_check, PeresStructure};
use qcover::{GeneratorKind, HistorySpace};

fn antichains(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_inextendible");
    for n in [4, 5] {
        let space = HistorySpace::new(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &space, |b, s| {
            b.iter(|| enumerate_inextendible(black_box(*s)).unwrap())
        });
    }
    g.finish();
    c.bench_function("scan/n5", |b| {
        let space = HistorySpace::new(5).unwrap();
        b.iter(|| scan(black_box(space), 1, 5).unwrap())
    });
}

fn span_test(c: &mut Criterion) {
    let mut g = c.benchmark_group("decide");
    for (n, kind) in [
        (8, GeneratorKind::LevelK { k: 3 }),
        (9, GeneratorKind::A1),
        (9, GeneratorKind::A3 { m: 2 }),
    ] {
        let space = HistorySpace::new(n).unwrap();
        let ac = generate(space, kind).unwrap();
        let id = format!("{}/n{n}", kind.name());
        g.bench_function(id, |b| b.iter(|| decide(space, black_box(ac.elements())).unwrap()));
    }
    let space = HistorySpace::new(3).unwrap();
    let non_cover = [space.event(&[1, 2]).unwrap(), space.event(&[2, 3]).unwrap()];
    g.bench_function("witness/n3", |b| {
        b.iter(|| decide(space, black_box(&non_cover)).unwrap())
    });
    g.finish();
}

fn measures(c: &mut Criterion) {
    c.bench_function("sample_spd/n8", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            sample_spd(8, 8, seed, &[], true, 1e-9).unwrap()
        })
    });
    let d = sample_spd(8, 8, 1, &[], true, 1e-9).unwrap();
    c.bench_function("identity_residuals/n8", |b| {
        b.iter(|| identity_residuals(black_box(&d), 1e-9).unwrap())
    });
    let space = HistorySpace::new(8).unwrap();
    let zero = [space.event(&[1, 2]).unwrap(), space.event(&[2, 3, 4]).unwrap()];
    let d = sample_spd(8, 8, 2, &zero, true, 1e-9).unwrap();
    c.bench_function("derived_antichain/n8", |b| {
        b.iter(|| derived_antichain(black_box(&d), 1e-9).unwrap())
    });
}

fn peres(c: &mut Criterion) {
    c.bench_function("pks/structure", |b| b.iter(|| PeresStructure::peres().unwrap()));
    let s = PeresStructure::peres().unwrap();
    c.bench_function("pks/search", |b| {
        b.iter(|| search_consistent_coloring(black_box(&s), s.all_rays_mask()))
    });
    c.bench_function("pks/witness", |b| b.iter(|| witness_check(black_box(&s)).unwrap()));
}

criterion_group!(benches, antichains, span_test, measures, peres);
criterion_main!(benches);
