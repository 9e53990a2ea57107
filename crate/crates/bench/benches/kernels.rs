use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kpzlab::geometry::green;
use kpzlab::gff::{sample_spectral_gff, CircleKernel, DgffSampler, GridKernel, LatticeSampler};
use kpzlab::kpz::{first_passage_many, quantum_ball, FractalSet};
use kpzlab::liouville::GridMeasure;
use kpzlab::{DomainSpec, Point, StreamSeed};

fn green_square(c: &mut Criterion) {
    let sq = DomainSpec::unit_square();
    let (x, y) = (Point::new(0.3, 0.4), Point::new(0.31, 0.42));
    c.bench_function("green/square", |b| b.iter(|| green(&sq, black_box(x), black_box(y))));
}

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    for m in [64usize, 256] {
        g.bench_with_input(BenchmarkId::new("sample", m), &m, |b, &m| {
            b.iter(|| sample_spectral_gff(m, StreamSeed::new(1, 0)).unwrap())
        });
        let f = sample_spectral_gff(m, StreamSeed::new(1, 0)).unwrap();
        let k = GridKernel::new(m, 64, 1.0 / 64.0).unwrap();
        g.bench_with_input(BenchmarkId::new("grid-64", m), &m, |b, _| b.iter(|| k.apply(&f)));
        let ck = CircleKernel::new(m, Point::new(0.5, 0.5), 0.05).unwrap();
        g.bench_with_input(BenchmarkId::new("circle", m), &m, |b, _| b.iter(|| ck.apply(&f)));
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let s = LatticeSampler::cell_centres(512, 128, &[1.0 / 128.0]).unwrap();
    let mut stream = 0u64;
    c.bench_function("lattice/sample+grid-128", |b| {
        b.iter(|| {
            stream += 1;
            let x = s.sample(StreamSeed::new(2, stream));
            s.grid(&x, 0, 128).unwrap()
        })
    });
}

fn dgff(c: &mut Criterion) {
    let s = DgffSampler::new(64).unwrap();
    c.bench_function("dgff/sample-64", |b| b.iter(|| s.sample(StreamSeed::new(3, 0))));
}

fn balls(c: &mut Criterion) {
    let s = LatticeSampler::cell_centres(512, 128, &[1.0 / 128.0]).unwrap();
    let h = s.grid(&s.sample(StreamSeed::new(4, 0)), 0, 128).unwrap();
    let m = GridMeasure::from_circle_averages(&h, 1.0, 1.0 / 128.0).unwrap();
    let z = Point::new(0.4, 0.55);
    c.bench_function("quantum-ball/128", |b| b.iter(|| quantum_ball(&m, black_box(z), 1e-3).unwrap()));
    let set = FractalSet::cantor_dust(5);
    c.bench_function("fractal/distance", |b| b.iter(|| set.distance(black_box(z))));
}

fn passage(c: &mut Criterion) {
    let mut g = c.benchmark_group("first-passage");
    g.sample_size(10);
    g.bench_function("1e3-paths", |b| {
        b.iter(|| first_passage_many(1.0, &[0.25, 0.5, 1.0], 0.1, 1000, 1e-3, 5).unwrap())
    });
    g.finish();
}

criterion_group!(benches, green_square, spectral, lattice, dgff, balls, passage);
criterion_main!(benches);
