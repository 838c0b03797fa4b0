use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use pmod_core::generate::inflated_module;
use pmod_core::thin::decompose;
use pmod_core::{
    chamber_poset, condense, detect_isotopy_subdivision, end_dim, random_thin_module, sample, FieldSpec, GridShape, Matrix,
};

fn rref(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    for (name, f) in [("gf5", FieldSpec::Prime(5)), ("rational", FieldSpec::Rational)] {
        let m: Matrix = sample::matrix(f, 40, 40, 0.3, &mut sample::rng(1));
        g.bench_function(BenchmarkId::new(name, 40), |b| b.iter(|| black_box(&m).rank()));
    }
    g.finish();
}

fn hom(c: &mut Criterion) {
    let mut g = c.benchmark_group("end_dim_thin");
    for n in [4usize, 8, 12] {
        let m = random_thin_module(FieldSpec::Prime(5), GridShape::new(&[n, n]).unwrap(), 0.7, 3).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| end_dim(m)));
    }
    g.finish();
}

fn condensation(c: &mut Criterion) {
    let mut g = c.benchmark_group("detect_and_condense");
    for n in [6usize, 12] {
        let shape = GridShape::new(&[n, n]).unwrap();
        let m = inflated_module(FieldSpec::Prime(7), &shape, 9, 3, true, 5).unwrap().module;
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| {
                let s = detect_isotopy_subdivision(m).unwrap();
                let p = chamber_poset(&s).unwrap();
                condense(m, &s, &p).unwrap()
            })
        });
    }
    g.finish();
}

fn thin(c: &mut Criterion) {
    let m = random_thin_module(FieldSpec::Prime(5), GridShape::new(&[8, 8]).unwrap(), 0.7, 11).unwrap();
    c.bench_function("thin_decompose_8x8", |b| b.iter(|| decompose(black_box(&m), 100, 0).unwrap()));
}

criterion_group!(benches, rref, hom, condensation, thin);
criterion_main!(benches);
