use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fastjacobi::jacobi_ref::JacobiParams;
use fastjacobi::phasefn::PhaseExpansion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn construction(c: &mut Criterion) {
    let params = JacobiParams::new(-0.25, 1.0 / 3.0).unwrap();
    let mut g = c.benchmark_group("phase_construction");
    g.sample_size(10);
    for nmax in [1_000usize, 10_000, 100_000, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(nmax), &nmax, |b, &n| b.iter(|| PhaseExpansion::build(&params, n).unwrap()));
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let params = JacobiParams::new(-0.25, 1.0 / 3.0).unwrap();
    let mut g = c.benchmark_group("phase_eval");
    for nmax in [1usize << 10, 1 << 20] {
        let exp = PhaseExpansion::build(&params, nmax).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (lo, hi) = (exp.tgrid().lo(), exp.tgrid().hi());
        let pts: Vec<(f64, f64)> = (0..1000).map(|_| (rng.random_range(lo..hi), rng.random_range(27.0..nmax as f64))).collect();
        g.bench_with_input(BenchmarkId::from_parameter(nmax), &pts, |b, pts| {
            b.iter(|| pts.iter().map(|&(t, v)| exp.eval_ptilde(black_box(t), v).unwrap()).sum::<f64>())
        });
    }
    g.finish();
}

criterion_group!(benches, construction, evaluation);
criterion_main!(benches);
