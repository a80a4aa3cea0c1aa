use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fastjacobi::jacobi_ref::JacobiParams;
use fastjacobi::jactransform::TransformPlan;
use fastjacobi::phasefn::PhaseExpansion;

fn forward(c: &mut Criterion) {
    let params = JacobiParams::new(-0.25, 0.0).unwrap();
    let mut g = c.benchmark_group("transform_forward");
    g.sample_size(10);
    for n in [1usize << 10, 1 << 14, 1 << 18] {
        let exp = PhaseExpansion::build(&params, n).unwrap();
        let plan = TransformPlan::new(&exp, n, 1e-12).unwrap();
        let alpha: Vec<f64> = (0..n).map(|k| 1.0 / (k + 1) as f64).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &alpha, |b, a| b.iter(|| plan.forward(a).unwrap()));
    }
    g.finish();
}

fn plan(c: &mut Criterion) {
    let params = JacobiParams::new(-0.25, 0.0).unwrap();
    let mut g = c.benchmark_group("transform_plan");
    g.sample_size(10);
    for n in [1usize << 10, 1 << 14] {
        let exp = PhaseExpansion::build(&params, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| TransformPlan::new(&exp, n, 1e-12).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, forward, plan);
criterion_main!(benches);
