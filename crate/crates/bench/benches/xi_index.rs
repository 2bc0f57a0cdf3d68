use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relindex_bench::{operator, DIMS};
use relindex_core::xi::xi_index;
use relindex_core::{Ensemble, XiOptions, XiStrategy};

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("xi_index");
    for n in DIMS {
        let a = operator(Ensemble::HermitianGaussian, n);
        let m = operator(Ensemble::Dissipative, n);
        for (label, s) in [
            ("spectral", XiStrategy::SelfAdjointSpectral),
            ("log", XiStrategy::InvertibleLog),
            ("eps_limit", XiStrategy::EpsLimit),
        ] {
            let opts = XiOptions::fixed(s);
            // The spectral route needs both arguments self-adjoint.
            let target = if s == XiStrategy::SelfAdjointSpectral { a.shift((1.0).into()) } else { m.clone() };
            g.bench_with_input(BenchmarkId::new(label, n), &target, |b, t| {
                b.iter(|| xi_index(&a, t, &opts).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
