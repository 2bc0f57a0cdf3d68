use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relindex_bench::{bs_instance, DIMS};
use relindex_core::bschwinger::verify_bs;

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_bs");
    for n in DIMS {
        let inst = bs_instance(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| verify_bs(inst).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
