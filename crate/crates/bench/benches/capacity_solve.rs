use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussperc_core::capacity::{capacity, DiscretizedDomain, SolveOptions};
use gaussperc_core::Kernel;

fn bench_capacity(c: &mut Criterion) {
    let mut group = c.benchmark_group("capacity");
    group.sample_size(10);
    let riesz = Kernel::riesz(0.5, 2).unwrap();
    for &n in &[128usize, 512] {
        group.bench_with_input(BenchmarkId::new("riesz_segment", n), &n, |b, &n| {
            b.iter(|| {
                let d = DiscretizedDomain::segment(1.0, 1.0 / n as f64).unwrap();
                capacity(
                    d,
                    &riesz,
                    &SolveOptions { tol: 1e-6, max_iter: Some(4000 * n) },
                )
                .unwrap()
            })
        });
    }
    let cauchy = Kernel::cauchy(0.5, 2).unwrap();
    group.bench_function("cauchy_segment_64", |b| {
        b.iter(|| {
            let d = DiscretizedDomain::segment(64.0, 0.25).unwrap();
            capacity(
                d,
                &cauchy,
                &SolveOptions { tol: 1e-6, max_iter: Some(4_000_000) },
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_capacity);
criterion_main!(benches);
