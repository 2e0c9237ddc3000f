use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussperc_core::sampler::{FieldSampler, Grid, SamplerBudget};
use gaussperc_core::Kernel;

fn bench_sampling(c: &mut Criterion) {
    let kernel = Kernel::cauchy(0.5, 2).unwrap();
    let mut group = c.benchmark_group("field_sampling");
    group.sample_size(10);
    for &half in &[16.0f64, 32.0, 64.0] {
        let grid = Grid::centered_square(half, 0.25).unwrap();
        let sampler = FieldSampler::new(&kernel, &grid, &SamplerBudget::default()).unwrap();
        group.bench_with_input(
            BenchmarkId::new("spectral_draw", grid.len()),
            &sampler,
            |b, s| {
                let mut t = 0u64;
                b.iter(|| {
                    t += 1;
                    s.sample(7, t)
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_sampling);
criterion_main!(benches);
