use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussperc_core::percolation::{detect_event, excursion_components, EventKind};
use gaussperc_core::sampler::{sample_field, Grid};
use gaussperc_core::Kernel;

fn bench_labeling(c: &mut Criterion) {
    let kernel = Kernel::cauchy(1.0, 2).unwrap();
    let mut group = c.benchmark_group("labeling");
    for &half in &[8.0f64, 16.0, 32.0] {
        let grid = Grid::centered_square(half, 0.25).unwrap();
        let field = sample_field(&kernel, &grid, 4242).unwrap();
        group.bench_with_input(
            BenchmarkId::new("excursion_components", grid.len()),
            &field,
            |b, f| b.iter(|| excursion_components(f, 0.0)),
        );
        let lab = excursion_components(&field, 0.0);
        let kind = EventKind::Arm { r_in: 0.0, r_out: half };
        group.bench_with_input(BenchmarkId::new("detect_arm", grid.len()), &lab, |b, l| {
            b.iter(|| detect_event(l, &kind).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_labeling);
criterion_main!(benches);
