use criterion::{black_box, criterion_group, criterion_main, Criterion};

use corrthresh::faithfulness::{one_point_construction, solve_finite, ThresholdSet};
use corrthresh::gegenbauer::SphereContext;
use corrthresh::linalg::random_gram;
use corrthresh::thresholding::entrywise_values;

fn bench_entrywise(c: &mut Criterion) {
    let ctx = SphereContext::new(3).unwrap();
    let series = one_point_construction(ctx, 0.1).unwrap().optimizer;
    // a higher-degree optimizer exercises the Clenshaw loop harder
    let set = ThresholdSet::finite(vec![-0.1, 0.1]).unwrap();
    let lp_series = solve_finite(ctx, &set, None).unwrap().optimizer;

    let mut group = c.benchmark_group("entrywise_apply");
    for &size in &[50usize, 150, 300] {
        let m = random_gram(ctx, size, 7).unwrap();
        group.bench_function(format!("parallel/{size}/deg2"), |b| {
            b.iter(|| entrywise_values(black_box(&series), m.base(), true).unwrap())
        });
        group.bench_function(format!("sequential/{size}/deg2"), |b| {
            b.iter(|| entrywise_values(black_box(&series), m.base(), false).unwrap())
        });
        group.bench_function(format!("parallel/{size}/lp-optimizer"), |b| {
            b.iter(|| entrywise_values(black_box(&lp_series), m.base(), true).unwrap())
        });
        group.bench_function(format!("sequential/{size}/lp-optimizer"), |b| {
            b.iter(|| entrywise_values(black_box(&lp_series), m.base(), false).unwrap())
        });
    }
    group.finish();
}

fn bench_eigen(c: &mut Criterion) {
    let ctx = SphereContext::new(4).unwrap();
    let m = random_gram(ctx, 100, 3).unwrap();
    c.bench_function("jacobi_eigen_100", |b| {
        b.iter(|| m.base().sym_eigen(false).unwrap())
    });
}

criterion_group!(benches, bench_entrywise, bench_eigen);
criterion_main!(benches);
