use criterion::{criterion_group, criterion_main, Criterion};
use oxiscreen::desat::{detect_hard, RelativeDetector};
use oxiscreen::dynamics::{approx_entropy, sample_entropy};
use oxiscreen::learn::{LogisticModel, LrHyper, RandomForest, RfHyper};
use oxiscreen::signal::median_smooth;
use oxiscreen::{pipeline, ModelKind, Tiling};
use oxiscreen_bench::{blobs, clean_night, cohort, osa_night};
use std::hint::black_box;

fn signal(c: &mut Criterion) {
    let raw = osa_night(8.0, 1);
    c.bench_function("median_filter_8h", |b| {
        b.iter(|| median_smooth(black_box(&raw), 9).unwrap())
    });
    let x = clean_night(8.0, 1);
    c.bench_function("relative_detector_8h", |b| {
        b.iter(|| RelativeDetector::default().detect(black_box(&x), 1.0))
    });
    c.bench_function("hard_detector_8h", |b| b.iter(|| detect_hard(black_box(&x), 1.0, None)));
}

fn entropy(c: &mut Criterion) {
    let x = clean_night(2.0, 2);
    let mut g = c.benchmark_group("entropy_2h");
    g.sample_size(10);
    g.bench_function("apen", |b| b.iter(|| approx_entropy(black_box(&x), 1, 0.25).unwrap()));
    g.bench_function("sampen", |b| b.iter(|| sample_entropy(black_box(&x), 1, 0.25).unwrap()));
    g.finish();
}

fn featurize(c: &mut Criterion) {
    let recs = cohort(4);
    let mut g = c.benchmark_group("extract");
    g.sample_size(10);
    for kind in [ModelKind::Model1, ModelKind::Model3] {
        g.bench_function(kind.to_string(), |b| {
            b.iter(|| pipeline::extract(black_box(&recs), kind, &Default::default(), Tiling::Train).unwrap())
        });
    }
    g.finish();
}

fn classifiers(c: &mut Criterion) {
    let (x, y) = blobs(400, 20);
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    g.bench_function("random_forest", |b| {
        b.iter(|| RandomForest::fit(black_box(&x), &y, &RfHyper::default()).unwrap())
    });
    g.bench_function("logistic", |b| {
        b.iter(|| LogisticModel::fit(black_box(&x), &y, &LrHyper::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, signal, entropy, featurize, classifiers);
criterion_main!(benches);
