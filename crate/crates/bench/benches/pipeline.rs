use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use meshsteg_bench::{corpus, cover, labelled};
use meshsteg_core::embed::embed;
use meshsteg_core::stats::DEFAULT_EPSILON;
use meshsteg_core::{
    assemble, calibrated_features, laplacian_smooth, Classifier, ClassifierKind, EmbedParams,
    FeatureSet, Payload, SmoothingParams, SvmParams, TrainOptions, Variant,
};

fn features(c: &mut Criterion) {
    let m = cover(0);
    let p = SmoothingParams::default();
    let f = calibrated_features(&m, &p);
    let mut g = c.benchmark_group("features");
    g.bench_function("smooth", |b| b.iter(|| laplacian_smooth(&m, &p)));
    g.bench_function("calibrated_features", |b| {
        b.iter(|| calibrated_features(&m, &p))
    });
    g.bench_function("lfs76_moments", |b| {
        b.iter(|| assemble(&f, FeatureSet::Lfs76, DEFAULT_EPSILON))
    });
    g.finish();
}

fn embedding(c: &mut Criterion) {
    let m = cover(1);
    let mut g = c.benchmark_group("embed");
    for (name, params) in [
        ("cho", EmbedParams::default()),
        (
            "yang",
            EmbedParams {
                variant: Variant::YangHist,
                bits: 31,
                ..Default::default()
            },
        ),
        (
            "chao",
            EmbedParams {
                variant: Variant::ChaoLayers,
                bits: 256,
                ..Default::default()
            },
        ),
    ] {
        let payload = Payload::random(params.bits, 3);
        g.bench_function(name, |b| b.iter(|| embed(&m, &params, &payload)));
    }
    g.finish();
}

fn training(c: &mut Criterion) {
    let (x, y) = labelled(&corpus(60));
    let mut g = c.benchmark_group("train");
    g.sample_size(10);
    for (name, kind, svm) in [
        ("qda", ClassifierKind::Qda, SvmParams::Grid),
        ("fld", ClassifierKind::Fld, SvmParams::Grid),
        (
            "svm_fixed",
            ClassifierKind::Svm,
            SvmParams::Fixed {
                c: 10.0,
                gamma: 0.01,
            },
        ),
        ("svm_grid", ClassifierKind::Svm, SvmParams::Grid),
    ] {
        let opts = TrainOptions { kind, seed: 0, svm };
        g.bench_function(name, |b| {
            b.iter_batched(
                || (x.clone(), y.clone()),
                |(x, y)| Classifier::train(&x, &y, FeatureSet::Lfs76, &opts),
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, features, embedding, training);
criterion_main!(benches);
