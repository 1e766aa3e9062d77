use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uldl_core::svm::{train, SvmParams};
use uldl_core::{label_dataset, synth_dataset, FeatureMatrix, SynthConfig, Thresholds};

fn labeled() -> FeatureMatrix {
    let data = label_dataset(
        synth_dataset(&SynthConfig::default(), 1).unwrap(),
        &Thresholds::default(),
    );
    FeatureMatrix::from_samples(&data).unwrap()
}

fn synthesis(c: &mut Criterion) {
    let cfg = SynthConfig::default();
    c.bench_function("synth_3800", |b| b.iter(|| synth_dataset(&cfg, 7).unwrap()));
}

fn training(c: &mut Criterion) {
    let fm = labeled();
    let mut group = c.benchmark_group("train_ovo");
    group.sample_size(10);
    for n in [350, 1000, 3000] {
        let head = fm.head(n);
        let labels: Vec<u8> = head.labels().iter().map(|c| c.number()).collect();
        for (name, params) in [
            ("rbf", SvmParams::rbf(1.0, 0.4)),
            ("linear", SvmParams::linear(1.0)),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| train(head.x(), &labels, &params).unwrap())
            });
        }
    }
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let fm = labeled();
    let head = fm.head(3000);
    let labels: Vec<u8> = head.labels().iter().map(|c| c.number()).collect();
    let model = train(head.x(), &labels, &SvmParams::default()).unwrap();
    let test = fm.select(&(3000..3800).collect::<Vec<_>>());
    c.bench_function("predict_800", |b| {
        b.iter(|| model.predict(test.x()).unwrap())
    });
}

criterion_group!(benches, synthesis, training, prediction);
criterion_main!(benches);
