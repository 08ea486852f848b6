use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use randbeam::simulator::{generate_beams, DropSimulator};
use randbeam::FeedbackScheme;
use randbeam_bench::system;

fn beams(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("haar beams M=4", |b| b.iter(|| generate_beams(black_box(4), &mut rng)));
}

fn drops(c: &mut Criterion) {
    let mut g = c.benchmark_group("drop");
    let cases = [
        ("full", system(4, 10, FeedbackScheme::FullFeedback, 1, 1)),
        ("spatial", system(4, 100, FeedbackScheme::SpatialSelective, 1, 1)),
        ("best-2-of-10", system(4, 20, FeedbackScheme::BestL, 10, 2)),
    ];
    for (name, cfg) in cases {
        let sim = DropSimulator::new(&cfg).unwrap();
        g.throughput(Throughput::Elements(u64::from(cfg.k * cfg.n)));
        let mut t = 0u64;
        g.bench_with_input(BenchmarkId::new(name, cfg.k), &sim, |b, sim| {
            b.iter(|| {
                t += 1;
                sim.drop(t)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, beams, drops);
criterion_main!(benches);
