//! The three paths everything else waits on: the arrival sampler, the
//! timestamp reliability scan, and the Monte Carlo exponentiality test.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockarrival::cleaning::lis_intersection;
use blockarrival::{
    lilliefors_exponential, sample_nhpp, simulate, steady_start_difficulty, DelayModel,
    DifficultyMode, HashRateModel, PerSecond, RateFunction, SampleStop, SimConfig,
};

fn bench_sampler(c: &mut Criterion) {
    let rate = RateFunction::Exponential { a: 2.0e-7, b: -(600.0f64).ln() };
    c.bench_function("sample_nhpp_exponential_2016", |b| {
        b.iter(|| sample_nhpp(&rate, 0.0, SampleStop::Count { n: 2016 }, 7).unwrap())
    });
}

fn bench_simulator(c: &mut Criterion) {
    let (a, b_level) = (2.0e-7, 20.0);
    let config = SimConfig {
        hash_model: HashRateModel::Exponential { a, b: b_level },
        difficulty_mode: DifficultyMode::Random,
        delay: DelayModel::None,
        initial_difficulty: steady_start_difficulty(PerSecond(a), b_level, 0.0).unwrap(),
        start_time: 0.0,
        n_blocks: 4032,
        seed: 7,
    };
    c.bench_function("simulate_two_segments", |b| {
        b.iter(|| simulate(&config).unwrap())
    });
}

fn bench_lis(c: &mut Criterion) {
    // Monotone clock plus heavy jitter, like a miner-timestamp series.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values: Vec<i64> = (0..10_000)
        .map(|i| 600 * i + rng.gen_range(-1200..=1200))
        .collect();
    c.bench_function("lis_intersection_10k", |b| {
        b.iter_batched(|| values.clone(), |v| lis_intersection(&v), BatchSize::SmallInput)
    });
}

fn bench_lilliefors(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sample: Vec<f64> = (0..500).map(|_| -600.0 * rng.gen::<f64>().ln()).collect();
    let mut group = c.benchmark_group("lilliefors");
    group.sample_size(10);
    group.bench_function("n500_mc999", |b| {
        b.iter(|| lilliefors_exponential(&sample, 999, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sampler, bench_simulator, bench_lis, bench_lilliefors);
criterion_main!(benches);
