use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use reeb_edit::distance::{edit_distance, DistanceOptions};
use reeb_edit::parallel::par_map;
use reeb_edit::random::{random_graph, rng};
use reeb_edit::sweep::{run, RunConfig};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn distance_batch(c: &mut Criterion) {
    let mut r = rng(1);
    let pairs: Vec<_> = (0..32)
        .map(|k| (random_graph(&mut r, 2 + 2 * (k % 4)), random_graph(&mut r, 2 + 2 * ((k + 1) % 4))))
        .collect();
    let opts = DistanceOptions::default();
    let mut group = c.benchmark_group("edit_distance_batch");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| par_map(&pairs, |(x, y)| edit_distance(x, y, &opts).unwrap().upper)))
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = RunConfig {
        seed: 1,
        trials: 8,
        degree_range: (1, 3),
        ..RunConfig::default()
    };
    let mut group = c.benchmark_group("sweep_8_trials");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| run(&cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, distance_batch, sweep);
criterion_main!(benches);
