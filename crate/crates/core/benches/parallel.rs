use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

use rkhskit::gaussian::{sample_gp, SamplerConfig};
use rkhskit::kernels::gram_matrix;
use rkhskit::pca::{covariance, CovarianceMode};
use rkhskit::{KernelSpec, Matrix, PointSet};

fn pools() -> [(&'static str, ThreadPool); 2] {
    [
        ("pool", rayon::ThreadPoolBuilder::new().build().unwrap()),
        ("single", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn bench_gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_matrix");
    let k = KernelSpec::gaussian(0.7).unwrap();
    let pts = PointSet::from_vectors(&random_matrix(600, 3, 1).row_vecs());
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, 600), |b| {
            b.iter(|| pool.install(|| gram_matrix(&k, &pts).unwrap()))
        });
    }
    group.finish();
}

fn bench_matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("matmul");
    let a = random_matrix(256, 256, 2);
    let b = random_matrix(256, 256, 3);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, 256), |bch| bch.iter(|| pool.install(|| a.matmul(&b))));
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_gp");
    group.sample_size(20);
    let k = KernelSpec::gaussian(1.0).unwrap();
    let pts = PointSet::from_scalars(&(0..32).map(|i| 0.25 * i as f64).collect::<Vec<_>>());
    let cfg = SamplerConfig::new(9, 20_000);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, cfg.n_samples), |b| {
            b.iter(|| pool.install(|| sample_gp(&k, &pts, &cfg).unwrap()))
        });
    }
    group.finish();
}

fn bench_covariance(c: &mut Criterion) {
    let mut group = c.benchmark_group("covariance");
    let x = random_matrix(512, 128, 4);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, "512x128"), |b| {
            b.iter(|| pool.install(|| covariance(&x, CovarianceMode::Sample).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_gram, bench_matmul, bench_sampling, bench_covariance);
criterion_main!(benches);
