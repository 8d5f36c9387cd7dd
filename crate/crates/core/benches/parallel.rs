//! Parallel versus sequential execution of the three heavy kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctbounds::capacity::{capacity_hn, counting_capacity};
use ctbounds::exact::count_tables_with;
use ctbounds::{CapMatrix, Exec, HnSettings, Marginals, SolverSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn random_marginals(m: usize, n: usize, seed: u64) -> Marginals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha: Vec<u64> = (0..m).map(|_| rng.random_range(5..20)).collect();
    let total: u64 = alpha.iter().sum();
    let mut beta = vec![0u64; n];
    for _ in 0..total {
        beta[rng.random_range(0..n)] += 1;
    }
    Marginals::new(alpha, beta).unwrap()
}

fn capacity(c: &mut Criterion) {
    let mut g = c.benchmark_group("capacity_50x50");
    let m = random_marginals(50, 50, 1);
    let k = CapMatrix::infinite(50, 50);
    for (name, exec) in MODES {
        let settings = SolverSettings { exec, ..SolverSettings::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| counting_capacity(&m, &k, settings).unwrap()));
    }
    g.finish();
}

fn hn(c: &mut Criterion) {
    let mut g = c.benchmark_group("hn_capacity_5x4");
    let m = Marginals::new(vec![9, 49, 182, 478, 551], vec![9, 309, 355, 596]).unwrap();
    for (name, exec) in MODES {
        let settings = HnSettings { solver: SolverSettings { exec, ..SolverSettings::default() }, ..HnSettings::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| capacity_hn(&m, &settings).unwrap()));
    }
    g.finish();
}

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_4x4");
    g.sample_size(10);
    let m = Marginals::new(vec![220, 215, 93, 64], vec![108, 286, 71, 127]).unwrap();
    let k = CapMatrix::infinite(4, 4);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| count_tables_with(&m, &k, u64::MAX, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, capacity, hn, exact);
criterion_main!(benches);
