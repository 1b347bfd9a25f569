use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jordantri::algebra::{jordan_closure_with, GeneratorSet};
use jordantri::instance::gen_random;
use jordantri::triangularize::triangularize_batch;
use jordantri::{Execution, ToleranceConfig};

fn sets(count: usize, n: usize) -> Vec<GeneratorSet> {
    (0..count as u64)
        .map(|s| gen_random(s, n, 2, 10.0).unwrap().generator_set().unwrap())
        .collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn triangularize_many(c: &mut Criterion) {
    let cfg = ToleranceConfig::default();
    let mut group = c.benchmark_group("triangularize_batch");
    for n in [6, 12] {
        let input = sets(32, n);
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &input, |b, input| {
                b.iter(|| triangularize_batch(input, &cfg, exec))
            });
        }
    }
    group.finish();
}

fn jordan_closure_rounds(c: &mut Criterion) {
    let cfg = ToleranceConfig::default();
    let mut group = c.benchmark_group("jordan_closure");
    group.sample_size(20);
    for n in [6, 9] {
        let g = gen_random(7, n, 3, 10.0).unwrap().generator_set().unwrap();
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &g, |b, g| b.iter(|| jordan_closure_with(g, &cfg, exec).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, triangularize_many, jordan_closure_rounds);
criterion_main!(benches);
