use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use range_median::datagen;
use range_median::harness::{self, BenchConfig, Mode, Structure};
use range_median::{filter, CascadeTree, CompactTree, Parallelism, SelectionStrategy};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn eager_builds(c: &mut Criterion) {
    let mut group = c.benchmark_group("eager_build");
    group.sample_size(10);
    for n in [1usize << 14, 1 << 17] {
        let values = datagen::random_reals(n, 1);
        for (label, par) in MODES {
            group.bench_with_input(
                BenchmarkId::new(format!("cascade/{label}"), n),
                &values,
                |b, v| {
                    b.iter(|| {
                        let mut tree = CascadeTree::new(v).unwrap();
                        tree.build_eager(par);
                        black_box(tree.memory_words())
                    })
                },
            );
            group.bench_with_input(
                BenchmarkId::new(format!("compact/{label}"), n),
                &values,
                |b, v| {
                    b.iter(|| {
                        let mut tree = CompactTree::new(v).unwrap();
                        tree.build_eager(par);
                        black_box(tree.depth())
                    })
                },
            );
        }
    }
    group.finish();
}

fn median_filter(c: &mut Criterion) {
    let mut group = c.benchmark_group("median_filter");
    group.sample_size(10);
    let img = datagen::random_image(256, 256, 255, 3);
    for r in [2usize, 8] {
        for (label, par) in MODES {
            group.bench_with_input(BenchmarkId::new(label, r), &r, |b, &r| {
                b.iter(|| black_box(filter(&img, r, par).unwrap()))
            });
        }
    }
    group.finish();
}

fn bench_grid_reps(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_repetitions");
    group.sample_size(10);
    for (label, par) in MODES {
        let cfg = BenchConfig {
            structure: Structure::Cascade,
            mode: Mode::Lazy,
            strategy: SelectionStrategy::default(),
            seed: 0,
            grid: "n=2^12:2^14,k=64/1024".parse().unwrap(),
            reps: 4,
            parallelism: par,
        };
        group.bench_function(label, |b| {
            b.iter(|| black_box(harness::run_grid(&cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, eager_builds, median_filter, bench_grid_reps);
criterion_main!(benches);
