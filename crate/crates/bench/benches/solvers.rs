use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lazy_dar::experiments::general_alpha;
use lazy_dar::factor::solve_fr;
use lazy_dar::{opt_upto, simulate, Algorithm, Capacity, MetricKind};
use lazy_dar_bench::workload;

fn bench_opt(c: &mut Criterion) {
    let mut g = c.benchmark_group("opt_upto");
    for n in [3, 5, 7] {
        let insts = workload(MetricKind::Line, Capacity::Finite(1), n, 8);
        g.bench_with_input(BenchmarkId::from_parameter(n), &insts, |b, insts| {
            b.iter(|| {
                for inst in insts {
                    black_box(opt_upto(inst, f64::INFINITY).unwrap().completion);
                }
            })
        });
    }
    g.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_lazy");
    for metric in [MetricKind::HalfLine, MetricKind::Matrix] {
        let insts = workload(metric, Capacity::Finite(2), 5, 8);
        g.bench_with_input(BenchmarkId::from_parameter(metric), &insts, |b, insts| {
            b.iter(|| {
                for inst in insts {
                    black_box(
                        simulate(inst, Algorithm::lazy(general_alpha()))
                            .unwrap()
                            .completion,
                    );
                }
            })
        });
    }
    g.finish();
}

fn bench_factor(c: &mut Criterion) {
    c.bench_function("solve_fr", |b| {
        b.iter(|| solve_fr(black_box(1.366)).unwrap().value)
    });
}

criterion_group!(benches, bench_opt, bench_simulate, bench_factor);
criterion_main!(benches);
