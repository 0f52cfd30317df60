//! Fixed workloads shared by the benchmarks.

use lazy_dar::experiments::FuzzConfig;
use lazy_dar::{Capacity, Instance, MetricKind};

/// Deterministic random instances with exactly `n` requests.
pub fn workload(metric: MetricKind, capacity: Capacity, n: usize, count: usize) -> Vec<Instance> {
    let cfg = FuzzConfig {
        metrics: vec![metric],
        capacities: vec![capacity],
        max_requests: n,
        count: count * 8,
        seed: 42,
        ..FuzzConfig::default()
    };
    (0..cfg.count)
        .map(|i| cfg.instance(i))
        .filter(|inst| inst.len() == n)
        .take(count)
        .collect()
}
