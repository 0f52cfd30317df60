use proptest::prelude::*;

use lazy_dar::experiments::{
    competitive_ratio, critical_halfline_alpha, gen_halfline_lb, general_alpha, FuzzConfig,
};
use lazy_dar::online::check_structure;
use lazy_dar::{
    opt_upto, shortest_schedule, simulate, validate_schedule, Algorithm, Capacity, Instance,
    MetricKind, MetricSpace, Point, TOLERANCE,
};

fn config(metric: MetricKind, seed: u64) -> FuzzConfig {
    FuzzConfig {
        metrics: vec![metric],
        max_requests: 5,
        seed,
        ..FuzzConfig::default()
    }
}

fn metric_kind() -> impl Strategy<Value = MetricKind> {
    prop_oneof![
        Just(MetricKind::Line),
        Just(MetricKind::HalfLine),
        Just(MetricKind::Matrix)
    ]
}

/// A random instance drawn through the fuzz generator.
fn instance() -> impl Strategy<Value = Instance> {
    (metric_kind(), any::<u64>(), 0usize..1000)
        .prop_map(|(m, seed, idx)| config(m, seed).instance(idx))
}

fn points(inst: &Instance) -> Vec<Point> {
    let mut ps = vec![inst.origin()];
    for r in inst.requests() {
        ps.push(r.pickup);
        ps.push(r.delivery);
    }
    ps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn halfline_distance_bounded_by_farther_point(x in 0.0..1e3f64, y in 0.0..1e3f64) {
        let s = MetricSpace::HalfLine;
        let (px, py, o) = (Point::Coord(x), Point::Coord(y), s.origin());
        let d = s.distance(px, py).unwrap();
        let bound = s.distance(px, o).unwrap().max(s.distance(py, o).unwrap());
        prop_assert!(d <= bound + TOLERANCE);
    }

    #[test]
    fn symmetry_and_triangle(inst in instance(), i in any::<prop::sample::Index>(),
                             j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let ps = points(&inst);
        let (x, y, z) = (*i.get(&ps), *j.get(&ps), *k.get(&ps));
        let s = inst.space();
        let d = |a, b| s.distance(a, b).unwrap();
        prop_assert!((d(x, y) - d(y, x)).abs() <= TOLERANCE);
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + TOLERANCE);
        prop_assert!(d(x, x).abs() <= TOLERANCE);
    }

    #[test]
    fn shortest_schedule_moves_by_at_most_the_distance(inst in instance(),
            i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let ps = points(&inst);
        let (x, y) = (*i.get(&ps), *j.get(&ps));
        let cap = inst.capacity_limit();
        let sx = shortest_schedule(inst.space(), inst.requests(), x, cap).unwrap().length;
        let sy = shortest_schedule(inst.space(), inst.requests(), y, cap).unwrap().length;
        prop_assert!(sx <= inst.space().distance(x, y).unwrap() + sy + 1e-7);
    }

    #[test]
    fn opt_bounds(inst in instance()) {
        let space = inst.space();
        let o = inst.origin();
        let mut prev = 0.0;
        for (t, _) in inst.release_batches() {
            let plan = opt_upto(&inst, t).unwrap();
            prop_assert!(plan.completion >= prev - TOLERANCE, "not monotone at {t}");
            prev = plan.completion;
            for &id in inst.released_by(t) {
                let r = inst.request(id);
                let lb = space.distance(o, r.pickup).unwrap().max(r.release)
                    + space.distance(r.pickup, r.delivery).unwrap();
                prop_assert!(plan.completion >= lb - 1e-7);
            }
            let released: Vec<_> = inst.released_by(t).iter().map(|&id| *inst.request(id)).collect();
            let relaxed = shortest_schedule(space, &released, o, inst.capacity_limit()).unwrap();
            prop_assert!(relaxed.length <= plan.completion + 1e-7);
        }
    }

    #[test]
    fn schedule_length_is_duration_after_releases(inst in instance()) {
        let last = inst.requests().iter().map(|r| r.release).fold(0.0, f64::max);
        let plan = shortest_schedule(inst.space(), inst.requests(), inst.origin(),
                                     inst.capacity_limit()).unwrap();
        let done = validate_schedule(&inst, &plan.schedule, last, None, false).unwrap();
        if !inst.is_empty() {
            prop_assert!((done - last - plan.length).abs() <= 1e-7);
        }
    }

    #[test]
    fn lazy_is_deterministic_and_replays(inst in instance(), alpha in 1.0..2.0f64) {
        let a = simulate(&inst, Algorithm::lazy(alpha)).unwrap();
        let b = simulate(&inst, Algorithm::lazy(alpha)).unwrap();
        prop_assert_eq!(&a, &b);
        let replay = validate_schedule(&inst, &a.executed(inst.origin()), 0.0, None, false).unwrap();
        prop_assert!((replay - a.completion).abs() <= 1e-7, "{} vs {}", replay, a.completion);
        let v = check_structure(&a, &inst, alpha, 1e-7).unwrap();
        prop_assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn baselines_replay(inst in instance(), replan in any::<bool>()) {
        let algo = if replan { Algorithm::Replan } else { Algorithm::Ignore };
        let tr = simulate(&inst, algo).unwrap();
        let replay = validate_schedule(&inst, &tr.executed(inst.origin()), 0.0, None, false).unwrap();
        prop_assert!((replay - tr.completion).abs() <= 1e-7);
    }

    #[test]
    fn ratios_at_least_one(inst in instance()) {
        for algo in [Algorithm::lazy(general_alpha()), Algorithm::Replan, Algorithm::Ignore] {
            let r = competitive_ratio(&inst, algo).unwrap();
            prop_assert!(r.ratio >= 1.0 - TOLERANCE, "{} ratio {}", algo.name(), r.ratio);
        }
    }

    #[test]
    fn lower_bound_ratio_grows_as_epsilon_shrinks(alpha in 1.0..1.36f64, e1 in 1e-5..5e-3f64, e2 in 1e-5..5e-3f64) {
        // for larger epsilon the construction finishes before (1+α)·OPT and
        // the ratio saturates at 1+α
        let (small, large) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let ratio = |e| {
            let inst = gen_halfline_lb(alpha, e, Capacity::Finite(1)).unwrap();
            competitive_ratio(&inst, Algorithm::lazy(alpha)).unwrap().ratio
        };
        prop_assert!(ratio(small) >= ratio(large) - 1e-9);
    }
}

#[test]
fn lower_bound_domain_excludes_critical_alpha() {
    assert!(gen_halfline_lb(critical_halfline_alpha(), 0.01, Capacity::Finite(1)).is_err());
    assert!(gen_halfline_lb(1.366, 0.01, Capacity::Finite(1)).is_ok());
}
