//! Certificates evaluated on LAZY traces.

use std::collections::HashMap;

use crate::model::{EventKind, Instance, Trace};
use crate::offline::{Solver, SolverError};

/// `OPT(t)` memoized by the number of released requests.
pub struct OptCache<'a> {
    inst: &'a Instance,
    solver: Solver,
    values: HashMap<usize, f64>,
}

impl<'a> OptCache<'a> {
    pub fn new(inst: &'a Instance, solver: Solver) -> Self {
        OptCache {
            inst,
            solver,
            values: HashMap::new(),
        }
    }

    pub fn get(&mut self, t: f64) -> Result<f64, SolverError> {
        let k = self.inst.released_count(t);
        if let Some(&v) = self.values.get(&k) {
            return Ok(v);
        }
        let v = self.solver.opt_upto(self.inst, t)?.completion;
        self.values.insert(k, v);
        Ok(v)
    }
}

/// Per-schedule evaluation of the two α-good inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGood {
    pub i: usize,
    pub opt: f64,
    /// `|S| ≤ OPT(t)`
    pub short: bool,
    /// `t + |S| ≤ (1+α)·OPT(t)`
    pub on_time: bool,
}

impl AlphaGood {
    pub fn holds(&self) -> bool {
        self.short && self.on_time
    }
}

pub fn check_alpha_good(
    trace: &Trace,
    inst: &Instance,
    alpha: f64,
    tolerance: f64,
) -> Result<Vec<AlphaGood>, SolverError> {
    let mut opt = OptCache::new(inst, Solver::default());
    trace
        .schedules
        .iter()
        .map(|s| {
            let o = opt.get(s.t)?;
            Ok(AlphaGood {
                i: s.i,
                opt: o,
                short: s.length <= o + tolerance,
                on_time: s.t + s.length <= (1.0 + alpha) * o + tolerance,
            })
        })
        .collect()
}

/// Checks `OPT(t⁽ⁱ⁾) ≥ t⁽ⁱ⁻¹⁾ ≥ α·OPT(t⁽ⁱ⁻¹⁾)` on consecutive schedules and
/// returns a description of every violation.
pub fn check_consecutive_starts(
    trace: &Trace,
    inst: &Instance,
    alpha: f64,
    tolerance: f64,
) -> Result<Vec<String>, SolverError> {
    let mut opt = OptCache::new(inst, Solver::default());
    let mut out = Vec::new();
    for w in trace.schedules.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let opt_cur = opt.get(cur.t)?;
        let opt_prev = opt.get(prev.t)?;
        if opt_cur < prev.t - tolerance {
            out.push(format!(
                "schedule {}: OPT(t) = {opt_cur} < previous start {}",
                cur.i, prev.t
            ));
        }
        if prev.t < alpha * opt_prev - tolerance {
            out.push(format!(
                "schedule {}: start {} < alpha * OPT = {}",
                prev.i,
                prev.t,
                alpha * opt_prev
            ));
        }
    }
    Ok(out)
}

/// Structural facts about consecutive LAZY schedules:
///
/// * if the server headed home between schedule `i` and `i+1` (interrupting
///   `i` or while waiting after it), then `p⁽ⁱ⁺¹⁾ = o` and
///   `t⁽ⁱ⁺¹⁾ = α·OPT(t⁽ⁱ⁺¹⁾)`;
/// * otherwise `p⁽ⁱ⁺¹⁾` is the end of `S⁽ⁱ⁾` and, for `α ≥ 1`,
///   `t⁽ⁱ⁺¹⁾ = max{α·OPT(t⁽ⁱ⁺¹⁾), t⁽ⁱ⁾ + |S⁽ⁱ⁾|}`.
pub fn check_structure(
    trace: &Trace,
    inst: &Instance,
    alpha: f64,
    tolerance: f64,
) -> Result<Vec<String>, SolverError> {
    let space = inst.space();
    let origin = inst.origin();
    let mut opt = OptCache::new(inst, Solver::default());
    let mut out = Vec::new();
    if let Some(first) = trace.schedules.first() {
        if space.dist(first.p, origin) > tolerance {
            out.push(format!(
                "schedule 1 starts at {} instead of the origin",
                first.p
            ));
        }
    }
    // index of the StartSchedule event of each schedule
    let starts: Vec<usize> = trace
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e.kind, EventKind::StartSchedule { .. }))
        .map(|(k, _)| k)
        .collect();
    for (w, s) in trace.schedules.windows(2).zip(starts.windows(2)) {
        let (prev, cur) = (&w[0], &w[1]);
        let returned = trace.events[s[0]..s[1]]
            .iter()
            .any(|e| e.kind == EventKind::DeliverAndReturn);
        let threshold = alpha * opt.get(cur.t)?;
        if returned || prev.interrupted {
            if space.dist(cur.p, origin) > tolerance {
                out.push(format!(
                    "schedule {} after a return starts at {}",
                    cur.i, cur.p
                ));
            }
            if (cur.t - threshold).abs() > tolerance {
                out.push(format!(
                    "schedule {} after a return starts at {} instead of {threshold}",
                    cur.i, cur.t
                ));
            }
        } else {
            if space.dist(cur.p, prev.end) > tolerance {
                out.push(format!(
                    "schedule {} starts at {} but schedule {} ended at {}",
                    cur.i, cur.p, prev.i, prev.end
                ));
            }
            let expected = threshold.max(prev.t + prev.length);
            if alpha >= 1.0 && (cur.t - expected).abs() > tolerance {
                out.push(format!(
                    "schedule {} starts at {} instead of {expected}",
                    cur.i, cur.t
                ));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, Point};
    use crate::model::Capacity;
    use crate::online::{simulate, Algorithm};

    fn c(x: f64) -> Point {
        Point::Coord(x)
    }

    fn construction(alpha: f64, eps: f64) -> Instance {
        let r4 = 4.0 * alpha - 2.0;
        Instance::new(
            MetricSpace::HalfLine,
            Capacity::Finite(1),
            [
                (c(0.0), c(1.0), 0.0),
                (c(1.0), c(0.0), 0.0),
                (c(1.0), c(2.0 - eps), 0.0),
                (c(r4), c(r4), 4.0 * alpha),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_request_is_tight() {
        let inst = Instance::new(
            MetricSpace::HalfLine,
            Capacity::Finite(1),
            [(c(0.0), c(1.0), 0.0)],
        )
        .unwrap();
        let alpha = 1.3;
        let tr = simulate(&inst, Algorithm::lazy(alpha)).unwrap();
        let good = check_alpha_good(&tr, &inst, alpha, 1e-9).unwrap();
        assert_eq!(good.len(), 1);
        assert!(good[0].holds());
        assert!((tr.schedules[0].length - good[0].opt).abs() < 1e-12);
        assert!(check_consecutive_starts(&tr, &inst, alpha, 1e-9)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn construction_at_critical_alpha() {
        let alpha = (1.0 + 3f64.sqrt()) / 2.0;
        // the construction needs α below the critical value; reuse its shape
        let inst = construction(1.366, 0.01);
        let tr = simulate(&inst, Algorithm::lazy(alpha)).unwrap();
        let good = check_alpha_good(&tr, &inst, alpha, 1e-9).unwrap();
        assert!(good.iter().all(AlphaGood::holds), "{good:?}");
        assert!(check_consecutive_starts(&tr, &inst, alpha, 1e-9)
            .unwrap()
            .is_empty());
        assert!(check_structure(&tr, &inst, alpha, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn corrupted_trace_is_flagged() {
        let alpha = 1.2;
        let inst = construction(alpha, 0.01);
        let mut tr = simulate(&inst, Algorithm::lazy(alpha)).unwrap();
        assert!(check_consecutive_starts(&tr, &inst, alpha, 1e-9)
            .unwrap()
            .is_empty());
        tr.schedules[0].t = 1.0;
        let v = check_consecutive_starts(&tr, &inst, alpha, 1e-9).unwrap();
        assert_eq!(v.len(), 1, "{v:?}");
    }
}
