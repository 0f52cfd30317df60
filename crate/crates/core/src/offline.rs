//! Exact offline solvers.
//!
//! * [`Solver::shortest_schedule`]: shortest schedule for a request set from a
//!   given point when release times are ignored (memoized DP over
//!   `(location, picked, delivered)`).
//! * [`Solver::opt_upto`]: optimal completion time from the origin at time 0
//!   over the requests released by `t` (depth-first branch and bound over
//!   pickup/delivery orders with greedy earliest timing).
//! * [`opt_upto_naive`]: plain enumeration of every event order, used as an
//!   oracle for `opt_upto`.
//! * [`Solver::fastest_delivery_and_return`]: Held-Karp over the delivery
//!   points of loaded requests, ending at the origin.
//!
//! Ties between equally good schedules are broken towards the
//! lexicographically smallest event sequence by request id.

use std::collections::HashMap;
use thiserror::Error;

use crate::metric::{MetricSpace, Point};
use crate::model::{Action, Instance, Request, RequestId, Schedule};
use crate::TOLERANCE;

pub const DEFAULT_SEARCH_CAP: usize = 10;
pub const NAIVE_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("{requested} requests exceed the search cap of {cap}")]
    SearchCapExceeded { requested: usize, cap: usize },
}

/// A visit: `(request, true)` delivers, `(request, false)` picks up.
pub type Event = (RequestId, bool);

/// A solved routing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub schedule: Schedule,
    pub events: Vec<Event>,
    /// Distance travelled.
    pub length: f64,
    /// Time of the last delivery (start time if nothing is delivered).
    pub completion: f64,
}

/// Search limits shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub search_cap: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            search_cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// One request as seen by a search: whether it is already on board, and the
/// release time to honour (0 when releases are ignored).
#[derive(Debug, Clone, Copy)]
struct Task {
    release: f64,
    preloaded: bool,
}

/// Locations `0` (start), `1 + 2k` (pickup of task k), `2 + 2k` (delivery).
struct Layout {
    tasks: Vec<Task>,
    locs: usize,
    dist: Vec<f64>,
    capacity: usize,
}

impl Layout {
    fn new(
        space: &MetricSpace,
        start: Point,
        requests: &[Request],
        preloaded: &[bool],
        capacity: usize,
        with_releases: bool,
    ) -> Self {
        let mut points = vec![start];
        let mut tasks = Vec::with_capacity(requests.len());
        for (k, r) in requests.iter().enumerate() {
            points.push(r.pickup);
            points.push(r.delivery);
            tasks.push(Task {
                release: if with_releases { r.release } else { 0.0 },
                preloaded: preloaded.get(k).copied().unwrap_or(false),
            });
        }
        let locs = points.len();
        let mut dist = vec![0.0; locs * locs];
        for i in 0..locs {
            for j in 0..locs {
                dist[i * locs + j] = space.dist(points[i], points[j]);
            }
        }
        Layout {
            tasks,
            locs,
            dist,
            capacity,
        }
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.locs + j]
    }

    fn n(&self) -> usize {
        self.tasks.len()
    }

    fn full(&self) -> u32 {
        (1u32 << self.n()) - 1
    }

    fn initial_picked(&self) -> u32 {
        self.tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.preloaded)
            .fold(0, |m, (k, _)| m | (1 << k))
    }

    /// The next event for task `k` in state `(picked, delivered)`, if any is
    /// allowed: `(location, is_delivery)`.
    #[inline]
    fn next_event(&self, k: usize, picked: u32, delivered: u32) -> Option<(usize, bool)> {
        let bit = 1u32 << k;
        if delivered & bit != 0 {
            None
        } else if picked & bit != 0 {
            Some((2 + 2 * k, true))
        } else if ((picked & !delivered).count_ones() as usize) < self.capacity {
            Some((1 + 2 * k, false))
        } else {
            None
        }
    }
}

/// Memoized minimal remaining distance ignoring release times.
struct ReleaseFree<'a> {
    layout: &'a Layout,
    memo: HashMap<(u8, u32, u32), f64>,
}

impl<'a> ReleaseFree<'a> {
    fn new(layout: &'a Layout) -> Self {
        ReleaseFree {
            layout,
            memo: HashMap::new(),
        }
    }

    fn remaining(&mut self, loc: usize, picked: u32, delivered: u32) -> f64 {
        let l = self.layout;
        if delivered == l.full() {
            return 0.0;
        }
        let key = (loc as u8, picked, delivered);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut best = f64::INFINITY;
        for k in 0..l.n() {
            if let Some((next, deliver)) = l.next_event(k, picked, delivered) {
                let (p, d) = step(k, deliver, picked, delivered);
                best = best.min(l.d(loc, next) + self.remaining(next, p, d));
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// Lexicographically smallest optimal event order from the start.
    fn reconstruct(&mut self) -> Vec<(usize, bool)> {
        let l = self.layout;
        let (mut loc, mut picked, mut delivered) = (0, l.initial_picked(), 0);
        let mut out = Vec::new();
        while delivered != l.full() {
            let target = self.remaining(loc, picked, delivered);
            let mut chosen = None;
            for k in 0..l.n() {
                if let Some((next, deliver)) = l.next_event(k, picked, delivered) {
                    let (p, d) = step(k, deliver, picked, delivered);
                    let v = l.d(loc, next) + self.remaining(next, p, d);
                    if v <= target + TOLERANCE {
                        chosen = Some((k, next, deliver, p, d));
                        break;
                    }
                }
            }
            let (k, next, deliver, p, d) = chosen.expect("an optimal successor exists");
            out.push((k, deliver));
            loc = next;
            picked = p;
            delivered = d;
        }
        out
    }
}

#[inline]
fn step(k: usize, deliver: bool, picked: u32, delivered: u32) -> (u32, u32) {
    if deliver {
        (picked, delivered | (1 << k))
    } else {
        (picked | (1 << k), delivered)
    }
}

/// Depth-first branch and bound honouring release times.
struct Timed<'a> {
    layout: &'a Layout,
    relax: ReleaseFree<'a>,
    seen: HashMap<(u8, u32, u32), f64>,
    best: f64,
    best_order: Vec<(usize, bool)>,
    prefix: Vec<(usize, bool)>,
}

impl<'a> Timed<'a> {
    fn run(layout: &'a Layout, start_time: f64) -> (f64, Vec<(usize, bool)>) {
        let mut s = Timed {
            layout,
            relax: ReleaseFree::new(layout),
            seen: HashMap::new(),
            best: f64::INFINITY,
            best_order: Vec::new(),
            prefix: Vec::new(),
        };
        let picked = layout.initial_picked();
        if layout.n() == 0 {
            return (start_time, Vec::new());
        }
        s.search(0, start_time, picked, 0, start_time);
        (s.best, s.best_order)
    }

    fn lower_bound(&mut self, loc: usize, time: f64, picked: u32, delivered: u32) -> f64 {
        let l = self.layout;
        let mut lb = time + self.relax.remaining(loc, picked, delivered);
        for (k, t) in l.tasks.iter().enumerate() {
            let bit = 1 << k;
            if picked & bit == 0 {
                let at = (time + l.d(loc, 1 + 2 * k)).max(t.release);
                lb = lb.max(at + l.d(1 + 2 * k, 2 + 2 * k));
            }
        }
        lb
    }

    fn search(&mut self, loc: usize, time: f64, picked: u32, delivered: u32, last: f64) {
        let l = self.layout;
        if delivered == l.full() {
            if last < self.best - TOLERANCE {
                self.best = last;
                self.best_order = self.prefix.clone();
            }
            return;
        }
        let key = (loc as u8, picked, delivered);
        match self.seen.get(&key) {
            Some(&t) if time >= t - TOLERANCE => return,
            _ => {
                self.seen.insert(key, time);
            }
        }
        if self.lower_bound(loc, time, picked, delivered) >= self.best - TOLERANCE {
            return;
        }
        for k in 0..l.n() {
            if let Some((next, deliver)) = l.next_event(k, picked, delivered) {
                let mut t = time + l.d(loc, next);
                if !deliver {
                    t = t.max(l.tasks[k].release);
                }
                let (p, d) = step(k, deliver, picked, delivered);
                let last = if deliver { t } else { last };
                self.prefix.push((k, deliver));
                self.search(next, t, p, d, last);
                self.prefix.pop();
            }
        }
    }
}

impl Solver {
    pub fn new(search_cap: usize) -> Self {
        Solver { search_cap }
    }

    fn check_cap(&self, n: usize) -> Result<(), SolverError> {
        if n > self.search_cap || n > 16 {
            Err(SolverError::SearchCapExceeded {
                requested: n,
                cap: self.search_cap.min(16),
            })
        } else {
            Ok(())
        }
    }

    /// `S(R, x)`: a shortest schedule serving `requests` from `start`,
    /// ignoring release times.
    pub fn shortest_schedule(
        &self,
        space: &MetricSpace,
        requests: &[Request],
        start: Point,
        capacity: usize,
    ) -> Result<Plan, SolverError> {
        self.shortest_schedule_loaded(space, start, &[], requests, capacity)
    }

    /// Shortest schedule that delivers the already `loaded` requests and
    /// serves the `pending` ones, ignoring release times.
    pub fn shortest_schedule_loaded(
        &self,
        space: &MetricSpace,
        start: Point,
        loaded: &[Request],
        pending: &[Request],
        capacity: usize,
    ) -> Result<Plan, SolverError> {
        let (all, flags) = merge(loaded, pending);
        self.check_cap(all.len())?;
        let layout = Layout::new(space, start, &all, &flags, capacity.max(1), false);
        let order = ReleaseFree::new(&layout).reconstruct();
        Ok(finish(space, start, &all, &order, None))
    }

    /// `OPT[t]`: an optimal schedule from the origin at time 0 over every
    /// request released by `t`, and its completion time `OPT(t)`.
    pub fn opt_upto(&self, inst: &Instance, t: f64) -> Result<Plan, SolverError> {
        let ids = inst.released_by(t);
        let requests: Vec<Request> = ids.iter().map(|&id| *inst.request(id)).collect();
        self.earliest_completion(
            inst.space(),
            inst.origin(),
            0.0,
            &[],
            &requests,
            inst.capacity_limit(),
        )
    }

    /// Completion-time optimal schedule from `start` at `start_time`, with
    /// `loaded` requests on board and `pending` ones honouring their release
    /// times.
    pub fn earliest_completion(
        &self,
        space: &MetricSpace,
        start: Point,
        start_time: f64,
        loaded: &[Request],
        pending: &[Request],
        capacity: usize,
    ) -> Result<Plan, SolverError> {
        let (all, flags) = merge(loaded, pending);
        self.check_cap(all.len())?;
        let layout = Layout::new(space, start, &all, &flags, capacity.max(1), true);
        let (_, order) = Timed::run(&layout, start_time);
        Ok(finish(space, start, &all, &order, Some(start_time)))
    }

    /// Fastest way to visit every point of `destinations` from `pos` and end
    /// at the origin. Returns the duration and the visiting order (indices
    /// into `destinations`).
    pub fn fastest_delivery_and_return(
        &self,
        space: &MetricSpace,
        pos: Point,
        destinations: &[Point],
    ) -> Result<(f64, Vec<usize>), SolverError> {
        let n = destinations.len();
        self.check_cap(n)?;
        let origin = space.origin();
        if n == 0 {
            return Ok((space.dist(pos, origin), Vec::new()));
        }
        let full = (1usize << n) - 1;
        // rest[mask * n + j]: shortest way to finish from j having visited mask.
        let mut rest = vec![f64::INFINITY; (full + 1) * n];
        for j in 0..n {
            rest[full * n + j] = space.dist(destinations[j], origin);
        }
        for mask in (1..full).rev() {
            for j in (0..n).filter(|&j| mask & (1 << j) != 0) {
                let mut best = f64::INFINITY;
                for k in (0..n).filter(|&k| mask & (1 << k) == 0) {
                    let v = space.dist(destinations[j], destinations[k])
                        + rest[(mask | (1 << k)) * n + k];
                    best = best.min(v);
                }
                rest[mask * n + j] = best;
            }
        }
        let total = (0..n)
            .map(|k| space.dist(pos, destinations[k]) + rest[(1 << k) * n + k])
            .fold(f64::INFINITY, f64::min);
        let mut order = Vec::with_capacity(n);
        let (mut mask, mut at, mut remaining) = (0usize, pos, total);
        while mask != full {
            let k = (0..n)
                .filter(|&k| mask & (1 << k) == 0)
                .find(|&k| {
                    space.dist(at, destinations[k]) + rest[(mask | (1 << k)) * n + k]
                        <= remaining + TOLERANCE
                })
                .expect("an optimal successor exists");
            remaining -= space.dist(at, destinations[k]);
            mask |= 1 << k;
            at = destinations[k];
            order.push(k);
        }
        Ok((total, order))
    }
}

fn merge(loaded: &[Request], pending: &[Request]) -> (Vec<Request>, Vec<bool>) {
    let mut all: Vec<(Request, bool)> = loaded
        .iter()
        .map(|r| (*r, true))
        .chain(pending.iter().map(|r| (*r, false)))
        .collect();
    all.sort_by_key(|(r, _)| r.id);
    all.into_iter().unzip()
}

/// Turns an event order into a timed plan. With `start_time` set, pickups
/// wait for their release and the schedule carries the waits.
fn finish(
    space: &MetricSpace,
    start: Point,
    requests: &[Request],
    order: &[(usize, bool)],
    start_time: Option<f64>,
) -> Plan {
    let mut pos = start;
    let mut time = start_time.unwrap_or(0.0);
    let mut completion = time;
    let mut length = 0.0;
    let mut actions = Vec::with_capacity(order.len() * 2);
    let mut events = Vec::with_capacity(order.len());
    for &(k, deliver) in order {
        let r = &requests[k];
        let target = if deliver { r.delivery } else { r.pickup };
        if pos != target {
            let d = space.dist(pos, target);
            actions.push(Action::Move {
                from: pos,
                to: target,
            });
            length += d;
            time += d;
            pos = target;
        }
        if deliver {
            actions.push(Action::Unload { request: r.id });
            completion = time;
        } else {
            if start_time.is_some() && time < r.release {
                time = r.release;
                actions.push(Action::Wait { until: time });
            }
            actions.push(Action::Load { request: r.id });
        }
        events.push((r.id, deliver));
    }
    Plan {
        schedule: Schedule::new(start, actions),
        events,
        length,
        completion,
    }
}

/// Shortest schedule with the default search cap.
pub fn shortest_schedule(
    space: &MetricSpace,
    requests: &[Request],
    start: Point,
    capacity: usize,
) -> Result<Plan, SolverError> {
    Solver::default().shortest_schedule(space, requests, start, capacity)
}

/// `OPT[t]` with the default search cap.
pub fn opt_upto(inst: &Instance, t: f64) -> Result<Plan, SolverError> {
    Solver::default().opt_upto(inst, t)
}

/// Deliver-and-return with the default search cap.
pub fn fastest_delivery_and_return(
    space: &MetricSpace,
    pos: Point,
    destinations: &[Point],
) -> Result<(f64, Vec<usize>), SolverError> {
    Solver::default().fastest_delivery_and_return(space, pos, destinations)
}

/// `OPT(t)` by enumerating every interleaving of the pickup and delivery
/// events, each timed greedily. Shares no code with [`Solver::opt_upto`].
pub fn opt_upto_naive(inst: &Instance, t: f64) -> Result<f64, SolverError> {
    let requests: Vec<Request> = inst
        .released_by(t)
        .iter()
        .map(|&id| *inst.request(id))
        .collect();
    let n = requests.len();
    if n > NAIVE_CAP {
        return Err(SolverError::SearchCapExceeded {
            requested: n,
            cap: NAIVE_CAP,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    struct Walk<'a> {
        space: &'a MetricSpace,
        requests: &'a [Request],
        capacity: usize,
        best: f64,
    }
    // state per request: 0 waiting, 1 on board, 2 delivered
    fn go(w: &mut Walk<'_>, at: Point, time: f64, state: &mut [u8], on_board: usize, done: usize) {
        if done == state.len() {
            w.best = w.best.min(time);
            return;
        }
        for k in 0..state.len() {
            let r = w.requests[k];
            match state[k] {
                0 if on_board < w.capacity => {
                    let arrive = (time + w.space.dist(at, r.pickup)).max(r.release);
                    state[k] = 1;
                    go(w, r.pickup, arrive, state, on_board + 1, done);
                    state[k] = 0;
                }
                1 => {
                    let arrive = time + w.space.dist(at, r.delivery);
                    state[k] = 2;
                    go(w, r.delivery, arrive, state, on_board - 1, done + 1);
                    state[k] = 1;
                }
                _ => {}
            }
        }
    }
    let mut w = Walk {
        space: inst.space(),
        requests: &requests,
        capacity: inst.capacity_limit(),
        best: f64::INFINITY,
    };
    let mut state = vec![0u8; n];
    go(&mut w, inst.origin(), 0.0, &mut state, 0, 0);
    Ok(w.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Capacity};

    fn c(x: f64) -> Point {
        Point::Coord(x)
    }

    fn req(id: usize, a: f64, b: f64, t: f64) -> Request {
        Request {
            id,
            pickup: c(a),
            delivery: c(b),
            release: t,
        }
    }

    #[test]
    fn single_request_length() {
        let p = shortest_schedule(&MetricSpace::Line, &[req(0, 0.0, 1.0, 0.0)], c(0.0), 1).unwrap();
        assert_eq!(p.length, 1.0);
        assert_eq!(p.events, vec![(0, false), (0, true)]);
    }

    #[test]
    fn four_request_construction_start() {
        let eps = 0.1;
        let rs = [
            req(0, 0.0, 1.0, 0.0),
            req(1, 1.0, 0.0, 0.0),
            req(2, 1.0, 2.0 - eps, 0.0),
        ];
        let p = shortest_schedule(&MetricSpace::HalfLine, &rs, c(0.0), 1).unwrap();
        assert!((p.length - 3.8).abs() < 1e-12);
        // serves r1, r3, r2 and ends at the origin
        assert_eq!(
            p.events,
            vec![
                (0, false),
                (0, true),
                (2, false),
                (2, true),
                (1, false),
                (1, true)
            ]
        );
        assert_eq!(p.schedule.end(), Some(c(0.0)));
    }

    #[test]
    fn opposite_directions_unbounded() {
        // enumerating the 2n-event orders gives 1+1+3+1 = 6 at best
        let rs = [req(0, 1.0, 2.0, 0.0), req(1, -1.0, -2.0, 0.0)];
        let p = shortest_schedule(&MetricSpace::Line, &rs, c(0.0), 2).unwrap();
        assert!((p.length - 6.0).abs() < 1e-12);
    }

    #[test]
    fn opt_single_request_forced() {
        let inst = Instance::new(
            MetricSpace::Line,
            Capacity::Finite(1),
            [(c(2.0), c(-1.0), 5.0)],
        )
        .unwrap();
        let p = opt_upto(&inst, f64::INFINITY).unwrap();
        assert!((p.completion - 8.0).abs() < 1e-12);
        assert_eq!(opt_upto_naive(&inst, f64::INFINITY).unwrap(), 8.0);
        assert_eq!(
            validate_schedule(&inst, &p.schedule, 0.0, None, false),
            Ok(8.0)
        );
        // nothing released yet
        assert_eq!(opt_upto(&inst, 1.0).unwrap().completion, 0.0);
        assert_eq!(opt_upto_naive(&inst, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn deliver_and_return() {
        let s = Solver::default();
        let (d, order) = s
            .fastest_delivery_and_return(&MetricSpace::Line, c(0.2), &[c(1.0)])
            .unwrap();
        assert!((d - 1.8).abs() < 1e-12);
        assert_eq!(order, vec![0]);
        let (d, _) = s
            .fastest_delivery_and_return(&MetricSpace::Line, c(-3.0), &[])
            .unwrap();
        assert_eq!(d, 3.0);
        // both visiting orders cost 1 + 2 + 1
        let (d, order) = s
            .fastest_delivery_and_return(&MetricSpace::Line, c(0.0), &[c(1.0), c(-1.0)])
            .unwrap();
        assert_eq!(d, 4.0);
        assert_eq!(order, vec![0, 1]);
    }

    #[test]
    fn search_cap_enforced() {
        let rs: Vec<Request> = (0..3).map(|i| req(i, 0.0, 1.0, 0.0)).collect();
        let err = Solver::new(2)
            .shortest_schedule(&MetricSpace::Line, &rs, c(0.0), 1)
            .unwrap_err();
        assert_eq!(
            err,
            SolverError::SearchCapExceeded {
                requested: 3,
                cap: 2
            }
        );
        let inst = Instance::new(
            MetricSpace::Line,
            Capacity::Finite(1),
            (0..7).map(|_| (c(0.0), c(1.0), 0.0)),
        )
        .unwrap();
        assert!(opt_upto_naive(&inst, 0.0).is_err());
    }

    #[test]
    fn preloaded_requests_are_delivered() {
        let s = Solver::default();
        let loaded = [req(0, 0.0, 3.0, 0.0)];
        let pending = [req(1, 1.0, 2.0, 0.0)];
        let p = s
            .shortest_schedule_loaded(&MetricSpace::Line, c(0.0), &loaded, &pending, 2)
            .unwrap();
        assert_eq!(p.length, 3.0);
        // with capacity one: 0 -> 3 (deliver), back to 1, then 2
        let p = s
            .shortest_schedule_loaded(&MetricSpace::Line, c(0.0), &loaded, &pending, 1)
            .unwrap();
        assert_eq!(p.length, 6.0);
    }

    #[test]
    fn tsp_requests() {
        let rs = [req(0, 2.0, 2.0, 0.0), req(1, -1.0, -1.0, 0.0)];
        let p = shortest_schedule(&MetricSpace::Line, &rs, c(0.0), 1).unwrap();
        assert_eq!(p.length, 4.0);
    }
}
