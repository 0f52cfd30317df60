//! Requests, instances, schedules and traces, plus the JSON instance format.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use thiserror::Error;

use crate::metric::{MetricError, MetricKind, MetricSpace, MetricViolation, Point};
use crate::TOLERANCE;

pub type RequestId = usize;

/// A transportation request `(a, b; t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub pickup: Point,
    pub delivery: Point,
    pub release: f64,
}

/// Server capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capacity {
    Finite(usize),
    Unbounded,
}

impl Capacity {
    /// Capacity as a count, with `Unbounded` resolved to `n`.
    pub fn limit(self, n: usize) -> usize {
        match self {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => n.max(1),
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Unbounded => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Capacity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "unbounded" => Ok(Capacity::Unbounded),
            other => match other.parse::<usize>() {
                Ok(0) => Err("capacity must be at least 1".into()),
                Ok(c) => Ok(Capacity::Finite(c)),
                Err(_) => Err(format!("invalid capacity `{other}`")),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("request {id}: {source}")]
    Point {
        id: RequestId,
        #[source]
        source: MetricError,
    },
    #[error("request {id} has invalid release time {release}")]
    Release { id: RequestId, release: f64 },
    #[error("capacity must be a positive integer or \"inf\"")]
    Capacity,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("metric is invalid: {0}")]
    Violation(#[from] MetricViolation),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// A validated dial-a-ride instance. Requests keep their input order (which
/// defines their ids); `by_release` lists ids sorted by release time.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    space: MetricSpace,
    capacity: Capacity,
    requests: Vec<Request>,
    by_release: Vec<RequestId>,
}

impl Instance {
    /// Builds an instance from `(pickup, delivery, release)` triples.
    pub fn new(
        space: MetricSpace,
        capacity: Capacity,
        triples: impl IntoIterator<Item = (Point, Point, f64)>,
    ) -> Result<Self, InstanceError> {
        space.validate()?;
        if capacity == Capacity::Finite(0) {
            return Err(InstanceError::Capacity);
        }
        let mut requests = Vec::new();
        for (id, (pickup, delivery, release)) in triples.into_iter().enumerate() {
            for p in [pickup, delivery] {
                if matches!(p, Point::Transit { .. }) {
                    return Err(InstanceError::Point {
                        id,
                        source: MetricError::InvalidPoint {
                            point: p,
                            kind: space.kind(),
                        },
                    });
                }
                space
                    .check_point(p)
                    .map_err(|source| InstanceError::Point { id, source })?;
            }
            if !release.is_finite() || release < 0.0 {
                return Err(InstanceError::Release { id, release });
            }
            requests.push(Request {
                id,
                pickup,
                delivery,
                release,
            });
        }
        let mut by_release: Vec<RequestId> = (0..requests.len()).collect();
        by_release.sort_by(|&x, &y| {
            requests[x]
                .release
                .total_cmp(&requests[y].release)
                .then(x.cmp(&y))
        });
        Ok(Instance {
            space,
            capacity,
            requests,
            by_release,
        })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    /// Effective capacity as a count.
    pub fn capacity_limit(&self) -> usize {
        self.capacity.limit(self.requests.len())
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn request(&self, id: RequestId) -> &Request {
        &self.requests[id]
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn origin(&self) -> Point {
        self.space.origin()
    }

    /// Request ids in order of release time (ties by id).
    pub fn by_release(&self) -> &[RequestId] {
        &self.by_release
    }

    /// Number of requests released no later than `t` (within tolerance).
    pub fn released_count(&self, t: f64) -> usize {
        self.by_release
            .partition_point(|&id| self.requests[id].release <= t + TOLERANCE)
    }

    /// Ids released no later than `t`.
    pub fn released_by(&self, t: f64) -> &[RequestId] {
        &self.by_release[..self.released_count(t)]
    }

    /// Release times grouped into batches of equal (within tolerance) time.
    pub fn release_batches(&self) -> Vec<(f64, Vec<RequestId>)> {
        let mut out: Vec<(f64, Vec<RequestId>)> = Vec::new();
        for &id in &self.by_release {
            let t = self.requests[id].release;
            match out.last_mut() {
                Some((bt, ids)) if t <= *bt + TOLERANCE => ids.push(id),
                _ => out.push((t, vec![id])),
            }
        }
        out
    }

    /// Parses the JSON instance format.
    pub fn from_json_str(text: &str) -> Result<Self, InstanceError> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self, InstanceError> {
        let obj = v
            .as_object()
            .ok_or_else(|| field_err("<root>", "expected an object"))?;
        let metric = obj
            .get("metric")
            .ok_or_else(|| field_err("metric", "missing"))?;
        let space = parse_metric(metric)?;
        let capacity = match obj.get("capacity") {
            None => return Err(field_err("capacity", "missing")),
            Some(Value::String(s)) if s == "inf" => Capacity::Unbounded,
            Some(Value::Number(n)) => match n.as_u64() {
                Some(0) => return Err(InstanceError::Capacity),
                Some(c) => Capacity::Finite(c as usize),
                None => return Err(InstanceError::Capacity),
            },
            Some(_) => return Err(InstanceError::Capacity),
        };
        let reqs = obj
            .get("requests")
            .and_then(Value::as_array)
            .ok_or_else(|| field_err("requests", "missing or not an array"))?;
        let mut triples = Vec::with_capacity(reqs.len());
        for (i, r) in reqs.iter().enumerate() {
            let get = |key: &str| {
                r.get(key)
                    .ok_or_else(|| field_err(format!("requests[{i}].{key}"), "missing"))
            };
            let a = parse_point(&space, get("a")?, &format!("requests[{i}].a"))?;
            let b = parse_point(&space, get("b")?, &format!("requests[{i}].b"))?;
            let t = get("t")?
                .as_f64()
                .ok_or_else(|| field_err(format!("requests[{i}].t"), "expected a number"))?;
            triples.push((a, b, t));
        }
        Instance::new(space, capacity, triples)
    }

    pub fn to_json(&self) -> Value {
        let metric = match &self.space {
            MetricSpace::Line => json!({"type": "line"}),
            MetricSpace::HalfLine => json!({"type": "halfline"}),
            MetricSpace::Matrix(m) => json!({"type": "matrix", "d": m.rows()}),
        };
        let capacity = match self.capacity {
            Capacity::Finite(c) => json!(c),
            Capacity::Unbounded => json!("inf"),
        };
        let requests: Vec<Value> = self
            .requests
            .iter()
            .map(
                |r| json!({"a": point_json(r.pickup), "b": point_json(r.delivery), "t": r.release}),
            )
            .collect();
        json!({"metric": metric, "capacity": capacity, "requests": requests})
    }

    /// A copy restricted to the given requests, renumbered in the given order.
    pub fn subset(&self, ids: &[RequestId]) -> Instance {
        let triples = ids.iter().map(|&id| {
            let r = &self.requests[id];
            (r.pickup, r.delivery, r.release)
        });
        Instance::new(self.space.clone(), self.capacity, triples)
            .expect("subset of a valid instance is valid")
    }
}

fn point_json(p: Point) -> Value {
    serde_json::to_value(p).expect("points serialize")
}

fn parse_metric(v: &Value) -> Result<MetricSpace, InstanceError> {
    let kind = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| field_err("metric.type", "missing or not a string"))?;
    match kind {
        "line" => Ok(MetricSpace::Line),
        "halfline" => Ok(MetricSpace::HalfLine),
        "matrix" => {
            let rows = v
                .get("d")
                .and_then(Value::as_array)
                .ok_or_else(|| field_err("metric.d", "missing or not an array"))?;
            let mut out = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let row = row
                    .as_array()
                    .ok_or_else(|| field_err(format!("metric.d[{i}]"), "not an array"))?;
                let vals = row
                    .iter()
                    .map(|x| {
                        x.as_f64()
                            .ok_or_else(|| field_err(format!("metric.d[{i}]"), "non-numeric entry"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(vals);
            }
            Ok(MetricSpace::matrix(out)?)
        }
        other => Err(field_err(
            "metric.type",
            format!("unknown metric `{other}`"),
        )),
    }
}

fn parse_point(space: &MetricSpace, v: &Value, field: &str) -> Result<Point, InstanceError> {
    match space.kind() {
        MetricKind::Line | MetricKind::HalfLine => v
            .as_f64()
            .map(Point::Coord)
            .ok_or_else(|| field_err(field, "expected a number")),
        MetricKind::Matrix => v
            .as_u64()
            .map(|i| Point::Node(i as usize))
            .ok_or_else(|| field_err(field, "expected a node index")),
    }
}

/// One step of a server schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Action {
    Move { from: Point, to: Point },
    Load { request: RequestId },
    Unload { request: RequestId },
    Wait { until: f64 },
}

/// A sequence of server actions starting at `start`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub start: Option<Point>,
    pub actions: Vec<Action>,
}

impl Schedule {
    pub fn new(start: Point, actions: Vec<Action>) -> Self {
        Schedule {
            start: Some(start),
            actions,
        }
    }

    /// Total distance moved; waiting does not count.
    pub fn length(&self, space: &MetricSpace) -> f64 {
        self.actions
            .iter()
            .map(|a| match *a {
                Action::Move { from, to } => space.dist(from, to),
                _ => 0.0,
            })
            .sum()
    }

    /// Position after the last move, or the start.
    pub fn end(&self) -> Option<Point> {
        self.actions
            .iter()
            .rev()
            .find_map(|a| match *a {
                Action::Move { to, .. } => Some(to),
                _ => None,
            })
            .or(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Sum of move distances.
pub fn schedule_length(space: &MetricSpace, schedule: &Schedule) -> f64 {
    schedule.length(space)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleViolation {
    #[error("action {index}: move starts at {from} but server is at {at}")]
    BrokenChain {
        index: usize,
        from: Point,
        at: Point,
    },
    #[error("action {index}: invalid point: {source}")]
    BadPoint {
        index: usize,
        #[source]
        source: MetricError,
    },
    #[error("action {index}: unknown request {request}")]
    UnknownRequest { index: usize, request: RequestId },
    #[error("action {index}: request {request} loaded away from its pickup point")]
    LoadAwayFromPickup { index: usize, request: RequestId },
    #[error("action {index}: request {request} loaded at {time} before its release {release}")]
    LoadBeforeRelease {
        index: usize,
        request: RequestId,
        time: f64,
        release: f64,
    },
    #[error("action {index}: request {request} loaded twice")]
    LoadedTwice { index: usize, request: RequestId },
    #[error("action {index}: capacity {capacity} exceeded")]
    CapacityExceeded { index: usize, capacity: usize },
    #[error("action {index}: request {request} unloaded without being loaded")]
    UnloadNotLoaded { index: usize, request: RequestId },
    #[error("action {index}: request {request} unloaded away from its delivery point")]
    UnloadAwayFromDelivery { index: usize, request: RequestId },
    #[error("action {index}: wait until {until} is in the past (now {time})")]
    WaitBackwards { index: usize, until: f64, time: f64 },
    #[error("request {request} is never delivered")]
    NotServed { request: RequestId },
}

/// Replays `schedule` at unit speed from `start_time` and returns the time of
/// its last unload (or `start_time` if it unloads nothing).
///
/// Every request of `scope` must be loaded and unloaded exactly once; when
/// `scope` is `None` every request of the instance is in scope. Requests
/// outside the scope may not be touched. With `ignore_releases` the release
/// times are not enforced.
pub fn validate_schedule(
    inst: &Instance,
    schedule: &Schedule,
    start_time: f64,
    scope: Option<&[RequestId]>,
    ignore_releases: bool,
) -> Result<f64, ScheduleViolation> {
    validate_with_load(inst, schedule, start_time, scope, &[], ignore_releases)
}

/// Like [`validate_schedule`] but with `preloaded` requests already on board.
pub fn validate_with_load(
    inst: &Instance,
    schedule: &Schedule,
    start_time: f64,
    scope: Option<&[RequestId]>,
    preloaded: &[RequestId],
    ignore_releases: bool,
) -> Result<f64, ScheduleViolation> {
    let space = inst.space();
    let n = inst.len();
    let in_scope: Vec<bool> = match scope {
        Some(ids) => {
            let mut v = vec![false; n];
            for &id in ids {
                if id < n {
                    v[id] = true;
                }
            }
            v
        }
        None => vec![true; n],
    };
    let cap = inst.capacity_limit();
    #[derive(Clone, Copy, PartialEq)]
    enum St {
        Waiting,
        Loaded,
        Done,
    }
    let mut state = vec![St::Waiting; n];
    for &id in preloaded {
        state[id] = St::Loaded;
    }
    let mut on_board = preloaded.len();
    let mut pos = schedule.start.unwrap_or_else(|| inst.origin());
    let mut time = start_time;
    let mut completion = start_time;
    let close = |x: Point, y: Point| space.dist(x, y) <= TOLERANCE;

    for (index, action) in schedule.actions.iter().enumerate() {
        match *action {
            Action::Move { from, to } => {
                for p in [from, to] {
                    space
                        .check_point(p)
                        .map_err(|source| ScheduleViolation::BadPoint { index, source })?;
                }
                if !close(from, pos) {
                    return Err(ScheduleViolation::BrokenChain {
                        index,
                        from,
                        at: pos,
                    });
                }
                time += space.dist(from, to);
                pos = to;
            }
            Action::Wait { until } => {
                if until < time - TOLERANCE {
                    return Err(ScheduleViolation::WaitBackwards { index, until, time });
                }
                time = time.max(until);
            }
            Action::Load { request } => {
                if request >= n || !in_scope[request] {
                    return Err(ScheduleViolation::UnknownRequest { index, request });
                }
                let r = inst.request(request);
                if state[request] != St::Waiting {
                    return Err(ScheduleViolation::LoadedTwice { index, request });
                }
                if !close(pos, r.pickup) {
                    return Err(ScheduleViolation::LoadAwayFromPickup { index, request });
                }
                if !ignore_releases && time < r.release - TOLERANCE {
                    return Err(ScheduleViolation::LoadBeforeRelease {
                        index,
                        request,
                        time,
                        release: r.release,
                    });
                }
                if on_board + 1 > cap {
                    return Err(ScheduleViolation::CapacityExceeded {
                        index,
                        capacity: cap,
                    });
                }
                on_board += 1;
                state[request] = St::Loaded;
            }
            Action::Unload { request } => {
                if request >= n || !in_scope[request] {
                    return Err(ScheduleViolation::UnknownRequest { index, request });
                }
                if state[request] != St::Loaded {
                    return Err(ScheduleViolation::UnloadNotLoaded { index, request });
                }
                if !close(pos, inst.request(request).delivery) {
                    return Err(ScheduleViolation::UnloadAwayFromDelivery { index, request });
                }
                on_board -= 1;
                state[request] = St::Done;
                completion = time;
            }
        }
    }
    if let Some(request) = (0..n).find(|&id| in_scope[id] && state[id] != St::Done) {
        return Err(ScheduleViolation::NotServed { request });
    }
    Ok(completion)
}

/// Record of one schedule started by an online algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    /// 1-based schedule counter.
    pub i: usize,
    /// Start time.
    pub t: f64,
    /// Start position.
    pub p: Point,
    /// Planned length.
    pub length: f64,
    pub interrupted: bool,
    pub requests: Vec<RequestId>,
    /// Position where the planned schedule ends.
    pub end: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Release { requests: Vec<RequestId> },
    Load { request: RequestId },
    Unload { request: RequestId },
    StartSchedule { i: usize },
    Interrupt { i: usize },
    DeliverAndReturn,
    Wait { until: f64 },
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Full record of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub schedules: Vec<ScheduleRecord>,
    pub events: Vec<Event>,
    pub completion: f64,
    /// Everything the server did, from the origin at time 0.
    pub actions: Vec<Action>,
}

impl Trace {
    /// The executed actions as a schedule starting at the origin.
    pub fn executed(&self, origin: Point) -> Schedule {
        Schedule::new(origin, self.actions.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(release: f64, cap: Capacity) -> Instance {
        Instance::new(
            MetricSpace::Line,
            cap,
            [(Point::Coord(0.0), Point::Coord(1.0), release)],
        )
        .unwrap()
    }

    fn serve_first() -> Schedule {
        Schedule::new(
            Point::Coord(0.0),
            vec![
                Action::Load { request: 0 },
                Action::Move {
                    from: Point::Coord(0.0),
                    to: Point::Coord(1.0),
                },
                Action::Unload { request: 0 },
            ],
        )
    }

    #[test]
    fn parse_halfline() {
        let inst = Instance::from_json_str(
            r#"{"metric":{"type":"halfline"},"capacity":1,"requests":[{"a":0,"b":1,"t":0}]}"#,
        )
        .unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst.request(0).delivery, Point::Coord(1.0));
        assert_eq!(inst.capacity(), Capacity::Finite(1));
    }

    #[test]
    fn parse_rejects_zero_capacity() {
        let err =
            Instance::from_json_str(r#"{"metric":{"type":"line"},"capacity":0,"requests":[]}"#)
                .unwrap_err();
        assert!(matches!(err, InstanceError::Capacity));
    }

    #[test]
    fn parse_rejects_negative_halfline_point() {
        let err = Instance::from_json_str(
            r#"{"metric":{"type":"halfline"},"capacity":1,"requests":[{"a":-1,"b":1,"t":0}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, InstanceError::Point { id: 0, .. }));
    }

    #[test]
    fn parse_rejects_negative_release_and_bad_metric() {
        assert!(matches!(
            Instance::from_json_str(
                r#"{"metric":{"type":"line"},"capacity":"inf","requests":[{"a":0,"b":1,"t":-1}]}"#
            ),
            Err(InstanceError::Release { .. })
        ));
        assert!(matches!(
            Instance::from_json_str(
                r#"{"metric":{"type":"matrix","d":[[0,1],[2,0]]},"capacity":1,"requests":[]}"#
            ),
            Err(InstanceError::Violation(_))
        ));
        assert!(matches!(
            Instance::from_json_str(r#"{"metric":{"type":"line"},"capacity":1}"#),
            Err(InstanceError::Field { .. })
        ));
        assert!(matches!(
            Instance::from_json_str("{not json"),
            Err(InstanceError::Json(_))
        ));
    }

    #[test]
    fn matrix_instance_json() {
        let text = r#"{"metric":{"type":"matrix","d":[[0,1],[1,0]]},"capacity":"inf","requests":[{"a":1,"b":0,"t":2.5}]}"#;
        let inst = Instance::from_json_str(text).unwrap();
        assert_eq!(inst.request(0).pickup, Point::Node(1));
        assert_eq!(inst.capacity(), Capacity::Unbounded);
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn validate_single_request() {
        let inst = single(0.0, Capacity::Finite(1));
        assert_eq!(
            validate_schedule(&inst, &serve_first(), 0.0, None, false),
            Ok(1.0)
        );
    }

    #[test]
    fn validate_load_before_release() {
        let inst = single(2.0, Capacity::Finite(1));
        assert!(matches!(
            validate_schedule(&inst, &serve_first(), 0.0, None, false),
            Err(ScheduleViolation::LoadBeforeRelease { index: 0, .. })
        ));
        assert_eq!(
            validate_schedule(&inst, &serve_first(), 0.0, None, true),
            Ok(1.0)
        );
    }

    #[test]
    fn validate_capacity() {
        let inst = Instance::new(
            MetricSpace::Line,
            Capacity::Finite(1),
            [
                (Point::Coord(0.0), Point::Coord(1.0), 0.0),
                (Point::Coord(0.0), Point::Coord(2.0), 0.0),
            ],
        )
        .unwrap();
        let s = Schedule::new(
            Point::Coord(0.0),
            vec![Action::Load { request: 0 }, Action::Load { request: 1 }],
        );
        assert!(matches!(
            validate_schedule(&inst, &s, 0.0, None, false),
            Err(ScheduleViolation::CapacityExceeded { index: 1, .. })
        ));
    }

    #[test]
    fn validate_rejects_preemptive_unload_and_broken_chain() {
        let inst = single(0.0, Capacity::Unbounded);
        let s = Schedule::new(
            Point::Coord(0.0),
            vec![
                Action::Load { request: 0 },
                Action::Move {
                    from: Point::Coord(0.0),
                    to: Point::Coord(0.5),
                },
                Action::Unload { request: 0 },
            ],
        );
        assert!(matches!(
            validate_schedule(&inst, &s, 0.0, None, false),
            Err(ScheduleViolation::UnloadAwayFromDelivery { index: 2, .. })
        ));
        let s = Schedule::new(
            Point::Coord(0.0),
            vec![Action::Move {
                from: Point::Coord(1.0),
                to: Point::Coord(0.5),
            }],
        );
        assert!(matches!(
            validate_schedule(&inst, &s, 0.0, None, false),
            Err(ScheduleViolation::BrokenChain { index: 0, .. })
        ));
        let s = Schedule::new(Point::Coord(0.0), vec![]);
        assert_eq!(
            validate_schedule(&inst, &s, 0.0, None, false),
            Err(ScheduleViolation::NotServed { request: 0 })
        );
    }

    #[test]
    fn lengths() {
        let c = Point::Coord;
        let s = Schedule::new(
            c(0.0),
            vec![
                Action::Move {
                    from: c(0.0),
                    to: c(1.0),
                },
                Action::Move {
                    from: c(1.0),
                    to: c(0.0),
                },
            ],
        );
        assert_eq!(schedule_length(&MetricSpace::Line, &s), 2.0);
        assert_eq!(
            schedule_length(&MetricSpace::Line, &Schedule::default()),
            0.0
        );
        let s = Schedule::new(
            c(0.0),
            vec![
                Action::Move {
                    from: c(0.0),
                    to: c(2.0),
                },
                Action::Wait { until: 10.0 },
                Action::Move {
                    from: c(2.0),
                    to: c(1.0),
                },
            ],
        );
        assert_eq!(schedule_length(&MetricSpace::Line, &s), 3.0);
    }

    #[test]
    fn release_batches_group_ties() {
        let inst = Instance::new(
            MetricSpace::Line,
            Capacity::Finite(1),
            [
                (Point::Coord(0.0), Point::Coord(1.0), 2.0),
                (Point::Coord(0.0), Point::Coord(1.0), 0.0),
                (Point::Coord(0.0), Point::Coord(1.0), 2.0),
            ],
        )
        .unwrap();
        assert_eq!(
            inst.release_batches(),
            vec![(0.0, vec![1]), (2.0, vec![0, 2])]
        );
        assert_eq!(inst.released_count(1.0), 1);
        assert_eq!(inst.released_count(2.0), 3);
    }
}
