//! Continuous-time simulation of online dial-a-ride algorithms.
//!
//! The server moves at unit speed. Two kinds of events drive the simulation:
//! release batches (all requests sharing a release time arrive together) and
//! the completion of the server's current command. At a timestamp where both
//! happen, the release is handled first and the idle handler runs after.
//!
//! `LAZY(α)` reacts to a release batch by checking whether it can deliver
//! everything on board and be back at the origin by `α·OPT(t)`; if so it
//! aborts whatever it is doing and heads home. When it becomes idle it waits
//! until `α·OPT(t)` if that lies in the future, otherwise it starts a
//! shortest schedule over all released but unserved requests.

mod checks;

pub use checks::{
    check_alpha_good, check_consecutive_starts, check_structure, AlphaGood, OptCache,
};

use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

use crate::metric::Point;
use crate::model::{Action, Event, EventKind, Instance, Request, RequestId, ScheduleRecord, Trace};
use crate::offline::{Solver, SolverError};
use crate::TOLERANCE;

/// The online algorithms the engine can run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Lazy {
        alpha: f64,
    },
    /// Restart with a fresh shortest schedule on every release.
    Replan,
    /// Follow a shortest schedule over what is known when idle; never
    /// interrupt.
    Ignore,
}

impl Algorithm {
    pub fn lazy(alpha: f64) -> Self {
        Algorithm::Lazy { alpha }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lazy { .. } => "lazy",
            Algorithm::Replan => "replan",
            Algorithm::Ignore => "ignore",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("waiting parameter must be a finite number >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("offline solver failed at time {time}: {source}")]
    Solver {
        time: f64,
        #[source]
        source: SolverError,
    },
}

/// Engine settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub solver: Solver,
    pub tolerance: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            solver: Solver::default(),
            tolerance: TOLERANCE,
        }
    }
}

/// Runs `algo` on `inst` with default options.
pub fn simulate(inst: &Instance, algo: Algorithm) -> Result<Trace, SimError> {
    simulate_with(inst, algo, SimOptions::default())
}

pub fn simulate_with(
    inst: &Instance,
    algo: Algorithm,
    opts: SimOptions,
) -> Result<Trace, SimError> {
    if let Algorithm::Lazy { alpha } = algo {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(SimError::InvalidAlpha(alpha));
        }
    }
    Engine::new(inst, algo, opts).run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Step {
    Move(Point),
    Load(RequestId),
    Unload(RequestId),
}

#[derive(Debug, Clone, PartialEq)]
enum Command {
    Idle,
    Waiting {
        until: f64,
    },
    /// Following schedule `record` (an index into the trace's schedules).
    Schedule {
        record: usize,
        steps: VecDeque<Step>,
    },
    /// Delivering everything on board, then heading to the origin.
    Return {
        steps: VecDeque<Step>,
    },
}

/// What the server is doing right now, as seen by the LAZY handlers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Idle,
    Waiting,
    FollowingSchedule,
    DeliverAndReturn,
}

/// Snapshot of the server handed to the LAZY decision rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub time: f64,
    pub position: Point,
    /// Delivery points of the requests on board.
    pub loaded_destinations: Vec<Point>,
    /// Released but undelivered requests.
    pub pending: usize,
    pub command: CommandKind,
}

/// Outcome of LAZY's release handler.
#[derive(Debug, Clone, PartialEq)]
pub enum RequestDecision {
    /// Deliver the loaded requests in this order (indices into
    /// `loaded_destinations`) and return to the origin by `deadline`.
    DeliverAndReturn {
        order: Vec<usize>,
        finish: f64,
    },
    Continue {
        finish: f64,
        deadline: f64,
    },
}

/// Outcome of LAZY's idle handler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdleDecision {
    WaitUntil(f64),
    StartSchedule,
    Idle,
}

/// LAZY's release rule: return home if everything on board can be delivered
/// and the origin reached by `α·OPT(t)`.
pub fn lazy_on_request(
    solver: &Solver,
    inst: &Instance,
    state: &ServerState,
    alpha: f64,
    opt_now: f64,
    tolerance: f64,
) -> Result<RequestDecision, SolverError> {
    let (dur, order) = solver.fastest_delivery_and_return(
        inst.space(),
        state.position,
        &state.loaded_destinations,
    )?;
    let finish = state.time + dur;
    let deadline = alpha * opt_now;
    Ok(if finish <= deadline + tolerance {
        RequestDecision::DeliverAndReturn { order, finish }
    } else {
        RequestDecision::Continue { finish, deadline }
    })
}

/// LAZY's idle rule.
pub fn lazy_on_idle(state: &ServerState, alpha: f64, opt_now: f64, tolerance: f64) -> IdleDecision {
    let threshold = alpha * opt_now;
    if threshold > state.time + tolerance {
        IdleDecision::WaitUntil(threshold)
    } else if state.pending > 0 {
        IdleDecision::StartSchedule
    } else {
        IdleDecision::Idle
    }
}

struct Engine<'a> {
    inst: &'a Instance,
    algo: Algorithm,
    solver: Solver,
    tol: f64,
    time: f64,
    pos: Point,
    loaded: BTreeSet<RequestId>,
    pending: BTreeSet<RequestId>,
    command: Command,
    batches: Vec<(f64, Vec<RequestId>)>,
    next_batch: usize,
    opt: OptCache<'a>,
    schedules: Vec<ScheduleRecord>,
    events: Vec<Event>,
    actions: Vec<Action>,
    completion: f64,
}

impl<'a> Engine<'a> {
    fn new(inst: &'a Instance, algo: Algorithm, opts: SimOptions) -> Self {
        Engine {
            inst,
            algo,
            solver: opts.solver,
            tol: opts.tolerance,
            time: 0.0,
            pos: inst.origin(),
            loaded: BTreeSet::new(),
            pending: BTreeSet::new(),
            command: Command::Idle,
            batches: inst.release_batches(),
            next_batch: 0,
            opt: OptCache::new(inst, opts.solver),
            schedules: Vec::new(),
            events: Vec::new(),
            actions: Vec::new(),
            completion: 0.0,
        }
    }

    fn run(mut self) -> Result<Trace, SimError> {
        loop {
            let limit = self.batches.get(self.next_batch).map(|b| b.0);
            if self.command == Command::Idle && limit.is_none() {
                break;
            }
            let limit = limit.unwrap_or(f64::INFINITY);
            if self.advance(limit) {
                self.command = Command::Idle;
            }
            if self.time >= limit {
                self.release_batch()?;
            }
            if self.command == Command::Idle {
                self.on_idle()?;
            }
        }
        Ok(Trace {
            schedules: self.schedules,
            events: self.events,
            completion: self.completion,
            actions: self.actions,
        })
    }

    fn log(&mut self, kind: EventKind) {
        self.events.push(Event {
            time: self.time,
            kind,
        });
    }

    fn fail(&self, source: SolverError) -> SimError {
        SimError::Solver {
            time: self.time,
            source,
        }
    }

    fn opt_now(&mut self) -> Result<f64, SimError> {
        let t = self.time;
        self.opt
            .get(t)
            .map_err(|source| SimError::Solver { time: t, source })
    }

    fn wait_to(&mut self, t: f64) {
        if t > self.time {
            self.actions.push(Action::Wait { until: t });
            self.time = t;
        }
    }

    /// Runs the current command until it completes or time reaches `limit`.
    /// Returns true if the command completed.
    fn advance(&mut self, limit: f64) -> bool {
        match self.command {
            Command::Idle => {
                if limit.is_finite() {
                    self.wait_to(limit);
                }
                false
            }
            Command::Waiting { until } => {
                if until <= limit {
                    self.wait_to(until);
                    true
                } else {
                    self.wait_to(limit);
                    false
                }
            }
            Command::Schedule { .. } | Command::Return { .. } => self.follow(limit),
        }
    }

    fn steps_mut(&mut self) -> Option<&mut VecDeque<Step>> {
        match &mut self.command {
            Command::Schedule { steps, .. } | Command::Return { steps } => Some(steps),
            _ => None,
        }
    }

    /// Executes route steps up to time `limit`; loads and unloads at the
    /// arrival point happen at the arrival time.
    fn follow(&mut self, limit: f64) -> bool {
        let space = self.inst.space();
        loop {
            let Some(step) = self.steps_mut().and_then(|s| s.front().copied()) else {
                return true;
            };
            match step {
                Step::Load(id) => {
                    self.loaded.insert(id);
                    self.actions.push(Action::Load { request: id });
                    self.log(EventKind::Load { request: id });
                }
                Step::Unload(id) => {
                    self.loaded.remove(&id);
                    self.pending.remove(&id);
                    self.actions.push(Action::Unload { request: id });
                    self.completion = self.time;
                    self.log(EventKind::Unload { request: id });
                }
                Step::Move(target) => {
                    let d = space.dist(self.pos, target);
                    if self.time + d <= limit {
                        self.actions.push(Action::Move {
                            from: self.pos,
                            to: target,
                        });
                        self.time += d;
                        self.pos = target;
                    } else {
                        let travelled = limit - self.time;
                        let to = space.advance(self.pos, target, travelled);
                        if travelled > 0.0 {
                            self.actions.push(Action::Move { from: self.pos, to });
                        }
                        self.pos = to;
                        self.time = limit;
                        return false;
                    }
                }
            }
            self.steps_mut().map(|s| s.pop_front());
        }
    }

    fn release_batch(&mut self) -> Result<(), SimError> {
        let (t, ids) = self.batches[self.next_batch].clone();
        self.next_batch += 1;
        self.time = self.time.max(t);
        self.pending.extend(ids.iter().copied());
        self.log(EventKind::Release { requests: ids });
        match self.algo {
            Algorithm::Lazy { alpha } => self.lazy_request(alpha),
            Algorithm::Replan => self.replan(),
            Algorithm::Ignore => Ok(()),
        }
    }

    fn state(&self) -> ServerState {
        ServerState {
            time: self.time,
            position: self.pos,
            loaded_destinations: self
                .loaded
                .iter()
                .map(|&id| self.inst.request(id).delivery)
                .collect(),
            pending: self.pending.len(),
            command: match self.command {
                Command::Idle => CommandKind::Idle,
                Command::Waiting { .. } => CommandKind::Waiting,
                Command::Schedule { .. } => CommandKind::FollowingSchedule,
                Command::Return { .. } => CommandKind::DeliverAndReturn,
            },
        }
    }

    fn lazy_request(&mut self, alpha: f64) -> Result<(), SimError> {
        let opt = self.opt_now()?;
        let state = self.state();
        let decision = lazy_on_request(&self.solver, self.inst, &state, alpha, opt, self.tol)
            .map_err(|e| self.fail(e))?;
        if let RequestDecision::DeliverAndReturn { order, .. } = decision {
            if let Command::Schedule { record, .. } = self.command {
                self.schedules[record].interrupted = true;
                self.log(EventKind::Interrupt {
                    i: self.schedules[record].i,
                });
            }
            let loaded: Vec<RequestId> = self.loaded.iter().copied().collect();
            let mut steps = VecDeque::new();
            for k in order {
                let id = loaded[k];
                steps.push_back(Step::Move(self.inst.request(id).delivery));
                steps.push_back(Step::Unload(id));
            }
            steps.push_back(Step::Move(self.inst.origin()));
            self.command = Command::Return { steps };
            self.log(EventKind::DeliverAndReturn);
            if self.follow(self.time) {
                self.command = Command::Idle;
            }
        }
        Ok(())
    }

    fn replan(&mut self) -> Result<(), SimError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        if let Command::Schedule { record, .. } = self.command {
            self.schedules[record].interrupted = true;
            self.log(EventKind::Interrupt {
                i: self.schedules[record].i,
            });
        }
        self.start_schedule()
    }

    fn on_idle(&mut self) -> Result<(), SimError> {
        loop {
            match self.algo {
                Algorithm::Lazy { alpha } => {
                    let opt = self.opt_now()?;
                    match lazy_on_idle(&self.state(), alpha, opt, self.tol) {
                        IdleDecision::WaitUntil(until) => {
                            self.command = Command::Waiting { until };
                            self.log(EventKind::Wait { until });
                            return Ok(());
                        }
                        IdleDecision::StartSchedule => self.start_schedule()?,
                        IdleDecision::Idle => {
                            self.log(EventKind::Idle);
                            return Ok(());
                        }
                    }
                }
                Algorithm::Replan | Algorithm::Ignore => {
                    if self.pending.is_empty() {
                        self.log(EventKind::Idle);
                        return Ok(());
                    }
                    self.start_schedule()?;
                }
            }
            // A schedule made only of actions at the current point finishes
            // at once; the server is idle again.
            if self.follow(self.time) {
                self.command = Command::Idle;
            } else {
                return Ok(());
            }
        }
    }

    /// Plans a shortest schedule over everything pending from the current
    /// position, delivering whatever is on board.
    fn start_schedule(&mut self) -> Result<(), SimError> {
        let inst = self.inst;
        let loaded: Vec<Request> = self.loaded.iter().map(|&id| *inst.request(id)).collect();
        let waiting: Vec<Request> = self
            .pending
            .iter()
            .filter(|id| !self.loaded.contains(id))
            .map(|&id| *inst.request(id))
            .collect();
        let plan = self
            .solver
            .shortest_schedule_loaded(
                inst.space(),
                self.pos,
                &loaded,
                &waiting,
                inst.capacity_limit(),
            )
            .map_err(|e| self.fail(e))?;
        let i = self.schedules.len() + 1;
        let mut steps = VecDeque::with_capacity(plan.schedule.actions.len());
        for a in &plan.schedule.actions {
            steps.push_back(match *a {
                Action::Move { to, .. } => Step::Move(to),
                Action::Load { request } => Step::Load(request),
                Action::Unload { request } => Step::Unload(request),
                Action::Wait { .. } => unreachable!("release-free schedules never wait"),
            });
        }
        self.schedules.push(ScheduleRecord {
            i,
            t: self.time,
            p: self.pos,
            length: plan.length,
            interrupted: false,
            requests: self.pending.iter().copied().collect(),
            end: plan.schedule.end().unwrap_or(self.pos),
        });
        self.command = Command::Schedule {
            record: self.schedules.len() - 1,
            steps,
        };
        self.log(EventKind::StartSchedule { i });
        Ok(())
    }
}
