//! Simulation and analysis of the open online dial-a-ride problem.
//!
//! The crate provides the `LAZY(α)` online algorithm together with the
//! REPLAN and IGNORE baselines, exact offline optima, lower-bound instance
//! generators, a competitive-ratio fuzzer and a factor-revealing MILP solved
//! with a small dense simplex.

pub mod experiments;
pub mod factor;
pub mod lp;
pub mod metric;
pub mod model;
pub mod offline;
pub mod online;

/// Global comparison tolerance: `a ≤ b` is evaluated as `a ≤ b + TOLERANCE`.
pub const TOLERANCE: f64 = 1e-9;

pub use metric::{MetricKind, MetricSpace, Point};
pub use model::{
    validate_schedule, Action, Capacity, Instance, Request, RequestId, Schedule, Trace,
};
pub use offline::{opt_upto, opt_upto_naive, shortest_schedule, Plan, Solver, SolverError};
pub use online::{simulate, Algorithm};
