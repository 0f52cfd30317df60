//! Lower-bound instances, competitive ratios, random fuzzing and the
//! lower-bound sweep over the waiting parameter.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metric::{MetricKind, MetricSpace, Point};
use crate::model::{Capacity, Instance};
use crate::offline::{Solver, SolverError};
use crate::online::{simulate_with, Algorithm, SimError, SimOptions};
use crate::TOLERANCE;

/// `(1 + √3) / 2`, where `1 + α` and `2 + 1/(2α)` meet.
pub fn critical_halfline_alpha() -> f64 {
    (1.0 + 3f64.sqrt()) / 2.0
}

/// `1/2 + √(11/12)`.
pub fn general_alpha() -> f64 {
    0.5 + (11.0f64 / 12.0).sqrt()
}

pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("alpha = {0} is outside [1, (1+sqrt 3)/2)")]
    AlphaOutOfRange(f64),
    #[error("epsilon must be positive and small, got {0}")]
    BadEpsilon(f64),
    #[error("invalid fuzz configuration: {0}")]
    Config(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("instance {index} failed: {source}\ninstance: {instance}")]
    Instance {
        index: usize,
        instance: String,
        #[source]
        source: Box<ExperimentError>,
    },
}

/// Four requests on the half-line that make `LAZY(α)` finish at
/// `8α + 2 − (2α+2)ε` while the optimum finishes at `4α`.
pub fn gen_halfline_lb(
    alpha: f64,
    epsilon: f64,
    capacity: Capacity,
) -> Result<Instance, ExperimentError> {
    if !(1.0..critical_halfline_alpha()).contains(&alpha) {
        return Err(ExperimentError::AlphaOutOfRange(alpha));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(ExperimentError::BadEpsilon(epsilon));
    }
    let far = 4.0 * alpha - 2.0;
    let c = Point::Coord;
    Ok(Instance::new(
        MetricSpace::HalfLine,
        capacity,
        [
            (c(0.0), c(1.0), 0.0),
            (c(1.0), c(0.0), 0.0),
            (c(1.0), c(2.0 - epsilon), 0.0),
            (c(far), c(far), 4.0 * alpha),
        ],
    )
    .expect("construction is a valid instance"))
}

/// The completion time `LAZY(α)` reaches on [`gen_halfline_lb`].
pub fn halfline_lb_completion(alpha: f64, epsilon: f64) -> f64 {
    8.0 * alpha + 2.0 - (2.0 * alpha + 2.0) * epsilon
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioOutcome {
    pub alg: f64,
    pub opt: f64,
    pub ratio: f64,
}

/// `ALG / OPT`. An empty optimum gives ratio 1 when the algorithm also
/// finishes at 0 and infinity otherwise.
pub fn ratio_of(alg: f64, opt: f64) -> f64 {
    if opt <= TOLERANCE {
        if alg <= TOLERANCE {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        alg / opt
    }
}

pub fn competitive_ratio(
    inst: &Instance,
    algo: Algorithm,
) -> Result<RatioOutcome, ExperimentError> {
    competitive_ratio_with(inst, algo, SimOptions::default())
}

pub fn competitive_ratio_with(
    inst: &Instance,
    algo: Algorithm,
    opts: SimOptions,
) -> Result<RatioOutcome, ExperimentError> {
    let alg = simulate_with(inst, algo, opts)?.completion;
    let opt = opts.solver.opt_upto(inst, f64::INFINITY)?.completion;
    Ok(RatioOutcome {
        alg,
        opt,
        ratio: ratio_of(alg, opt),
    })
}

/// Parameters of the random instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzConfig {
    pub metrics: Vec<MetricKind>,
    pub max_requests: usize,
    #[serde(with = "capacity_list")]
    pub capacities: Vec<Capacity>,
    /// Coordinates are drawn from `[-range, range]` (`[0, range]` on the
    /// half-line); matrix edge weights from `[1, range]`.
    pub coord_range: f64,
    pub time_range: f64,
    pub matrix_nodes: usize,
    /// Probability that a request has `a = b`.
    pub tsp_probability: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            metrics: vec![MetricKind::Line, MetricKind::HalfLine, MetricKind::Matrix],
            max_requests: 5,
            capacities: vec![
                Capacity::Finite(1),
                Capacity::Finite(2),
                Capacity::Unbounded,
            ],
            coord_range: 10.0,
            time_range: 10.0,
            matrix_nodes: 4,
            tsp_probability: 0.25,
            count: 1000,
            seed: 7,
        }
    }
}

mod capacity_list {
    use super::Capacity;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Count(usize),
        Name(String),
    }

    pub fn serialize<S: Serializer>(caps: &[Capacity], s: S) -> Result<S::Ok, S::Error> {
        caps.iter()
            .map(|c| match c {
                Capacity::Finite(n) => Raw::Count(*n),
                Capacity::Unbounded => Raw::Name("inf".into()),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Capacity>, D::Error> {
        Vec::<Raw>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Raw::Count(0) => Err(serde::de::Error::custom("capacity must be at least 1")),
                Raw::Count(n) => Ok(Capacity::Finite(n)),
                Raw::Name(s) if s == "inf" => Ok(Capacity::Unbounded),
                Raw::Name(s) => Err(serde::de::Error::custom(format!("bad capacity {s}"))),
            })
            .collect()
    }
}

impl FuzzConfig {
    pub fn validate(&self, solver: &Solver) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if self.metrics.is_empty() || self.capacities.is_empty() {
            return bad("metrics and capacities must be non-empty");
        }
        if self.max_requests == 0 || self.max_requests > solver.search_cap {
            return bad("max_requests must be between 1 and the search cap");
        }
        if !(self.coord_range > 0.0 && self.time_range >= 0.0) {
            return bad("ranges must be positive");
        }
        if self.metrics.contains(&MetricKind::Matrix) && self.matrix_nodes < 2 {
            return bad("matrix metrics need at least 2 nodes");
        }
        if !(0.0..=1.0).contains(&self.tsp_probability) {
            return bad("tsp_probability must lie in [0, 1]");
        }
        Ok(())
    }

    /// The `index`-th random instance. Each index has its own PRNG stream,
    /// so instances do not depend on evaluation order.
    pub fn instance(&self, index: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let kind = *self.metrics.choose(&mut rng).expect("non-empty");
        let capacity = *self.capacities.choose(&mut rng).expect("non-empty");
        let n = rng.gen_range(1..=self.max_requests);
        let r = self.coord_range;
        let space = match kind {
            MetricKind::Line => MetricSpace::Line,
            MetricKind::HalfLine => MetricSpace::HalfLine,
            MetricKind::Matrix => random_matrix(&mut rng, self.matrix_nodes, r),
        };
        let point = |rng: &mut ChaCha8Rng| match kind {
            MetricKind::Line => Point::Coord(rng.gen_range(-r..=r)),
            MetricKind::HalfLine => Point::Coord(rng.gen_range(0.0..=r)),
            MetricKind::Matrix => Point::Node(rng.gen_range(0..self.matrix_nodes)),
        };
        let triples: Vec<(Point, Point, f64)> = (0..n)
            .map(|_| {
                let a = point(&mut rng);
                let b = if rng.gen_bool(self.tsp_probability) {
                    a
                } else {
                    point(&mut rng)
                };
                let t = rng.gen_range(0.0..=self.time_range);
                (a, b, t)
            })
            .collect();
        Instance::new(space, capacity, triples).expect("generated instances are valid")
    }
}

/// Random symmetric weights closed under shortest paths.
fn random_matrix(rng: &mut ChaCha8Rng, n: usize, range: f64) -> MetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1.0..=range.max(1.0));
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    MetricSpace::matrix(d).expect("square")
}

/// Short content hash of an instance.
pub fn digest(inst: &Instance) -> String {
    let bytes = serde_json::to_vec(&inst.to_json()).expect("instance serializes");
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzEntry {
    pub idx: usize,
    pub digest: String,
    pub alg: f64,
    pub opt: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub algorithm: String,
    pub alpha: Option<f64>,
    pub entries: Vec<FuzzEntry>,
    pub max_ratio: f64,
    pub argmax: usize,
    /// The instance attaining `max_ratio`, in the instance file format.
    pub argmax_instance: serde_json::Value,
}

/// Evaluates `algo` on `config.count` random instances in parallel. Results
/// are ordered by instance index.
pub fn fuzz(config: &FuzzConfig, algo: Algorithm) -> Result<RatioReport, ExperimentError> {
    fuzz_with(config, algo, SimOptions::default())
}

pub fn fuzz_with(
    config: &FuzzConfig,
    algo: Algorithm,
    opts: SimOptions,
) -> Result<RatioReport, ExperimentError> {
    config.validate(&opts.solver)?;
    let entries = (0..config.count)
        .into_par_iter()
        .map(|idx| {
            let inst = config.instance(idx);
            let out = competitive_ratio_with(&inst, algo, opts).map_err(|e| {
                ExperimentError::Instance {
                    index: idx,
                    instance: inst.to_json().to_string(),
                    source: Box::new(e),
                }
            })?;
            Ok(FuzzEntry {
                idx,
                digest: digest(&inst),
                alg: out.alg,
                opt: out.opt,
                ratio: out.ratio,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    // first index wins ties
    let argmax = entries.iter().fold(0, |best, e| {
        if e.ratio > entries[best].ratio {
            e.idx
        } else {
            best
        }
    });
    Ok(RatioReport {
        algorithm: algo.name().to_string(),
        alpha: match algo {
            Algorithm::Lazy { alpha } => Some(alpha),
            _ => None,
        },
        max_ratio: entries[argmax].ratio,
        argmax,
        argmax_instance: config.instance(argmax).to_json(),
        entries,
    })
}

/// Which formula attains a lower bound in the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    /// `1 + α`, from waiting on a single request.
    OnePlusAlpha,
    /// `1 + 3/(α+1)` for `α < 1`.
    ShortWait,
    /// `2 + 1/(2α)` for `1 ≤ α < (1+√3)/2`.
    FourRequest,
}

impl BoundSource {
    pub fn label(self) -> &'static str {
        match self {
            BoundSource::OnePlusAlpha => "one-plus-alpha",
            BoundSource::ShortWait => "short-wait",
            BoundSource::FourRequest => "four-request",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub bound: f64,
    pub source: BoundSource,
}

/// Best known lower bound on the ratio of `LAZY(α)` on the half-line.
pub fn lower_bound_at(alpha: f64) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        bound: 1.0 + alpha,
        source: BoundSource::OnePlusAlpha,
    };
    let mut offer = |bound: f64, source| {
        if bound > row.bound {
            row.bound = bound;
            row.source = source;
        }
    };
    if alpha < 1.0 {
        offer(1.0 + 3.0 / (alpha + 1.0), BoundSource::ShortWait);
    } else if alpha < critical_halfline_alpha() {
        offer(2.0 + 1.0 / (2.0 * alpha), BoundSource::FourRequest);
    }
    row
}

pub fn sweep_lower_bounds(grid: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    if let Some(bad) = grid.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(ExperimentError::Grid(format!(
            "alpha {bad} must be finite and >= 0"
        )));
    }
    Ok(grid.iter().map(|&a| lower_bound_at(a)).collect())
}

/// Parses `start:stop:step` into the inclusive grid `start + k·step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, ExperimentError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let err = |m: &str| ExperimentError::Grid(format!("`{spec}`: {m}"));
    if parts.len() != 3 {
        return Err(err("expected start:stop:step"));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| err("not a number"))?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(err("need start <= stop and step > 0"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}
