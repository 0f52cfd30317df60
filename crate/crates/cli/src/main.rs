use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lazy_dar::experiments::{
    competitive_ratio_with, fuzz_with, gen_halfline_lb, general_alpha, halfline_lb_completion,
    parse_grid, sweep_lower_bounds, FuzzConfig, DEFAULT_EPSILON,
};
use lazy_dar::factor::{fr_closed_form, solve_fr, FrSolution, VARIABLES};
use lazy_dar::online::{simulate_with, SimOptions};
use lazy_dar::{Algorithm, Capacity, Instance, MetricKind, Solver, TOLERANCE};

#[derive(Parser)]
#[command(
    name = "lazy-dar",
    version,
    about = "Online dial-a-ride: LAZY, optima and bounds"
)]
struct Cli {
    /// Output format; scalar commands print a bare number when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Comparison tolerance used by the simulator.
    #[arg(long, global = true, default_value_t = TOLERANCE)]
    tolerance: f64,
    /// Decimal places for printed numbers.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Lazy,
    Replan,
    Ignore,
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Waiting parameter for `lazy` (default 1/2 + sqrt(11/12)).
    #[arg(long)]
    alpha: Option<f64>,
}

impl AlgoArgs {
    fn algorithm(&self) -> Algorithm {
        match self.algo {
            Algo::Lazy => Algorithm::lazy(self.alpha.unwrap_or_else(general_alpha)),
            Algo::Replan => Algorithm::Replan,
            Algo::Ignore => Algorithm::Ignore,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an online algorithm and print its trace.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
    },
    /// Optimal offline completion over the requests released by `--upto`.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        upto: Option<f64>,
    },
    /// ALG / OPT on one instance.
    Ratio {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
    },
    /// The four-request half-line lower-bound instance.
    LowerBound {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value = "1")]
        capacity: Capacity,
        /// Print the instance instead of evaluating it.
        #[arg(long)]
        emit_instance: bool,
    },
    /// Competitive ratios over seeded random instances.
    Fuzz {
        /// JSON generator configuration; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        max_requests: Option<usize>,
        /// Comma-separated metric kinds.
        #[arg(long, value_delimiter = ',')]
        metrics: Option<Vec<MetricKind>>,
        /// Comma-separated capacities (`inf` for unbounded).
        #[arg(long, value_delimiter = ',')]
        capacities: Option<Vec<Capacity>>,
    },
    /// Lower bounds on the ratio of LAZY(alpha) over a grid `a:b:step`.
    Sweep {
        #[arg(long)]
        grid: String,
    },
    /// Solve the factor-revealing MILP at one alpha or over a grid.
    FactorReveal {
        #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
        alpha: Option<f64>,
        #[arg(long)]
        grid: Option<String>,
    },
}

struct Out {
    format: Option<Format>,
    precision: usize,
}

impl Out {
    fn num(&self, v: f64) -> String {
        format!("{v:.*}", self.precision)
    }

    /// Rounds every float in `v` to the configured precision.
    fn round(&self, v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = n.as_f64().unwrap();
                self.num(x)
                    .parse::<f64>()
                    .map_or(Value::Null, |r| json!(r + 0.0))
            }
            Value::Array(a) => Value::Array(a.into_iter().map(|x| self.round(x)).collect()),
            Value::Object(o) => {
                Value::Object(o.into_iter().map(|(k, x)| (k, self.round(x))).collect())
            }
            other => other,
        }
    }

    fn json(&self, v: Value) -> String {
        serde_json::to_string_pretty(&self.round(v)).expect("values serialize")
    }

    fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
        let mut s = header.join(",");
        for r in rows {
            s.push('\n');
            s.push_str(&r.join(","));
        }
        s
    }
}

fn load(path: &PathBuf) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.tolerance >= 0.0 && cli.tolerance.is_finite()) {
        usage_error("--tolerance must be a finite number >= 0");
    }
    match run(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    let out = Out {
        format: cli.format,
        precision: cli.precision,
    };
    let opts = SimOptions {
        solver: Solver::default(),
        tolerance: cli.tolerance,
    };
    match cli.command {
        Cmd::Simulate { instance, algo } => {
            let inst = load(&instance)?;
            let trace = simulate_with(&inst, algo.algorithm(), opts)?;
            match out.format {
                Some(Format::Csv) => Ok(out.csv(
                    &["i", "t", "p", "length", "interrupted"],
                    trace.schedules.iter().map(|s| {
                        vec![
                            s.i.to_string(),
                            out.num(s.t),
                            s.p.to_string(),
                            out.num(s.length),
                            s.interrupted.to_string(),
                        ]
                    }),
                )),
                _ => Ok(out.json(serde_json::to_value(&trace)?)),
            }
        }
        Cmd::Opt { instance, upto } => {
            let inst = load(&instance)?;
            let t = upto.unwrap_or(f64::INFINITY);
            let plan = opts.solver.opt_upto(&inst, t)?;
            match out.format {
                None => Ok(out.num(plan.completion)),
                Some(Format::Csv) => Ok(out.csv(
                    &["completion", "length"],
                    [vec![out.num(plan.completion), out.num(plan.length)]],
                )),
                Some(Format::Json) => Ok(out.json(json!({
                    "completion": plan.completion,
                    "length": plan.length,
                    "schedule": plan.schedule,
                }))),
            }
        }
        Cmd::Ratio { instance, algo } => {
            let inst = load(&instance)?;
            let r = competitive_ratio_with(&inst, algo.algorithm(), opts)?;
            match out.format {
                None => Ok(out.num(r.ratio)),
                Some(Format::Csv) => Ok(out.csv(
                    &["alg", "opt", "ratio"],
                    [vec![out.num(r.alg), out.num(r.opt), out.num(r.ratio)]],
                )),
                Some(Format::Json) => Ok(out.json(serde_json::to_value(r)?)),
            }
        }
        Cmd::LowerBound {
            alpha,
            epsilon,
            capacity,
            emit_instance,
        } => {
            let inst = gen_halfline_lb(alpha, epsilon, capacity)?;
            if emit_instance {
                return Ok(serde_json::to_string_pretty(&inst.to_json())?);
            }
            let r = competitive_ratio_with(&inst, Algorithm::lazy(alpha), opts)?;
            let predicted = halfline_lb_completion(alpha, epsilon) / (4.0 * alpha);
            let limit = 2.0 + 1.0 / (2.0 * alpha);
            match out.format {
                None => Ok(out.num(r.ratio)),
                Some(Format::Csv) => Ok(out.csv(
                    &[
                        "alpha",
                        "epsilon",
                        "alg",
                        "opt",
                        "ratio",
                        "predicted",
                        "limit",
                    ],
                    [[alpha, epsilon, r.alg, r.opt, r.ratio, predicted, limit]
                        .map(|v| out.num(v))
                        .to_vec()],
                )),
                Some(Format::Json) => Ok(out.json(json!({
                    "alpha": alpha,
                    "epsilon": epsilon,
                    "alg": r.alg,
                    "opt": r.opt,
                    "ratio": r.ratio,
                    "predicted": predicted,
                    "limit": limit,
                }))),
            }
        }
        Cmd::Fuzz {
            config,
            algo,
            seed,
            count,
            max_requests,
            metrics,
            capacities,
        } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<FuzzConfig>(&text)
                        .with_context(|| format!("parsing {}", p.display()))?
                }
                None => FuzzConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(c) = count {
                cfg.count = c;
            }
            if let Some(n) = max_requests {
                cfg.max_requests = n;
            }
            if let Some(m) = metrics {
                cfg.metrics = m;
            }
            if let Some(c) = capacities {
                cfg.capacities = c;
            }
            let report = fuzz_with(&cfg, algo.algorithm(), opts)?;
            match out.format {
                Some(Format::Csv) => Ok(out.csv(
                    &["idx", "alg", "opt", "ratio"],
                    report.entries.iter().map(|e| {
                        vec![
                            e.idx.to_string(),
                            out.num(e.alg),
                            out.num(e.opt),
                            out.num(e.ratio),
                        ]
                    }),
                )),
                _ => Ok(out.json(serde_json::to_value(&report)?)),
            }
        }
        Cmd::Sweep { grid } => {
            let rows = sweep_lower_bounds(&parse_grid(&grid)?)?;
            match out.format {
                Some(Format::Json) => Ok(out.json(serde_json::to_value(&rows)?)),
                _ => Ok(out.csv(
                    &["alpha", "bound", "source"],
                    rows.iter()
                        .map(|r| vec![out.num(r.alpha), out.num(r.bound), r.source.label().into()]),
                )),
            }
        }
        Cmd::FactorReveal { alpha, grid } => {
            if let Some(g) = grid {
                let mut rows = Vec::new();
                for a in parse_grid(&g)? {
                    rows.push(solve_fr(a).with_context(|| format!("alpha = {a}"))?);
                }
                return match out.format {
                    Some(Format::Json) => {
                        Ok(out.json(Value::Array(rows.iter().map(fr_json).collect())))
                    }
                    _ => Ok(out.csv(
                        &["alpha", "value", "closed_form", "branch"],
                        rows.iter().map(|s| {
                            vec![
                                out.num(s.alpha),
                                out.num(s.value),
                                out.num(fr_closed_form(s.alpha)),
                                format!("{:04b}", s.branch),
                            ]
                        }),
                    )),
                };
            }
            let Some(a) = alpha else {
                bail!("--alpha or --grid is required")
            };
            let s = solve_fr(a)?;
            match out.format {
                Some(Format::Csv) => Ok(out.csv(
                    &["alpha", "value", "closed_form", "branch"],
                    [vec![
                        out.num(s.alpha),
                        out.num(s.value),
                        out.num(fr_closed_form(s.alpha)),
                        format!("{:04b}", s.branch),
                    ]],
                )),
                _ => Ok(out.json(fr_json(&s))),
            }
        }
    }
}

fn fr_json(s: &FrSolution) -> Value {
    let assignment: serde_json::Map<String, Value> = VARIABLES
        .iter()
        .zip(&s.x)
        .map(|(n, v)| (n.to_string(), json!(v)))
        .collect();
    json!({
        "alpha": s.alpha,
        "value": s.value,
        "closed_form": fr_closed_form(s.alpha),
        "assignment": assignment,
        "binaries": s.binaries,
        "branch": format!("{:04b}", s.branch),
    })
}
