//! Factor-revealing MILP for LAZY on the half-line.
//!
//! Continuous variables, in order:
//! `t1, t2, s1, s2, opt1, opt2, p1, p2, s2a, d`. The four binaries select a
//! branch of `d = |p1 − p2|`, `t2 = max{t1 + s1, α·opt2}` and of the two
//! disjunctive constraints. Every big-M row is stored in its enabled form;
//! fixing the binaries relaxes the disabled rows by `M`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Sense};

pub const DEFAULT_BIG_M: f64 = 1000.0;
pub const BOX_BOUND: f64 = 100.0;
pub const NUM_VARS: usize = 10;
pub const VARIABLES: [&str; NUM_VARS] = [
    "t1", "t2", "s1", "s2", "opt1", "opt2", "p1", "p2", "s2a", "d",
];
pub const BINARIES: [&str; 4] = ["b1", "b2", "b3", "b4"];

const T1: usize = 0;
const T2: usize = 1;
const S1: usize = 2;
const S2: usize = 3;
const OPT1: usize = 4;
const OPT2: usize = 5;
const P1: usize = 6;
const P2: usize = 7;
const S2A: usize = 8;
const D: usize = 9;

/// Post-solve margin: a disabled row or a box bound within this distance of
/// being tight is reported.
const SLACK_MARGIN: f64 = 1e-6;

/// Row `row` of the base program is switched off (relaxed by `M`) when
/// binary `binary` equals `disabled_when`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigMRow {
    pub row: usize,
    pub binary: usize,
    pub disabled_when: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub base: LinearProgram,
    pub binaries: Vec<String>,
    pub big_m: f64,
    pub big_m_rows: Vec<BigMRow>,
}

/// Binary assignment `(b1, b2, b3, b4)` encoded as a 4-bit integer with
/// `b1` as the most significant bit.
pub fn branch_bits(branch: u8) -> [bool; 4] {
    [0, 1, 2, 3].map(|k| branch >> (3 - k) & 1 == 1)
}

impl MilpInstance {
    pub fn is_disabled(&self, m: &BigMRow, bits: [bool; 4]) -> bool {
        bits[m.binary] == m.disabled_when
    }

    /// The LP obtained by fixing the binaries to `bits`.
    pub fn fix(&self, bits: [bool; 4]) -> LinearProgram {
        let mut lp = self.base.clone();
        for m in &self.big_m_rows {
            if self.is_disabled(m, bits) {
                let row = &mut lp.constraints[m.row];
                match row.sense {
                    Sense::Le => row.rhs += self.big_m,
                    Sense::Ge => row.rhs -= self.big_m,
                    Sense::Eq => unreachable!("equality rows are never relaxed"),
                }
            }
        }
        lp
    }
}

pub fn build_fr_milp(alpha: f64, big_m: f64) -> MilpInstance {
    let mut lp = LinearProgram::new(
        VARIABLES.iter().map(|s| s.to_string()).collect(),
        row(&[(T2, 1.0), (S2, 1.0)]),
    );
    let mut big_m_rows = Vec::new();
    let mut switched = |lp: &mut LinearProgram, binary: usize, disabled_when: bool| {
        big_m_rows.push(BigMRow {
            row: lp.constraints.len() - 1,
            binary,
            disabled_when,
        });
    };

    lp.add("opt2 = 1", row(&[(OPT2, 1.0)]), Sense::Eq, 1.0);

    lp.add(
        "d >= p1 - p2",
        row(&[(D, 1.0), (P1, -1.0), (P2, 1.0)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "d >= p2 - p1",
        row(&[(D, 1.0), (P2, -1.0), (P1, 1.0)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "d <= p1 - p2 + b1 M",
        row(&[(D, 1.0), (P1, -1.0), (P2, 1.0)]),
        Sense::Le,
        0.0,
    );
    switched(&mut lp, 0, true);
    lp.add(
        "d <= p2 - p1 + (1 - b1) M",
        row(&[(D, 1.0), (P2, -1.0), (P1, 1.0)]),
        Sense::Le,
        0.0,
    );
    switched(&mut lp, 0, false);

    lp.add(
        "t2 >= t1 + s1",
        row(&[(T2, 1.0), (T1, -1.0), (S1, -1.0)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "t2 >= alpha opt2",
        row(&[(T2, 1.0), (OPT2, -alpha)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "t2 <= t1 + s1 + b2 M",
        row(&[(T2, 1.0), (T1, -1.0), (S1, -1.0)]),
        Sense::Le,
        0.0,
    );
    switched(&mut lp, 1, true);
    lp.add(
        "t2 <= alpha opt2 + (1 - b2) M",
        row(&[(T2, 1.0), (OPT2, -alpha)]),
        Sense::Le,
        0.0,
    );
    switched(&mut lp, 1, false);

    lp.add(
        "t1 >= alpha opt1",
        row(&[(T1, 1.0), (OPT1, -alpha)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "opt1 >= p1",
        row(&[(OPT1, 1.0), (P1, -1.0)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "s2 <= d + s2a",
        row(&[(S2, 1.0), (D, -1.0), (S2A, -1.0)]),
        Sense::Le,
        0.0,
    );
    lp.add(
        "opt2 >= t1 + s2a",
        row(&[(OPT2, 1.0), (T1, -1.0), (S2A, -1.0)]),
        Sense::Ge,
        0.0,
    );
    lp.add(
        "t1 + s1 <= (1 + alpha) opt1",
        row(&[(T1, 1.0), (S1, 1.0), (OPT1, -(1.0 + alpha))]),
        Sense::Le,
        0.0,
    );

    lp.add(
        "opt2 >= p1 + d - b3 M",
        row(&[(OPT2, 1.0), (P1, -1.0), (D, -1.0)]),
        Sense::Ge,
        0.0,
    );
    switched(&mut lp, 2, true);
    lp.add(
        "opt2 >= t1 + d - (1 - b3) M",
        row(&[(OPT2, 1.0), (T1, -1.0), (D, -1.0)]),
        Sense::Ge,
        0.0,
    );
    switched(&mut lp, 2, false);

    lp.add(
        "d >= alpha opt2 - opt1 - b4 M",
        row(&[(D, 1.0), (OPT2, -alpha), (OPT1, 1.0)]),
        Sense::Ge,
        0.0,
    );
    switched(&mut lp, 3, true);
    lp.add(
        "s1 - p1 <= 2 (opt2 - p2) + (1 - b4) M",
        row(&[(S1, 1.0), (P1, -1.0), (OPT2, -2.0), (P2, 2.0)]),
        Sense::Le,
        0.0,
    );
    switched(&mut lp, 3, false);

    MilpInstance {
        base: lp,
        binaries: BINARIES.iter().map(|s| s.to_string()).collect(),
        big_m,
        big_m_rows,
    }
}

fn row(terms: &[(usize, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; NUM_VARS];
    for &(j, a) in terms {
        r[j] += a;
    }
    r
}

pub fn fr_closed_form(alpha: f64) -> f64 {
    (3.0 + 1.0 / alpha - alpha).max(1.0 + alpha)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrError {
    #[error("alpha must be at least 1, got {0}")]
    InvalidAlpha(f64),
    #[error("big-M constant must be positive, got {0}")]
    InvalidBigM(f64),
    #[error("branch {branch:04b}: {source}")]
    Lp { branch: u8, source: LpError },
    #[error("branch {branch:04b} is unbounded")]
    Unbounded { branch: u8 },
    #[error("branch {branch:04b}: disabled row `{row}` is tight at the optimum")]
    BigMTight { branch: u8, row: String },
    #[error("branch {branch:04b}: variable `{var}` touches the safety box")]
    BoxTight { branch: u8, var: String },
    #[error("every binary assignment is infeasible")]
    AllInfeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchResult {
    pub branch: u8,
    pub binaries: [u8; 4],
    pub status: LpStatus,
    pub value: Option<f64>,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrSolution {
    pub alpha: f64,
    pub value: f64,
    /// Continuous part, ordered as [`VARIABLES`].
    pub x: Vec<f64>,
    pub binaries: [u8; 4],
    pub branch: u8,
    pub branches: Vec<BranchResult>,
}

pub fn solve_fr(alpha: f64) -> Result<FrSolution, FrError> {
    solve_fr_with(alpha, DEFAULT_BIG_M)
}

pub fn solve_fr_with(alpha: f64, big_m: f64) -> Result<FrSolution, FrError> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(FrError::InvalidAlpha(alpha));
    }
    if !(big_m > 0.0 && big_m.is_finite()) {
        return Err(FrError::InvalidBigM(big_m));
    }
    let milp = build_fr_milp(alpha, big_m);
    let branches = (0..16u8)
        .into_par_iter()
        .map(|b| solve_branch(&milp, b))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best: Option<&BranchResult> = None;
    for br in &branches {
        let Some(v) = br.value else { continue };
        if best.is_none_or(|b| v > b.value.unwrap() + crate::TOLERANCE) {
            best = Some(br);
        }
    }
    let best = best.ok_or(FrError::AllInfeasible)?;
    Ok(FrSolution {
        alpha,
        value: best.value.unwrap(),
        x: best.x.clone().unwrap(),
        binaries: best.binaries,
        branch: best.branch,
        branches: branches.clone(),
    })
}

fn solve_branch(milp: &MilpInstance, branch: u8) -> Result<BranchResult, FrError> {
    let bits = branch_bits(branch);
    let mut lp = milp.fix(bits);
    lp.upper = vec![Some(BOX_BOUND); NUM_VARS];
    let sol = solve_lp(&lp).map_err(|source| FrError::Lp { branch, source })?;
    let binaries = bits.map(u8::from);
    match sol.status {
        LpStatus::Infeasible => {
            return Ok(BranchResult {
                branch,
                binaries,
                status: sol.status,
                value: None,
                x: None,
            })
        }
        LpStatus::Unbounded => return Err(FrError::Unbounded { branch }),
        LpStatus::Optimal => {}
    }
    for m in &milp.big_m_rows {
        if milp.is_disabled(m, bits) {
            let c = &lp.constraints[m.row];
            if c.slack(&sol.x) <= SLACK_MARGIN {
                return Err(FrError::BigMTight {
                    branch,
                    row: c.name.clone(),
                });
            }
        }
    }
    if let Some(j) = sol.x.iter().position(|&v| v >= BOX_BOUND - SLACK_MARGIN) {
        return Err(FrError::BoxTight {
            branch,
            var: VARIABLES[j].to_string(),
        });
    }
    Ok(BranchResult {
        branch,
        binaries,
        status: sol.status,
        value: Some(sol.value),
        x: Some(sol.x),
    })
}

/// Checks `x` against the original program (equalities, max and
/// disjunctions) and lists every violated constraint.
pub fn check_disjunctive(alpha: f64, x: &[f64], tolerance: f64) -> Vec<String> {
    let mut out = Vec::new();
    if x.len() != NUM_VARS {
        out.push(format!("expected {NUM_VARS} values, got {}", x.len()));
        return out;
    }
    let [t1, t2, s1, s2, opt1, opt2, p1, p2, s2a, d] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9].map(|j| x[j]);
    let mut need = |ok: bool, what: &str| {
        if !ok {
            out.push(what.to_string());
        }
    };
    let tol = tolerance;
    need((opt2 - 1.0).abs() <= tol, "opt2 = 1");
    need((d - (p1 - p2).abs()).abs() <= tol, "d = |p1 - p2|");
    need(
        (t2 - (t1 + s1).max(alpha * opt2)).abs() <= tol,
        "t2 = max{t1 + s1, alpha opt2}",
    );
    need(t1 >= alpha * opt1 - tol, "t1 >= alpha opt1");
    need(opt1 >= p1 - tol, "opt1 >= p1");
    need(s2 <= d + s2a + tol, "s2 <= d + s2a");
    need(opt2 >= t1 + s2a - tol, "opt2 >= t1 + s2a");
    need(
        t1 + s1 <= (1.0 + alpha) * opt1 + tol,
        "t1 + s1 <= (1 + alpha) opt1",
    );
    need(
        opt2 >= p1 + d - tol || opt2 >= t1 + d - tol,
        "opt2 >= p1 + d or opt2 >= t1 + d",
    );
    need(
        d >= alpha * opt2 - opt1 - tol || s1 - p1 <= 2.0 * (opt2 - p2) + tol,
        "d >= alpha opt2 - opt1 or s1 - p1 <= 2 (opt2 - p2)",
    );
    for (j, &v) in x.iter().enumerate() {
        need(v >= -tol, &format!("{} >= 0", VARIABLES[j]));
    }
    out
}
