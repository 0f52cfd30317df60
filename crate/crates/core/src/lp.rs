//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `max c·x` subject to rows `a·x {≤,≥,=} b` and
//! bounds `l ≤ x ≤ u` (`l` defaults to 0, `u` to +∞). Bland's rule is used
//! for both the entering and the leaving variable, so the method cannot
//! cycle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Value of the left-hand side at `x`.
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }

    /// Distance of `x` from the row's boundary.
    pub fn slack(&self, x: &[f64]) -> f64 {
        (self.lhs(x) - self.rhs).abs()
    }
}

/// `max objective·x` subject to `constraints` and variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(names: Vec<String>, objective: Vec<f64>) -> Self {
        let n = names.len();
        LinearProgram {
            names,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn add(&mut self, name: impl Into<String>, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| c.violation(x));
        let bounds = x.iter().enumerate().map(|(j, &v)| {
            let lo = (self.lower[j] - v).max(0.0);
            let hi = self.upper[j].map_or(0.0, |u| (v - u).max(0.0));
            lo.max(hi)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension(format!(
                "{n} variables but objective/bounds have {}/{}/{} entries",
                self.objective.len(),
                self.lower.len(),
                self.upper.len()
            )));
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(LpError::Dimension(format!(
                    "row `{}` has {} coefficients, expected {n}",
                    c.name,
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::NonFinite(c.name.clone()));
            }
        }
        if self.objective.iter().any(|a| !a.is_finite())
            || self.lower.iter().any(|l| !l.is_finite())
            || self.upper.iter().flatten().any(|u| !u.is_finite())
        {
            return Err(LpError::NonFinite("objective or bounds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
    /// Rows (by index) that hold with equality at `x`.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite data in {0}")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Dense simplex tableau. Row 0..m are constraints, the last row holds the
/// reduced costs of the current objective; the last column is the rhs.
struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            *self.at_mut(pr, c) /= p;
        }
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.at(pr, c);
                if v != 0.0 {
                    *self.at_mut(r, c) -= f * v;
                }
            }
            *self.at_mut(r, pc) = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Loads `cost` (to be maximized) into the objective row, priced out
    /// against the current basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let m = self.rows;
        for c in 0..=self.cols {
            *self.at_mut(m, c) = if c < self.cols { -cost[c] } else { 0.0 };
        }
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    let v = self.at(r, c);
                    *self.at_mut(m, c) += cb * v;
                }
            }
        }
    }

    /// Primal simplex on the columns `allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> Result<bool, LpError> {
        let m = self.rows;
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index column with a negative objective-row entry
            let Some(pc) = (0..self.cols).find(|&c| allowed[c] && self.at(m, c) < -OPTIMALITY_TOL)
            else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - FEASIBILITY_TOL
                                || (ratio <= bv + FEASIBILITY_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((pr, _)) => self.pivot(pr, pc),
            }
        }
        Err(LpError::Numerical(format!(
            "no convergence after {MAX_PIVOTS} pivots"
        )))
    }
}

/// Solves `lp` with the two-phase simplex method.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();

    // Shift to zero lower bounds; upper bounds become rows.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
        rows.push((c.coeffs.clone(), c.sense, c.rhs - shift));
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Sense::Le, u - lp.lower[j]));
        }
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|a| *a = -*a);
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = n + slacks + artificials;
    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; (m + 1) * (cols + 1)],
        basis: vec![0; m],
    };
    let (mut next_slack, mut next_art) = (n, n + slacks);
    for (r, (a, sense, b)) in rows.iter().enumerate() {
        for (j, &v) in a.iter().enumerate() {
            *t.at_mut(r, j) = v;
        }
        *t.at_mut(r, cols) = *b;
        match sense {
            Sense::Le => {
                *t.at_mut(r, next_slack) = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                *t.at_mut(r, next_slack) = -1.0;
                next_slack += 1;
                *t.at_mut(r, next_art) = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                *t.at_mut(r, next_art) = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }
    let is_art = |c: usize| c >= n + slacks;

    // Phase 1: maximize -(sum of artificials).
    if artificials > 0 {
        let cost: Vec<f64> = (0..cols)
            .map(|c| if is_art(c) { -1.0 } else { 0.0 })
            .collect();
        t.set_objective(&cost);
        let all = vec![true; cols];
        t.optimize(&all)?;
        let infeas: f64 = (0..m)
            .filter(|&r| is_art(t.basis[r]))
            .map(|r| t.rhs(r))
            .sum();
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > FEASIBILITY_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                x: vec![f64::NAN; n],
                active: Vec::new(),
            });
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for r in 0..m {
            if is_art(t.basis[r]) {
                if let Some(c) = (0..n + slacks).find(|&c| t.at(r, c).abs() > 1e-9) {
                    t.pivot(r, c);
                }
                // otherwise the row is redundant; its artificial stays at 0
            }
        }
    }

    // Phase 2.
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    t.set_objective(&cost);
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    if !t.optimize(&allowed)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::INFINITY,
            x: vec![f64::NAN; n],
            active: Vec::new(),
        });
    }
    let mut x = lp.lower.clone();
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] += t.rhs(r);
        }
    }
    let viol = lp.max_violation(&x);
    let scale = 1.0
        + lp.constraints
            .iter()
            .map(|c| c.rhs.abs())
            .fold(0.0, f64::max);
    if viol > 1e-7 * scale {
        return Err(LpError::Numerical(format!(
            "solution violates a constraint by {viol:e}"
        )));
    }
    let active = lp
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.slack(&x) <= 1e-9 * (1.0 + c.rhs.abs()))
        .map(|(i, _)| i)
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.value_at(&x),
        x,
        active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp1(obj: Vec<f64>) -> LinearProgram {
        let names = (0..obj.len()).map(|i| format!("x{i}")).collect();
        LinearProgram::new(names, obj)
    }

    #[test]
    fn single_bound() {
        let mut lp = lp1(vec![1.0]);
        lp.add("cap", vec![1.0], Sense::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn infeasible() {
        let mut lp = lp1(vec![1.0]);
        lp.add("lo", vec![1.0], Sense::Ge, 2.0);
        lp.add("hi", vec![1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn two_variables() {
        // vertices of {x+y<=3, x<=2, y<=2, x,y>=0}: (0,0),(2,0),(2,1),(1,2),(0,2)
        // give x+y in {0,2,3,3,2}
        let mut lp = lp1(vec![1.0, 1.0]);
        lp.add("sum", vec![1.0, 1.0], Sense::Le, 3.0);
        lp.add("x", vec![1.0, 0.0], Sense::Le, 2.0);
        lp.add("y", vec![0.0, 1.0], Sense::Le, 2.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded() {
        let mut lp = lp1(vec![1.0, 0.0]);
        lp.add("r", vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_bounds_and_negative_rhs() {
        // max x - y  s.t. x + y = 4, x - y >= -10, 1 <= y, x <= 2.5
        let mut lp = lp1(vec![1.0, -1.0]);
        lp.add("sum", vec![1.0, 1.0], Sense::Eq, 4.0);
        lp.add("diff", vec![1.0, -1.0], Sense::Ge, -10.0);
        lp.lower[1] = 1.0;
        lp.upper[0] = Some(2.5);
        let s = solve_lp(&lp).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12, "{s:?}");
        assert!((s.x[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = lp1(vec![1.0, 2.0]);
        lp.add("a", vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.add("b", vec![2.0, 2.0], Sense::Eq, 2.0);
        let s = solve_lp(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = lp1(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add("r1", vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0);
        lp.add("r2", vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0);
        lp.add("r3", vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let mut lp = lp1(vec![1.0]);
        lp.add("bad", vec![1.0, 2.0], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Dimension(_))));
        let mut lp = lp1(vec![1.0]);
        lp.add("nan", vec![f64::NAN], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::NonFinite(_))));
    }
}
