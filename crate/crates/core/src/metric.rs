//! Metric spaces: the line, the half-line and finite distance matrices.
//!
//! A finite matrix metric is extended to the points lying on the (virtual)
//! edges between its nodes, so that a server interrupted in the middle of a
//! move still has a well-defined position. The distance from an edge point to
//! anything else goes through one of the two endpoints of its edge.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::TOLERANCE;

/// Which geometry a [`MetricSpace`] models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Line,
    HalfLine,
    Matrix,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Line => "line",
            MetricKind::HalfLine => "halfline",
            MetricKind::Matrix => "matrix",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(MetricKind::Line),
            "halfline" | "half-line" => Ok(MetricKind::HalfLine),
            "matrix" => Ok(MetricKind::Matrix),
            other => Err(format!("unknown metric kind `{other}`")),
        }
    }
}

/// A location in a metric space.
///
/// `Coord` is used by the line and the half-line, `Node` by matrix metrics.
/// `Transit` is a point on the way from node `from` to node `to`, `offset`
/// units away from `from`; it only arises while a server is moving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Node(usize),
    Coord(f64),
    Transit { from: usize, to: usize, offset: f64 },
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Coord(x) => write!(f, "{x}"),
            Point::Node(i) => write!(f, "#{i}"),
            Point::Transit { from, to, offset } => write!(f, "#{from}->#{to}@{offset}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("point {point} is not valid in a {kind} metric")]
    InvalidPoint { point: Point, kind: MetricKind },
    #[error("distance matrix is empty")]
    EmptyMatrix,
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
}

/// A violated metric axiom, as reported by [`MetricSpace::validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricViolation {
    #[error("entry ({i},{j}) = {value} is negative or not finite")]
    BadEntry { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal at ({i},{i})")]
    NonzeroDiagonal { i: usize },
    #[error("asymmetry at ({i},{j}): {forward} != {backward}")]
    Asymmetry {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("triangle inequality at ({i},{k}) via {j}: {direct} > {detour}")]
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },
}

/// A metric space with a designated origin.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    Line,
    HalfLine,
    Matrix(DistanceMatrix),
}

/// Square matrix of pairwise distances; node 0 is the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        let mut d = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            d.extend(r);
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl MetricSpace {
    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        DistanceMatrix::new(rows).map(MetricSpace::Matrix)
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            MetricSpace::Line => MetricKind::Line,
            MetricSpace::HalfLine => MetricKind::HalfLine,
            MetricSpace::Matrix(_) => MetricKind::Matrix,
        }
    }

    pub fn origin(&self) -> Point {
        match self {
            MetricSpace::Line | MetricSpace::HalfLine => Point::Coord(0.0),
            MetricSpace::Matrix(_) => Point::Node(0),
        }
    }

    /// Checks that `p` is a location of this space. Transit points must lie
    /// on an edge of the matrix, within its length.
    pub fn check_point(&self, p: Point) -> Result<(), MetricError> {
        let ok = match (self, p) {
            (MetricSpace::Line, Point::Coord(x)) => x.is_finite(),
            (MetricSpace::HalfLine, Point::Coord(x)) => x.is_finite() && x >= 0.0,
            (MetricSpace::Matrix(m), Point::Node(i)) => i < m.n,
            (MetricSpace::Matrix(m), Point::Transit { from, to, offset }) => {
                from < m.n
                    && to < m.n
                    && offset.is_finite()
                    && offset >= -TOLERANCE
                    && offset <= m.get(from, to) + TOLERANCE
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(MetricError::InvalidPoint {
                point: p,
                kind: self.kind(),
            })
        }
    }

    /// Distance between two points of this space.
    pub fn distance(&self, x: Point, y: Point) -> Result<f64, MetricError> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.dist(x, y))
    }

    /// Unchecked distance; callers guarantee both points are valid.
    pub(crate) fn dist(&self, x: Point, y: Point) -> f64 {
        match self {
            MetricSpace::Line | MetricSpace::HalfLine => (coord(x) - coord(y)).abs(),
            MetricSpace::Matrix(m) => matrix_dist(m, x, y),
        }
    }

    /// The point reached after travelling `step` units from `from` along a
    /// shortest path towards `to`. `to` must be a node or coordinate.
    pub(crate) fn advance(&self, from: Point, to: Point, step: f64) -> Point {
        let total = self.dist(from, to);
        if step >= total {
            return to;
        }
        match self {
            MetricSpace::Line | MetricSpace::HalfLine => {
                let (a, b) = (coord(from), coord(to));
                Point::Coord(if b >= a { a + step } else { a - step })
            }
            MetricSpace::Matrix(_) => {
                let target = node(to);
                match from {
                    Point::Node(u) => Point::Transit {
                        from: u,
                        to: target,
                        offset: step,
                    },
                    Point::Transit { .. } => {
                        let (via, leg) = self.transit_exit(from, target);
                        if step >= leg {
                            self.advance(Point::Node(via), to, step - leg)
                        } else {
                            let Point::Transit {
                                from: u,
                                to: v,
                                offset,
                            } = from
                            else {
                                unreachable!()
                            };
                            let offset = if via == v {
                                offset + step
                            } else {
                                offset - step
                            };
                            Point::Transit {
                                from: u,
                                to: v,
                                offset,
                            }
                        }
                    }
                    Point::Coord(_) => unreachable!("coordinate in matrix metric"),
                }
            }
        }
    }

    /// For a transit point, the edge endpoint a shortest path to `target`
    /// leaves through, and the distance to that endpoint.
    fn transit_exit(&self, p: Point, target: usize) -> (usize, f64) {
        let (MetricSpace::Matrix(m), Point::Transit { from, to, offset }) = (self, p) else {
            unreachable!()
        };
        let back = offset + m.get(from, target);
        let fwd = (m.get(from, to) - offset) + m.get(to, target);
        if back <= fwd {
            (from, offset)
        } else {
            (to, m.get(from, to) - offset)
        }
    }

    /// Checks every metric axiom. The first violated entry or triple is
    /// reported; lines and half-lines are always valid.
    pub fn validate(&self) -> Result<(), MetricViolation> {
        let MetricSpace::Matrix(m) = self else {
            return Ok(());
        };
        let n = m.n;
        for i in 0..n {
            for j in 0..n {
                let v = m.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(MetricViolation::BadEntry { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            if m.get(i, i).abs() > TOLERANCE {
                return Err(MetricViolation::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if (m.get(i, j) - m.get(j, i)).abs() > TOLERANCE {
                    return Err(MetricViolation::Asymmetry {
                        i,
                        j,
                        forward: m.get(i, j),
                        backward: m.get(j, i),
                    });
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    let detour = m.get(i, j) + m.get(j, k);
                    if m.get(i, k) > detour + TOLERANCE {
                        return Err(MetricViolation::Triangle {
                            i,
                            j,
                            k,
                            direct: m.get(i, k),
                            detour,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn coord(p: Point) -> f64 {
    match p {
        Point::Coord(x) => x,
        other => panic!("expected a coordinate, got {other}"),
    }
}

fn node(p: Point) -> usize {
    match p {
        Point::Node(i) => i,
        other => panic!("expected a node, got {other}"),
    }
}

fn matrix_dist(m: &DistanceMatrix, x: Point, y: Point) -> f64 {
    // Each point is reachable through at most two endpoints.
    fn exits(m: &DistanceMatrix, p: Point) -> [(usize, f64); 2] {
        match p {
            Point::Node(i) => [(i, 0.0), (i, 0.0)],
            Point::Transit { from, to, offset } => [(from, offset), (to, m.get(from, to) - offset)],
            Point::Coord(_) => unreachable!("coordinate in matrix metric"),
        }
    }
    let mut best = f64::INFINITY;
    for (u, du) in exits(m, x) {
        for (v, dv) in exits(m, y) {
            best = best.min(du + m.get(u, v) + dv);
        }
    }
    if let (
        Point::Transit {
            from: a,
            to: b,
            offset: s,
        },
        Point::Transit {
            from: c,
            to: d,
            offset: t,
        },
    ) = (x, y)
    {
        if a == c && b == d {
            best = best.min((s - t).abs());
        } else if a == d && b == c {
            best = best.min((s - (m.get(c, d) - t)).abs());
        }
    }
    best
}
