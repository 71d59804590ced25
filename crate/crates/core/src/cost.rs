//! Bi-objective cost vectors, dominance relations and correlation lines.
//!
//! Everything here is a plain `Copy` value. Dominance on raw costs uses exact
//! floating comparisons; tolerances only appear in line geometry.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex handle. Valid iff `< vertex_count` of the owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

/// Dense edge handle. Valid iff `< edge_count` of the owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(v: usize) -> Self {
        VertexId(u32::try_from(v).expect("vertex index exceeds u32"))
    }
}

impl From<usize> for EdgeId {
    fn from(e: usize) -> Self {
        EdgeId(u32::try_from(e).expect("edge index exceeds u32"))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("cost components must be finite and non-negative, got ({0}, {1})")]
    Negative(f64, f64),
    #[error("approximation factors must be finite and non-negative, got ({0}, {1})")]
    NegativeEps(f64, f64),
    #[error("degenerate line: a and b are both zero")]
    DegenerateLine,
}

/// A pair of non-negative objective costs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostVec {
    pub c1: f64,
    pub c2: f64,
}

impl CostVec {
    pub const ZERO: CostVec = CostVec { c1: 0.0, c2: 0.0 };
    pub const INFINITY: CostVec = CostVec {
        c1: f64::INFINITY,
        c2: f64::INFINITY,
    };

    /// Panics on negative or NaN components; see [`CostVec::try_new`].
    pub fn new(c1: f64, c2: f64) -> Self {
        Self::try_new(c1, c2).unwrap()
    }

    pub fn try_new(c1: f64, c2: f64) -> Result<Self, CostError> {
        // `!(x >= 0)` also rejects NaN
        if !(c1 >= 0.0) || !(c2 >= 0.0) {
            return Err(CostError::Negative(c1, c2));
        }
        Ok(CostVec { c1, c2 })
    }

    #[inline]
    pub fn get(self, objective: Objective) -> f64 {
        match objective {
            Objective::First => self.c1,
            Objective::Second => self.c2,
        }
    }

    /// Element-wise minimum.
    #[inline]
    pub fn min(self, other: CostVec) -> CostVec {
        CostVec {
            c1: self.c1.min(other.c1),
            c2: self.c2.min(other.c2),
        }
    }

    /// Component-wise `<=` (weak dominance).
    #[inline]
    pub fn le(self, other: CostVec) -> bool {
        self.c1 <= other.c1 && self.c2 <= other.c2
    }

    /// `(1 + eps) * self`, component-wise.
    #[inline]
    pub fn inflate(self, eps: Eps) -> CostVec {
        CostVec {
            c1: (1.0 + eps.e1) * self.c1,
            c2: (1.0 + eps.e2) * self.c2,
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    /// Lexicographic `(c1, c2)` total order.
    #[inline]
    pub fn lex_cmp(&self, other: &CostVec) -> std::cmp::Ordering {
        self.c1.total_cmp(&other.c1).then_with(|| self.c2.total_cmp(&other.c2))
    }
}

impl Add for CostVec {
    type Output = CostVec;
    #[inline]
    fn add(self, rhs: CostVec) -> CostVec {
        CostVec {
            c1: self.c1 + rhs.c1,
            c2: self.c2 + rhs.c2,
        }
    }
}

impl AddAssign for CostVec {
    #[inline]
    fn add_assign(&mut self, rhs: CostVec) {
        self.c1 += rhs.c1;
        self.c2 += rhs.c2;
    }
}

/// Element-wise product.
impl Mul for CostVec {
    type Output = CostVec;
    #[inline]
    fn mul(self, rhs: CostVec) -> CostVec {
        CostVec {
            c1: self.c1 * rhs.c1,
            c2: self.c2 * rhs.c2,
        }
    }
}

impl fmt::Display for CostVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c1, self.c2)
    }
}

/// Which of the two objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    First,
    Second,
}

impl Objective {
    pub fn other(self) -> Objective {
        match self {
            Objective::First => Objective::Second,
            Objective::Second => Objective::First,
        }
    }
}

/// Per-objective approximation factors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Eps {
    pub e1: f64,
    pub e2: f64,
}

impl Eps {
    pub const ZERO: Eps = Eps { e1: 0.0, e2: 0.0 };

    pub fn new(e1: f64, e2: f64) -> Self {
        Self::try_new(e1, e2).unwrap()
    }

    pub fn try_new(e1: f64, e2: f64) -> Result<Self, CostError> {
        if !(e1 >= 0.0) || !(e2 >= 0.0) || !e1.is_finite() || !e2.is_finite() {
            return Err(CostError::NegativeEps(e1, e2));
        }
        Ok(Eps { e1, e2 })
    }

    pub fn uniform(e: f64) -> Self {
        Self::new(e, e)
    }

    /// True iff both components are `>=` the other's.
    pub fn covers(self, other: Eps) -> bool {
        self.e1 >= other.e1 && self.e2 >= other.e2
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.e1, self.e2)
    }
}

/// Pareto dominance: `p` is no worse in both objectives and strictly better in one.
#[inline]
pub fn dominates(p: CostVec, q: CostVec) -> bool {
    (p.c1 <= q.c1 && p.c2 < q.c2) || (p.c1 < q.c1 && p.c2 <= q.c2)
}

/// `p_i <= (1 + eps_i) * q_i` for both objectives.
///
/// A zero component in `q` forces the same component of `p` to be zero.
#[inline]
pub fn eps_dominates(p: CostVec, q: CostVec, eps: Eps) -> bool {
    p.c1 <= (1.0 + eps.e1) * q.c1 && p.c2 <= (1.0 + eps.e2) * q.c2
}

/// [`eps_dominates`] with an extra relative slack `rel`, for costs that went
/// through floating-point path sums.
#[inline]
pub fn eps_dominates_tol(p: CostVec, q: CostVec, eps: Eps, rel: f64) -> bool {
    p.c1 <= (1.0 + eps.e1) * q.c1 * (1.0 + rel) && p.c2 <= (1.0 + eps.e2) * q.c2 * (1.0 + rel)
}

/// Line `a*x + b*y + 1 = 0` in objective space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line2D {
    a: f64,
    b: f64,
}

/// Returned by [`line_through`] when no usable correlation line exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NoFit {
    #[error("points coincide")]
    Coincident,
    #[error("line passes through the origin")]
    ThroughOrigin,
    #[error("line slope is not positive")]
    NonPositiveSlope,
}

impl Line2D {
    pub fn new(a: f64, b: f64) -> Result<Self, CostError> {
        if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err(CostError::DegenerateLine);
        }
        Ok(Line2D { a, b })
    }

    /// The line `y = slope * x + intercept`. Needs a non-zero intercept.
    pub fn from_slope_intercept(slope: f64, intercept: f64) -> Result<Self, CostError> {
        if intercept == 0.0 {
            return Err(CostError::DegenerateLine);
        }
        // slope*x - y + intercept = 0, divided by intercept
        Line2D::new(slope / intercept, -1.0 / intercept)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `-a / b`; infinite for vertical lines.
    pub fn slope(&self) -> f64 {
        -self.a / self.b
    }

    /// Signed residual `a*x + b*y + 1`.
    #[inline]
    pub fn residual(&self, p: CostVec) -> f64 {
        self.a * p.c1 + self.b * p.c2 + 1.0
    }

    /// Unit normal `(a, b) / |(a, b)|`.
    pub fn unit_normal(&self) -> (f64, f64) {
        let n = self.a.hypot(self.b);
        (self.a / n, self.b / n)
    }
}

/// Perpendicular distance from `p` to `line`.
#[inline]
pub fn perp_distance(line: Line2D, p: CostVec) -> f64 {
    line.residual(p).abs() / line.a.hypot(line.b)
}

/// Fits the line through two cost points, keeping only positive slopes.
pub fn line_through(p: CostVec, q: CostVec) -> Result<Line2D, NoFit> {
    if p == q {
        return Err(NoFit::Coincident);
    }
    // [p1 p2; q1 q2] [a; b] = [-1; -1]
    let det = p.c1 * q.c2 - p.c2 * q.c1;
    let scale = p.c1.hypot(p.c2) * q.c1.hypot(q.c2);
    if det.abs() <= 1e-12 * scale {
        return Err(NoFit::ThroughOrigin);
    }
    let dx = q.c1 - p.c1;
    let dy = q.c2 - p.c2;
    if !(dx != 0.0 && dy / dx > 0.0) {
        return Err(NoFit::NonPositiveSlope);
    }
    let a = (p.c2 - q.c2) / det;
    let b = (q.c1 - p.c1) / det;
    Line2D::new(a, b).map_err(|_| NoFit::ThroughOrigin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(a: f64, b: f64) -> CostVec {
        CostVec::new(a, b)
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(cv(1.0, 2.0), cv(1.0, 3.0)));
        assert!(!dominates(cv(1.0, 2.0), cv(1.0, 2.0)));
        assert!(!dominates(cv(20.0, 100.0), cv(80.0, 30.0)));
        assert!(!dominates(cv(80.0, 30.0), cv(20.0, 100.0)));
    }

    #[test]
    fn eps_dominance_examples() {
        let e = Eps::uniform(0.1);
        // 88 vs 1.1 * 80 is not exact in binary; the boundary case still holds
        assert!(eps_dominates(cv(88.0, 33.0), cv(80.0, 30.0), e));
        assert!(eps_dominates(cv(80.0, 30.0), cv(80.0, 28.0), e));
        assert!(!eps_dominates(cv(80.0, 31.0), cv(80.0, 28.0), e));
        let p = cv(3.5, 7.25);
        assert!(eps_dominates(p, p, Eps::ZERO));
    }

    #[test]
    fn eps_dominance_zero_component() {
        let e = Eps::uniform(0.5);
        assert!(eps_dominates(cv(0.0, 1.0), cv(0.0, 1.0), e));
        assert!(!eps_dominates(cv(1e-9, 1.0), cv(0.0, 1.0), e));
    }

    #[test]
    fn perp_distance_examples() {
        let horiz = Line2D::new(0.0, -1.0).unwrap();
        assert_eq!(perp_distance(horiz, cv(5.0, 1.0)), 0.0);
        assert_eq!(perp_distance(horiz, cv(5.0, 3.0)), 2.0);
        let diag = Line2D::new(-1.0, -1.0).unwrap();
        assert!((perp_distance(diag, cv(0.0, 0.0)) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn degenerate_line_rejected() {
        assert_eq!(Line2D::new(0.0, 0.0), Err(CostError::DegenerateLine));
    }

    #[test]
    fn line_through_examples() {
        assert_eq!(line_through(cv(1.0, 1.0), cv(2.0, 2.0)), Err(NoFit::ThroughOrigin));
        assert_eq!(line_through(cv(1.0, 3.0), cv(2.0, 1.0)), Err(NoFit::NonPositiveSlope));
        assert_eq!(line_through(cv(1.0, 3.0), cv(1.0, 3.0)), Err(NoFit::Coincident));
        assert_eq!(line_through(cv(1.0, 3.0), cv(1.0, 5.0)), Err(NoFit::NonPositiveSlope));
        let l = line_through(cv(1.0, 2.0), cv(2.0, 3.0)).unwrap();
        assert!((l.slope() - 1.0).abs() < 1e-12);
        assert!(perp_distance(l, cv(1.0, 2.0)) <= 1e-9);
        assert!(perp_distance(l, cv(2.0, 3.0)) <= 1e-9);
    }

    #[test]
    fn slope_intercept_roundtrip() {
        let l = Line2D::from_slope_intercept(0.5, 0.1).unwrap();
        assert!((l.slope() - 0.5).abs() < 1e-12);
        assert!(perp_distance(l, cv(2.0, 1.1)) < 1e-12);
    }

    #[test]
    fn negative_costs_rejected() {
        assert!(CostVec::try_new(-1.0, 0.0).is_err());
        assert!(CostVec::try_new(f64::NAN, 0.0).is_err());
        assert!(Eps::try_new(0.1, -0.1).is_err());
    }
}
