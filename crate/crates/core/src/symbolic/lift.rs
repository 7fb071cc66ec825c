//! Lifting a slice expression into one new variable `y`.
//!
//! Every constant occurrence `c` can be replaced by `y`, by `y^2`, or by a
//! shifted square. Each replacement records the value `y0` at which the lifted
//! expression restricts to the slice fit. The extrusion, which leaves the
//! expression unchanged and ignores `y`, is always a candidate.

use serde::{Deserialize, Serialize};

use super::complexity::{complexity, ComplexityScore};
use super::expr::{BinaryOp, Expression, UnaryOp};
use crate::scalar::Scalar;

/// Index of the new variable in lifted expressions.
pub const NEW_VAR: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CandidateLifting<T> {
    /// Expression in `x` (slice coordinate) and `y`.
    pub expr: Expression<T>,
    /// Value of `y` on the data slice.
    pub y0: T,
    pub score: ComplexityScore,
    /// Maximum absolute error of the restriction over the slice samples.
    pub residual: T,
}

impl<T: Scalar> CandidateLifting<T> {
    pub fn new(expr: Expression<T>, y0: T, residual: T) -> Self {
        let expr = expr.canonicalize();
        let score = complexity(&expr);
        Self {
            expr,
            y0,
            score,
            residual,
        }
    }

    pub fn is_extrusion(&self) -> bool {
        !self.expr.uses_var(NEW_VAR)
    }

    /// Ranking order: score, residual, serialized expression, then `y0`.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .0
            .total_cmp(&other.score.0)
            .then_with(|| self.residual.as_f64().total_cmp(&other.residual.as_f64()))
            .then_with(|| self.expr.to_prefix().cmp(&other.expr.to_prefix()))
            .then_with(|| self.y0.as_f64().total_cmp(&other.y0.as_f64()))
    }

    /// Same score and residual.
    pub fn ties_with(&self, other: &Self) -> bool {
        self.score == other.score && self.residual == other.residual
    }

    pub fn eval(&self, x: T, y: T) -> Option<T> {
        self.expr.eval(&[x, y])
    }
}

/// The slice expression obtained by fixing `y = y0`.
pub fn restrict<T: Scalar>(c: &CandidateLifting<T>) -> Expression<T> {
    c.expr
        .substitute(NEW_VAR, &Expression::Const(c.y0))
        .fold_constants()
        .canonicalize()
}

fn y() -> Expression<f64> {
    Expression::Var(NEW_VAR)
}

fn cast<T: Scalar>(e: Expression<f64>) -> Expression<T> {
    match e {
        Expression::Var(i) => Expression::Var(i),
        Expression::Const(c) => Expression::Const(T::of(c)),
        Expression::Unary(op, a) => Expression::Unary(op, Box::new(cast(*a))),
        Expression::Binary(op, a, b) => Expression::Binary(op, Box::new(cast(*a)), Box::new(cast(*b))),
    }
}

fn square(e: Expression<f64>) -> Expression<f64> {
    Expression::Unary(UnaryOp::Pow2, Box::new(e))
}

fn shifted(a: f64) -> Expression<f64> {
    if a < 0.0 {
        Expression::Binary(BinaryOp::Add, Box::new(y()), Box::new(Expression::Const(-a)))
    } else {
        Expression::Binary(BinaryOp::Sub, Box::new(y()), Box::new(Expression::Const(a)))
    }
}

/// Replacement menu for a constant `c`: expressions in `y` with the values of
/// `y0` that make them equal `c`.
fn replacements(c: f64) -> Vec<(Expression<f64>, Vec<f64>)> {
    let mut out = vec![(y(), vec![c])];
    if c < 0.0 || !c.is_finite() {
        return out;
    }
    let r = c.sqrt();
    let pm = |v: f64, s: f64| if s == 0.0 { vec![v] } else { vec![v - s, v + s] };
    out.push((square(y()), pm(0.0, r)));
    for a in [-1.0, 1.0] {
        out.push((square(shifted(a)), pm(a, r)));
    }
    let floor = r.floor();
    let b = c - floor * floor;
    if b != 0.0 && floor > 0.0 {
        out.push((
            Expression::Binary(BinaryOp::Add, Box::new(square(y())), Box::new(Expression::Const(b))),
            pm(0.0, floor),
        ));
    }
    out
}

/// All liftings of `e` from the replacement menu plus the extrusion at
/// `y0 = 0`. Every candidate carries `residual`, the slice-fit residual.
///
/// A slice expression that does not involve `x` is only extruded: the data
/// say nothing about how its constants would vary off the slice.
pub fn lift_constants<T: Scalar>(e: &Expression<T>, residual: T) -> Vec<CandidateLifting<T>> {
    let mut out = vec![CandidateLifting::new(e.clone(), T::zero(), residual)];
    if !e.uses_var(0) {
        return out;
    }
    for (k, c) in e.constants().into_iter().enumerate() {
        for (rep, y0s) in replacements(c.as_f64()) {
            let lifted = e.replace_constant(k, &cast(rep));
            for y0 in y0s {
                out.push(CandidateLifting::new(lifted.clone(), T::of(y0), residual));
            }
        }
    }
    out.sort_by(CandidateLifting::rank_cmp);
    out.dedup_by(|a, b| a.expr == b.expr && a.y0 == b.y0);
    out
}
