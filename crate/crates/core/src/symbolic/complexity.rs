//! Description-length simplicity score.
//!
//! Every operator and variable leaf costs 1. A constant leaf costs
//! `1 + bits/8`, where an integer `c` takes `ceil(log2(|c| + 1))` bits (capped
//! at 32) and any other value takes a flat 32 bits. A Euclidean norm
//! `sqrt(a^2 + b^2 + ...)` over variable-bearing terms is charged as a single
//! operator, so `cos(sqrt(add(pow2(x),pow2(y))))` costs 4 while
//! `cos(sqrt(add(pow2(x),400)))` costs 7.125.

use serde::{Deserialize, Serialize};

use super::expr::{BinaryOp, Expression, UnaryOp};
use crate::scalar::Scalar;

/// Non-integer constants are charged this many bits.
pub const NON_INTEGER_BITS: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexityScore(pub f64);

impl ComplexityScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for ComplexityScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bits needed to describe `c`.
pub fn constant_bits(c: f64) -> f64 {
    if c.is_finite() && c == c.round() {
        (c.abs() + 1.0).log2().ceil().min(NON_INTEGER_BITS)
    } else {
        NON_INTEGER_BITS
    }
}

pub fn constant_cost(c: f64) -> f64 {
    1.0 + constant_bits(c) / 8.0
}

pub fn complexity<T: Scalar>(e: &Expression<T>) -> ComplexityScore {
    ComplexityScore(cost(e))
}

fn cost<T: Scalar>(e: &Expression<T>) -> f64 {
    match e {
        Expression::Var(_) => 1.0,
        Expression::Const(c) => constant_cost(c.as_f64()),
        Expression::Unary(UnaryOp::Sqrt, inner) => match norm_terms(inner) {
            Some(terms) => 1.0 + terms.iter().map(|t| cost(t)).sum::<f64>(),
            None => 1.0 + cost(inner),
        },
        Expression::Unary(_, a) => 1.0 + cost(a),
        Expression::Binary(_, a, b) => 1.0 + cost(a) + cost(b),
    }
}

/// The squared terms of `a^2 + b^2 + ...` when every term bears a variable.
fn norm_terms<T: Scalar>(e: &Expression<T>) -> Option<Vec<&Expression<T>>> {
    let mut terms = Vec::new();
    collect_sum(e, &mut terms);
    if terms.len() < 2 {
        return None;
    }
    terms
        .into_iter()
        .map(|t| match t {
            Expression::Unary(UnaryOp::Pow2, inner) if inner.arity() > 0 => Some(inner.as_ref()),
            _ => None,
        })
        .collect()
}

fn collect_sum<'a, T: Scalar>(e: &'a Expression<T>, out: &mut Vec<&'a Expression<T>>) {
    match e {
        Expression::Binary(BinaryOp::Add, a, b) => {
            collect_sum(a, out);
            collect_sum(b, out);
        }
        other => out.push(other),
    }
}

/// Smallest score any structure with `nodes` nodes over `n_vars` variables
/// can reach.
///
/// Only the norm discount pulls a score below the node count. A `k`-term norm
/// saves `2k - 1` and needs `2k` nodes of its own plus `k` distinct
/// variable-bearing terms (size 1 for the first `n_vars`, at least 2 after
/// that). Norms are packed disjointly; a nested norm needs more nodes than
/// any limit this is used with.
pub fn score_lower_bound(nodes: usize, n_vars: usize) -> f64 {
    let min_nodes = |k: usize| 2 * k + (0..k).map(|j| if j < n_vars { 1 } else { 2 }).sum::<usize>();
    let mut savings = vec![0usize; nodes + 1];
    for n in 0..=nodes {
        let mut k = 2;
        while min_nodes(k) <= n {
            savings[n] = savings[n].max(2 * k - 1 + savings[n - min_nodes(k)]);
            k += 1;
        }
    }
    (nodes - savings[nodes]) as f64
}
