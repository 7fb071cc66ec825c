//! Coordinates of a one-dimensional slice inside the ambient space.
//!
//! The slice variable `x` is the position along the unit direction `u` of the
//! data line, measured from the ambient origin. The new variable `y` moves
//! along the first canonical normal `n`: at ambient point `p` it takes the
//! value `y0 + n.p - d`, where `d = n.q` for any point `q` on the line, so
//! the data line itself sits at `y = y0`. Other normal directions, present
//! when the ambient dimension exceeds two, are ignored (the lifted function
//! is constant along them).

use serde::{Deserialize, Serialize};

use super::expr::{BinaryOp, Expression};
use super::fit::SlicePoints;
use crate::error::{Error, Result};
use crate::geometry::{affine_hull, Dataset, Point};
use crate::geometry::orthogonal_complement;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFrame<T> {
    pub direction: Vec<T>,
    pub normal: Vec<T>,
    pub offset: T,
    /// Ambient dimension of the data.
    pub data_dim: usize,
}

impl<T: Scalar> SliceFrame<T> {
    /// Frame of a dataset whose affine hull is a line. Data on a line in one
    /// dimension gets a fresh second axis for `y`.
    pub fn from_dataset(data: &Dataset<T>, tol: T) -> Result<Self> {
        let hull = affine_hull(data, tol)?;
        if hull.dim() != 1 {
            return Err(Error::UnsupportedGeometry(format!(
                "slice data must span a line, found a {}-dimensional hull",
                hull.dim()
            )));
        }
        let n = data.ambient_dim();
        let direction = hull.basis()[0].clone();
        let (direction, normal, offset) = if n == 1 {
            (vec![direction[0], T::zero()], vec![T::zero(), T::one()], T::zero())
        } else {
            let normal = orthogonal_complement(std::slice::from_ref(&direction), n).swap_remove(0);
            let offset = dot(&normal, hull.base().coords());
            (direction, normal, offset)
        };
        Ok(Self {
            direction,
            normal,
            offset,
            data_dim: n,
        })
    }

    /// Dimension of the points the lifted expressions are evaluated at.
    pub fn query_dim(&self) -> usize {
        self.direction.len()
    }

    fn padded<'a>(&self, p: &'a [T]) -> std::borrow::Cow<'a, [T]> {
        if p.len() == self.data_dim && self.data_dim < self.query_dim() {
            let mut v = p.to_vec();
            v.resize(self.query_dim(), T::zero());
            v.into()
        } else {
            p.into()
        }
    }

    /// Slice coordinate of a point (data-space or query-space).
    pub fn slice_coord(&self, p: &Point<T>) -> Result<T> {
        let c = self.padded(p.coords());
        p.check_dim_any(&[self.data_dim, self.query_dim()])?;
        Ok(dot(&self.direction, &c))
    }

    /// Signed displacement of a point off the data line along the normal.
    pub fn normal_offset(&self, p: &Point<T>) -> Result<T> {
        let c = self.padded(p.coords());
        p.check_dim_any(&[self.data_dim, self.query_dim()])?;
        Ok(dot(&self.normal, &c) - self.offset)
    }

    /// Variable values `[x, y]` of a candidate embedded at `y0`.
    pub fn lifted_vars(&self, p: &Point<T>, y0: T) -> Result<[T; 2]> {
        Ok([self.slice_coord(p)?, y0 + self.normal_offset(p)?])
    }

    pub fn slice_points(&self, data: &Dataset<T>) -> Result<SlicePoints<T>> {
        let xs = data
            .locations()
            .map(|p| self.slice_coord(p).map(|x| vec![x]))
            .collect::<Result<Vec<_>>>()?;
        SlicePoints::new(xs, data.values().collect())
    }

    /// Rewrites an expression in `(x, y)` embedded at `y0` as an expression
    /// in the ambient coordinates.
    pub fn ambient_expression(&self, e: &Expression<T>, y0: T) -> Expression<T> {
        let x = linear_form(&self.direction, T::zero());
        let y = linear_form(&self.normal, y0 - self.offset);
        map_vars(e, &[x, y]).fold_constants().canonicalize()
    }
}

fn near_zero<T: Scalar>(c: T) -> bool {
    c.abs() <= T::of(1e-12)
}

fn linear_form<T: Scalar>(coeffs: &[T], constant: T) -> Expression<T> {
    let mut acc: Option<Expression<T>> = None;
    for (i, &c) in coeffs.iter().enumerate() {
        if near_zero(c) {
            continue;
        }
        let term = if (c - T::one()).abs() <= T::of(1e-12) {
            Expression::Var(i)
        } else {
            Expression::Binary(BinaryOp::Mul, Box::new(Expression::Var(i)), Box::new(Expression::Const(c)))
        };
        acc = Some(match acc {
            None => term,
            Some(a) => Expression::Binary(BinaryOp::Add, Box::new(a), Box::new(term)),
        });
    }
    let acc = acc.unwrap_or(Expression::Const(T::zero()));
    if near_zero(constant) {
        acc
    } else {
        Expression::Binary(BinaryOp::Add, Box::new(acc), Box::new(Expression::Const(constant)))
    }
}

fn map_vars<T: Scalar>(e: &Expression<T>, forms: &[Expression<T>]) -> Expression<T> {
    match e {
        Expression::Var(i) => forms.get(*i).cloned().unwrap_or(Expression::Var(*i)),
        Expression::Const(c) => Expression::Const(*c),
        Expression::Unary(op, a) => Expression::Unary(*op, Box::new(map_vars(a, forms))),
        Expression::Binary(op, a, b) => {
            Expression::Binary(*op, Box::new(map_vars(a, forms)), Box::new(map_vars(b, forms)))
        }
    }
}
