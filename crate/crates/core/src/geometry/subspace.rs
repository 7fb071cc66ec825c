use serde::{Deserialize, Serialize};

use super::linalg::{canonical_sign, singular_decomposition};
use super::{Dataset, Point};
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Flat through `base` spanned by the orthonormal `basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace<T> {
    base: Point<T>,
    basis: Vec<Vec<T>>,
    fit_tol: T,
}

impl<T: Scalar> AffineSubspace<T> {
    /// Builds a subspace from an arbitrary spanning set, orthonormalising it.
    /// Directions that collapse below `tol` after orthogonalisation are dropped.
    pub fn from_spanning(base: Point<T>, directions: &[Vec<T>], tol: T) -> Result<Self> {
        let n = base.dim();
        let mut basis: Vec<Vec<T>> = Vec::new();
        for d in directions {
            if d.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: d.len(),
                });
            }
            let mut v = d.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, &y)| *x = *x - c * y);
                }
            }
            let len = crate::scalar::norm(&v);
            if len > tol {
                v.iter_mut().for_each(|x| *x = *x / len);
                basis.push(v);
            }
        }
        Ok(Self {
            base,
            basis,
            fit_tol: tol,
        })
    }

    pub fn base(&self) -> &Point<T> {
        &self.base
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fit_tol(&self) -> T {
        self.fit_tol
    }

    /// Coordinates of the orthogonal projection of `p`, relative to `base`.
    pub fn to_intrinsic(&self, p: &Point<T>) -> Result<Vec<T>> {
        p.check_dim(self.ambient_dim())?;
        Ok(self.intrinsic_unchecked(p.coords()))
    }

    pub(crate) fn intrinsic_unchecked(&self, p: &[T]) -> Vec<T> {
        let centered: Vec<T> = p
            .iter()
            .zip(self.base.coords())
            .map(|(&a, &b)| a - b)
            .collect();
        self.basis.iter().map(|b| dot(&centered, b)).collect()
    }

    pub fn from_intrinsic(&self, t: &[T]) -> Result<Point<T>> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        Ok(Point::from_vec_unchecked(self.embed_unchecked(t)))
    }

    pub(crate) fn embed_unchecked(&self, t: &[T]) -> Vec<T> {
        let mut out = self.base.coords().to_vec();
        for (b, &c) in self.basis.iter().zip(t) {
            out.iter_mut().zip(b).for_each(|(x, &y)| *x = *x + c * y);
        }
        out
    }

    pub(crate) fn project_unchecked(&self, p: &[T]) -> (Vec<T>, T) {
        let t = self.intrinsic_unchecked(p);
        let q = self.embed_unchecked(&t);
        let r = crate::scalar::dist(p, &q);
        (q, r)
    }
}

/// Smallest affine subspace containing every sample location to within the
/// relative tolerance `tol`.
///
/// The centered locations are factorised by SVD and singular directions with
/// `sigma <= tol * max(sigma_max, 1)` are discarded. The base point is the
/// centroid; basis vectors are sign-normalised so their first clearly nonzero
/// component is positive.
pub fn affine_hull<T: Scalar>(data: &Dataset<T>, tol: T) -> Result<AffineSubspace<T>> {
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(Error::invalid("affine hull tolerance must be positive"));
    }
    let n = data.ambient_dim();
    let m = T::of_usize(data.len());
    let mut centroid = vec![T::zero(); n];
    for p in data.locations() {
        for (c, &x) in centroid.iter_mut().zip(p.coords()) {
            if !x.is_finite() {
                return Err(Error::invalid("non-finite coordinate"));
            }
            *c = *c + x;
        }
    }
    centroid.iter_mut().for_each(|c| *c = *c / m);
    let rows: Vec<Vec<T>> = data
        .locations()
        .map(|p| p.coords().iter().zip(&centroid).map(|(&a, &b)| a - b).collect())
        .collect();
    let svd = singular_decomposition(&rows, n);
    let top = svd.values.first().copied().unwrap_or_else(T::zero);
    let cutoff = tol * top.max(T::one());
    let mut basis: Vec<Vec<T>> = svd
        .values
        .iter()
        .zip(svd.vectors)
        .filter(|(&s, _)| s > cutoff)
        .map(|(_, v)| v)
        .collect();
    basis.iter_mut().for_each(|v| canonical_sign(v));
    Ok(AffineSubspace {
        base: Point::from_vec_unchecked(centroid),
        basis,
        fit_tol: tol,
    })
}

/// Orthogonal projection of `p` onto `sub` and the Euclidean distance to it.
pub fn project<T: Scalar>(sub: &AffineSubspace<T>, p: &Point<T>) -> Result<(Point<T>, T)> {
    p.check_dim(sub.ambient_dim())?;
    let (q, r) = sub.project_unchecked(p.coords());
    Ok((Point::from_vec_unchecked(q), r))
}
