//! Points, datasets and the four-way regime classification of queries.
//!
//! A query is *autopolation* when it coincides with a sample location,
//! *interpolation* when it lies in the convex hull of the samples,
//! *extrapolation* when it lies in their affine hull but outside the convex
//! hull, and *hyperpolation* otherwise.

mod classify;
mod hull;
mod linalg;
mod subspace;

pub use classify::{classify, hyperpolation_distance, Classifier, Regime, RegimeTag, Tolerances};
pub use hull::in_convex_hull;
pub use linalg::{singular_decomposition, Svd};
pub(crate) use linalg::orthogonal_complement;
pub use subspace::{affine_hull, project, AffineSubspace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A location in the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| T::of(c)).collect())
    }

    /// Origin of `dim`-dimensional space.
    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![T::zero(); dim.max(1)],
        }
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<T>) -> Self {
        Self { coords }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub(crate) fn check_dim_any(&self, allowed: &[usize]) -> Result<()> {
        if allowed.contains(&self.dim()) {
            return Ok(());
        }
        Err(Error::DimensionMismatch {
            expected: allowed[allowed.len() - 1],
            got: self.dim(),
        })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl<T> std::ops::Index<usize> for Point<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<T> {
    pub location: Point<T>,
    pub value: T,
}

impl<T: Scalar> LabeledSample<T> {
    pub fn new(location: Point<T>, value: T) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::invalid("sample value must be finite"));
        }
        Ok(Self { location, value })
    }
}

/// Labeled samples sharing one ambient dimension.
///
/// `noise_sigma == 0` selects strict mode, where the fitted function must pass
/// through every sample. Positive values select flexible mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    samples: Vec<LabeledSample<T>>,
    ambient_dim: usize,
    noise_sigma: T,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(samples: Vec<LabeledSample<T>>, noise_sigma: T) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("dataset must contain at least one sample"))?;
        let ambient_dim = first.location.dim();
        for s in &samples {
            s.location.check_dim(ambient_dim)?;
            if !s.value.is_finite() {
                return Err(Error::invalid("sample value must be finite"));
            }
        }
        if !noise_sigma.is_finite() || noise_sigma < T::zero() {
            return Err(Error::invalid("noise sigma must be finite and nonnegative"));
        }
        if noise_sigma == T::zero() {
            for (i, a) in samples.iter().enumerate() {
                for b in &samples[i + 1..] {
                    if a.location == b.location && a.value != b.value {
                        return Err(Error::invalid(format!(
                            "strict dataset has conflicting values at {:?}",
                            a.location.coords()
                        )));
                    }
                }
            }
        }
        Ok(Self {
            samples,
            ambient_dim,
            noise_sigma,
        })
    }

    /// Builds a strict dataset from `(location, value)` pairs.
    pub fn strict(pairs: &[(Vec<f64>, f64)]) -> Result<Self> {
        Self::from_pairs(pairs, T::zero())
    }

    pub fn from_pairs(pairs: &[(Vec<f64>, f64)], noise_sigma: T) -> Result<Self> {
        let samples = pairs
            .iter()
            .map(|(loc, v)| LabeledSample::new(Point::from_f64(loc)?, T::of(*v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, noise_sigma)
    }

    pub fn samples(&self) -> &[LabeledSample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn noise_sigma(&self) -> T {
        self.noise_sigma
    }

    pub fn is_strict(&self) -> bool {
        self.noise_sigma == T::zero()
    }

    pub fn locations(&self) -> impl Iterator<Item = &Point<T>> + '_ {
        self.samples.iter().map(|s| &s.location)
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.value)
    }

    /// Returns a copy with one more sample appended.
    pub fn with_sample(&self, sample: LabeledSample<T>) -> Result<Self> {
        let mut samples = self.samples.clone();
        samples.push(sample);
        Self::new(samples, self.noise_sigma)
    }

    pub fn with_noise_sigma(&self, noise_sigma: T) -> Result<Self> {
        Self::new(self.samples.clone(), noise_sigma)
    }
}
