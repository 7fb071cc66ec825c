use serde::{Deserialize, Serialize};

use super::hull::convex_weights;
use super::subspace::{affine_hull, AffineSubspace};
use super::{Dataset, Point};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerances for regime classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<T> {
    /// Distance to a sample below which a query is autopolation.
    pub point_tol: T,
    /// Reconstruction error allowed for convex-hull membership.
    pub hull_tol: T,
    /// Relative tolerance for affine-hull fitting and membership.
    pub subspace_tol: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            point_tol: T::of(1e-9),
            hull_tol: T::of(1e-9),
            subspace_tol: T::of(1e-8),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("point_tol", self.point_tol),
            ("hull_tol", self.hull_tol),
            ("subspace_tol", self.subspace_tol),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeTag {
    Autopolation,
    Interpolation,
    Extrapolation,
    Hyperpolation,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 4] = [
        RegimeTag::Autopolation,
        RegimeTag::Interpolation,
        RegimeTag::Extrapolation,
        RegimeTag::Hyperpolation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeTag::Autopolation => "autopolation",
            RegimeTag::Interpolation => "interpolation",
            RegimeTag::Extrapolation => "extrapolation",
            RegimeTag::Hyperpolation => "hyperpolation",
        }
    }
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime of a query together with its witness.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime<T> {
    /// The query coincides with the sample at `sample`.
    Autopolation { sample: usize },
    /// Convex weights reproducing the query, one per sample.
    Interpolation { weights: Vec<T> },
    Extrapolation,
    /// Distance from the query to the affine hull of the samples.
    Hyperpolation { residual: T },
}

impl<T> Regime<T> {
    pub fn tag(&self) -> RegimeTag {
        match self {
            Regime::Autopolation { .. } => RegimeTag::Autopolation,
            Regime::Interpolation { .. } => RegimeTag::Interpolation,
            Regime::Extrapolation => RegimeTag::Extrapolation,
            Regime::Hyperpolation { .. } => RegimeTag::Hyperpolation,
        }
    }
}

/// Precomputed hull data for classifying many queries against one dataset.
#[derive(Debug, Clone)]
pub struct Classifier<'a, T> {
    data: &'a Dataset<T>,
    tols: Tolerances<T>,
    hull: AffineSubspace<T>,
    intrinsic: Vec<Vec<T>>,
    scale: T,
}

impl<'a, T: Scalar> Classifier<'a, T> {
    pub fn new(data: &'a Dataset<T>, tols: Tolerances<T>) -> Result<Self> {
        tols.validate()?;
        let hull = affine_hull(data, tols.subspace_tol)?;
        let intrinsic: Vec<Vec<T>> = data
            .locations()
            .map(|l| hull.intrinsic_unchecked(l.coords()))
            .collect();
        let scale = data
            .locations()
            .map(|l| crate::scalar::dist(l.coords(), hull.base().coords()))
            .fold(T::one(), T::max);
        Ok(Self {
            data,
            tols,
            hull,
            intrinsic,
            scale,
        })
    }

    pub fn hull(&self) -> &AffineSubspace<T> {
        &self.hull
    }

    pub fn tolerances(&self) -> &Tolerances<T> {
        &self.tols
    }

    /// Absolute distance below which a query counts as on the affine hull.
    pub fn subspace_threshold(&self) -> T {
        self.tols.subspace_tol * self.scale
    }

    pub fn classify(&self, p: &Point<T>) -> Result<Regime<T>> {
        p.check_dim(self.data.ambient_dim())?;
        let x = p.coords();
        if let Some(sample) = self
            .data
            .locations()
            .position(|l| crate::scalar::dist(l.coords(), x) <= self.tols.point_tol)
        {
            return Ok(Regime::Autopolation { sample });
        }
        let (_, residual) = self.hull.project_unchecked(x);
        if residual <= self.tols.hull_tol {
            let q = self.hull.intrinsic_unchecked(x);
            let locs: Vec<&[T]> = self.data.locations().map(Point::coords).collect();
            if let Some(weights) =
                convex_weights(&self.intrinsic, &q, self.scale, &locs, x, self.tols.hull_tol)
            {
                return Ok(Regime::Interpolation { weights });
            }
        }
        if residual <= self.subspace_threshold() {
            Ok(Regime::Extrapolation)
        } else {
            Ok(Regime::Hyperpolation { residual })
        }
    }

    /// Residual distance to the affine hull, zero for non-hyperpolation queries.
    pub fn distance(&self, p: &Point<T>) -> Result<T> {
        p.check_dim(self.data.ambient_dim())?;
        let (_, residual) = self.hull.project_unchecked(p.coords());
        Ok(if residual <= self.subspace_threshold() {
            T::zero()
        } else {
            residual
        })
    }
}

/// Classifies `p` against `data`. See [`Classifier`] for batch use.
pub fn classify<T: Scalar>(p: &Point<T>, data: &Dataset<T>, tols: Tolerances<T>) -> Result<Regime<T>> {
    Classifier::new(data, tols)?.classify(p)
}

/// Distance from `p` to the affine hull of `data`, or zero when `p` is on it.
pub fn hyperpolation_distance<T: Scalar>(p: &Point<T>, data: &Dataset<T>) -> Result<T> {
    Classifier::new(data, Tolerances::default())?.distance(p)
}
