//! Non-symbolic polation methods: nearest neighbour (in the ambient space or
//! after projection onto the data), a least-squares affine model, extrusion
//! and additive lifting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine_hull, AffineSubspace, Dataset, Point};
use crate::scalar::{dist, dot, Scalar};

/// Default relative tolerance used when a chart is built from data.
pub const CHART_TOL: f64 = 1e-8;

/// Coordinates within the affine hull of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceChart<T> {
    pub subspace: AffineSubspace<T>,
}

impl<T: Scalar> SubspaceChart<T> {
    pub fn new(subspace: AffineSubspace<T>) -> Self {
        Self { subspace }
    }

    pub fn of_data(data: &Dataset<T>) -> Result<Self> {
        Ok(Self::new(affine_hull(data, T::of(CHART_TOL))?))
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn to_intrinsic(&self, p: &Point<T>) -> Result<Vec<T>> {
        self.subspace.to_intrinsic(p)
    }

    pub fn from_intrinsic(&self, t: &[T]) -> Result<Point<T>> {
        self.subspace.from_intrinsic(t)
    }

    /// Nearest point of the subspace.
    pub fn project(&self, p: &Point<T>) -> Result<Point<T>> {
        p.check_dim(self.subspace.ambient_dim())?;
        Ok(Point::from_vec_unchecked(self.subspace.project_unchecked(p.coords()).0))
    }

    /// True when `other` lies inside this chart's subspace.
    fn contains(&self, other: &AffineSubspace<T>) -> bool {
        if other.ambient_dim() != self.subspace.ambient_dim() {
            return false;
        }
        let tol = T::of(1e-9) * T::one().max(crate::scalar::norm(other.base().coords()));
        let on = |q: &[T]| self.subspace.project_unchecked(q).1 <= tol;
        on(other.base().coords())
            && other.basis().iter().all(|b| {
                let q: Vec<T> = other.base().coords().iter().zip(b).map(|(&x, &d)| x + d).collect();
                on(&q)
            })
    }
}

/// Method names accepted in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NnAmbient,
    NnProjected,
    Linear,
    Extrusion,
    Additive,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::NnAmbient,
        Method::NnProjected,
        Method::Linear,
        Method::Extrusion,
        Method::Additive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NnAmbient => "nn_ambient",
            Method::NnProjected => "nn_projected",
            Method::Linear => "linear",
            Method::Extrusion => "extrusion",
            Method::Additive => "additive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Piecewise-linear function of the coordinate `s = u.p` along a line,
/// extended linearly beyond the outermost knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear<T> {
    pub direction: Vec<T>,
    /// Knots sorted by coordinate, no duplicate coordinates.
    pub knots: Vec<(T, T)>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    /// Interpolant through data on a line. Samples sharing a coordinate are
    /// averaged.
    pub fn fit(data: &Dataset<T>) -> Result<Self> {
        let chart = SubspaceChart::of_data(data)?;
        if chart.dim() != 1 {
            return Err(Error::UnsupportedGeometry(format!(
                "piecewise-linear model needs data on a line, found a {}-dimensional hull",
                chart.dim()
            )));
        }
        let direction = chart.subspace.basis()[0].clone();
        let mut pts: Vec<(T, T)> = data
            .samples()
            .iter()
            .map(|s| (dot(&direction, s.location.coords()), s.value))
            .collect();
        pts.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()));
        let mut knots: Vec<(T, T)> = Vec::new();
        let mut i = 0;
        while i < pts.len() {
            let mut j = i;
            let mut sum = T::zero();
            while j < pts.len() && pts[j].0 == pts[i].0 {
                sum = sum + pts[j].1;
                j += 1;
            }
            knots.push((pts[i].0, sum / T::of_usize(j - i)));
            i = j;
        }
        Ok(Self { direction, knots })
    }

    pub fn coordinate(&self, p: &[T]) -> T {
        dot(&self.direction, p)
    }

    pub fn eval_at(&self, s: T) -> T {
        let k = &self.knots;
        if k.len() == 1 {
            return k[0].1;
        }
        let seg = match k.binary_search_by(|(c, _)| c.as_f64().total_cmp(&s.as_f64())) {
            Ok(i) => return k[i].1,
            Err(0) => 0,
            Err(i) if i >= k.len() => k.len() - 2,
            Err(i) => i - 1,
        };
        let ((s0, v0), (s1, v1)) = (k[seg], k[seg + 1]);
        v0 + (s - s0) * (v1 - v0) / (s1 - s0)
    }
}

/// Least-squares affine function of intrinsic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel<T> {
    pub chart: SubspaceChart<T>,
    pub intercept: T,
    pub coefficients: Vec<T>,
}

impl<T: Scalar> LinearModel<T> {
    pub fn eval_intrinsic(&self, t: &[T]) -> T {
        self.intercept + dot(&self.coefficients, t)
    }
}

/// A fitted polation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PolationModel<T> {
    NnAmbient {
        locations: Vec<Vec<T>>,
        values: Vec<T>,
    },
    /// Inner model evaluated at the projection onto the data's hull.
    NnProjected {
        chart: SubspaceChart<T>,
        inner: Box<PolationModel<T>>,
    },
    Linear(LinearModel<T>),
    /// Slice model held constant along every direction normal to the hull.
    Extrusion {
        chart: SubspaceChart<T>,
        inner: Box<PolationModel<T>>,
    },
    /// `f(along) + f(across) - f(offset)` for data on an axis-aligned line in
    /// the plane; the correction term is dropped when `literal` is set.
    Additive {
        along: usize,
        across: usize,
        offset: T,
        inner: Box<PolationModel<T>>,
        literal: bool,
    },
    /// Piecewise-linear slice model used as an inner model.
    PiecewiseLinear(PiecewiseLinear<T>),
}

impl<T: Scalar> PolationModel<T> {
    /// Method name; the bare piecewise-linear model reports itself as
    /// `piecewise_linear`.
    pub fn name(&self) -> &'static str {
        match self {
            PolationModel::NnAmbient { .. } => Method::NnAmbient.name(),
            PolationModel::NnProjected { .. } => Method::NnProjected.name(),
            PolationModel::Linear(_) => Method::Linear.name(),
            PolationModel::Extrusion { .. } => Method::Extrusion.name(),
            PolationModel::Additive { .. } => Method::Additive.name(),
            PolationModel::PiecewiseLinear(_) => "piecewise_linear",
        }
    }

    /// Ambient dimension of accepted query points, if fixed.
    fn ambient_dim(&self) -> Option<usize> {
        match self {
            PolationModel::NnAmbient { locations, .. } => locations.first().map(Vec::len),
            PolationModel::NnProjected { chart, .. } | PolationModel::Extrusion { chart, .. } => {
                Some(chart.subspace.ambient_dim())
            }
            PolationModel::Linear(m) => Some(m.chart.subspace.ambient_dim()),
            PolationModel::Additive { .. } => Some(2),
            PolationModel::PiecewiseLinear(m) => Some(m.direction.len()),
        }
    }

    pub fn predict(&self, p: &Point<T>) -> Result<T> {
        if let Some(n) = self.ambient_dim() {
            p.check_dim(n)?;
        }
        let c = p.coords();
        Ok(match self {
            PolationModel::NnAmbient { locations, values } => {
                let mut best = 0;
                let mut best_d = T::infinity();
                for (i, l) in locations.iter().enumerate() {
                    let d = dist(l, c);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                values[best]
            }
            PolationModel::NnProjected { chart, inner } | PolationModel::Extrusion { chart, inner } => {
                let q = chart.subspace.project_unchecked(c).0;
                match inner.as_ref() {
                    // the coordinate along the line is unchanged by projection
                    PolationModel::PiecewiseLinear(pl) => pl.eval_at(pl.coordinate(c)),
                    other => other.predict(&Point::from_vec_unchecked(q))?,
                }
            }
            PolationModel::Linear(m) => m.eval_intrinsic(&m.chart.subspace.intrinsic_unchecked(c)),
            PolationModel::Additive {
                along,
                across,
                offset,
                inner,
                literal,
            } => {
                let f = |v: T| -> Result<T> {
                    let mut q = vec![T::zero(); 2];
                    q[*along] = v;
                    q[*across] = *offset;
                    inner.predict(&Point::from_vec_unchecked(q))
                };
                let fy = f(c[*across])?;
                if *literal {
                    f(c[*along])? + fy
                } else {
                    f(c[*along])? + (fy - f(*offset)?)
                }
            }
            PolationModel::PiecewiseLinear(pl) => pl.eval_at(pl.coordinate(c)),
        })
    }
}

/// Value of the nearest sample, ties going to the lowest index.
pub fn fit_nn_ambient<T: Scalar>(data: &Dataset<T>) -> PolationModel<T> {
    PolationModel::NnAmbient {
        locations: data.locations().map(|p| p.coords().to_vec()).collect(),
        values: data.values().collect(),
    }
}

fn check_inner<T: Scalar>(chart: &SubspaceChart<T>, inner: &PolationModel<T>) -> Result<()> {
    let covered = match inner {
        PolationModel::NnAmbient { locations, .. } => {
            locations.first().map(Vec::len) == Some(chart.subspace.ambient_dim())
        }
        PolationModel::Linear(m) => m.chart.contains(&chart.subspace),
        PolationModel::PiecewiseLinear(pl) => {
            chart.dim() == 1
                && pl.direction.len() == chart.subspace.ambient_dim()
                && (dot(&pl.direction, &chart.subspace.basis()[0]).abs() - T::one()).abs() <= T::of(1e-9)
        }
        _ => false,
    };
    if covered {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "inner model `{}` does not cover the data subspace",
            inner.name()
        )))
    }
}

/// Default slice model: piecewise linear on a line, least squares otherwise.
pub fn default_inner<T: Scalar>(data: &Dataset<T>) -> Result<PolationModel<T>> {
    if SubspaceChart::of_data(data)?.dim() == 1 {
        Ok(PolationModel::PiecewiseLinear(PiecewiseLinear::fit(data)?))
    } else {
        fit_linear(data)
    }
}

pub fn fit_nn_projected<T: Scalar>(data: &Dataset<T>, inner: PolationModel<T>) -> Result<PolationModel<T>> {
    let chart = SubspaceChart::of_data(data)?;
    check_inner(&chart, &inner)?;
    Ok(PolationModel::NnProjected {
        chart,
        inner: Box::new(inner),
    })
}

pub fn fit_extrusion<T: Scalar>(data: &Dataset<T>, inner: PolationModel<T>) -> Result<PolationModel<T>> {
    let chart = SubspaceChart::of_data(data)?;
    check_inner(&chart, &inner)?;
    Ok(PolationModel::Extrusion {
        chart,
        inner: Box::new(inner),
    })
}

/// Least-squares affine fit in intrinsic coordinates.
pub fn fit_linear<T: Scalar>(data: &Dataset<T>) -> Result<PolationModel<T>> {
    let chart = SubspaceChart::of_data(data)?;
    let k = chart.dim();
    let rows: Vec<Vec<T>> = data
        .locations()
        .map(|p| {
            let mut r = vec![T::one()];
            r.extend(chart.subspace.intrinsic_unchecked(p.coords()));
            r
        })
        .collect();
    let b: Vec<T> = data.values().collect();
    if rows.len() < k + 1 {
        return Err(Error::DegenerateFit(format!("{} samples cannot fix {} parameters", rows.len(), k + 1)));
    }
    let x = least_squares(&rows, &b, k + 1)?;
    Ok(PolationModel::Linear(LinearModel {
        chart,
        intercept: x[0],
        coefficients: x[1..].to_vec(),
    }))
}

/// Solves `min |A x - b|` by modified Gram-Schmidt QR.
fn least_squares<T: Scalar>(rows: &[Vec<T>], b: &[T], n: usize) -> Result<Vec<T>> {
    let m = rows.len();
    let mut q: Vec<Vec<T>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut r = vec![vec![T::zero(); n]; n];
    let norms: Vec<T> = q.iter().map(|c| crate::scalar::norm(c)).collect();
    for j in 0..n {
        for i in 0..j {
            let d = dot(&q[i], &q[j]);
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(a, &c)| *a = *a - d * c);
        }
        let len = crate::scalar::norm(&q[j]);
        if !(len > T::of(1e-10) * norms[j].max(T::one())) {
            return Err(Error::DegenerateFit("rank-deficient design".into()));
        }
        r[j][j] = len;
        q[j].iter_mut().for_each(|a| *a = *a / len);
    }
    let mut x = vec![T::zero(); n];
    let qtb: Vec<T> = q.iter().map(|c| dot(c, b)).collect();
    for j in (0..n).rev() {
        let mut s = qtb[j];
        for i in j + 1..n {
            s = s - r[j][i] * x[i];
        }
        x[j] = s / r[j][j];
    }
    debug_assert_eq!(m, b.len());
    Ok(x)
}

/// Additive lifting for data on an axis-aligned line in the plane.
pub fn fit_additive<T: Scalar>(data: &Dataset<T>, inner: PolationModel<T>, literal: bool) -> Result<PolationModel<T>> {
    let chart = SubspaceChart::of_data(data)?;
    if data.ambient_dim() != 2 || chart.dim() != 1 {
        return Err(Error::UnsupportedGeometry(
            "additive lifting needs data on a line in the plane".into(),
        ));
    }
    let u = &chart.subspace.basis()[0];
    let tol = T::of(1e-12);
    let along = if u[1].abs() <= tol {
        0
    } else if u[0].abs() <= tol {
        1
    } else {
        return Err(Error::UnsupportedGeometry("additive lifting needs an axis-aligned line".into()));
    };
    let across = 1 - along;
    check_inner(&chart, &inner)?;
    // keep the shared coordinate exact rather than a rounded centroid
    let first = data.samples()[0].location[across];
    let offset = if data.locations().all(|l| l[across] == first) {
        first
    } else {
        chart.subspace.base().coords()[across]
    };
    Ok(PolationModel::Additive {
        along,
        across,
        offset,
        inner: Box::new(inner),
        literal,
    })
}

/// `f(x) + f(y) - f(y0)` for an arbitrary slice function `f`, or the literal
/// `f(x) + f(y)` when `literal` is set. The slice runs along the first axis.
pub fn predict_additive<T: Scalar>(f: impl Fn(T) -> T, p: &Point<T>, slice_offset: T, literal: bool) -> Result<T> {
    p.check_dim(2)?;
    let (x, y) = (p[0], p[1]);
    Ok(if literal { f(x) + f(y) } else { f(x) + (f(y) - f(slice_offset)) })
}

/// Fits a method by name with the default inner model.
pub fn fit_method<T: Scalar>(method: Method, data: &Dataset<T>) -> Result<PolationModel<T>> {
    match method {
        Method::NnAmbient => Ok(fit_nn_ambient(data)),
        Method::NnProjected => fit_nn_projected(data, default_inner(data)?),
        Method::Linear => fit_linear(data),
        Method::Extrusion => fit_extrusion(data, default_inner(data)?),
        Method::Additive => fit_additive(data, default_inner(data)?, false),
    }
}
