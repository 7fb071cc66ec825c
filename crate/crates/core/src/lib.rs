//! Classification of queries against sampled data and hyperpolation beyond
//! the data's affine hull.
//!
//! The library is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod baselines;
pub mod bayesian;
pub mod benchmark;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod scalar;
pub mod symbolic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Dataset = geometry::Dataset<f64>;
pub type LabeledSample = geometry::LabeledSample<f64>;
pub type AffineSubspace = geometry::AffineSubspace<f64>;
pub type Regime = geometry::Regime<f64>;
pub type Tolerances = geometry::Tolerances<f64>;
pub type Expression = symbolic::Expression<f64>;
pub type CandidateLifting = symbolic::CandidateLifting<f64>;
pub type SearchOutcome = symbolic::SearchOutcome<f64>;
pub type PolationModel = baselines::PolationModel<f64>;
pub type HypothesisFamily = bayesian::HypothesisFamily<f64>;
pub type Posterior = bayesian::Posterior<f64>;
