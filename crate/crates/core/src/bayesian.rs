//! Polation as inference over an explicit, finite hypothesis family.
//!
//! Prior weights are proportional to `2^-score`. Updating against data keeps
//! exact fitters in strict mode and applies a Gaussian likelihood otherwise.
//! Weights are accumulated as logarithms and renormalised after each step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dataset, Point};
use crate::scalar::Scalar;
use crate::symbolic::{complexity, CandidateLifting, Expression, SearchOutcome, SliceFrame};

/// Default strict-mode residual bound relative to `max(1, max|value|)`.
pub const STRICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum HypothesisForm<T> {
    /// Expression in the ambient coordinates `x, y, z, ...`.
    Ambient(Expression<T>),
    /// Lifted candidate evaluated through its slice frame.
    Lifted {
        candidate: CandidateLifting<T>,
        frame: SliceFrame<T>,
    },
}

impl<T: Scalar> HypothesisForm<T> {
    pub fn eval(&self, p: &Point<T>) -> Option<T> {
        match self {
            HypothesisForm::Ambient(e) => e.eval(p.coords()),
            HypothesisForm::Lifted { candidate, frame } => {
                let [x, y] = frame.lifted_vars(p, candidate.y0).ok()?;
                candidate.eval(x, y)
            }
        }
    }

    /// The hypothesis written over ambient coordinates.
    pub fn ambient_expression(&self) -> Expression<T> {
        match self {
            HypothesisForm::Ambient(e) => e.clone(),
            HypothesisForm::Lifted { candidate, frame } => frame.ambient_expression(&candidate.expr, candidate.y0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Hypothesis<T> {
    pub form: HypothesisForm<T>,
    pub score: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct HypothesisFamily<T> {
    pub hypotheses: Vec<Hypothesis<T>>,
}

/// Normalises log2-weights; returns `None` when every weight is zero.
fn normalise_log2(logs: &[f64]) -> Option<Vec<f64>> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let raw: Vec<f64> = logs.iter().map(|l| (l - max).exp2()).collect();
    let total: f64 = raw.iter().sum();
    Some(raw.into_iter().map(|w| w / total).collect())
}

impl<T: Scalar> HypothesisFamily<T> {
    /// Family with weights proportional to `2^-score`.
    pub fn from_scored(items: Vec<(HypothesisForm<T>, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("hypothesis family must not be empty"));
        }
        if items.iter().any(|(_, s)| !s.is_finite()) {
            return Err(Error::invalid("hypothesis scores must be finite"));
        }
        let logs: Vec<f64> = items.iter().map(|(_, s)| -s).collect();
        let weights = normalise_log2(&logs).expect("finite scores");
        Ok(Self {
            hypotheses: items
                .into_iter()
                .zip(weights)
                .map(|((form, score), weight)| Hypothesis { form, score, weight })
                .collect(),
        })
    }

    /// Every ranked candidate of a search, scored by its lifting score.
    pub fn from_search(outcome: &SearchOutcome<T>) -> Result<Self> {
        Self::from_scored(
            outcome
                .candidates
                .iter()
                .map(|c| {
                    (
                        HypothesisForm::Lifted {
                            candidate: c.clone(),
                            frame: outcome.frame.clone(),
                        },
                        c.score.0,
                    )
                })
                .collect(),
        )
    }

    pub fn weights(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.weight).collect()
    }
}

/// Prior over ambient expressions with weights `2^-scorer(e)`.
pub fn build_prior<T: Scalar>(
    expressions: Vec<Expression<T>>,
    scorer: impl Fn(&Expression<T>) -> f64,
) -> Result<HypothesisFamily<T>> {
    HypothesisFamily::from_scored(
        expressions
            .into_iter()
            .map(|e| {
                let s = scorer(&e);
                (HypothesisForm::Ambient(e), s)
            })
            .collect(),
    )
}

/// Prior scored by [`complexity`].
pub fn build_default_prior<T: Scalar>(expressions: Vec<Expression<T>>) -> Result<HypothesisFamily<T>> {
    build_prior(expressions, |e| complexity(e).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct WeightedHypothesis<T> {
    pub hypothesis: Hypothesis<T>,
    /// Maximum absolute residual over the samples.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Posterior<T> {
    /// Surviving hypotheses; `weight` holds the posterior weight. Empty when
    /// no hypothesis is compatible with the data.
    pub hypotheses: Vec<WeightedHypothesis<T>>,
    pub noise_sigma: T,
}

/// Record of the JSON export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEntry {
    pub expr: String,
    pub weight: f64,
    pub residual: f64,
}

impl<T: Scalar> Posterior<T> {
    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.hypothesis.weight).collect()
    }

    pub fn entries(&self) -> Vec<PosteriorEntry> {
        self.hypotheses
            .iter()
            .map(|h| PosteriorEntry {
                expr: h.hypothesis.form.ambient_expression().to_prefix(),
                weight: h.hypothesis.weight,
                residual: h.residual.as_f64(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.entries()).expect("plain records serialise")
    }
}

/// Conditions the family on `data` with the default strict tolerance.
pub fn update<T: Scalar>(prior: &HypothesisFamily<T>, data: &Dataset<T>) -> Posterior<T> {
    update_with(prior, data, T::of(STRICT_TOL))
}

/// Strict data (σ = 0) keep hypotheses whose max-abs residual is within
/// `strict_tol * max(1, max|value|)`; noisy data reweight by the Gaussian
/// likelihood. Hypotheses with a domain error at any sample are dropped.
pub fn update_with<T: Scalar>(prior: &HypothesisFamily<T>, data: &Dataset<T>, strict_tol: T) -> Posterior<T> {
    let sigma = data.noise_sigma();
    let scale = data.values().fold(T::one(), |m, v| m.max(v.abs()));
    let bound = strict_tol * scale;
    let mut kept: Vec<(usize, T, f64)> = Vec::new();
    'hyp: for (i, h) in prior.hypotheses.iter().enumerate() {
        let mut worst = T::zero();
        let mut sse = 0.0f64;
        for s in data.samples() {
            let Some(v) = h.form.eval(&s.location) else {
                continue 'hyp;
            };
            let r = (v - s.value).abs();
            worst = worst.max(r);
            sse += r.as_f64() * r.as_f64();
        }
        if !worst.is_finite() {
            continue;
        }
        let log_like = if data.is_strict() {
            if worst > bound {
                continue;
            }
            0.0
        } else {
            let s = sigma.as_f64();
            -sse / (2.0 * s * s) * std::f64::consts::LOG2_E
        };
        kept.push((i, worst, h.weight.log2() + log_like));
    }
    let logs: Vec<f64> = kept.iter().map(|k| k.2).collect();
    let hypotheses = match normalise_log2(&logs) {
        None => Vec::new(),
        Some(w) => kept
            .iter()
            .zip(w)
            .filter(|(_, w)| *w > 0.0)
            .map(|(&(i, residual, _), weight)| WeightedHypothesis {
                hypothesis: Hypothesis {
                    weight,
                    ..prior.hypotheses[i].clone()
                },
                residual,
            })
            .collect(),
    };
    let mut post = Posterior {
        hypotheses,
        noise_sigma: sigma,
    };
    // renormalise after dropping underflowed weights
    let total: f64 = post.weights().iter().sum();
    post.hypotheses.iter_mut().for_each(|h| h.hypothesis.weight /= total);
    post
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution<T> {
    /// Distinct values with their total weight, in first-seen order.
    pub components: Vec<(T, f64)>,
    pub mean: T,
    /// Value of the highest-weight hypothesis.
    pub map: T,
    /// Posterior weight of hypotheses undefined at the query, excluded from
    /// the mixture.
    pub undefined_weight: f64,
}

/// Mixture of hypothesis values at `p`.
pub fn predict<T: Scalar>(post: &Posterior<T>, p: &Point<T>) -> Result<PredictiveDistribution<T>> {
    if post.is_empty() {
        return Err(Error::NoPrediction("posterior is empty".into()));
    }
    let mut values: Vec<(T, f64)> = Vec::new();
    let mut undefined = 0.0;
    for h in &post.hypotheses {
        match h.hypothesis.form.eval(p) {
            Some(v) if v.is_finite() => values.push((v, h.hypothesis.weight)),
            _ => undefined += h.hypothesis.weight,
        }
    }
    if values.is_empty() {
        return Err(Error::NoPrediction("no hypothesis is defined at the query".into()));
    }
    let total: f64 = values.iter().map(|v| v.1).sum();
    let map = values
        .iter()
        .fold(None::<(T, f64)>, |best, &(v, w)| match best {
            Some((_, bw)) if bw >= w => best,
            _ => Some((v, w)),
        })
        .expect("nonempty")
        .0;
    let mut components: Vec<(T, f64)> = Vec::new();
    for &(v, w) in &values {
        let w = w / total;
        match components
            .iter_mut()
            .find(|(c, _)| (*c - v).abs() <= T::of(1e-12) * T::one().max(v.abs()))
        {
            Some(c) => c.1 += w,
            None => components.push((v, w)),
        }
    }
    let mean = values
        .iter()
        .fold(T::zero(), |acc, &(v, w)| acc + v * T::of(w / total));
    Ok(PredictiveDistribution {
        components,
        mean,
        map,
        undefined_weight: undefined,
    })
}
