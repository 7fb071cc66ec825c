//! Hyperpolation search: fit the slice, lift every fit, rank the liftings.

use serde::{Deserialize, Serialize};

use super::fit::{fit_points, FitSettings, SearchBudget, SliceFit, SlicePoints};
use super::frame::SliceFrame;
use super::grammar::Grammar;
use super::lift::{lift_constants, restrict, CandidateLifting};
use super::complexity::complexity;
use crate::error::Result;
use crate::geometry::{Dataset, Point};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions<T> {
    /// Relative singular-value cutoff for the affine hull of the data.
    pub subspace_tol: T,
    /// Strict-mode residual bound relative to `max(1, max|value|)`.
    pub strict_tol: T,
}

impl<T: Scalar> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            subspace_tol: T::of(1e-8),
            strict_tol: T::of(1e-9),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SearchOutcome<T> {
    pub frame: SliceFrame<T>,
    pub slice_fits: Vec<SliceFit<T>>,
    /// Ranked by [`CandidateLifting::rank_cmp`].
    pub candidates: Vec<CandidateLifting<T>>,
    pub structures_evaluated: usize,
}

impl<T: Scalar> SearchOutcome<T> {
    /// Consecutive runs of candidates sharing score and residual.
    pub fn tie_sets(&self) -> Vec<&[CandidateLifting<T>]> {
        let c = &self.candidates;
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=c.len() {
            if i == c.len() || !c[i].ties_with(&c[start]) {
                out.push(&c[start..i]);
                start = i;
            }
        }
        out
    }

    pub fn top_tie_set(&self) -> &[CandidateLifting<T>] {
        self.tie_sets().first().copied().unwrap_or(&[])
    }

    /// At least `k` candidates, extended so that no tie set is split.
    pub fn top(&self, k: usize) -> &[CandidateLifting<T>] {
        let mut n = 0;
        for set in self.tie_sets() {
            if n >= k {
                break;
            }
            n += set.len();
        }
        &self.candidates[..n]
    }

    /// Chooses within a tie set the candidate whose ambient form is
    /// simplest, then the one embedded nearest the ambient offset.
    pub fn preferred(&self) -> Option<&CandidateLifting<T>> {
        self.top_tie_set().iter().min_by(|a, b| {
            let ea = complexity(&self.frame.ambient_expression(&a.expr, a.y0)).0;
            let eb = complexity(&self.frame.ambient_expression(&b.expr, b.y0)).0;
            let da = (a.y0 - self.frame.offset).abs().as_f64();
            let db = (b.y0 - self.frame.offset).abs().as_f64();
            ea.total_cmp(&eb).then(da.total_cmp(&db)).then(a.rank_cmp(b))
        })
    }

    /// Value of a candidate at an ambient point; `None` on a domain error.
    pub fn predict(&self, c: &CandidateLifting<T>, p: &Point<T>) -> Result<Option<T>> {
        let [x, y] = self.frame.lifted_vars(p, c.y0)?;
        Ok(c.eval(x, y))
    }
}

/// Ranked fits of the data slice in its slice coordinate `x`.
pub fn fit_slice<T: Scalar>(data: &Dataset<T>, grammar: &Grammar, budget: &SearchBudget) -> Result<Vec<SliceFit<T>>> {
    let opts = SearchOptions::<T>::default();
    let frame = SliceFrame::from_dataset(data, opts.subspace_tol)?;
    let pts = frame.slice_points(data)?;
    let settings = FitSettings::for_values(&pts.ys, data.noise_sigma(), opts.strict_tol);
    let mut g = grammar.clone();
    g.n_vars = 1;
    Ok(fit_points(&pts, &g, budget, &settings)?.fits)
}

/// Searches with default options.
pub fn search_hyperpolation<T: Scalar>(
    data: &Dataset<T>,
    grammar: &Grammar,
    budget: &SearchBudget,
) -> Result<SearchOutcome<T>> {
    search_hyperpolation_with(data, grammar, budget, &SearchOptions::default())
}

pub fn search_hyperpolation_with<T: Scalar>(
    data: &Dataset<T>,
    grammar: &Grammar,
    budget: &SearchBudget,
    opts: &SearchOptions<T>,
) -> Result<SearchOutcome<T>> {
    let frame = SliceFrame::from_dataset(data, opts.subspace_tol)?;
    let pts = frame.slice_points(data)?;
    let settings = FitSettings::for_values(&pts.ys, data.noise_sigma(), opts.strict_tol);
    let mut g = grammar.clone();
    g.n_vars = 1;
    let report = fit_points(&pts, &g, budget, &settings)?;
    let mut candidates: Vec<CandidateLifting<T>> = Vec::new();
    for fit in &report.fits {
        for mut c in lift_constants(&fit.expr, fit.residual) {
            if let Some(r) = restriction_residual(&c, &pts) {
                if r <= settings.tol {
                    c.residual = r;
                    candidates.push(c);
                }
            }
        }
    }
    let mut mirrors = Vec::new();
    for c in &candidates {
        if c.y0 == T::zero() {
            continue;
        }
        let mut m = c.clone();
        m.y0 = -c.y0;
        if let Some(r) = restriction_residual(&m, &pts) {
            if r <= settings.tol {
                m.residual = r;
                mirrors.push(m);
            }
        }
    }
    candidates.extend(mirrors);
    candidates.sort_by(CandidateLifting::rank_cmp);
    candidates.dedup_by(|a, b| a.expr == b.expr && a.y0 == b.y0);
    Ok(SearchOutcome {
        frame,
        slice_fits: report.fits,
        candidates,
        structures_evaluated: report.structures_evaluated,
    })
}

fn restriction_residual<T: Scalar>(c: &CandidateLifting<T>, pts: &SlicePoints<T>) -> Option<T> {
    let r = restrict(c);
    let mut worst = T::zero();
    for (x, &y) in pts.xs.iter().zip(&pts.ys) {
        worst = worst.max((r.eval(x)? - y).abs());
    }
    Some(worst)
}
