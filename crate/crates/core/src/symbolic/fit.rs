//! Slice fitting: exhaustive structure enumeration with constant fitting.
//!
//! For each canonical structure the free constants are fitted in three
//! stages. Starting values come from a root scan at one anchor sample (one
//! constant) or a coarse grid ranked at a few anchors (two constants). The
//! best starts are polished by Levenberg-Marquardt on a small anchor subset,
//! and survivors of that gate are polished on every sample. Constants within
//! the snapping tolerance of an integer are snapped when the fit still
//! qualifies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::complexity::{complexity, score_lower_bound, ComplexityScore};
use super::enumerate::{NodeId, StructureArena};
use super::expr::Expression;
use super::grammar::Grammar;
use super::program::{Program, MAX_STACK};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Limits on one search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Structures to evaluate before stopping; 0 evaluates nothing.
    pub max_structures: usize,
    /// Length cap of the returned slice-fit list.
    pub max_results: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_structures: 1_000_000,
            max_results: 64,
            threads: None,
        }
    }
}

impl SearchBudget {
    pub fn structures(n: usize) -> Self {
        Self {
            max_structures: n,
            ..Self::default()
        }
    }
}

/// How candidate fits qualify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings<T> {
    /// Maximum absolute residual over the samples for a fit to qualify.
    pub tol: T,
    /// Noiseless data: fits must interpolate to within `tol`.
    pub strict: bool,
    /// Relative distance to an integer below which a constant snaps.
    pub snap_rel: T,
}

impl<T: Scalar> FitSettings<T> {
    /// Strict tolerance `strict_tol * max(1, max|y|)`; flexible tolerance adds
    /// four noise standard deviations.
    pub fn for_values(values: &[T], noise_sigma: T, strict_tol: T) -> Self {
        let scale = values.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let base = strict_tol * scale;
        Self {
            tol: base + T::of(4.0) * noise_sigma,
            strict: noise_sigma == T::zero(),
            snap_rel: T::of(1e-6),
        }
    }
}

/// Sample inputs (one row of variable values per sample) and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePoints<T> {
    pub xs: Vec<Vec<T>>,
    pub ys: Vec<T>,
}

impl<T: Scalar> SlicePoints<T> {
    pub fn new(xs: Vec<Vec<T>>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::invalid("slice points need matching, nonempty inputs and values"));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }
}

/// One qualifying fit of the slice data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SliceFit<T> {
    pub expr: Expression<T>,
    /// Maximum absolute error over the samples.
    pub residual: T,
    pub score: ComplexityScore,
}

impl<T: Scalar> SliceFit<T> {
    /// Ordering used for ranked output: score, residual, then prefix string.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score
            .0
            .total_cmp(&other.score.0)
            .then_with(|| self.residual.as_f64().total_cmp(&other.residual.as_f64()))
            .then_with(|| self.expr.to_prefix().cmp(&other.expr.to_prefix()))
    }
}

/// Outcome of an enumeration run.
#[derive(Debug, Clone)]
pub struct FitReport<T> {
    pub fits: Vec<SliceFit<T>>,
    pub structures_evaluated: usize,
    pub largest_size: usize,
}

/// Enumerates `grammar` in order of node count and returns qualifying fits
/// ranked by [`SliceFit::rank_cmp`].
///
/// Enumeration stops when the budget is spent, when `grammar.max_nodes` is
/// reached, or when no larger structure can score below the best fit found.
pub fn fit_points<T: Scalar>(
    pts: &SlicePoints<T>,
    grammar: &Grammar,
    budget: &SearchBudget,
    settings: &FitSettings<T>,
) -> Result<FitReport<T>> {
    grammar.validate()?;
    if grammar.max_nodes > MAX_STACK {
        return Err(Error::Config(format!("max_nodes is limited to {MAX_STACK}")));
    }
    let fitter = Fitter::new(pts, grammar, settings);
    let mut arena = StructureArena::leaves(grammar);
    let mut fits: Vec<SliceFit<T>> = Vec::new();
    let mut evaluated = 0usize;
    let mut largest = 0usize;
    for size in 1..=grammar.max_nodes {
        if evaluated >= budget.max_structures {
            break;
        }
        if let Some(best) = fits.first() {
            if score_lower_bound(size, grammar.n_vars) > best.score.0 {
                break;
            }
        }
        arena.grow(grammar, size);
        let level = arena.level(size);
        let take = level.len().min(budget.max_structures - evaluated);
        let ids = &level[..take];
        let run = || -> Vec<Option<SliceFit<T>>> {
            ids.par_iter().map(|&id| fitter.fit_structure(&arena, id)).collect()
        };
        let found = match budget.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(e.to_string()))?
                .install(run),
            None => run(),
        };
        evaluated += take;
        largest = size;
        fits.extend(found.into_iter().flatten());
        fits.sort_by(SliceFit::rank_cmp);
        fits.dedup_by(|a, b| a.expr == b.expr);
        fits.truncate(budget.max_results.max(1));
    }
    Ok(FitReport {
        fits,
        structures_evaluated: evaluated,
        largest_size: largest,
    })
}

const STAGE_B_ITERS: usize = 25;
const STAGE_C_ITERS: usize = 40;

struct Fitter<'a, T> {
    pts: &'a SlicePoints<T>,
    settings: FitSettings<T>,
    anchors: Vec<usize>,
    scan_anchor: usize,
    grid1: Vec<T>,
    grid2: Vec<T>,
    all: Vec<usize>,
    gate: T,
}

impl<'a, T: Scalar> Fitter<'a, T> {
    fn new(pts: &'a SlicePoints<T>, grammar: &Grammar, settings: &FitSettings<T>) -> Self {
        let m = pts.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let (xa, xb) = (pts.xs[a].first().copied(), pts.xs[b].first().copied());
            xa.map(T::as_f64)
                .unwrap_or(0.0)
                .total_cmp(&xb.map(T::as_f64).unwrap_or(0.0))
                .then(a.cmp(&b))
        });
        let mut anchors: Vec<usize> = Vec::new();
        for frac in [1.0 / 3.0, 1.0, 0.0, 2.0 / 3.0, 0.5, 1.0 / 6.0, 5.0 / 6.0, 0.25] {
            let k = ((m - 1) as f64 * frac).round() as usize;
            let idx = order[k.min(m - 1)];
            if !anchors.contains(&idx) {
                anchors.push(idx);
            }
        }
        let mut grid1 = vec![T::zero()];
        for e in -32..=64 {
            let v = 10f64.powf(e as f64 / 16.0);
            grid1.push(T::of(-v));
            grid1.push(T::of(v));
        }
        grid1.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
        for &c in &grammar.constant_pool {
            grid1.push(T::of(c));
        }
        let mut grid2 = vec![T::zero()];
        for v in [0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0] {
            grid2.push(T::of(v));
            grid2.push(T::of(-v));
        }
        let scale = pts.ys.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let gate = if settings.strict {
            (settings.tol * T::of(1e3)).max(T::of(1e-6) * scale)
        } else {
            settings.tol * T::of(2.0)
        };
        Self {
            pts,
            settings: *settings,
            scan_anchor: anchors[0],
            anchors,
            grid1,
            grid2,
            all: (0..m).collect(),
            gate,
        }
    }

    fn fit_structure(&self, arena: &StructureArena, id: NodeId) -> Option<SliceFit<T>> {
        let prog = Program::from_arena(arena, id);
        let consts = match prog.n_const() {
            0 => {
                if self.max_abs(&prog, &[], &self.anchors)? > self.gate {
                    return None;
                }
                Vec::new()
            }
            1 => self.fit_one(&prog)?,
            _ => self.fit_two(&prog)?,
        };
        let consts = self.snap(&prog, consts);
        let residual = self.max_abs(&prog, &consts, &self.all)?;
        if residual > self.settings.tol {
            return None;
        }
        let expr = arena.to_expression::<T>(id).with_constants(&consts).canonicalize();
        let score = complexity(&expr);
        Some(SliceFit {
            expr,
            residual,
            score,
        })
    }

    fn residual_at(&self, prog: &Program, consts: &[T], i: usize) -> Option<T> {
        prog.eval(&self.pts.xs[i], consts).map(|v| v - self.pts.ys[i])
    }

    fn max_abs(&self, prog: &Program, consts: &[T], idx: &[usize]) -> Option<T> {
        let mut worst = T::zero();
        for &i in idx {
            worst = worst.max(self.residual_at(prog, consts, i)?.abs());
        }
        Some(worst)
    }

    fn sse(&self, prog: &Program, consts: &[T], idx: &[usize]) -> T {
        let mut s = T::zero();
        for &i in idx {
            match self.residual_at(prog, consts, i) {
                Some(r) => s = s + r * r,
                None => return T::infinity(),
            }
        }
        s
    }

    fn fit_one(&self, prog: &Program) -> Option<Vec<T>> {
        let a = self.scan_anchor;
        let g = |c: T| -> T { self.residual_at(prog, &[c], a).unwrap_or_else(T::nan) };
        let vals: Vec<T> = self.grid1.iter().map(|&c| g(c)).collect();
        let mut starts: Vec<T> = Vec::new();
        let n_scan = self.grid1.len();
        for k in 0..n_scan {
            let (c, v) = (self.grid1[k], vals[k]);
            if !v.is_finite() {
                continue;
            }
            if v == T::zero() {
                starts.push(c);
                continue;
            }
            if k + 1 < n_scan {
                let (c2, v2) = (self.grid1[k + 1], vals[k + 1]);
                if v2.is_finite() && c2 > c && (v < T::zero()) != (v2 < T::zero()) {
                    starts.push(illinois(&g, c, v, c2, v2));
                }
            }
            let left = if k > 0 { vals[k - 1] } else { T::infinity() };
            let right = if k + 1 < n_scan { vals[k + 1] } else { T::infinity() };
            let l = if left.is_finite() { left.abs() } else { T::infinity() };
            let r = if right.is_finite() { right.abs() } else { T::infinity() };
            if v.abs() < l && v.abs() <= r {
                starts.push(c);
            }
        }
        self.polish(prog, starts, 1)
    }

    fn fit_two(&self, prog: &Program) -> Option<Vec<T>> {
        let probe = &self.anchors[..self.anchors.len().min(3)];
        let mut starts: Vec<(T, [T; 2])> = Vec::with_capacity(self.grid2.len().pow(2));
        for &c1 in &self.grid2 {
            for &c2 in &self.grid2 {
                if let Some(e) = self.max_abs(prog, &[c1, c2], probe) {
                    starts.push((e, [c1, c2]));
                }
            }
        }
        starts.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()));
        starts.truncate(4);
        let mut best: Option<(T, Vec<T>)> = None;
        for (_, s) in starts {
            let (c, sse) = self.levenberg_marquardt(prog, &s, &self.anchors, STAGE_B_ITERS);
            if best.as_ref().is_none_or(|(b, _)| sse < *b) {
                best = Some((sse, c));
            }
        }
        self.finish(prog, best?.1)
    }

    /// Ranks single-constant starts at the anchors, polishes the best few.
    fn polish(&self, prog: &Program, starts: Vec<T>, _k: usize) -> Option<Vec<T>> {
        let mut ranked: Vec<(T, T)> = starts
            .into_iter()
            .filter_map(|c| self.max_abs(prog, &[c], &self.anchors).map(|e| (e, c)))
            .collect();
        ranked.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()).then(a.1.as_f64().total_cmp(&b.1.as_f64())));
        ranked.truncate(3);
        let mut best: Option<(T, Vec<T>)> = None;
        for (_, c) in ranked {
            let (c, sse) = self.levenberg_marquardt(prog, &[c], &self.anchors, STAGE_B_ITERS);
            if best.as_ref().is_none_or(|(b, _)| sse < *b) {
                best = Some((sse, c));
            }
        }
        self.finish(prog, best?.1)
    }

    fn finish(&self, prog: &Program, consts: Vec<T>) -> Option<Vec<T>> {
        if self.max_abs(prog, &consts, &self.anchors)? > self.gate {
            return None;
        }
        let (c, _) = self.levenberg_marquardt(prog, &consts, &self.all, STAGE_C_ITERS);
        Some(c)
    }

    fn snap(&self, prog: &Program, consts: Vec<T>) -> Vec<T> {
        if consts.is_empty() {
            return consts;
        }
        let qualifies = |c: &[T]| {
            self.max_abs(prog, c, &self.all)
                .is_some_and(|r| r <= self.settings.tol)
        };
        let near: Vec<T> = consts
            .iter()
            .map(|&c| {
                let r = c.round();
                if (c - r).abs() <= self.settings.snap_rel * c.abs().max(T::one()) {
                    r
                } else {
                    c
                }
            })
            .collect();
        let mut out = if near != consts && qualifies(&near) { near } else { consts };
        if !self.settings.strict {
            for k in 0..out.len() {
                let mut trial = out.clone();
                trial[k] = trial[k].round();
                if trial[k] != out[k] && qualifies(&trial) {
                    out = trial;
                }
            }
        }
        out
    }

    /// Damped Gauss-Newton on the samples `idx` for one or two constants.
    fn levenberg_marquardt(&self, prog: &Program, start: &[T], idx: &[usize], iters: usize) -> (Vec<T>, T) {
        let k = start.len();
        let mut c = start.to_vec();
        let mut sse = self.sse(prog, &c, idx);
        if !sse.is_finite() || k == 0 {
            return (c, sse);
        }
        let mut lambda = T::of(1e-3);
        let h_rel = T::epsilon().sqrt();
        let tiny = T::min_positive_value().sqrt();
        for _ in 0..iters {
            if sse <= tiny {
                break;
            }
            // Jacobian by central differences, accumulated into normal equations
            let mut jtj = [[T::zero(); 2]; 2];
            let mut jtr = [T::zero(); 2];
            let hs: Vec<T> = c.iter().map(|&v| h_rel * v.abs().max(T::one())).collect();
            let mut ok = true;
            for &i in idx {
                let Some(r0) = self.residual_at(prog, &c, i) else {
                    ok = false;
                    break;
                };
                let mut grad = [T::zero(); 2];
                for j in 0..k {
                    let mut cp = c.clone();
                    let mut cm = c.clone();
                    cp[j] = cp[j] + hs[j];
                    cm[j] = cm[j] - hs[j];
                    match (prog.eval(&self.pts.xs[i], &cp), prog.eval(&self.pts.xs[i], &cm)) {
                        (Some(fp), Some(fm)) => grad[j] = (fp - fm) / (hs[j] + hs[j]),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    break;
                }
                for a in 0..k {
                    jtr[a] = jtr[a] + grad[a] * r0;
                    for b in 0..k {
                        jtj[a][b] = jtj[a][b] + grad[a] * grad[b];
                    }
                }
            }
            if !ok {
                break;
            }
            let mut improved = false;
            for _ in 0..8 {
                let step = solve_damped(&jtj, &jtr, lambda, k);
                let Some(step) = step else {
                    lambda = lambda * T::of(10.0);
                    continue;
                };
                let trial: Vec<T> = c.iter().zip(&step).map(|(&a, &d)| a - d).collect();
                let s = self.sse(prog, &trial, idx);
                if s < sse {
                    let rel = (sse - s) / sse;
                    c = trial;
                    sse = s;
                    lambda = (lambda / T::of(3.0)).max(T::of(1e-12));
                    improved = rel > T::epsilon();
                    break;
                }
                lambda = lambda * T::of(4.0);
            }
            if !improved {
                break;
            }
        }
        (c, sse)
    }
}

fn solve_damped<T: Scalar>(jtj: &[[T; 2]; 2], jtr: &[T; 2], lambda: T, k: usize) -> Option<Vec<T>> {
    let one = T::one();
    if k == 1 {
        let a = jtj[0][0] * (one + lambda);
        if !(a > T::zero()) {
            return None;
        }
        return Some(vec![jtr[0] / a]);
    }
    let a = jtj[0][0] * (one + lambda);
    let d = jtj[1][1] * (one + lambda);
    let b = jtj[0][1];
    let det = a * d - b * b;
    if !(det.abs() > T::zero()) || !det.is_finite() {
        return None;
    }
    Some(vec![(d * jtr[0] - b * jtr[1]) / det, (a * jtr[1] - b * jtr[0]) / det])
}

/// Illinois variant of regula falsi on a bracketing interval.
fn illinois<T: Scalar>(g: &impl Fn(T) -> T, mut a: T, mut fa: T, mut b: T, mut fb: T) -> T {
    let half = T::of(0.5);
    let mut side = 0i8;
    for _ in 0..60 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { (a + b) * half };
        let fc = g(c);
        if !fc.is_finite() {
            return c;
        }
        if fc == T::zero() || (b - a).abs() <= T::epsilon() * c.abs().max(T::one()) {
            return c;
        }
        if (fc < T::zero()) == (fb < T::zero()) {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa * half;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb = fb * half;
            }
            side = 1;
        }
    }
    (a + b) * half
}
