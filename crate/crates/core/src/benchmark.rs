//! Built-in cases, error-versus-distance reports and pipeline comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_method, Method, PiecewiseLinear, SubspaceChart};
use crate::error::{Error, Result};
use crate::geometry::{Classifier, Dataset, LabeledSample, Point, RegimeTag, Tolerances};
use crate::scalar::{dot, Scalar};
use crate::symbolic::{search_hyperpolation, Expression, Grammar, SearchBudget, SearchOutcome};

/// Band edges over hyperpolation distance; the last band is open-ended.
pub const DEFAULT_BAND_EDGES: [f64; 6] = [0.0, 1.0, 5.0, 10.0, 20.0, 40.0];
/// Density multiplier of the resampling pipeline.
pub const RESAMPLE_FACTOR: usize = 4;
/// Distances this close to a band edge are counted at the edge.
const EDGE_SNAP: f64 = 1e-9;

pub const BUILTIN_CASES: [&str; 3] = ["ripple", "cone", "diagonal_xy"];

/// Regular grid over a rectangle, both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub step: f64,
}

impl GridSpec {
    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    /// Points in row-major order, `y` outer.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let xs = Self::axis(self.x[0], self.x[1], self.step);
        let ys = Self::axis(self.y[0], self.y[1], self.step);
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect()
    }
}

/// Full description of a case: samples at `origin + t * direction` for
/// `t = t_min, t_min + t_step, ..., t_max`, valued by `truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub name: String,
    /// Ground truth over the ambient coordinates, as a prefix expression.
    pub truth: String,
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Further sample locations, typically just off the line. Values come
    /// from `truth` with the same noise as the line samples.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_samples: Vec<[f64; 2]>,
}

impl CaseSpec {
    pub fn builtin(name: &str) -> Result<Self> {
        let line = |truth: &str, origin: [f64; 2], direction: [f64; 2], t: f64, half: f64| CaseSpec {
            name: name.to_string(),
            truth: truth.to_string(),
            origin: origin.to_vec(),
            direction: direction.to_vec(),
            t_min: -t,
            t_max: t,
            t_step: 1.0,
            grid: GridSpec {
                x: [-half, half],
                y: [-half, half],
                step: 1.0,
            },
            noise_sigma: 0.0,
            extra_samples: Vec::new(),
        };
        match name {
            "ripple" => Ok(line("cos(sqrt(add(pow2(x),pow2(y))))", [0.0, -20.0], [1.0, 0.0], 40.0, 40.0)),
            "cone" => Ok(line("sqrt(add(pow2(x),pow2(y)))", [0.0, 1.0], [1.0, 0.0], 20.0, 20.0)),
            "diagonal_xy" => Ok(line("mul(x,y)", [0.0, 0.0], [1.0, 1.0], 20.0, 20.0)),
            _ => Err(Error::UnknownCase(name.to_string())),
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }
}

/// A generated case: its spec, the seed used for noise and the parsed truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BenchmarkCase<T> {
    pub spec: CaseSpec,
    pub seed: u64,
    pub ground_truth: Expression<T>,
    pub ambient_dim: usize,
}

impl<T: Scalar> BenchmarkCase<T> {
    pub fn truth_at(&self, p: &[T]) -> Option<T> {
        self.ground_truth.eval(p)
    }

    pub fn grid(&self) -> Vec<Point<T>> {
        self.spec
            .grid
            .points()
            .into_iter()
            .map(|[x, y]| Point::from_vec_unchecked(vec![T::of(x), T::of(y)]))
            .collect()
    }
}

/// Builds the dataset of a case. Noise, if any, is drawn from a normal
/// generator seeded with `seed`.
pub fn generate_case<T: Scalar>(spec: &CaseSpec, seed: u64) -> Result<(Dataset<T>, BenchmarkCase<T>)> {
    let truth: Expression<T> = Expression::parse(&spec.truth)?;
    let n = spec.origin.len();
    if spec.direction.len() != n || n != 2 {
        return Err(Error::Config("cases live in the plane".into()));
    }
    if !(spec.t_step > 0.0) || spec.t_max < spec.t_min {
        return Err(Error::Config("sample range is empty".into()));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::Config("noise sigma must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let count = ((spec.t_max - spec.t_min) / spec.t_step + 1e-9).floor() as usize + 1;
    let mut samples = Vec::with_capacity(count);
    let line = (0..count).map(|i| {
        let t = spec.t_min + i as f64 * spec.t_step;
        spec.origin
            .iter()
            .zip(&spec.direction)
            .map(|(&o, &d)| T::of(o + t * d))
            .collect::<Vec<T>>()
    });
    let extra = spec.extra_samples.iter().map(|p| vec![T::of(p[0]), T::of(p[1])]);
    for (i, loc) in line.chain(extra).enumerate() {
        let clean = truth
            .eval(&loc)
            .ok_or_else(|| Error::Config(format!("truth undefined at sample {i}")))?;
        let value = if spec.noise_sigma > 0.0 {
            clean + T::of(noise.sample(&mut rng))
        } else {
            clean
        };
        samples.push(LabeledSample::new(Point::new(loc)?, value)?);
    }
    let data = Dataset::new(samples, T::of(spec.noise_sigma))?;
    Ok((
        data,
        BenchmarkCase {
            spec: spec.clone(),
            seed,
            ground_truth: truth,
            ambient_dim: n,
        },
    ))
}

/// Methods a report can include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchMethod {
    Baseline(Method),
    Symbolic,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Baseline(m) => m.name(),
            BenchMethod::Symbolic => "symbolic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "symbolic" {
            Ok(BenchMethod::Symbolic)
        } else {
            s.parse().map(BenchMethod::Baseline)
        }
    }

    pub fn all() -> Vec<BenchMethod> {
        let mut v: Vec<BenchMethod> = Method::ALL.into_iter().map(BenchMethod::Baseline).collect();
        v.push(BenchMethod::Symbolic);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    pub band_edges: Vec<f64>,
    pub tolerances: Tolerances<T>,
    pub grammar: Grammar,
    pub budget: SearchBudget,
    /// Record wall-clock runtimes; when off every `runtime_s` is 0 and the
    /// report is byte-reproducible.
    pub timing: bool,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            band_edges: DEFAULT_BAND_EDGES.to_vec(),
            tolerances: Tolerances::default(),
            grammar: Grammar::default(),
            budget: SearchBudget::default(),
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    /// `None` for the open-ended last band.
    pub hi: Option<f64>,
    /// `None` when the band is empty.
    pub rmse: Option<f64>,
    pub max_abs: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub bands: Vec<Band>,
    pub regime_counts: BTreeMap<String, usize>,
    pub misses: usize,
    pub runtime_s: f64,
    /// Chosen expression, for symbolic methods.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expression: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub band_edges: Vec<f64>,
    pub grid: GridSpec,
    pub noise_sigma: f64,
    pub resample_factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub case: String,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
    pub settings: ReportSettings,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// Predictions of one method at the grid points (`None` marks a miss).
pub struct MethodPredictions<T> {
    pub name: String,
    pub values: Vec<Option<T>>,
    pub runtime_s: f64,
    pub expression: Option<String>,
}

/// Band index of a distance.
pub fn band_index(edges: &[f64], d: f64) -> usize {
    let mut d = d;
    if let Some(&e) = edges.iter().find(|&&e| (d - e).abs() <= EDGE_SNAP) {
        d = e;
    }
    edges.iter().rposition(|&e| d >= e).unwrap_or(0)
}

/// Per-grid-point distance and regime, shared by all methods.
pub struct GridGeometry<T> {
    pub points: Vec<Point<T>>,
    pub truth: Vec<T>,
    pub distances: Vec<f64>,
    pub regimes: Vec<RegimeTag>,
}

pub fn grid_geometry<T: Scalar>(case: &BenchmarkCase<T>, data: &Dataset<T>, tols: Tolerances<T>) -> Result<GridGeometry<T>> {
    let classifier = Classifier::new(data, tols)?;
    let points = case.grid();
    let mut truth = Vec::with_capacity(points.len());
    let mut distances = Vec::with_capacity(points.len());
    let mut regimes = Vec::with_capacity(points.len());
    for p in &points {
        truth.push(
            case.truth_at(p.coords())
                .ok_or_else(|| Error::Config("ground truth undefined on the grid".into()))?,
        );
        distances.push(classifier.distance(p)?.as_f64());
        regimes.push(classifier.classify(p)?.tag());
    }
    Ok(GridGeometry {
        points,
        truth,
        distances,
        regimes,
    })
}

fn summarise<T: Scalar>(geo: &GridGeometry<T>, pred: &MethodPredictions<T>, edges: &[f64]) -> MethodReport {
    let nb = edges.len();
    let mut sq = vec![0.0f64; nb];
    let mut mx = vec![0.0f64; nb];
    let mut count = vec![0usize; nb];
    let mut misses = 0;
    for (i, v) in pred.values.iter().enumerate() {
        match v {
            Some(v) if v.is_finite() => {
                let b = band_index(edges, geo.distances[i]);
                let e = (*v - geo.truth[i]).abs().as_f64();
                sq[b] += e * e;
                mx[b] = mx[b].max(e);
                count[b] += 1;
            }
            _ => misses += 1,
        }
    }
    let bands = (0..nb)
        .map(|b| Band {
            lo: edges[b],
            hi: edges.get(b + 1).copied(),
            rmse: (count[b] > 0).then(|| (sq[b] / count[b] as f64).sqrt()),
            max_abs: (count[b] > 0).then_some(mx[b]),
            count: count[b],
        })
        .collect();
    let mut regime_counts: BTreeMap<String, usize> = RegimeTag::ALL.iter().map(|t| (t.as_str().to_string(), 0)).collect();
    for r in &geo.regimes {
        *regime_counts.get_mut(r.as_str()).expect("all tags present") += 1;
    }
    MethodReport {
        name: pred.name.clone(),
        bands,
        regime_counts,
        misses,
        runtime_s: pred.runtime_s,
        expression: pred.expression.clone(),
    }
}

/// Predictions of the preferred top candidate of a search.
pub fn symbolic_predictions<T: Scalar>(outcome: &SearchOutcome<T>, points: &[Point<T>]) -> (Vec<Option<T>>, Option<String>) {
    match outcome.preferred() {
        None => (vec![None; points.len()], None),
        Some(c) => (
            points
                .iter()
                .map(|p| outcome.predict(c, p).ok().flatten())
                .collect(),
            Some(outcome.frame.ambient_expression(&c.expr, c.y0).to_prefix()),
        ),
    }
}

fn predictions<T: Scalar>(
    method: BenchMethod,
    data: &Dataset<T>,
    points: &[Point<T>],
    cfg: &EvalConfig<T>,
) -> Result<MethodPredictions<T>> {
    let start = Instant::now();
    let (values, expression) = match method {
        // a method that does not apply to the geometry misses everywhere
        BenchMethod::Baseline(m) => match fit_method(m, data) {
            Ok(model) => (points.iter().map(|p| model.predict(p).ok()).collect(), None),
            Err(Error::UnsupportedGeometry(_)) => (vec![None; points.len()], None),
            Err(e) => return Err(e),
        },
        BenchMethod::Symbolic => match search_hyperpolation(data, &cfg.grammar, &cfg.budget) {
            Ok(outcome) => symbolic_predictions(&outcome, points),
            Err(Error::UnsupportedGeometry(_)) => (vec![None; points.len()], None),
            Err(e) => return Err(e),
        },
    };
    Ok(MethodPredictions {
        name: method.name().to_string(),
        values,
        runtime_s: if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 },
        expression,
    })
}

fn settings_of<T: Scalar>(case: &BenchmarkCase<T>, edges: &[f64]) -> ReportSettings {
    ReportSettings {
        band_edges: edges.to_vec(),
        grid: case.spec.grid.clone(),
        noise_sigma: case.spec.noise_sigma,
        resample_factor: RESAMPLE_FACTOR,
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.is_empty() || edges.windows(2).any(|w| !(w[0] < w[1])) || edges[0] != 0.0 {
        return Err(Error::Config("band edges must start at 0 and increase strictly".into()));
    }
    Ok(())
}

/// Report over precomputed predictions.
pub fn evaluate_predictions<T: Scalar>(
    case: &BenchmarkCase<T>,
    geo: &GridGeometry<T>,
    preds: &[MethodPredictions<T>],
    edges: &[f64],
) -> Result<Report> {
    check_edges(edges)?;
    Ok(Report {
        case: case.spec.name.clone(),
        seed: case.seed,
        methods: preds.iter().map(|p| summarise(geo, p, edges)).collect(),
        settings: settings_of(case, edges),
    })
}

/// Fits each method on `data` and reports its error by distance band.
pub fn evaluate<T: Scalar>(
    methods: &[BenchMethod],
    case: &BenchmarkCase<T>,
    data: &Dataset<T>,
    cfg: &EvalConfig<T>,
) -> Result<(Report, GridGeometry<T>, Vec<MethodPredictions<T>>)> {
    check_edges(&cfg.band_edges)?;
    let geo = grid_geometry(case, data, cfg.tolerances)?;
    let preds = methods
        .iter()
        .map(|&m| predictions(m, data, &geo.points, cfg))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate_predictions(case, &geo, &preds, &cfg.band_edges)?;
    Ok((report, geo, preds))
}

/// CSV with columns `x,y,truth,pred_<method>...`; misses are empty cells.
pub fn grid_csv<T: Scalar>(geo: &GridGeometry<T>, preds: &[MethodPredictions<T>]) -> String {
    let mut out = String::from("x,y,truth");
    for p in preds {
        out.push_str(",pred_");
        out.push_str(&p.name);
    }
    out.push('\n');
    for (i, pt) in geo.points.iter().enumerate() {
        let c = pt.coords();
        let _ = write!(out, "{},{},{}", c[0].as_f64(), c[1].as_f64(), geo.truth[i].as_f64());
        for p in preds {
            out.push(',');
            if let Some(v) = p.values[i].filter(|v| v.is_finite()) {
                let _ = write!(out, "{}", v.as_f64());
            }
        }
        out.push('\n');
    }
    out
}

/// Densified copy of line data: the piecewise-linear interpolant sampled at
/// `factor` times the original density between the outermost samples. The
/// noise level of the copy is raised by a quarter of the interpolation error
/// bound so that the flexible tolerance admits the interpolation error.
pub fn resample_line<T: Scalar>(data: &Dataset<T>, factor: usize) -> Result<Dataset<T>> {
    let pl = PiecewiseLinear::fit(data)?;
    let chart = SubspaceChart::of_data(data)?;
    let k = &pl.knots;
    let base = chart.subspace.base().coords().to_vec();
    let u = &pl.direction;
    let s_base = dot(u, &base);
    let intervals = k.len().saturating_sub(1);
    let mut samples = Vec::new();
    for j in 0..intervals {
        let (s0, s1) = (k[j].0, k[j + 1].0);
        for i in 0..factor {
            let s = s0 + (s1 - s0) * T::of_usize(i) / T::of_usize(factor);
            samples.push((s, pl.eval_at(s)));
        }
    }
    if let Some(&(s, v)) = k.last() {
        samples.push((s, v));
    }
    // |f - PL| <= h^2 max|f''| / 8, with f'' from second divided differences
    let mut curvature = T::zero();
    let mut h_max = T::zero();
    for w in k.windows(2) {
        h_max = h_max.max(w[1].0 - w[0].0);
    }
    for w in k.windows(3) {
        let (h0, h1) = (w[1].0 - w[0].0, w[2].0 - w[1].0);
        let d2 = T::of(2.0) * ((w[2].1 - w[1].1) / h1 - (w[1].1 - w[0].1) / h0) / (h0 + h1);
        curvature = curvature.max(d2.abs());
    }
    let bound = curvature * h_max * h_max / T::of(8.0);
    let labeled = samples
        .into_iter()
        .map(|(s, v)| {
            let loc: Vec<T> = base.iter().zip(u).map(|(&b, &d)| b + (s - s_base) * d).collect();
            LabeledSample::new(Point::new(loc)?, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(labeled, data.noise_sigma() + bound / T::of(4.0))
}

/// Side-by-side outcome of the two pipeline orderings.
pub struct OrderingComparison<T> {
    pub direct: SearchOutcome<T>,
    pub resampled: SearchOutcome<T>,
    pub reports: (Report, Report),
}

/// Pipeline A searches the raw samples; pipeline B first densifies them with
/// [`resample_line`] and searches the result.
pub fn compare_orderings<T: Scalar>(
    case: &BenchmarkCase<T>,
    data: &Dataset<T>,
    cfg: &EvalConfig<T>,
) -> Result<OrderingComparison<T>> {
    let geo = grid_geometry(case, data, cfg.tolerances)?;
    let run = |d: &Dataset<T>, name: &str| -> Result<(SearchOutcome<T>, MethodPredictions<T>)> {
        let start = Instant::now();
        let outcome = search_hyperpolation(d, &cfg.grammar, &cfg.budget)?;
        let (values, expression) = symbolic_predictions(&outcome, &geo.points);
        let runtime_s = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        Ok((
            outcome,
            MethodPredictions {
                name: name.to_string(),
                values,
                runtime_s,
                expression,
            },
        ))
    };
    let (direct, pa) = run(data, "symbolic_direct")?;
    let dense = resample_line(data, RESAMPLE_FACTOR)?;
    let (resampled, pb) = run(&dense, "symbolic_resampled")?;
    let ra = evaluate_predictions(case, &geo, &[pa], &cfg.band_edges)?;
    let rb = evaluate_predictions(case, &geo, &[pb], &cfg.band_edges)?;
    Ok(OrderingComparison {
        direct,
        resampled,
        reports: (ra, rb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_cases_have_the_documented_samples() {
        let (d, c) = generate_case::<f64>(&CaseSpec::builtin("ripple").unwrap(), 0).unwrap();
        assert_eq!(d.len(), 81);
        assert_eq!(d.samples()[0].location.coords(), &[-40.0, -20.0]);
        assert_eq!(d.samples()[40].value, 20f64.cos());
        assert_eq!(c.grid().len(), 81 * 81);
        let (d, _) = generate_case::<f64>(&CaseSpec::builtin("cone").unwrap(), 0).unwrap();
        assert_eq!(d.len(), 41);
        assert_eq!(d.samples()[20].value, 1.0);
        let (d, _) = generate_case::<f64>(&CaseSpec::builtin("diagonal_xy").unwrap(), 0).unwrap();
        assert_eq!(d.samples()[0].location.coords(), &[-20.0, -20.0]);
        assert_eq!(d.samples()[0].value, 400.0);
        assert!(matches!(CaseSpec::builtin("torus"), Err(Error::UnknownCase(_))));
    }

    #[test]
    fn noise_is_seeded() {
        let spec = CaseSpec::builtin("cone").unwrap().with_noise(0.05);
        let (a, _) = generate_case::<f64>(&spec, 3).unwrap();
        let (b, _) = generate_case::<f64>(&spec, 3).unwrap();
        let (c, _) = generate_case::<f64>(&spec, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bands_snap_and_overflow() {
        let e = DEFAULT_BAND_EDGES;
        assert_eq!(band_index(&e, 0.0), 0);
        assert_eq!(band_index(&e, 1.0 - 1e-12), 1);
        assert_eq!(band_index(&e, 4.99), 1);
        assert_eq!(band_index(&e, 40.0), 5);
        assert_eq!(band_index(&e, 1e6), 5);
    }

    #[test]
    fn resampling_quadruples_density() {
        let (d, _) = generate_case::<f64>(&CaseSpec::builtin("cone").unwrap(), 0).unwrap();
        let r = resample_line(&d, 4).unwrap();
        assert_eq!(r.len(), 161);
        assert!(r.noise_sigma() > 0.0);
        let two: Dataset<f64> = Dataset::strict(&[(vec![0.0, 0.0], 1.0), (vec![2.0, 0.0], 5.0)]).unwrap();
        let r = resample_line(&two, 4).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r.noise_sigma(), 0.0);
        assert_eq!(r.samples()[2].value, 3.0);
    }
}
