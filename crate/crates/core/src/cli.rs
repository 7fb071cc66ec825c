//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 unsupported geometry, 4 unknown
//! case.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::benchmark::{evaluate, generate_case, grid_csv, BenchMethod, CaseSpec, EvalConfig, BUILTIN_CASES};
use crate::error::{Error, Result};
use crate::geometry::{Classifier, Regime, Tolerances};
use crate::io::{read_dataset_file, read_points_file, write_atomic};
use crate::symbolic::{search_hyperpolation_with, Grammar, SearchBudget, SearchOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_UNKNOWN_CASE: i32 = 4;

/// Environment variable capping the number of search threads.
pub const THREADS_ENV: &str = "HYPERPOLATE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hyperpolate", version, about = "Classify queries, search for hyperpolations and run benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long)]
    tol_hull: Option<f64>,
    #[arg(long)]
    tol_subspace: Option<f64>,
    #[arg(long)]
    tol_point: Option<f64>,
    /// Noise standard deviation; 0 selects strict mode.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    grammar_depth: Option<usize>,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Structures to evaluate during search.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (a directory for `bench`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tag each query as autopolation, interpolation, extrapolation or hyperpolation.
    Classify {
        data: PathBuf,
        queries: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the data slice symbolically and rank liftings into a new variable.
    Search {
        data: PathBuf,
        /// Keep at least this many candidates, never splitting a tie set.
        #[arg(long)]
        top: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate methods on a built-in case, `all`, or a case spec JSON file.
    Bench {
        case: String,
        /// Comma-separated method names.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Report zero runtimes so repeated runs give identical files.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Settings accepted in a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tol_hull: Option<f64>,
    pub tol_subspace: Option<f64>,
    pub tol_point: Option<f64>,
    pub sigma: Option<f64>,
    pub grammar_depth: Option<usize>,
    pub max_nodes: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub top: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Flags override file settings.
    fn merge(mut self, c: &Common) -> Self {
        macro_rules! over {
            ($($f:ident),*) => { $( if c.$f.is_some() { self.$f = c.$f.clone(); } )* };
        }
        over!(tol_hull, tol_subspace, tol_point, sigma, grammar_depth, max_nodes, budget, seed, out);
        self
    }

    fn tolerances(&self) -> Tolerances<f64> {
        let d = Tolerances::default();
        Tolerances {
            point_tol: self.tol_point.unwrap_or(d.point_tol),
            hull_tol: self.tol_hull.unwrap_or(d.hull_tol),
            subspace_tol: self.tol_subspace.unwrap_or(d.subspace_tol),
        }
    }

    fn sigma(&self) -> Result<f64> {
        let s = self.sigma.unwrap_or(0.0);
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid("--sigma must be a nonnegative number"));
        }
        Ok(s)
    }

    fn grammar(&self) -> Result<Grammar> {
        let mut g = Grammar::default();
        if let Some(d) = self.grammar_depth {
            g = g.with_max_depth(d);
        }
        if let Some(n) = self.max_nodes {
            g = g.with_max_nodes(n);
        }
        g.validate().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(g)
    }

    fn budget(&self, threads: Option<usize>) -> SearchBudget {
        let mut b = SearchBudget::default();
        if let Some(n) = self.budget {
            b.max_structures = n;
        }
        b.threads = threads;
        b
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedGeometry(_) => EXIT_GEOMETRY,
        Error::UnknownCase(_) => EXIT_UNKNOWN_CASE,
        _ => EXIT_INPUT,
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::invalid(format!("{THREADS_ENV} must be a positive integer"))),
        },
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn config_for(common: &Common) -> Result<RunConfig> {
    let base = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(base.merge(common))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let threads = threads_from_env()?;
    match cli.command {
        Command::Classify { data, queries, common } => classify(&config_for(&common)?, &data, &queries, out),
        Command::Search { data, top, common } => {
            let mut cfg = config_for(&common)?;
            if top.is_some() {
                cfg.top = top;
            }
            search(&cfg, &data, threads, out)
        }
        Command::Bench {
            case,
            methods,
            no_timing,
            common,
        } => {
            let mut cfg = config_for(&common)?;
            if methods.is_some() {
                cfg.methods = methods;
            }
            bench(&cfg, &case, !no_timing, threads, out)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str, out: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::invalid(format!("stdout: {e}"))),
    }
}

fn classify(cfg: &RunConfig, data: &Path, queries: &Path, out: &mut dyn Write) -> Result<()> {
    let data = read_dataset_file::<f64>(data, cfg.sigma()?)?;
    let points = read_points_file::<f64>(queries)?;
    let classifier = Classifier::new(&data, cfg.tolerances())?;
    let mut text = String::new();
    for p in &points {
        let regime = classifier.classify(p)?;
        let distance = classifier.distance(p)?;
        let mut rec = json!({
            "point": p.coords(),
            "regime": regime.tag().as_str(),
            "distance": distance,
        });
        match &regime {
            Regime::Autopolation { sample } => rec["witness"] = json!({ "sample": sample }),
            Regime::Interpolation { weights } => rec["witness"] = json!({ "weights": weights }),
            _ => {}
        }
        text.push_str(&rec.to_string());
        text.push('\n');
    }
    emit(cfg, &text, out)
}

fn search(cfg: &RunConfig, data: &Path, threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let data = read_dataset_file::<f64>(data, cfg.sigma()?)?;
    let opts = SearchOptions {
        subspace_tol: cfg.tolerances().subspace_tol,
        ..SearchOptions::default()
    };
    let outcome = search_hyperpolation_with(&data, &cfg.grammar()?, &cfg.budget(threads), &opts)?;
    let kept = match cfg.top {
        Some(k) => outcome.top(k),
        None => &outcome.candidates[..],
    };
    let mut text = serde_json::to_string_pretty(kept).expect("candidates serialise");
    text.push('\n');
    emit(cfg, &text, out)
}

fn bench(cfg: &RunConfig, case: &str, timing: bool, threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let sigma = cfg.sigma()?;
    if sigma > 0.0 && cfg.seed.is_none() {
        return Err(Error::invalid("--seed is required when --sigma is positive"));
    }
    let methods = match &cfg.methods {
        Some(names) => names.iter().map(|n| BenchMethod::parse(n.trim())).collect::<Result<Vec<_>>>()?,
        None => BenchMethod::all(),
    };
    let specs: Vec<CaseSpec> = if case == "all" {
        BUILTIN_CASES.iter().map(|c| CaseSpec::builtin(c)).collect::<Result<_>>()?
    } else if case.ends_with(".json") {
        let text = std::fs::read_to_string(case).map_err(|_| Error::UnknownCase(case.to_string()))?;
        vec![serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{case}: {e}")))?]
    } else {
        vec![CaseSpec::builtin(case)?]
    };
    let eval_cfg = EvalConfig {
        tolerances: cfg.tolerances(),
        grammar: cfg.grammar()?,
        budget: cfg.budget(threads),
        timing,
        ..EvalConfig::default()
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::invalid(format!("{}: {e}", dir.display())))?;
    for spec in specs {
        let spec = if cfg.sigma.is_some() { spec.with_noise(sigma) } else { spec };
        let (data, case) = generate_case::<f64>(&spec, cfg.seed.unwrap_or(0))?;
        let (report, geo, preds) = evaluate(&methods, &case, &data, &eval_cfg)?;
        let report_path = dir.join(format!("{}_report.json", spec.name));
        let grid_path = dir.join(format!("{}_grid.csv", spec.name));
        write_atomic(&report_path, report.to_json().as_bytes())?;
        write_atomic(&grid_path, grid_csv(&geo, &preds).as_bytes())?;
        let line = json!({ "case": spec.name, "report": report_path, "grid": grid_path });
        writeln!(out, "{line}").map_err(|e| Error::invalid(format!("stdout: {e}")))?;
    }
    Ok(())
}
