use hyperpolate::baselines::Method;
use hyperpolate::benchmark::{
    compare_orderings, evaluate, generate_case, grid_csv, BenchMethod, CaseSpec, EvalConfig, Report,
};
use hyperpolate::symbolic::Grammar;

fn close(a: Option<f64>, b: f64) -> bool {
    a.is_some_and(|a| (a - b).abs() <= 1e-9)
}

fn run(case: &str, methods: &[BenchMethod], cfg: &EvalConfig<f64>) -> Report {
    let (data, case) = generate_case::<f64>(&CaseSpec::builtin(case).unwrap(), 0).unwrap();
    evaluate(methods, &case, &data, cfg).unwrap().0
}

#[test]
fn cone_nearest_neighbour_bands() {
    let r = run("cone", &[BenchMethod::Baseline(Method::NnAmbient)], &EvalConfig::default());
    let b = &r.method("nn_ambient").unwrap().bands;
    let want = [
        (41, 0.0, 0.0),
        (328, 0.8658330371961787, 4.0),
        (410, 3.2214926676029827, 9.0),
        (820, 8.922898030553576, 19.0),
        (82, 12.727644212307377, 19.0),
    ];
    for (band, (n, rmse, max)) in b.iter().zip(want) {
        assert_eq!(band.count, n);
        assert!(close(band.rmse, rmse), "{band:?}");
        assert!(close(band.max_abs, max), "{band:?}");
    }
    assert_eq!(b[5].count, 0);
    assert_eq!(b[5].rmse, None);
    assert_eq!(b[5].hi, None);
}

#[test]
fn diagonal_nearest_neighbour_bands() {
    let r = run("diagonal_xy", &[BenchMethod::Baseline(Method::NnAmbient)], &EvalConfig::default());
    let b = &r.method("nn_ambient").unwrap().bands;
    let want = [
        (121, 9.394916860191865, 20.0),
        (438, 10.082762540922056, 29.0),
        (420, 33.019979521784194, 56.0),
        (546, 118.51874243212467, 196.0),
        (156, 273.48871443457574, 400.0),
    ];
    for (band, (n, rmse, max)) in b.iter().zip(want) {
        assert_eq!(band.count, n);
        assert!(close(band.rmse, rmse), "{band:?}");
        assert!(close(band.max_abs, max), "{band:?}");
    }
}

#[test]
fn regime_counts_and_band_accounting() {
    let r = run("cone", &[BenchMethod::Baseline(Method::Extrusion), BenchMethod::Baseline(Method::Additive)], &EvalConfig::default());
    for m in &r.methods {
        let total: usize = m.regime_counts.values().sum();
        assert_eq!(total, 41 * 41);
        assert_eq!(m.regime_counts["hyperpolation"], 41 * 40);
        assert_eq!(m.regime_counts["extrapolation"], 0);
        let counted: usize = m.bands.iter().map(|b| b.count).sum();
        assert_eq!(counted + m.misses, 41 * 41);
    }
}

#[test]
fn cone_symbolic_is_exact_everywhere() {
    let r = run("cone", &[BenchMethod::Symbolic], &EvalConfig::default());
    let m = r.method("symbolic").unwrap();
    assert_eq!(m.expression.as_deref(), Some("sqrt(add(pow2(x),pow2(y)))"));
    assert_eq!(m.misses, 0);
    for b in &m.bands {
        assert!(b.rmse.is_none_or(|e| e < 1e-6));
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = EvalConfig {
        timing: false,
        ..EvalConfig::default()
    };
    let methods = [BenchMethod::Baseline(Method::NnAmbient), BenchMethod::Baseline(Method::Linear)];
    let spec = CaseSpec::builtin("cone").unwrap().with_noise(0.1);
    let (d1, c1) = generate_case::<f64>(&spec, 11).unwrap();
    let (d2, c2) = generate_case::<f64>(&spec, 11).unwrap();
    let (r1, g1, p1) = evaluate(&methods, &c1, &d1, &cfg).unwrap();
    let (r2, g2, p2) = evaluate(&methods, &c2, &d2, &cfg).unwrap();
    assert_eq!(r1.to_json(), r2.to_json());
    assert_eq!(grid_csv(&g1, &p1), grid_csv(&g2, &p2));
    let parsed: Report = serde_json::from_str(&r1.to_json()).unwrap();
    assert_eq!(parsed, r1);
    let csv = grid_csv(&g1, &p1);
    assert!(csv.starts_with("x,y,truth,pred_nn_ambient,pred_linear\n"));
}

#[test]
fn orderings_agree_on_the_noiseless_cone() {
    let (data, case) = generate_case::<f64>(&CaseSpec::builtin("cone").unwrap(), 0).unwrap();
    let cfg = EvalConfig {
        grammar: Grammar::default().with_max_nodes(6),
        ..EvalConfig::default()
    };
    let cmp = compare_orderings(&case, &data, &cfg).unwrap();
    let a = cmp.direct.preferred().unwrap();
    let b = cmp.resampled.preferred().unwrap();
    assert_eq!(a.expr, b.expr);
    assert_eq!(a.y0, b.y0);
    assert_eq!(cmp.reports.0.methods[0].name, "symbolic_direct");
    assert_eq!(cmp.reports.1.methods[0].name, "symbolic_resampled");
}

#[test]
fn two_samples_give_linear_liftings() {
    use hyperpolate::geometry::Dataset;
    let spec = CaseSpec {
        name: "pair".into(),
        truth: "add(x,y)".into(),
        origin: vec![0.0, 0.0],
        direction: vec![1.0, 0.0],
        t_min: 1.0,
        t_max: 3.0,
        t_step: 2.0,
        grid: hyperpolate::benchmark::GridSpec {
            x: [0.0, 4.0],
            y: [0.0, 2.0],
            step: 1.0,
        },
        noise_sigma: 0.0,
        extra_samples: Vec::new(),
    };
    let (data, case): (Dataset<f64>, _) = generate_case(&spec, 0).unwrap();
    assert_eq!(data.len(), 2);
    let cfg = EvalConfig {
        grammar: Grammar::default().with_max_nodes(5),
        ..EvalConfig::default()
    };
    let cmp = compare_orderings(&case, &data, &cfg).unwrap();
    assert_eq!(cmp.resampled.top_tie_set()[0].expr.to_prefix(), "x");
    assert_eq!(cmp.direct.top_tie_set()[0].expr.to_prefix(), "x");
}

#[test]
fn samples_just_off_the_line_change_the_geometry() {
    let mut spec = CaseSpec::builtin("cone").unwrap();
    spec.extra_samples = vec![[0.0, 1.5], [5.0, 0.5]];
    let (data, case) = generate_case::<f64>(&spec, 0).unwrap();
    assert_eq!(data.len(), 43);
    assert_eq!(data.samples()[42].value, 25.25f64.sqrt());
    let methods = [BenchMethod::Baseline(Method::NnAmbient), BenchMethod::Symbolic];
    let (report, _, _) = evaluate(&methods, &case, &data, &EvalConfig::default()).unwrap();
    // the data now span the plane: nothing is hyperpolation and the
    // line-only symbolic search misses everywhere
    let nn = report.method("nn_ambient").unwrap();
    assert_eq!(nn.regime_counts["hyperpolation"], 0);
    assert_eq!(report.method("symbolic").unwrap().misses, 41 * 41);
    let back: CaseSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
}
