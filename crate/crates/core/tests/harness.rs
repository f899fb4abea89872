mod common;

use std::path::PathBuf;

use anw_core::experiment::{prepare_route, run_replicates, RunOutput, Source};
use anw_core::io::{
    read_metrics_csv, read_run_json, read_xy, write_run_json, MetricsCsvRow, METRICS_HEADER,
};
use anw_core::sim::track_path;
use anw_core::trajectory::{fit_track, fitted_at_waypoints, waypoint_gaps};
use anw_core::tuning::log_space;
use anw_core::{
    anw_waypoint_gap, emit, generate, generate_track, ingest_csv, parameterize, run_route,
    run_simulation, tune, AnwConfig, Dataset, Error, Estimator, ExperimentConfig, Ingested,
    KernelFamily, KernelSpec, OutputFormat, Point2, Scenario, Schema, SimConfig, Track2D,
    TuningMode, TuningOptions,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

#[test]
fn sharpen_preset_noise_level() {
    let mut sds = Vec::new();
    for seed in 0..50 {
        let sim = SimConfig::preset(Scenario::Sharpen1D, seed);
        let d = generate(&sim).unwrap().data;
        assert_eq!(d.len(), 500);
        let resid: Vec<f64> = d
            .stochastic_indices()
            .iter()
            .map(|&i| d.ys()[i] - Scenario::Sharpen1D.truth(d.xs()[i]))
            .collect();
        let m = resid.iter().sum::<f64>() / resid.len() as f64;
        let var = resid.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (resid.len() - 1) as f64;
        sds.push(var.sqrt());
    }
    let mean_sd = sds.iter().sum::<f64>() / sds.len() as f64;
    assert!((0.12..=0.18).contains(&mean_sd), "mean sd {mean_sd}");
}

#[test]
fn generated_data_is_bitwise_repeatable() {
    for scenario in [Scenario::Sharpen1D, Scenario::Case1, Scenario::Case2] {
        let sim = SimConfig::preset(scenario, 99);
        let a = generate(&sim).unwrap();
        let b = generate(&sim).unwrap();
        let bits = |d: &Dataset| d.ys().iter().map(|y| y.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.data), bits(&b.data));
        assert_eq!(a.data.xs(), b.data.xs());
    }
}

#[test]
fn run_records_are_bitwise_repeatable() {
    let sim = SimConfig {
        n: 150,
        ..SimConfig::preset(Scenario::Case2, 4)
    };
    let exp = ExperimentConfig {
        grid_size: 201,
        ..ExperimentConfig::for_scenario(Scenario::Case2, 4)
    };
    let a = serde_json::to_string(&run_simulation(&sim, &exp).unwrap().record).unwrap();
    let b = serde_json::to_string(&run_simulation(&sim, &exp).unwrap().record).unwrap();
    assert_eq!(a, b);
}

#[test]
fn replicates_match_individual_runs() {
    let sim = SimConfig {
        n: 120,
        ..SimConfig::preset(Scenario::Sharpen1D, 0)
    };
    let exp = ExperimentConfig {
        grid_size: 101,
        h: Some(0.05),
        ..ExperimentConfig::for_scenario(Scenario::Sharpen1D, 0)
    };
    let outs = run_replicates(&sim, &exp, &[3, 8]).unwrap();
    let single = run_simulation(
        &SimConfig { seed: 8, ..sim },
        &ExperimentConfig { seed: 8, ..exp },
    )
    .unwrap();
    assert_eq!(outs[1].record, single.record);
    assert_ne!(outs[0].record.rows, outs[1].record.rows);
}

#[test]
fn nw_only_record_has_one_row() {
    let sim = SimConfig {
        n: 100,
        ..SimConfig::preset(Scenario::Sharpen1D, 1)
    };
    let exp = ExperimentConfig {
        methods: vec![Estimator::Nw],
        h: Some(0.05),
        grid_size: 101,
        ..ExperimentConfig::default()
    };
    let out = run_simulation(&sim, &exp).unwrap();
    assert_eq!(out.record.rows.len(), 1);
    assert_eq!(out.record.rows[0].method, "NW");
    assert_eq!(out.record.rows[0].lambda, None);
}

#[test]
fn empty_method_list_gives_header_only_csv() {
    let sim = SimConfig {
        n: 100,
        ..SimConfig::preset(Scenario::Sharpen1D, 1)
    };
    let exp = ExperimentConfig {
        methods: vec![],
        ..ExperimentConfig::default()
    };
    let out = run_simulation(&sim, &exp).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&out, dir.path(), OutputFormat::Csv).unwrap();
    let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(text, "Method,h,lambda,RMSE,WaypointError,Smoothness,CSS\n");
}

fn sample_output() -> RunOutput {
    let sim = SimConfig {
        n: 120,
        ..SimConfig::preset(Scenario::Case1, 2)
    };
    let exp = ExperimentConfig {
        grid_size: 101,
        h_grid: Some(vec![0.2, 0.4]),
        ..ExperimentConfig::for_scenario(Scenario::Case1, 2)
    };
    run_simulation(&sim, &exp).unwrap()
}

#[test]
fn metrics_header_is_the_table_layout() {
    assert_eq!(
        METRICS_HEADER,
        [
            "Method",
            "h",
            "lambda",
            "RMSE",
            "WaypointError",
            "Smoothness",
            "CSS"
        ]
    );
    let dir = tempfile::tempdir().unwrap();
    emit(&sample_output(), dir.path(), OutputFormat::Both).unwrap();
    let text = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "Method,h,lambda,RMSE,WaypointError,Smoothness,CSS"
    );
    for name in [
        "curve_nw.csv",
        "curve_naive.csv",
        "curve_anw.csv",
        "curve_dsanw_m1.csv",
        "run.json",
        "tuning_surface.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let curve = std::fs::read_to_string(dir.path().join("curve_anw.csv")).unwrap();
    assert_eq!(curve.lines().next().unwrap(), "x,fit");
    assert_eq!(curve.lines().count(), 102);
}

#[test]
fn metrics_csv_round_trips() {
    let out = sample_output();
    let dir = tempfile::tempdir().unwrap();
    emit(&out, dir.path(), OutputFormat::Csv).unwrap();
    let back = read_metrics_csv(&dir.path().join("metrics.csv")).unwrap();
    let want: Vec<MetricsCsvRow> = out
        .record
        .rows
        .iter()
        .map(MetricsCsvRow::from_row)
        .collect();
    assert_eq!(back, want);
}

#[test]
fn run_json_round_trips() {
    let mut out = sample_output();
    out.record.timestamp = Some("2026-01-01T00:00:00Z".into());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.json");
    write_run_json(&p, &out.record).unwrap();
    assert_eq!(read_run_json(&p).unwrap(), out.record);
    match &out.record.source {
        Source::Simulated { config } => assert_eq!(config.scenario, Scenario::Case1),
        other => panic!("unexpected source {other:?}"),
    }
}

#[test]
fn three_row_file() {
    let d = read_xy("x,y,is_waypoint\n0,1,0\n1,2,0\n2,3,1\n".as_bytes()).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d.constraints(), &[2]);
    match read_xy("x,y,is_waypoint\n0,1,0\n1,NaN,0\n".as_bytes()) {
        Err(Error::NonFiniteValue { line }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn railway_fixture_ingests() {
    let Ingested::Track(t) = ingest_csv(&fixture("railway_route.csv"), Schema::LonLat).unwrap()
    else {
        panic!("expected a track");
    };
    assert_eq!(t.points.len(), 60);
    assert_eq!(t.waypoints.len(), 1);
    let p = parameterize(&t).unwrap();
    assert_eq!(p.constraints.len(), 1);
    assert_eq!(p.len(), 61);
}

#[test]
fn highway_fixture_ingests_and_rotates() {
    let Ingested::Track(t) = ingest_csv(&fixture("highway_route.csv"), Schema::LonLat).unwrap()
    else {
        panic!("expected a track");
    };
    assert_eq!((t.points.len(), t.waypoints.len()), (55, 2));
    let p = prepare_route(&t, 90.0).unwrap();
    assert_eq!(p.constraints.len(), 2);
    // After a quarter turn the north-south route runs along -x.
    assert!(p.xs.first().unwrap() > p.xs.last().unwrap());
}

#[test]
fn route_pipeline_unrotates_curves() {
    let Ingested::Track(t) = ingest_csv(&fixture("highway_route.csv"), Schema::LonLat).unwrap()
    else {
        panic!("expected a track");
    };
    let exp = ExperimentConfig {
        h: Some(0.04),
        lambda: Some(100.0),
        methods: vec![Estimator::Anw],
        grid_size: 201,
        ..ExperimentConfig::default()
    };
    let out = run_route(&t, 90.0, &exp, "highway").unwrap();
    let c = &out.record.curves[0];
    let (lon, lat) = (&c.columns[0].values, &c.columns[1].values);
    assert!(lon.iter().all(|v| (-106.5..-104.5).contains(v)));
    assert!(lat[0] < lat[200]);
    assert!((lat[0] - 50.39).abs() < 0.2 && (lat[200] - 55.10).abs() < 0.2);
}

#[test]
fn tuning_without_constraints_picks_smallest_lambda() {
    let mut r = common::rng(30);
    let base = common::random_dataset(&mut r, 60, 0);
    let res = tune(
        &base,
        KernelFamily::Gaussian,
        &[0.05, 0.1],
        &[1000.0, 10.0, 1.0],
        &TuningOptions::default(),
    )
    .unwrap();
    assert_eq!(res.best_lambda, 1.0);
    for c in &res.surface {
        assert_eq!(c.waypoint_penalty, 0.0);
        assert_eq!(c.total, c.cv_error);
    }
}

#[test]
fn single_cell_grid_returns_that_cell() {
    let mut r = common::rng(31);
    let d = common::random_dataset(&mut r, 40, 2);
    let res = tune(
        &d,
        KernelFamily::Gaussian,
        &[0.08],
        &[10.0],
        &TuningOptions::default(),
    )
    .unwrap();
    assert_eq!((res.best_h, res.best_lambda), (0.08, 10.0));
    let c = res.best_cell();
    assert_eq!(c.total, c.cv_error + c.waypoint_penalty);
    assert!(c.feasible);
}

#[test]
fn selected_penalty_beats_unweighted_penalty() {
    let d = generate(&SimConfig::preset(Scenario::Sharpen1D, 6))
        .unwrap()
        .data;
    let h_grid = log_space(0.02, 0.06, 5);
    let res = tune(
        &d,
        KernelFamily::Gaussian,
        &h_grid,
        &[1.0, 10.0, 100.0, 1000.0],
        &TuningOptions::default(),
    )
    .unwrap();
    let best = res.best_cell();
    let at_one = res
        .surface
        .iter()
        .find(|c| c.h == best.h && c.lambda == 1.0)
        .unwrap();
    assert!(best.waypoint_penalty <= at_one.waypoint_penalty);
    for c in &res.surface {
        assert_eq!(c.total, c.cv_error + c.waypoint_penalty);
    }
}

#[test]
fn infeasible_cells_are_marked() {
    let d = Dataset::new(
        vec![0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 5.3],
        vec![1.0, 2.0, 1.5, 0.0, 0.5, 0.2, 0.9],
        vec![1],
    )
    .unwrap();
    let opts = TuningOptions {
        folds: 3,
        ..TuningOptions::default()
    };
    let res = tune(&d, KernelFamily::Epanechnikov, &[0.05, 10.0], &[1.0], &opts).unwrap();
    assert_eq!(res.infeasible_cells(), 1);
    assert_eq!(res.best_h, 10.0);
    let bad = res.surface.iter().find(|c| !c.feasible).unwrap();
    assert!(bad.total.is_infinite());
    let none = tune(&d, KernelFamily::Epanechnikov, &[0.05], &[1.0], &opts);
    assert!(matches!(none, Err(Error::NoFeasibleCell)));
}

#[test]
fn case2_single_waypoint_gap_at_high_lambda() {
    let mut gaps = Vec::new();
    for seed in 0..10 {
        let sim = SimConfig {
            q: 1,
            ..SimConfig::preset(Scenario::Case2, seed)
        };
        let g = generate(&sim).unwrap();
        let cfg =
            AnwConfig::new(KernelSpec::gaussian(g.baseline_h.unwrap()).unwrap(), 1000.0).unwrap();
        gaps.push(anw_waypoint_gap(&g.data, &cfg, g.data.constraints()[0]).unwrap());
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean <= 0.02, "mean gap {mean}");
}

#[test]
fn separated_waypoints_converge() {
    // Three constraints 10h apart; at λ = 1e8 every gap closes.
    let xs: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| (5.0 * x).sin() + 0.3 * (37.0 * x).cos())
        .collect();
    let picks = vec![40, 100, 160];
    let data = Dataset::new(xs, ys, picks.clone()).unwrap();
    let h = 0.03;
    let cfg = AnwConfig::new(KernelSpec::gaussian(h).unwrap(), 1e8).unwrap();
    for j in picks {
        assert!(anw_waypoint_gap(&data, &cfg, j).unwrap() <= 1e-3);
    }
}

#[test]
fn track_gaps_shrink_with_lambda() {
    let sim = SimConfig::preset(Scenario::Track2D, 3);
    let t = generate_track(&sim).unwrap();
    let p = parameterize(&t.track).unwrap();
    assert_eq!(p.constraints.len(), 3);
    let mut prev: Option<Vec<f64>> = None;
    for lambda in [1.0, 10.0, 100.0, 1000.0] {
        let cfg = AnwConfig::new(KernelSpec::gaussian(0.03).unwrap(), lambda).unwrap();
        let gaps = waypoint_gaps(&p, &cfg, 0).unwrap();
        if let Some(prev) = &prev {
            for (g, q) in gaps.iter().zip(prev) {
                assert!(g < q, "{gaps:?} vs {prev:?}");
            }
        }
        prev = Some(gaps);
    }
}

#[test]
fn track_fit_pins_waypoints_at_huge_lambda() {
    // Noise-free path so that the only pull away from a waypoint is kernel
    // leakage, which a small h keeps negligible.
    let s: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
    let pts: Vec<Point2> = s.iter().map(|&v| track_path(v)).collect();
    let wps = vec![
        Point2::new(-3.0, 0.5),
        Point2::new(1.0, 3.5),
        Point2::new(2.5, -1.0),
    ];
    let p = parameterize(&Track2D::new(pts, wps.clone())).unwrap();
    let cfg = AnwConfig::new(KernelSpec::gaussian(0.002).unwrap(), 1e8).unwrap();
    for (got, want) in fitted_at_waypoints(&p, &cfg, 0)
        .unwrap()
        .iter()
        .zip(p.constraints.iter())
    {
        assert!(got.distance(&Point2::new(p.xs[*want], p.ys[*want])) <= 1e-3);
    }
    let curve = fit_track(&p, &cfg, 1, 101).unwrap();
    assert_eq!(curve.points().len(), 101);
}

#[test]
fn collinear_track_stays_in_bounds_and_reduces_to_nw() {
    let pts: Vec<Point2> = (0..20)
        .map(|i| Point2::new(i as f64, 0.5 * i as f64 + 1.0))
        .collect();
    let p = parameterize(&Track2D::new(pts, vec![])).unwrap();
    let spec = KernelSpec::gaussian(2.0).unwrap();
    let curve = fit_track(&p, &AnwConfig::unweighted(spec), 0, 51).unwrap();
    for (x, y) in curve.xs.iter().zip(&curve.ys) {
        assert!((0.0..=19.0).contains(x) && (1.0..=10.5).contains(y));
    }
    let nw = anw_core::nw_fit(&p.x_dataset().unwrap(), &spec, &curve.s).unwrap();
    assert!(common::max_abs_diff(&nw.values, &curve.xs) <= 1e-14);
}

#[test]
fn tuning_mode_names_parse() {
    assert_eq!(
        "per-method".parse::<TuningMode>().unwrap(),
        TuningMode::PerMethod
    );
    assert_eq!("Shared".parse::<TuningMode>().unwrap(), TuningMode::Shared);
    assert!("sometimes".parse::<TuningMode>().is_err());
}
