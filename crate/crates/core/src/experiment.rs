//! Running a set of estimators on one dataset or track and scoring them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constrained::{naive_fit, AdaptiveSmoother, AnwConfig, NaiveConfig};
use crate::data::{Dataset, Estimator};
use crate::error::{Error, Result};
use crate::kernel::{uniform_grid, KernelFamily, KernelSpec};
use crate::metrics::{smoothness, CssConfig, MetricsReport};
use crate::sharpening::sharpen;
use crate::sim::{generate, generate_track, track_path, Scenario, SimConfig, SimTrack};
use crate::trajectory::{
    augment_waypoints, parameterize_augmented, rotate_track, unrotate, ParamTrack, Point2, Track2D,
    SNAP_TOLERANCE,
};
use crate::tuning::{
    default_bandwidth_grid, tune_joint, TuningOptions, TuningResult, DEFAULT_FOLDS,
    DEFAULT_LAMBDA_GRID,
};

pub const DEFAULT_LAMBDA: f64 = 100.0;
pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_GRID_SIZE: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningMode {
    /// Use the configured `h` and `λ` as given.
    Off,
    /// One ANW search whose `(h, λ)` every method reuses.
    Shared,
    /// A separate search per method, with the method's own sharpening depth.
    PerMethod,
}

impl std::fmt::Display for TuningMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TuningMode::Off => "off",
            TuningMode::Shared => "shared",
            TuningMode::PerMethod => "per-method",
        })
    }
}

impl std::str::FromStr for TuningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "off" | "none" => Ok(TuningMode::Off),
            "shared" => Ok(TuningMode::Shared),
            "permethod" | "pervariant" => Ok(TuningMode::PerMethod),
            other => Err(Error::InvalidConfig(format!(
                "unknown tuning mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kernel: KernelFamily,
    /// Fixed bandwidth. With tuning on, pins the bandwidth grid to this value.
    pub h: Option<f64>,
    /// Fixed waypoint weight. With tuning on, pins the λ grid to this value.
    pub lambda: Option<f64>,
    pub methods: Vec<Estimator>,
    pub tuning: TuningMode,
    pub h_grid: Option<Vec<f64>>,
    pub lambda_grid: Option<Vec<f64>>,
    pub folds: usize,
    pub penalty_weight: f64,
    pub seed: u64,
    /// Bandwidth shrink factor of the naive baseline.
    pub gamma: f64,
    pub naive_radius: Option<f64>,
    pub grid_size: usize,
    /// Grid points this close to the domain ends are left out of the RMSE.
    pub interior_margin: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: KernelFamily::Gaussian,
            h: None,
            lambda: None,
            methods: vec![Estimator::Nw, Estimator::Anw, Estimator::DsAnw(1)],
            tuning: TuningMode::Off,
            h_grid: None,
            lambda_grid: None,
            folds: DEFAULT_FOLDS,
            penalty_weight: 1.0,
            seed: 0,
            gamma: DEFAULT_GAMMA,
            naive_radius: None,
            grid_size: DEFAULT_GRID_SIZE,
            interior_margin: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn for_scenario(scenario: Scenario, seed: u64) -> Self {
        let base = Self {
            seed,
            ..Self::default()
        };
        match scenario {
            Scenario::Sharpen1D => Self {
                h: Some(0.03),
                lambda: Some(DEFAULT_LAMBDA),
                methods: (0..=3).map(dsanw).collect(),
                ..base
            },
            Scenario::Case1 | Scenario::Case2 => Self {
                methods: vec![
                    Estimator::Nw,
                    Estimator::Naive,
                    Estimator::Anw,
                    Estimator::DsAnw(1),
                ],
                tuning: TuningMode::Shared,
                ..base
            },
            Scenario::Track2D => Self {
                methods: (0..=2).map(dsanw).collect(),
                tuning: TuningMode::PerMethod,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.grid_size < 3 {
            return bad("grid size must be at least 3");
        }
        if self.folds < 2 {
            return bad("at least 2 folds are needed");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.interior_margin.is_finite() && self.interior_margin >= 0.0) {
            return bad("interior margin must be >= 0");
        }
        if let Some(h) = self.h {
            KernelSpec::new(self.kernel, h)?;
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l >= 1.0) {
                return bad("lambda must be >= 1");
            }
        }
        Ok(())
    }

    fn tuning_options(&self, steps: usize) -> TuningOptions {
        TuningOptions {
            folds: self.folds,
            seed: self.seed,
            penalty_weight: self.penalty_weight,
            sharpening_steps: steps,
        }
    }
}

fn dsanw(m: usize) -> Estimator {
    if m == 0 {
        Estimator::Anw
    } else {
        Estimator::DsAnw(m)
    }
}

/// One scored method on one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub estimator: Estimator,
    /// Response the row scores: `y` for 1-D data, `xy` for a planar track, `z`
    /// for a scalar carried along a track.
    pub target: String,
    pub h: f64,
    pub lambda: Option<f64>,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// A fitted curve on the evaluation grid, ready to be written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub slug: String,
    pub method: String,
    pub target: String,
    pub grid_name: String,
    pub grid: Vec<f64>,
    pub columns: Vec<CurveColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSummary {
    pub label: String,
    pub target: String,
    pub best_h: f64,
    pub best_lambda: f64,
    pub cv_error: f64,
    pub waypoint_penalty: f64,
    pub total: f64,
    pub cells: usize,
    pub infeasible_cells: usize,
}

impl TuningSummary {
    fn new(label: &str, target: &str, result: &TuningResult) -> Self {
        let best = result.best_cell();
        Self {
            label: label.to_string(),
            target: target.to_string(),
            best_h: result.best_h,
            best_lambda: result.best_lambda,
            cv_error: best.cv_error,
            waypoint_penalty: best.waypoint_penalty,
            total: best.total,
            cells: result.surface.len(),
            infeasible_cells: result.infeasible_cells(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Simulated {
        config: SimConfig,
    },
    File {
        path: String,
        schema: String,
        rotation_deg: f64,
    },
}

/// Everything a run produced, in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub source: Source,
    pub experiment: ExperimentConfig,
    pub rows: Vec<MethodRow>,
    pub curves: Vec<CurveRecord>,
    pub tuning: Vec<TuningSummary>,
    /// Wall-clock time of the run; left empty by the library so that records are
    /// reproducible.
    #[serde(default)]
    pub timestamp: Option<String>,
}

/// A run record plus the full tuning surfaces behind its summaries.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub surfaces: Vec<(String, TuningResult)>,
}

impl RunOutput {
    pub fn row(&self, estimator: Estimator, target: &str) -> Option<&MethodRow> {
        self.record
            .rows
            .iter()
            .find(|r| r.estimator == estimator && r.target == target)
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    h: f64,
    lambda: f64,
}

/// Fitted values of every coordinate on the grid and at the design points.
struct Evaluated {
    grid: Vec<Vec<f64>>,
    design: Vec<Vec<f64>>,
}

fn evaluate(
    datasets: &[Dataset],
    method: Estimator,
    params: Params,
    exp: &ExperimentConfig,
    grid: &[f64],
) -> Result<Evaluated> {
    let spec = KernelSpec::new(exp.kernel, params.h)?;
    let mut out = Evaluated {
        grid: Vec::with_capacity(datasets.len()),
        design: Vec::with_capacity(datasets.len()),
    };
    for d in datasets {
        let (on_grid, at_design) = match method {
            Estimator::Nw => {
                let s = AdaptiveSmoother::new(d, &AnwConfig::unweighted(spec));
                (s.eval_many(d.ys(), grid)?, s.eval_design(d.ys())?)
            }
            Estimator::Naive => {
                let cfg = NaiveConfig::new(spec, exp.gamma, exp.naive_radius)?;
                (
                    naive_fit(d, &cfg, grid)?.values,
                    naive_fit(d, &cfg, d.xs())?.values,
                )
            }
            Estimator::Anw | Estimator::DsAnw(_) => {
                let cfg = AnwConfig::new(spec, params.lambda)?;
                let state = sharpen(d, &cfg, method.sharpening_steps())?;
                let s = AdaptiveSmoother::new(d, &cfg);
                (
                    s.eval_many(state.current_ys(), grid)?,
                    s.eval_design(state.current_ys())?,
                )
            }
        };
        out.grid.push(on_grid);
        out.design.push(at_design);
    }
    Ok(out)
}

/// What the fitted values are scored against.
enum Reference {
    /// Truth on the evaluation grid, with a mask of the points that count.
    Grid { truth: Vec<f64>, include: Vec<bool> },
    /// Per-coordinate truth at a subset of design points.
    Design {
        indices: Vec<usize>,
        truth: Vec<Vec<f64>>,
    },
}

struct Target {
    name: String,
    datasets: Vec<Dataset>,
    grid: Vec<f64>,
    grid_name: String,
    reference: Reference,
    /// Names of the fitted columns in curve output, one per dataset.
    columns: Vec<String>,
    /// Maps fitted grid columns to output coordinates, e.g. undoing a rotation.
    output: fn(&[Vec<f64>], f64) -> Vec<Vec<f64>>,
    rotation: f64,
}

fn identity_output(cols: &[Vec<f64>], _: f64) -> Vec<Vec<f64>> {
    cols.to_vec()
}

fn unrotate_output(cols: &[Vec<f64>], theta: f64) -> Vec<Vec<f64>> {
    let pts: Vec<Point2> = cols[0]
        .iter()
        .zip(&cols[1])
        .map(|(&x, &y)| Point2::new(x, y))
        .collect();
    let back = unrotate(&pts, theta);
    vec![
        back.iter().map(|p| p.x).collect(),
        back.iter().map(|p| p.y).collect(),
    ]
}

fn raw_scores(target: &Target, ev: &Evaluated) -> Result<(f64, f64, f64)> {
    let rmse = match &target.reference {
        Reference::Grid { truth, include } => {
            let diffs: Vec<f64> = ev.grid[0]
                .iter()
                .zip(truth)
                .zip(include)
                .filter(|(_, &keep)| keep)
                .map(|((f, t), _)| f - t)
                .collect();
            if diffs.is_empty() {
                return Err(Error::InvalidConfig(
                    "interior margin leaves no grid points".into(),
                ));
            }
            (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt()
        }
        Reference::Design { indices, truth } => {
            if indices.is_empty() {
                return Err(Error::TooFewPoints { needed: 1, got: 0 });
            }
            let sse: f64 = indices
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    (0..ev.design.len())
                        .map(|c| (ev.design[c][i] - truth[c][k]).powi(2))
                        .sum::<f64>()
                })
                .sum();
            (sse / indices.len() as f64).sqrt()
        }
    };
    let constraints = target.datasets[0].constraints();
    let waypoint = if constraints.is_empty() {
        0.0
    } else {
        let sse: f64 = constraints
            .iter()
            .map(|&j| {
                target
                    .datasets
                    .iter()
                    .zip(&ev.design)
                    .map(|(d, fit)| (fit[j] - d.ys()[j]).powi(2))
                    .sum::<f64>()
            })
            .sum();
        (sse / constraints.len() as f64).sqrt()
    };
    let mut rough = 0.0;
    for col in &ev.grid {
        rough += smoothness(&target.grid, col)?;
    }
    Ok((rmse, waypoint, rough))
}

struct Runner<'a> {
    exp: &'a ExperimentConfig,
    baseline_h: Option<f64>,
    record_rows: Vec<MethodRow>,
    curves: Vec<CurveRecord>,
    tuning: Vec<TuningSummary>,
    surfaces: Vec<(String, TuningResult)>,
}

impl<'a> Runner<'a> {
    fn new(exp: &'a ExperimentConfig, baseline_h: Option<f64>) -> Result<Self> {
        exp.validate()?;
        Ok(Self {
            exp,
            baseline_h,
            record_rows: Vec::new(),
            curves: Vec::new(),
            tuning: Vec::new(),
            surfaces: Vec::new(),
        })
    }

    fn search(
        &mut self,
        target: &Target,
        label: &str,
        steps: usize,
        lambdas: Vec<f64>,
    ) -> Result<Params> {
        let h_grid = match (self.exp.h, &self.exp.h_grid) {
            (Some(h), _) => vec![h],
            (None, Some(g)) => g.clone(),
            (None, None) => default_bandwidth_grid(&target.datasets[0]),
        };
        let result = tune_joint(
            &target.datasets,
            self.exp.kernel,
            &h_grid,
            &lambdas,
            &self.exp.tuning_options(steps),
        )?;
        self.tuning
            .push(TuningSummary::new(label, &target.name, &result));
        let params = Params {
            h: result.best_h,
            lambda: result.best_lambda,
        };
        self.surfaces
            .push((format!("{label}_{}", target.name), result));
        Ok(params)
    }

    fn lambda_grid(&self) -> Vec<f64> {
        match (self.exp.lambda, &self.exp.lambda_grid) {
            (Some(l), _) => vec![l],
            (None, Some(g)) => g.clone(),
            (None, None) => DEFAULT_LAMBDA_GRID.to_vec(),
        }
    }

    /// `(h, λ)` for every method of the experiment on this target.
    fn resolve(&mut self, target: &Target) -> Result<Vec<Params>> {
        let exp = self.exp;
        match exp.tuning {
            TuningMode::Off => {
                let h = match exp.h.or(self.baseline_h) {
                    Some(h) => h,
                    None => self.search(target, "bandwidth", 0, vec![1.0])?.h,
                };
                let lambda = exp.lambda.unwrap_or(DEFAULT_LAMBDA);
                Ok(vec![Params { h, lambda }; exp.methods.len()])
            }
            TuningMode::Shared => {
                let p = self.search(target, "shared", 0, self.lambda_grid())?;
                Ok(vec![p; exp.methods.len()])
            }
            TuningMode::PerMethod => exp
                .methods
                .iter()
                .map(|m| match m {
                    Estimator::Nw | Estimator::Naive => {
                        self.search(target, &m.slug(), 0, vec![1.0])
                    }
                    _ => {
                        let lambdas = self.lambda_grid();
                        self.search(target, &m.slug(), m.sharpening_steps(), lambdas)
                    }
                })
                .collect(),
        }
    }

    fn run_target(&mut self, target: Target) -> Result<()> {
        let exp = self.exp;
        if exp.methods.is_empty() {
            return Ok(());
        }
        let params = self.resolve(&target)?;
        let mut scored = Vec::with_capacity(exp.methods.len());
        for (&method, &p) in exp.methods.iter().zip(&params) {
            let ev = evaluate(&target.datasets, method, p, exp, &target.grid)?;
            let scores = raw_scores(&target, &ev)?;
            scored.push((method, p, ev, scores));
        }
        let rough: Vec<f64> = scored.iter().map(|s| s.3 .2).collect();
        let mut css_cfg = CssConfig::from_candidates(&rough)?;
        if !(css_cfg.tau_s > 0.0) {
            // All candidates are flat lines; any positive tolerance scores them 0.
            css_cfg.tau_s = 1.0;
        }
        let suffix = if target.name == "y" || target.name == "xy" {
            String::new()
        } else {
            format!("_{}", target.name)
        };
        for (method, p, ev, (rmse, we, sm)) in scored {
            let lambda = match method {
                Estimator::Nw | Estimator::Naive => None,
                _ => Some(p.lambda),
            };
            self.record_rows.push(MethodRow {
                method: method.label(),
                estimator: method,
                target: target.name.clone(),
                h: p.h,
                lambda,
                metrics: MetricsReport::new(rmse, we, sm, css_cfg),
            });
            let cols = (target.output)(&ev.grid, target.rotation);
            self.curves.push(CurveRecord {
                slug: format!("{}{suffix}", method.slug()),
                method: method.label(),
                target: target.name.clone(),
                grid_name: target.grid_name.clone(),
                grid: target.grid.clone(),
                columns: target
                    .columns
                    .iter()
                    .zip(cols)
                    .map(|(name, values)| CurveColumn {
                        name: name.clone(),
                        values,
                    })
                    .collect(),
            });
        }
        Ok(())
    }

    fn finish(self, source: Source) -> RunOutput {
        RunOutput {
            record: RunRecord {
                version: env!("CARGO_PKG_VERSION").to_string(),
                source,
                experiment: self.exp.clone(),
                rows: self.record_rows,
                curves: self.curves,
                tuning: self.tuning,
                timestamp: None,
            },
            surfaces: self.surfaces,
        }
    }
}

fn one_d_target(data: Dataset, grid: Vec<f64>, reference: Reference, grid_name: &str) -> Target {
    Target {
        name: "y".into(),
        datasets: vec![data],
        grid,
        grid_name: grid_name.into(),
        reference,
        columns: vec!["fit".into()],
        output: identity_output,
        rotation: 0.0,
    }
}

/// Generates the scenario data and runs the experiment on it.
pub fn run_simulation(sim: &SimConfig, exp: &ExperimentConfig) -> Result<RunOutput> {
    if sim.scenario == Scenario::Track2D {
        let track = generate_track(sim)?;
        return run_sim_track(sim, &track, exp);
    }
    let generated = generate(sim)?;
    let (lo, hi) = sim.scenario.domain();
    let grid = uniform_grid(lo, hi, exp.grid_size);
    let truth: Vec<f64> = grid.iter().map(|&x| sim.scenario.truth(x)).collect();
    let m = exp.interior_margin;
    let include = grid.iter().map(|&x| x >= lo + m && x <= hi - m).collect();
    let target = one_d_target(
        generated.data,
        grid,
        Reference::Grid { truth, include },
        "x",
    );
    let mut runner = Runner::new(exp, generated.baseline_h)?;
    runner.run_target(target)?;
    Ok(runner.finish(Source::Simulated { config: *sim }))
}

/// Runs the experiment on each seed in parallel. Replicate `r` regenerates the
/// data and reruns any search with `seeds[r]`; outputs come back in seed order.
pub fn run_replicates(
    sim: &SimConfig,
    exp: &ExperimentConfig,
    seeds: &[u64],
) -> Result<Vec<RunOutput>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let sim = SimConfig { seed, ..*sim };
            let exp = ExperimentConfig {
                seed,
                ..exp.clone()
            };
            run_simulation(&sim, &exp)
        })
        .collect()
}

/// Path parameter of each augmented point, and the observation it came from if
/// it is not an inserted waypoint.
fn augmented_truth(
    sim: &SimTrack,
    points: &[Point2],
    constraints: &[usize],
) -> Result<Vec<(f64, Option<usize>)>> {
    let mut next_original = 0;
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let original = sim.track.points.get(next_original) == Some(p);
        let source = original.then_some(next_original);
        if original {
            next_original += 1;
        }
        let s = if constraints.binary_search(&i).is_ok() {
            let k = sim
                .track
                .waypoints
                .iter()
                .position(|w| w.distance(p) <= SNAP_TOLERANCE)
                .ok_or(Error::DegenerateTrack)?;
            sim.waypoint_s[k]
        } else {
            sim.point_s[source.ok_or(Error::DegenerateTrack)?]
        };
        out.push((s, source));
    }
    Ok(out)
}

fn run_sim_track(sim: &SimConfig, track: &SimTrack, exp: &ExperimentConfig) -> Result<RunOutput> {
    let aug = augment_waypoints(&track.track);
    let origin = augmented_truth(track, &aug.points, &aug.constraints)?;
    let true_s: Vec<f64> = origin.iter().map(|o| o.0).collect();
    let ptrack = parameterize_augmented(&aug)?;
    let stochastic: Vec<usize> = (0..ptrack.len())
        .filter(|i| aug.constraints.binary_search(i).is_err())
        .collect();
    let grid = uniform_grid(0.0, 1.0, exp.grid_size);

    let truth_xy: Vec<Point2> = stochastic.iter().map(|&i| track_path(true_s[i])).collect();
    let xy = Target {
        name: "xy".into(),
        datasets: vec![ptrack.x_dataset()?, ptrack.y_dataset()?],
        grid: grid.clone(),
        grid_name: "s".into(),
        reference: Reference::Design {
            indices: stochastic.clone(),
            truth: vec![
                truth_xy.iter().map(|p| p.x).collect(),
                truth_xy.iter().map(|p| p.y).collect(),
            ],
        },
        columns: vec!["x".into(), "y".into()],
        output: identity_output,
        rotation: 0.0,
    };

    // Scalar response along the track; waypoints carry the exact value.
    let z: Vec<f64> = origin
        .iter()
        .enumerate()
        .map(|(i, &(s, source))| match source {
            Some(k) if aug.constraints.binary_search(&i).is_err() => track.point_z[k],
            _ => Scenario::Track2D.truth(s),
        })
        .collect();
    let z_data = Dataset::new(ptrack.s.clone(), z, ptrack.constraints.clone())?;
    let z_truth = stochastic
        .iter()
        .map(|&i| Scenario::Track2D.truth(true_s[i]))
        .collect();
    let z_target = Target {
        name: "z".into(),
        datasets: vec![z_data],
        grid: grid.clone(),
        grid_name: "s".into(),
        reference: Reference::Design {
            indices: stochastic,
            truth: vec![z_truth],
        },
        columns: vec!["z".into()],
        output: identity_output,
        rotation: 0.0,
    };

    let mut runner = Runner::new(exp, None)?;
    runner.run_target(xy)?;
    runner.run_target(z_target)?;
    Ok(runner.finish(Source::Simulated { config: *sim }))
}

/// Runs the experiment on observed 1-D data. Accuracy is the in-sample RMSE
/// against the stochastic responses.
pub fn run_dataset(data: &Dataset, exp: &ExperimentConfig, path: &str) -> Result<RunOutput> {
    let (lo, hi) = data.x_range();
    let grid = uniform_grid(lo, hi, exp.grid_size);
    let indices = data.stochastic_indices();
    let truth = vec![indices.iter().map(|&i| data.ys()[i]).collect()];
    let target = one_d_target(
        data.clone(),
        grid,
        Reference::Design { indices, truth },
        "x",
    );
    let mut runner = Runner::new(exp, None)?;
    runner.run_target(target)?;
    Ok(runner.finish(Source::File {
        path: path.to_string(),
        schema: "xy".into(),
        rotation_deg: 0.0,
    }))
}

/// Augmented, rotated, arc-length parameterized route.
pub fn prepare_route(track: &Track2D, rotation_deg: f64) -> Result<ParamTrack> {
    let rotated = rotate_track(track, rotation_deg.to_radians());
    parameterize_augmented(&augment_waypoints(&rotated))
}

/// Runs the experiment on an observed route: rotate by `rotation_deg`, augment
/// the waypoints, fit both coordinates against arc length, and report curves
/// rotated back to the input frame. Accuracy is the in-sample distance to the
/// observed points.
pub fn run_route(
    track: &Track2D,
    rotation_deg: f64,
    exp: &ExperimentConfig,
    path: &str,
) -> Result<RunOutput> {
    let ptrack = prepare_route(track, rotation_deg)?;
    let indices: Vec<usize> = (0..ptrack.len())
        .filter(|i| ptrack.constraints.binary_search(i).is_err())
        .collect();
    let truth = vec![
        indices.iter().map(|&i| ptrack.xs[i]).collect(),
        indices.iter().map(|&i| ptrack.ys[i]).collect(),
    ];
    let target = Target {
        name: "xy".into(),
        datasets: vec![ptrack.x_dataset()?, ptrack.y_dataset()?],
        grid: uniform_grid(0.0, 1.0, exp.grid_size),
        grid_name: "s".into(),
        reference: Reference::Design { indices, truth },
        columns: vec!["lon".into(), "lat".into()],
        output: unrotate_output,
        rotation: rotation_deg.to_radians(),
    };
    let mut runner = Runner::new(exp, None)?;
    runner.run_target(target)?;
    Ok(runner.finish(Source::File {
        path: path.to_string(),
        schema: "lonlat".into(),
        rotation_deg,
    }))
}
