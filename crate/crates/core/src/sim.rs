//! Synthetic data for the 1-D and 2-D experiments.
//!
//! All randomness comes from a ChaCha8 stream keyed by `(seed, scenario)`, so a
//! configuration reproduces the same dataset on every platform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constrained::{AdaptiveSmoother, AnwConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::trajectory::{Point2, Track2D};
use crate::tuning::{default_bandwidth_grid, tune, TuningOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `m(x) = sin 2πx + 0.3 cos 6πx` on `[0, 1]`.
    Sharpen1D,
    /// `m(x) = sin x + 0.3 cos 2x` on `[0, 10]`, waypoints agreeing with the data.
    Case1,
    /// Same signal, waypoints conflicting with the data.
    Case2,
    /// Noisy planar track along a curved path with waypoints on the true path.
    Track2D,
}

impl Scenario {
    pub fn domain(self) -> (f64, f64) {
        match self {
            Scenario::Sharpen1D | Scenario::Track2D => (0.0, 1.0),
            Scenario::Case1 | Scenario::Case2 => (0.0, 10.0),
        }
    }

    /// True regression function. For [`Scenario::Track2D`] this is the scalar
    /// response `z(s)` carried along the track.
    pub fn truth(self, x: f64) -> f64 {
        match self {
            Scenario::Sharpen1D | Scenario::Track2D => {
                (2.0 * PI * x).sin() + 0.3 * (6.0 * PI * x).cos()
            }
            Scenario::Case1 | Scenario::Case2 => x.sin() + 0.3 * (2.0 * x).cos(),
        }
    }

    fn stream(self) -> u64 {
        match self {
            Scenario::Sharpen1D => 1,
            Scenario::Case1 => 2,
            Scenario::Case2 => 3,
            Scenario::Track2D => 4,
        }
    }
}

/// True planar path of the track scenario, `s ∈ [0, 1]`.
pub fn track_path(s: f64) -> Point2 {
    let t = 1.5 * PI * s;
    Point2::new(4.0 * t.cos(), 3.0 * t.sin() + 2.0 * s)
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Sharpen1D => "sharpen1d",
            Scenario::Case1 => "case1",
            Scenario::Case2 => "case2",
            Scenario::Track2D => "track2d",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sharpen1d" | "sharpen" => Ok(Scenario::Sharpen1D),
            "case1" => Ok(Scenario::Case1),
            "case2" => Ok(Scenario::Case2),
            "track2d" | "track" => Ok(Scenario::Track2D),
            other => Err(Error::BadPreset(format!("unknown scenario `{other}`"))),
        }
    }
}

/// How the constrained indices of a 1-D dataset are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointMode {
    /// Uniformly random observations, response set to `m(X)`.
    Random,
    /// Observations whose baseline-fit residuals are in the smallest decile.
    SmallResidual,
    /// Largest-decile residuals, response pushed a further `2σ` away from the
    /// baseline fit.
    LargeResidual,
}

impl fmt::Display for WaypointMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaypointMode::Random => "random",
            WaypointMode::SmallResidual => "small",
            WaypointMode::LargeResidual => "large",
        })
    }
}

impl FromStr for WaypointMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "random" => Ok(WaypointMode::Random),
            "small" | "smallresidual" => Ok(WaypointMode::SmallResidual),
            "large" | "largeresidual" => Ok(WaypointMode::LargeResidual),
            other => Err(Error::BadPreset(format!("unknown waypoint mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub q: usize,
    pub waypoint_mode: WaypointMode,
}

impl SimConfig {
    pub fn preset(scenario: Scenario, seed: u64) -> Self {
        let (n, sigma, q, waypoint_mode) = match scenario {
            Scenario::Sharpen1D => (500, 0.15, 2, WaypointMode::Random),
            Scenario::Case1 => (500, 0.15, 2, WaypointMode::SmallResidual),
            Scenario::Case2 => (500, 0.15, 2, WaypointMode::LargeResidual),
            Scenario::Track2D => (300, 0.05, 3, WaypointMode::Random),
        };
        Self {
            scenario,
            n,
            sigma,
            seed,
            q,
            waypoint_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::BadPreset(format!("n = {} is too small", self.n)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::BadPreset(format!(
                "sigma = {} is invalid",
                self.sigma
            )));
        }
        if self.q >= self.n / 2 {
            return Err(Error::BadPreset(format!(
                "q = {} is too large for n = {}",
                self.q, self.n
            )));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.scenario.stream());
        rng
    }
}

/// A generated 1-D dataset with the information needed to score fits on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDataset {
    pub data: Dataset,
    /// Bandwidth of the baseline fit used to pick waypoints, if one was fitted.
    pub baseline_h: Option<f64>,
}

/// Generates a 1-D dataset. Covariates are i.i.d. uniform on the scenario
/// domain; stochastic responses get Gaussian noise and constrained responses are
/// set per [`WaypointMode`].
pub fn generate(sim: &SimConfig) -> Result<SimDataset> {
    sim.validate()?;
    if sim.scenario == Scenario::Track2D {
        return Err(Error::BadPreset(
            "track2d produces a track; use generate_track".into(),
        ));
    }
    let mut rng = sim.rng();
    let (lo, hi) = sim.scenario.domain();
    let xs: Vec<f64> = (0..sim.n).map(|_| rng.random_range(lo..hi)).collect();
    let truth: Vec<f64> = xs.iter().map(|&x| sim.scenario.truth(x)).collect();
    let noise = Normal::new(0.0, sim.sigma).map_err(|e| Error::BadPreset(e.to_string()))?;
    let mut ys: Vec<f64> = truth.iter().map(|&m| m + noise.sample(&mut rng)).collect();

    let (constraints, baseline_h) = match sim.waypoint_mode {
        WaypointMode::Random => {
            let mut idx: Vec<usize> = (0..sim.n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(sim.q);
            for &j in &idx {
                ys[j] = truth[j];
            }
            (idx, None)
        }
        mode => {
            let unconstrained = Dataset::unconstrained(xs.clone(), ys.clone())?;
            let (h, fitted) = baseline_fit(&unconstrained, sim.seed)?;
            let residuals: Vec<f64> = ys.iter().zip(&fitted).map(|(y, f)| y - f).collect();
            let picked = pick_waypoints(&xs, &residuals, mode, sim.q, 4.0 * h, &mut rng)?;
            for &j in &picked {
                ys[j] = match mode {
                    WaypointMode::LargeResidual => {
                        let sign = if residuals[j] < 0.0 { -1.0 } else { 1.0 };
                        truth[j] + sign * 2.0 * sim.sigma
                    }
                    _ => truth[j],
                };
            }
            (picked, Some(h))
        }
    };
    Ok(SimDataset {
        data: Dataset::new(xs, ys, constraints)?,
        baseline_h,
    })
}

/// NW with a cross-validated bandwidth; returns `(h, fitted values at X)`.
fn baseline_fit(data: &Dataset, seed: u64) -> Result<(f64, Vec<f64>)> {
    let grid = default_bandwidth_grid(data);
    let options = TuningOptions {
        seed,
        ..TuningOptions::default()
    };
    let tuned = tune(data, KernelFamily::Gaussian, &grid, &[1.0], &options)?;
    let cfg = AnwConfig::unweighted(KernelSpec::gaussian(tuned.best_h)?);
    let fitted = AdaptiveSmoother::new(data, &cfg).eval_design(data.ys())?;
    Ok((tuned.best_h, fitted))
}

/// Picks `q` indices from the bottom or top residual decile, in random order,
/// keeping chosen covariates at least `min_gap` apart. Falls back to the rest of
/// the residual ranking when the decile cannot supply enough separated points.
fn pick_waypoints(
    xs: &[f64],
    residuals: &[f64],
    mode: WaypointMode,
    q: usize,
    min_gap: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let mut ranked: Vec<usize> = (0..xs.len()).collect();
    ranked.sort_by(|&a, &b| {
        residuals[a]
            .abs()
            .total_cmp(&residuals[b].abs())
            .then(a.cmp(&b))
    });
    if mode == WaypointMode::LargeResidual {
        ranked.reverse();
    }
    let decile = (xs.len() / 10).max(q);
    let (pool, rest) = ranked.split_at(decile);
    let mut pool = pool.to_vec();
    pool.shuffle(rng);

    let mut chosen: Vec<usize> = Vec::with_capacity(q);
    for &i in pool.iter().chain(rest) {
        if chosen.len() == q {
            break;
        }
        if chosen.iter().all(|&j| (xs[i] - xs[j]).abs() >= min_gap) {
            chosen.push(i);
        }
    }
    if chosen.len() < q {
        return Err(Error::BadPreset(format!(
            "could not place {q} waypoints at least {min_gap} apart"
        )));
    }
    Ok(chosen)
}

/// A generated track with the ground truth needed for scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrack {
    pub track: Track2D,
    /// Path parameter that generated each observed point.
    pub point_s: Vec<f64>,
    /// Path parameter of each waypoint.
    pub waypoint_s: Vec<f64>,
    /// Noisy scalar response observed at each point.
    pub point_z: Vec<f64>,
}

impl SimTrack {
    pub fn true_position(&self, s: f64) -> Point2 {
        track_path(s)
    }
}

/// Generates the planar track scenario: `n` points at sorted uniform path
/// parameters with isotropic noise `σ`, and `q` waypoints on the true path at
/// `s = k / (q + 1)`. A scalar response `z = m(s) + ε` is observed at each
/// point.
pub fn generate_track(sim: &SimConfig) -> Result<SimTrack> {
    sim.validate()?;
    if sim.scenario != Scenario::Track2D {
        return Err(Error::BadPreset(format!(
            "{} is not a track scenario",
            sim.scenario
        )));
    }
    let mut rng = sim.rng();
    let mut point_s: Vec<f64> = (0..sim.n).map(|_| rng.random_range(0.0..1.0)).collect();
    point_s.sort_by(f64::total_cmp);
    point_s[0] = 0.0;
    point_s[sim.n - 1] = 1.0;
    let noise = Normal::new(0.0, sim.sigma).map_err(|e| Error::BadPreset(e.to_string()))?;
    let points = point_s
        .iter()
        .map(|&s| {
            let p = track_path(s);
            Point2::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng))
        })
        .collect();
    let point_z = point_s
        .iter()
        .map(|&s| Scenario::Track2D.truth(s) + noise.sample(&mut rng))
        .collect();
    let waypoint_s: Vec<f64> = (1..=sim.q).map(|k| k as f64 / (sim.q + 1) as f64).collect();
    let waypoints = waypoint_s.iter().map(|&s| track_path(s)).collect();
    Ok(SimTrack {
        track: Track2D::new(points, waypoints),
        point_s,
        waypoint_s,
        point_z,
    })
}
