//! Fixed-waypoint estimators.
//!
//! [`anw_fit`] keeps one global bandwidth and multiplies the kernel weight of
//! every constrained observation by `λ ≥ 1`, which pulls the curve through the
//! waypoints as `λ` grows. [`naive_fit`] is the comparison baseline that instead
//! shrinks the bandwidth near waypoints.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Estimator, FittedCurve, Provenance};
use crate::error::{Error, Result};
use crate::kernel::{check_grid, local_constant, KernelSpec};

/// Kernel and global waypoint weight for the adaptive estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnwConfig {
    pub spec: KernelSpec,
    pub lambda: f64,
}

impl AnwConfig {
    pub fn new(spec: KernelSpec, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and >= 1, got {lambda}"
            )));
        }
        Ok(Self { spec, lambda })
    }

    /// `λ = 1`, i.e. plain Nadaraya–Watson.
    pub fn unweighted(spec: KernelSpec) -> Self {
        Self { spec, lambda: 1.0 }
    }
}

/// Kernel-weighted smoother over a fixed design with per-observation weight
/// multipliers. Responses are supplied per call so the same weights can be
/// reused across sharpening iterations.
#[derive(Debug, Clone)]
pub struct AdaptiveSmoother<'a> {
    xs: &'a [f64],
    spec: KernelSpec,
    multipliers: Vec<f64>,
}

impl<'a> AdaptiveSmoother<'a> {
    /// Multiplier `λ` on every constrained index, 1 elsewhere.
    pub fn new(data: &'a Dataset, cfg: &AnwConfig) -> Self {
        let multipliers = (0..data.len())
            .map(|i| {
                if data.is_constraint(i) {
                    cfg.lambda
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            xs: data.xs(),
            spec: cfg.spec,
            multipliers,
        }
    }

    /// Per-waypoint weights `λ_i`. `lambdas` is indexed like `data.constraints()`.
    pub fn with_waypoint_weights(
        data: &'a Dataset,
        spec: KernelSpec,
        lambdas: &[f64],
    ) -> Result<Self> {
        if lambdas.len() != data.constraints().len() {
            return Err(Error::LengthMismatch {
                left: data.constraints().len(),
                right: lambdas.len(),
            });
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "waypoint weight {bad} is not >= 1"
            )));
        }
        let mut multipliers = vec![1.0; data.len()];
        for (&j, &l) in data.constraints().iter().zip(lambdas) {
            multipliers[j] = l;
        }
        Ok(Self {
            xs: data.xs(),
            spec,
            multipliers,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn eval(&self, ys: &[f64], x: f64) -> Result<f64> {
        local_constant(&self.spec, self.xs, ys, Some(&self.multipliers), x)
    }

    pub fn eval_many(&self, ys: &[f64], points: &[f64]) -> Result<Vec<f64>> {
        points.iter().map(|&x| self.eval(ys, x)).collect()
    }

    /// Fitted values at the design points themselves.
    pub fn eval_design(&self, ys: &[f64]) -> Result<Vec<f64>> {
        self.eval_many(ys, self.xs)
    }
}

/// Adaptive Nadaraya–Watson fit: the weighted local constant least-squares
/// solution with weight `λ·w_i` on constrained indices and `w_i` elsewhere.
pub fn anw_fit(data: &Dataset, cfg: &AnwConfig, grid: &[f64]) -> Result<FittedCurve> {
    check_grid(grid)?;
    let values = AdaptiveSmoother::new(data, cfg).eval_many(data.ys(), grid)?;
    Ok(FittedCurve::new(
        grid.to_vec(),
        values,
        Provenance::new(Estimator::Anw, cfg.spec, Some(cfg.lambda)),
    ))
}

/// `|m̂_ANW(X_j) - Y_j|` for a constrained index `j`.
pub fn anw_waypoint_gap(data: &Dataset, cfg: &AnwConfig, j: usize) -> Result<f64> {
    if !data.is_constraint(j) {
        return Err(Error::NotAConstraint(j));
    }
    let fitted = AdaptiveSmoother::new(data, cfg).eval(data.ys(), data.xs()[j])?;
    Ok((fitted - data.ys()[j]).abs())
}

/// Bandwidth-shrinking baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveConfig {
    pub spec: KernelSpec,
    /// Factor in `(0, 1]` applied to `h` near waypoints.
    pub gamma: f64,
    /// Neighbourhood radius around each waypoint location.
    pub radius: f64,
}

impl NaiveConfig {
    /// `radius` defaults to the bandwidth.
    pub fn new(spec: KernelSpec, gamma: f64, radius: Option<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        let radius = radius.unwrap_or(spec.bandwidth);
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            spec,
            gamma,
            radius,
        })
    }
}

/// Naive fit: at any `x` within `radius` of a constrained location every
/// observation weight uses bandwidth `γh`; elsewhere the global `h`.
pub fn naive_fit(data: &Dataset, cfg: &NaiveConfig, grid: &[f64]) -> Result<FittedCurve> {
    check_grid(grid)?;
    let shrunk = cfg.spec.with_bandwidth(cfg.gamma * cfg.spec.bandwidth)?;
    let waypoint_xs: Vec<f64> = data.constraints().iter().map(|&j| data.xs()[j]).collect();
    let values = grid
        .iter()
        .map(|&x| {
            let near = waypoint_xs.iter().any(|&c| (x - c).abs() <= cfg.radius);
            let spec = if near { &shrunk } else { &cfg.spec };
            local_constant(spec, data.xs(), data.ys(), None, x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedCurve::new(
        grid.to_vec(),
        values,
        Provenance::new(Estimator::Naive, cfg.spec, None),
    ))
}
