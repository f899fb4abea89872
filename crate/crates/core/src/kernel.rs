//! Kernel functions and the unconstrained Nadaraya–Watson estimator.
//!
//! Every estimator in this crate is a local constant smoother: the fitted value
//! at `x` is a ratio of kernel-weighted sums over the observations. The
//! constrained estimators differ only in how individual weights are scaled or
//! which bandwidth is used at a given `x`, so the shared evaluation lives here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Estimator, FittedCurve, Provenance};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kernel family. Both are symmetric second-order kernels that integrate to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `(2π)^(-1/2) exp(-u²/2)`; positive everywhere, so never produces zero mass.
    #[default]
    Gaussian,
    /// `0.75 (1 - u²)` on `|u| ≤ 1`.
    Epanechnikov,
}

impl KernelFamily {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => INV_SQRT_2PI * (-0.5 * u * u).exp(),
            KernelFamily::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width of the support in units of the bandwidth, `None` if unbounded.
    pub fn support_radius(self) -> Option<f64> {
        match self {
            KernelFamily::Gaussian => None,
            KernelFamily::Epanechnikov => Some(1.0),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Epanechnikov => "epanechnikov",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "epanechnikov" | "epa" => Ok(KernelFamily::Epanechnikov),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

/// A kernel family together with its bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self { family, bandwidth })
    }

    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, bandwidth)
    }

    pub fn epanechnikov(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::Epanechnikov, bandwidth)
    }

    /// Same family with a different bandwidth.
    pub fn with_bandwidth(self, bandwidth: f64) -> Result<Self> {
        Self::new(self.family, bandwidth)
    }

    /// `K_h(x - xi) = K((x - xi)/h) / h`.
    #[inline]
    pub fn weight(&self, x: f64, xi: f64) -> f64 {
        self.family.eval((x - xi) / self.bandwidth) / self.bandwidth
    }
}

/// Free-function form of [`KernelSpec::weight`].
#[inline]
pub fn kernel_weight(spec: &KernelSpec, x: f64, xi: f64) -> f64 {
    spec.weight(x, xi)
}

/// Kernel-weighted average `Σ m_i K_h(x - X_i) Y_i / Σ m_i K_h(x - X_i)` where
/// `m_i` are per-observation multipliers (all ones when `multipliers` is `None`).
pub(crate) fn local_constant(
    spec: &KernelSpec,
    xs: &[f64],
    ys: &[f64],
    multipliers: Option<&[f64]>,
    x: f64,
) -> Result<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut num = 0.0;
    let mut den = 0.0;
    match multipliers {
        Some(m) => {
            for ((&xi, &yi), &mi) in xs.iter().zip(ys).zip(m) {
                let w = mi * spec.weight(x, xi);
                num += w * yi;
                den += w;
            }
        }
        None => {
            for (&xi, &yi) in xs.iter().zip(ys) {
                let w = spec.weight(x, xi);
                num += w * yi;
                den += w;
            }
        }
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::ZeroMass { x })
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("evaluation grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|g| !g.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite grid point {bad}")));
    }
    Ok(())
}

/// Unconstrained Nadaraya–Watson fit on `grid`. The constraint set is ignored.
pub fn nw_fit(data: &Dataset, spec: &KernelSpec, grid: &[f64]) -> Result<FittedCurve> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&x| local_constant(spec, data.xs(), data.ys(), None, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedCurve::new(
        grid.to_vec(),
        values,
        Provenance::new(Estimator::Nw, *spec, None),
    ))
}

/// `G` equally spaced points covering `[lo, hi]` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    match size {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (size - 1) as f64;
            (0..size)
                .map(|i| {
                    if i == size - 1 {
                        hi
                    } else {
                        lo + step * i as f64
                    }
                })
                .collect()
        }
    }
}
