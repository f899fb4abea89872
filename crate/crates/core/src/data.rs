//! Shared value types: observations with a constraint set, and fitted curves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Paired covariate/response samples. Indices in the constraint set are
/// deterministic fixed waypoints; the remaining indices are noisy observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset", into = "RawDataset")]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    constraints: Vec<usize>,
    is_constraint: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawDataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    constraints: Vec<usize>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        Dataset::new(raw.xs, raw.ys, raw.constraints)
    }
}

impl From<Dataset> for RawDataset {
    fn from(d: Dataset) -> Self {
        RawDataset {
            xs: d.xs,
            ys: d.ys,
            constraints: d.constraints,
        }
    }
}

impl Dataset {
    /// Builds a dataset, sorting and de-duplicating the constraint indices.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, mut constraints: Vec<usize>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let n = xs.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no observations".into()));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at position {}",
                i % n
            )));
        }
        constraints.sort_unstable();
        constraints.dedup();
        if let Some(&bad) = constraints.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidDataset(format!(
                "constraint index {bad} out of range for n = {n}"
            )));
        }
        if constraints.len() >= n {
            return Err(Error::InvalidDataset(format!(
                "constraint set has {} of {n} points; at least one stochastic point is required",
                constraints.len()
            )));
        }
        let mut is_constraint = vec![false; n];
        for &j in &constraints {
            is_constraint[j] = true;
        }
        Ok(Self {
            xs,
            ys,
            constraints,
            is_constraint,
        })
    }

    pub fn unconstrained(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(xs, ys, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Sorted constraint indices.
    pub fn constraints(&self) -> &[usize] {
        &self.constraints
    }

    pub fn is_constraint(&self, i: usize) -> bool {
        self.is_constraint.get(i).copied().unwrap_or(false)
    }

    /// Indices of the stochastic (non-constrained) observations, ascending.
    pub fn stochastic_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.is_constraint[i])
            .collect()
    }

    /// Same design and constraint set with a different response vector.
    pub fn with_responses(&self, ys: Vec<f64>) -> Result<Self> {
        if ys.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: ys.len(),
            });
        }
        if ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite response".into()));
        }
        Ok(Self {
            xs: self.xs.clone(),
            ys,
            constraints: self.constraints.clone(),
            is_constraint: self.is_constraint.clone(),
        })
    }

    /// Sub-dataset made of `indices` (in that order), carrying over constraint flags.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let xs = indices.iter().map(|&i| self.xs[i]).collect();
        let ys = indices.iter().map(|&i| self.ys[i]).collect();
        let constraints = indices
            .iter()
            .enumerate()
            .filter(|(_, &i)| self.is_constraint[i])
            .map(|(k, _)| k)
            .collect();
        Self::new(xs, ys, constraints)
    }

    /// `(min, max)` of the covariate.
    pub fn x_range(&self) -> (f64, f64) {
        self.xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }
}

/// Which estimator produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "iterations", rename_all = "lowercase")]
pub enum Estimator {
    Nw,
    Naive,
    Anw,
    /// DS–ANW with the given number of sharpening steps.
    DsAnw(usize),
}

impl Estimator {
    /// Label used in metrics tables.
    pub fn label(&self) -> String {
        match self {
            Estimator::Nw => "NW".into(),
            Estimator::Naive => "Naive".into(),
            Estimator::Anw => "ANW".into(),
            Estimator::DsAnw(m) => format!("DS-ANW (M={m})"),
        }
    }

    /// File-name friendly identifier, e.g. `dsanw_m2`.
    pub fn slug(&self) -> String {
        match self {
            Estimator::Nw => "nw".into(),
            Estimator::Naive => "naive".into(),
            Estimator::Anw => "anw".into(),
            Estimator::DsAnw(m) => format!("dsanw_m{m}"),
        }
    }

    pub fn sharpening_steps(&self) -> usize {
        match self {
            Estimator::DsAnw(m) => *m,
            _ => 0,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    /// Accepts `nw`, `naive`, `anw`, `dsanw` (M = 1) and `dsanw:M` / `dsanw_mM`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace(['-', ' '], "");
        let bad = || Error::InvalidConfig(format!("unknown method `{s}`"));
        match lower.as_str() {
            "nw" => return Ok(Estimator::Nw),
            "naive" => return Ok(Estimator::Naive),
            "anw" => return Ok(Estimator::Anw),
            "dsanw" => return Ok(Estimator::DsAnw(1)),
            _ => {}
        }
        let rest = lower.strip_prefix("dsanw").ok_or_else(bad)?;
        let digits = rest
            .trim_start_matches([':', '_', 'm', '(', '='])
            .trim_end_matches(')');
        let digits = digits.trim_start_matches("m=");
        digits.parse().map(Estimator::DsAnw).map_err(|_| bad())
    }
}

/// How a curve was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub estimator: Estimator,
    pub kernel: KernelSpec,
    /// Waypoint weight, when the estimator uses one.
    pub lambda: Option<f64>,
    /// Sharpening iterations actually run.
    pub iterations: usize,
}

impl Provenance {
    pub fn new(estimator: Estimator, kernel: KernelSpec, lambda: Option<f64>) -> Self {
        Self {
            estimator,
            kernel,
            lambda,
            iterations: estimator.sharpening_steps(),
        }
    }
}

/// Evaluation grid with fitted values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl FittedCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid,
            values,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}
