//! Selection of `(h, λ)` by minimizing K-fold cross-validation error plus the
//! squared waypoint deviation, both on the standardized response scale.
//!
//! Constrained points are noiseless, so they are kept in every training fold
//! and never used for validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constrained::{AdaptiveSmoother, AnwConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::sharpening::sharpen;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_LAMBDA_GRID: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Responses shifted to zero mean and scaled to unit population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedView {
    pub y_star: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

impl StandardizedView {
    /// `mean + sd · y*`.
    pub fn restore(&self) -> Vec<f64> {
        self.y_star
            .iter()
            .map(|&z| self.mean + self.sd * z)
            .collect()
    }

    pub fn to_standard(&self, y: f64) -> f64 {
        (y - self.mean) / self.sd
    }
}

pub fn standardize(ys: &[f64]) -> Result<StandardizedView> {
    if ys.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: ys.len(),
        });
    }
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if !(sd > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateResponse);
    }
    Ok(StandardizedView {
        y_star: ys.iter().map(|y| (y - mean) / sd).collect(),
        mean,
        sd,
    })
}

/// Fold label for every observation; constrained indices carry `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    k: usize,
    assignment: Vec<Option<usize>>,
}

impl Folds {
    /// Uniform random permutation of the stochastic indices, dealt round-robin
    /// into `k` folds.
    pub fn random(data: &Dataset, k: usize, seed: u64) -> Result<Self> {
        let mut stochastic = data.stochastic_indices();
        Self::check_k(k, stochastic.len())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        stochastic.shuffle(&mut rng);
        let mut assignment = vec![None; data.len()];
        for (pos, &i) in stochastic.iter().enumerate() {
            assignment[i] = Some(pos % k);
        }
        Ok(Self { k, assignment })
    }

    /// Explicit fold labels, one per stochastic index in ascending index order.
    pub fn from_labels(data: &Dataset, k: usize, labels: &[usize]) -> Result<Self> {
        let stochastic = data.stochastic_indices();
        Self::check_k(k, stochastic.len())?;
        if labels.len() != stochastic.len() {
            return Err(Error::LengthMismatch {
                left: stochastic.len(),
                right: labels.len(),
            });
        }
        let mut assignment = vec![None; data.len()];
        let mut used = vec![false; k];
        for (&i, &f) in stochastic.iter().zip(labels) {
            if f >= k {
                return Err(Error::InvalidConfig(format!("fold label {f} >= k = {k}")));
            }
            used[f] = true;
            assignment[i] = Some(f);
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidConfig(
                "every fold needs at least one point".into(),
            ));
        }
        Ok(Self { k, assignment })
    }

    /// Leave-one-out over the stochastic indices.
    pub fn leave_one_out(data: &Dataset) -> Result<Self> {
        let m = data.stochastic_indices().len();
        Self::from_labels(data, m, &(0..m).collect::<Vec<_>>())
    }

    fn check_k(k: usize, stochastic: usize) -> Result<()> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 folds, got {k}"
            )));
        }
        if k > stochastic {
            return Err(Error::InvalidConfig(format!(
                "{k} folds but only {stochastic} stochastic points"
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }
}

/// Pooled mean squared error over held-out stochastic points on the
/// standardized scale. `steps > 0` cross-validates DS–ANW instead of ANW.
fn cv_standardized(data: &Dataset, cfg: &AnwConfig, steps: usize, folds: &Folds) -> Result<f64> {
    if folds.assignment.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: data.len(),
            right: folds.assignment.len(),
        });
    }
    let mut sse = 0.0;
    let mut count = 0usize;
    for fold in 0..folds.k {
        let (valid, train): (Vec<usize>, Vec<usize>) =
            (0..data.len()).partition(|&i| folds.assignment[i] == Some(fold));
        let train_data = data.subset(&train)?;
        let smoother = AdaptiveSmoother::new(&train_data, cfg);
        let ys = if steps == 0 {
            train_data.ys().to_vec()
        } else {
            sharpen(&train_data, cfg, steps)
                .map_err(|e| in_fold(e, fold))?
                .current_ys()
                .to_vec()
        };
        for &i in &valid {
            let pred = smoother
                .eval(&ys, data.xs()[i])
                .map_err(|e| in_fold(e, fold))?;
            sse += (pred - data.ys()[i]).powi(2);
            count += 1;
        }
    }
    Ok(sse / count as f64)
}

fn in_fold(e: Error, fold: usize) -> Error {
    match e {
        Error::ZeroMass { x } => Error::ZeroMassInFold { fold, x },
        other => other,
    }
}

fn standardized_dataset(data: &Dataset) -> Result<(Dataset, StandardizedView)> {
    let view = standardize(data.ys())?;
    Ok((data.with_responses(view.y_star.clone())?, view))
}

/// K-fold cross-validation error of ANW on the standardized scale.
pub fn cv_error(data: &Dataset, cfg: &AnwConfig, folds: &Folds) -> Result<f64> {
    let (std_data, _) = standardized_dataset(data)?;
    cv_standardized(&std_data, cfg, 0, folds)
}

/// Sum of squared standardized deviations between the full-data fit and the
/// prescribed values at the constrained points.
fn waypoint_penalty(data: &Dataset, cfg: &AnwConfig, steps: usize) -> Result<f64> {
    if data.constraints().is_empty() {
        return Ok(0.0);
    }
    let smoother = AdaptiveSmoother::new(data, cfg);
    let state = sharpen(data, cfg, steps)?;
    data.constraints().iter().try_fold(0.0, |acc, &j| {
        let fit = smoother.eval(state.current_ys(), data.xs()[j])?;
        Ok(acc + (fit - data.ys()[j]).powi(2))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningOptions {
    pub folds: usize,
    pub seed: u64,
    /// Weight on the waypoint penalty relative to the CV term.
    pub penalty_weight: f64,
    /// Sharpening steps of the estimator being tuned (0 tunes ANW).
    pub sharpening_steps: usize,
}

impl Default for TuningOptions {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            seed: 0,
            penalty_weight: 1.0,
            sharpening_steps: 0,
        }
    }
}

/// One `(h, λ)` candidate. Infeasible cells (zero kernel mass somewhere) have
/// non-finite components and `feasible = false`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCell {
    pub h: f64,
    pub lambda: f64,
    pub cv_error: f64,
    pub waypoint_penalty: f64,
    pub total: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub kernel: KernelFamily,
    pub best_h: f64,
    pub best_lambda: f64,
    pub options: TuningOptions,
    /// Row-major over `h_grid × lambda_grid`.
    pub surface: Vec<LossCell>,
}

impl TuningResult {
    pub fn best_cell(&self) -> &LossCell {
        self.surface
            .iter()
            .find(|c| c.h == self.best_h && c.lambda == self.best_lambda)
            .expect("best pair is always on the surface")
    }

    pub fn best_config(&self) -> Result<AnwConfig> {
        AnwConfig::new(KernelSpec::new(self.kernel, self.best_h)?, self.best_lambda)
    }

    pub fn infeasible_cells(&self) -> usize {
        self.surface.iter().filter(|c| !c.feasible).count()
    }
}

/// Ten log-spaced bandwidths from `range / n^(4/5)` to `range / 4`.
pub fn default_bandwidth_grid(data: &Dataset) -> Vec<f64> {
    let (lo, hi) = data.x_range();
    let range = hi - lo;
    let n = data.len() as f64;
    log_space(range / n.powf(0.8), range / 4.0, 10)
}

pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Grid search for one response.
pub fn tune(
    data: &Dataset,
    kernel: KernelFamily,
    h_grid: &[f64],
    lambda_grid: &[f64],
    options: &TuningOptions,
) -> Result<TuningResult> {
    tune_joint(
        std::slice::from_ref(data),
        kernel,
        h_grid,
        lambda_grid,
        options,
    )
}

/// Grid search for several responses sharing one `(h, λ)`, such as the two
/// coordinates of a track. The loss of a cell is the sum over responses; all
/// datasets get their own standardization and folds built from the same seed.
pub fn tune_joint(
    datasets: &[Dataset],
    kernel: KernelFamily,
    h_grid: &[f64],
    lambda_grid: &[f64],
    options: &TuningOptions,
) -> Result<TuningResult> {
    if datasets.is_empty() || h_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::InvalidConfig(
            "tuning needs data and nonempty grids".into(),
        ));
    }
    if !(options.penalty_weight.is_finite() && options.penalty_weight >= 0.0) {
        return Err(Error::InvalidConfig("penalty weight must be >= 0".into()));
    }
    let prepared = datasets
        .iter()
        .map(|d| {
            let (std_data, _) = standardized_dataset(d)?;
            let folds = Folds::random(d, options.folds, options.seed)?;
            Ok((std_data, folds))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::with_capacity(h_grid.len() * lambda_grid.len());
    for &h in h_grid {
        for &lambda in lambda_grid {
            candidates.push(AnwConfig::new(KernelSpec::new(kernel, h)?, lambda)?);
        }
    }

    let surface = candidates
        .par_iter()
        .map(|cfg| evaluate_cell(&prepared, cfg, options))
        .collect::<Result<Vec<_>>>()?;

    let best = surface
        .iter()
        .filter(|c| c.feasible)
        .min_by(|a, b| {
            a.total
                .total_cmp(&b.total)
                .then(a.lambda.total_cmp(&b.lambda))
                .then(a.h.total_cmp(&b.h))
        })
        .ok_or(Error::NoFeasibleCell)?;
    Ok(TuningResult {
        kernel,
        best_h: best.h,
        best_lambda: best.lambda,
        options: *options,
        surface,
    })
}

fn evaluate_cell(
    prepared: &[(Dataset, Folds)],
    cfg: &AnwConfig,
    options: &TuningOptions,
) -> Result<LossCell> {
    let mut cv = 0.0;
    let mut penalty = 0.0;
    for (data, folds) in prepared {
        let outcome = cv_standardized(data, cfg, options.sharpening_steps, folds)
            .and_then(|c| Ok((c, waypoint_penalty(data, cfg, options.sharpening_steps)?)));
        match outcome {
            Ok((c, p)) => {
                cv += c;
                penalty += p;
            }
            Err(Error::ZeroMass { .. } | Error::ZeroMassInFold { .. }) => {
                return Ok(LossCell {
                    h: cfg.spec.bandwidth,
                    lambda: cfg.lambda,
                    cv_error: f64::INFINITY,
                    waypoint_penalty: f64::INFINITY,
                    total: f64::INFINITY,
                    feasible: false,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LossCell {
        h: cfg.spec.bandwidth,
        lambda: cfg.lambda,
        cv_error: cv,
        waypoint_penalty: penalty,
        total: cv + options.penalty_weight * penalty,
        feasible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standardize_two_points() {
        let v = standardize(&[0.0, 2.0]).unwrap();
        assert_eq!(v.y_star, vec![-1.0, 1.0]);
        assert_eq!(v.mean, 1.0);
        assert_eq!(v.sd, 1.0);
    }

    #[test]
    fn standardize_constant_is_degenerate() {
        assert!(matches!(
            standardize(&[5.0, 5.0, 5.0]),
            Err(Error::DegenerateResponse)
        ));
        assert!(matches!(
            standardize(&[0.1, 0.1, 0.1]),
            Err(Error::DegenerateResponse)
        ));
        assert!(matches!(
            standardize(&[1.0]),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn standardize_four_points() {
        let v = standardize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(v.mean, 2.5);
        assert_abs_diff_eq!(v.sd, 1.25f64.sqrt(), epsilon = 1e-15);
        let mean: f64 = v.y_star.iter().sum::<f64>() / 4.0;
        let var: f64 = v.y_star.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / 4.0;
        assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(var, 1.0, epsilon = 1e-10);
        for (a, b) in v.restore().iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_folds_skip_constraints() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let data = Dataset::new(xs.clone(), xs, vec![3, 7]).unwrap();
        let folds = Folds::random(&data, 3, 42).unwrap();
        assert_eq!(folds.assignment()[3], None);
        assert_eq!(folds.assignment()[7], None);
        let mut sizes = [0; 3];
        for f in folds.assignment().iter().flatten() {
            sizes[*f] += 1;
        }
        assert_eq!(sizes, [4, 3, 3]);
        assert_eq!(folds, Folds::random(&data, 3, 42).unwrap());
    }

    #[test]
    fn fold_validation() {
        let data = Dataset::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0], vec![1]).unwrap();
        assert!(Folds::random(&data, 1, 0).is_err());
        assert!(Folds::random(&data, 3, 0).is_err());
        assert!(Folds::from_labels(&data, 2, &[0, 0]).is_err());
        assert!(Folds::from_labels(&data, 2, &[0, 2]).is_err());
        assert!(Folds::from_labels(&data, 2, &[1, 0]).is_ok());
    }

    #[test]
    fn cv_reports_failing_fold() {
        let data =
            Dataset::unconstrained(vec![0.0, 0.1, 5.0, 5.1], vec![0.0, 1.0, 0.0, 2.0]).unwrap();
        let folds = Folds::from_labels(&data, 2, &[0, 0, 1, 1]).unwrap();
        let cfg = AnwConfig::unweighted(KernelSpec::epanechnikov(0.5).unwrap());
        assert!(matches!(
            cv_error(&data, &cfg, &folds),
            Err(Error::ZeroMassInFold { fold: 0, .. })
        ));
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.01, 1.0, 3);
        assert_abs_diff_eq!(g[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(g[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn default_grid_spans_range() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let data = Dataset::unconstrained(xs.clone(), xs).unwrap();
        let g = default_bandwidth_grid(&data);
        assert_eq!(g.len(), 10);
        assert_abs_diff_eq!(g[0], 100f64.powf(-0.8), epsilon = 1e-15);
        assert_abs_diff_eq!(g[9], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn infeasible_cells_are_recorded() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 0.3f64).sin()).collect();
        let data = Dataset::unconstrained(xs, ys).unwrap();
        let res = tune(
            &data,
            KernelFamily::Epanechnikov,
            &[0.2, 5.0],
            &[1.0],
            &TuningOptions::default(),
        )
        .unwrap();
        assert!(!res.surface[0].feasible);
        assert!(res.surface[0].total.is_infinite());
        assert_eq!(res.best_h, 5.0);
        assert_eq!(res.infeasible_cells(), 1);
    }
}
