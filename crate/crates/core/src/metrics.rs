//! Evaluation metrics: global accuracy, waypoint adherence, curvature
//! roughness, and the composite score that combines them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and weights of the composite score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CssConfig {
    pub tau_c: f64,
    pub tau_g: f64,
    pub tau_s: f64,
    pub w_c: f64,
    pub w_g: f64,
    pub w_s: f64,
}

impl CssConfig {
    pub const DEFAULT_TAU_C: f64 = 0.10;
    pub const DEFAULT_TAU_G: f64 = 0.05;
    pub const DEFAULT_W_C: f64 = 0.5;
    pub const DEFAULT_W_G: f64 = 0.3;
    pub const DEFAULT_W_S: f64 = 0.2;

    /// Default tolerances and weights with the given smoothness tolerance.
    pub fn with_smoothness_tolerance(tau_s: f64) -> Self {
        Self {
            tau_c: Self::DEFAULT_TAU_C,
            tau_g: Self::DEFAULT_TAU_G,
            tau_s,
            w_c: Self::DEFAULT_W_C,
            w_g: Self::DEFAULT_W_G,
            w_s: Self::DEFAULT_W_S,
        }
    }

    /// Defaults with `τ_s` set to the median smoothness of the candidates being
    /// compared.
    pub fn from_candidates(smoothness: &[f64]) -> Result<Self> {
        let tau_s = median(smoothness).ok_or(Error::TooFewPoints { needed: 1, got: 0 })?;
        Ok(Self::with_smoothness_tolerance(tau_s))
    }

    pub fn validate(&self) -> Result<()> {
        let taus = [self.tau_c, self.tau_g, self.tau_s];
        let weights = [self.w_c, self.w_g, self.w_s];
        if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidConfig(
                "CSS tolerances must be positive".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(
                "CSS weights must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Median of finite values; `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub waypoint_error: f64,
    pub smoothness: f64,
    pub css: f64,
    pub css_config: CssConfig,
}

impl MetricsReport {
    pub fn new(rmse: f64, waypoint_error: f64, smoothness: f64, css_config: CssConfig) -> Self {
        Self {
            rmse,
            waypoint_error,
            smoothness,
            css: css(rmse, waypoint_error, smoothness, &css_config),
            css_config,
        }
    }

    /// Flat `(key, value)` record with the CSS settings echoed.
    pub fn to_record(&self) -> Vec<(&'static str, f64)> {
        let c = &self.css_config;
        vec![
            ("rmse", self.rmse),
            ("waypoint_error", self.waypoint_error),
            ("smoothness", self.smoothness),
            ("css", self.css),
            ("tau_c", c.tau_c),
            ("tau_g", c.tau_g),
            ("tau_s", c.tau_s),
            ("w_c", c.w_c),
            ("w_g", c.w_g),
            ("w_s", c.w_s),
        ]
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn root_mean_square<I: Iterator<Item = f64>>(diffs: I, n: usize) -> f64 {
    (diffs.map(|d| d * d).sum::<f64>() / n as f64).sqrt()
}

/// Root mean squared pointwise difference.
pub fn rmse(fitted: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(fitted, truth)?;
    if fitted.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    Ok(root_mean_square(
        fitted.iter().zip(truth).map(|(f, t)| f - t),
        fitted.len(),
    ))
}

/// RMS deviation of the fit from the prescribed values at the waypoints.
pub fn waypoint_error(fitted_at_waypoints: &[f64], waypoint_ys: &[f64]) -> Result<f64> {
    check_lengths(fitted_at_waypoints, waypoint_ys)?;
    if waypoint_ys.is_empty() {
        return Err(Error::EmptyConstraints);
    }
    Ok(root_mean_square(
        fitted_at_waypoints
            .iter()
            .zip(waypoint_ys)
            .map(|(f, t)| f - t),
        waypoint_ys.len(),
    ))
}

/// Trapezoid approximation of `∫ (m̂″)² dx` on a uniform grid.
///
/// Interior second derivatives are central differences. At each end the
/// one-sided three-point stencil is used, which on a uniform grid equals the
/// neighbouring central difference, so quadratics integrate exactly.
pub fn smoothness(grid: &[f64], values: &[f64]) -> Result<f64> {
    check_lengths(grid, values)?;
    let n = grid.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let step = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    let tol = 1e-6 * step;
    if grid.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(Error::NonUniformGrid);
    }
    let h2 = step * step;
    let interior: Vec<f64> = values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) / h2)
        .collect();
    let first = interior[0];
    let last = interior[interior.len() - 1];
    let sq = |d: f64| d * d;
    let ends = 0.5 * (sq(first) + sq(last));
    let middle: f64 = interior.iter().map(|&d| sq(d)).sum();
    Ok(step * (ends + middle))
}

/// `max(0, x − 1)`.
#[inline]
pub fn phi(x: f64) -> f64 {
    (x - 1.0).max(0.0)
}

pub fn css(rmse: f64, waypoint_error: f64, smoothness: f64, cfg: &CssConfig) -> f64 {
    cfg.w_c * phi(waypoint_error / cfg.tau_c)
        + cfg.w_g * phi(rmse / cfg.tau_g)
        + cfg.w_s * phi(smoothness / cfg.tau_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::uniform_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn phi_definition() {
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(2.0), 1.0);
    }

    #[test]
    fn rmse_examples() {
        let t = [0.3, -1.0, 2.0];
        assert_eq!(rmse(&t, &t).unwrap(), 0.0);
        let shifted: Vec<f64> = t.iter().map(|v| v + 0.1).collect();
        assert_abs_diff_eq!(rmse(&shifted, &t).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rmse(&[0.0, 1.0], &[1.0, 1.0]).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            rmse(&[0.0], &[0.0, 1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn waypoint_error_examples() {
        assert_eq!(waypoint_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            waypoint_error(&[1.3], &[1.0]).unwrap(),
            0.3,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            waypoint_error(&[0.3, 0.4], &[0.0, 0.0]).unwrap(),
            0.125f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            waypoint_error(&[0.3, 0.4], &[0.0, 0.0]).unwrap(),
            0.3536,
            epsilon = 1e-4
        );
        assert!(matches!(
            waypoint_error(&[], &[]),
            Err(Error::EmptyConstraints)
        ));
    }

    #[test]
    fn smoothness_of_affine_is_zero() {
        let g = uniform_grid(0.0, 2.0, 101);
        let lin: Vec<f64> = g.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!(smoothness(&g, &lin).unwrap() < 1e-20);
        assert_eq!(smoothness(&g, &vec![4.0; 101]).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_of_square() {
        let g = uniform_grid(0.0, 1.0, 1001);
        let sq: Vec<f64> = g.iter().map(|x| x * x).collect();
        let s = smoothness(&g, &sq).unwrap();
        assert!(((s - 4.0) / 4.0).abs() <= 1e-3, "got {s}");
    }

    #[test]
    fn smoothness_errors() {
        assert!(matches!(
            smoothness(&[0.0, 1.0], &[0.0, 1.0]),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            smoothness(&[0.0, 1.0, 3.0], &[0.0, 1.0, 2.0]),
            Err(Error::NonUniformGrid)
        ));
    }

    #[test]
    fn css_examples() {
        let cfg = CssConfig::with_smoothness_tolerance(2.0);
        assert_eq!(css(0.05, 0.1, 2.0, &cfg), 0.0);
        assert_eq!(css(0.01, 0.02, 0.5, &cfg), 0.0);
        assert_abs_diff_eq!(css(0.05, 0.2, 2.0, &cfg), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn css_config_from_median() {
        let cfg = CssConfig::from_candidates(&[3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!(cfg.tau_s, 2.5);
        assert_eq!(cfg.w_c, 0.5);
        assert_eq!(cfg.tau_g, 0.05);
        assert!(CssConfig::from_candidates(&[]).is_err());
        assert!(cfg.validate().is_ok());
        assert!(CssConfig::with_smoothness_tolerance(0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn report_record_echoes_config() {
        let r = MetricsReport::new(0.1, 0.2, 1.0, CssConfig::with_smoothness_tolerance(1.0));
        let rec = r.to_record();
        assert_eq!(rec.len(), 10);
        assert_eq!(rec[3], ("css", r.css));
        assert_eq!(rec[6], ("tau_s", 1.0));
    }
}
