//! Two-dimensional tracks: waypoint augmentation, arc-length parameterization,
//! coordinate-wise constrained fitting, and planar rotation.

use serde::{Deserialize, Serialize};

use crate::constrained::{AdaptiveSmoother, AnwConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::uniform_grid;
use crate::sharpening::{dsanw_fit, sharpen};

/// Waypoints closer than this to an existing point reuse that point.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Ordered track points plus external fixed locations it must pass through.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Track2D {
    pub points: Vec<Point2>,
    pub waypoints: Vec<Point2>,
}

impl Track2D {
    pub fn new(points: Vec<Point2>, waypoints: Vec<Point2>) -> Self {
        Self { points, waypoints }
    }
}

/// Track whose waypoints have been merged into the point list and flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedTrack {
    pub points: Vec<Point2>,
    /// Sorted indices into `points` that are fixed waypoints.
    pub constraints: Vec<usize>,
}

impl AugmentedTrack {
    /// View as a 1-D regression problem with `X = x`, `Y = y`.
    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::new(
            self.points.iter().map(|p| p.x).collect(),
            self.points.iter().map(|p| p.y).collect(),
            self.constraints.clone(),
        )
    }

    pub fn constrained_points(&self) -> Vec<Point2> {
        self.constraints.iter().map(|&j| self.points[j]).collect()
    }
}

/// Inserts each external waypoint between the consecutive pair whose detour
/// `d(p_k, w) + d(w, p_{k+1}) − d(p_k, p_{k+1})` is smallest and flags it.
/// A waypoint within [`SNAP_TOLERANCE`] of an existing point flags that point
/// instead. Original points keep their relative order.
pub fn augment_waypoints(track: &Track2D) -> AugmentedTrack {
    let mut points = track.points.clone();
    let mut flagged = vec![false; points.len()];
    for w in &track.waypoints {
        if let Some(i) = points.iter().position(|p| p.distance(w) <= SNAP_TOLERANCE) {
            flagged[i] = true;
            continue;
        }
        let at = match points.len() {
            0 => 0,
            1 => 1,
            _ => {
                let mut best = (f64::INFINITY, 1);
                for k in 0..points.len() - 1 {
                    let (a, b) = (&points[k], &points[k + 1]);
                    let detour = a.distance(w) + w.distance(b) - a.distance(b);
                    if detour < best.0 {
                        best = (detour, k + 1);
                    }
                }
                best.1
            }
        };
        points.insert(at, *w);
        flagged.insert(at, true);
    }
    let constraints = flagged
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i))
        .collect();
    AugmentedTrack {
        points,
        constraints,
    }
}

/// Coordinates as functions of normalized cumulative chord length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTrack {
    pub s: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub constraints: Vec<usize>,
}

impl ParamTrack {
    /// `(s, x(s))` as a regression dataset.
    pub fn x_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.s.clone(), self.xs.clone(), self.constraints.clone())
    }

    /// `(s, y(s))` as a regression dataset.
    pub fn y_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.s.clone(), self.ys.clone(), self.constraints.clone())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Augments the waypoints, then parameterizes by arc length.
pub fn parameterize(track: &Track2D) -> Result<ParamTrack> {
    parameterize_augmented(&augment_waypoints(track))
}

pub fn parameterize_augmented(track: &AugmentedTrack) -> Result<ParamTrack> {
    let pts = &track.points;
    if pts.len() < 2 {
        return Err(Error::DegenerateTrack);
    }
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += w[0].distance(&w[1]);
        cumulative.push(total);
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateTrack);
    }
    let last = cumulative.len() - 1;
    let s = cumulative
        .iter()
        .enumerate()
        .map(|(i, c)| if i == last { 1.0 } else { c / total })
        .collect();
    Ok(ParamTrack {
        s,
        xs: pts.iter().map(|p| p.x).collect(),
        ys: pts.iter().map(|p| p.y).collect(),
        constraints: track.constraints.clone(),
    })
}

/// Fitted coordinates over a uniform `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTrack {
    pub s: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl FittedTrack {
    pub fn points(&self) -> Vec<Point2> {
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(&x, &y)| Point2::new(x, y))
            .collect()
    }
}

/// DS–ANW with shared `(h, λ, M)` applied independently to `x(s)` and `y(s)`
/// over `grid_size` uniform points on `[0, 1]`.
pub fn fit_track(
    ptrack: &ParamTrack,
    cfg: &AnwConfig,
    steps: usize,
    grid_size: usize,
) -> Result<FittedTrack> {
    let grid = uniform_grid(0.0, 1.0, grid_size);
    let fx = dsanw_fit(&ptrack.x_dataset()?, cfg, steps, &grid)?;
    let fy = dsanw_fit(&ptrack.y_dataset()?, cfg, steps, &grid)?;
    Ok(FittedTrack {
        s: grid,
        xs: fx.values,
        ys: fy.values,
    })
}

/// Fitted position at the parameter values of the constrained points.
pub fn fitted_at_waypoints(
    ptrack: &ParamTrack,
    cfg: &AnwConfig,
    steps: usize,
) -> Result<Vec<Point2>> {
    let at: Vec<f64> = ptrack.constraints.iter().map(|&j| ptrack.s[j]).collect();
    let mut coords = Vec::with_capacity(2);
    for data in [ptrack.x_dataset()?, ptrack.y_dataset()?] {
        let state = sharpen(&data, cfg, steps)?;
        coords.push(AdaptiveSmoother::new(&data, cfg).eval_many(state.current_ys(), &at)?);
    }
    Ok(coords[0]
        .iter()
        .zip(&coords[1])
        .map(|(&x, &y)| Point2::new(x, y))
        .collect())
}

/// Euclidean distance between the fitted curve and each constrained point.
pub fn waypoint_gaps(ptrack: &ParamTrack, cfg: &AnwConfig, steps: usize) -> Result<Vec<f64>> {
    let fitted = fitted_at_waypoints(ptrack, cfg, steps)?;
    Ok(ptrack
        .constraints
        .iter()
        .zip(&fitted)
        .map(|(&j, f)| f.distance(&Point2::new(ptrack.xs[j], ptrack.ys[j])))
        .collect())
}

/// Counter-clockwise rotation by `theta` radians.
pub fn rotate(points: &[Point2], theta: f64) -> Vec<Point2> {
    let (sin, cos) = theta.sin_cos();
    points
        .iter()
        .map(|p| Point2::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos))
        .collect()
}

/// Inverse of [`rotate`].
pub fn unrotate(points: &[Point2], theta: f64) -> Vec<Point2> {
    rotate(points, -theta)
}

pub fn rotate_track(track: &Track2D, theta: f64) -> Track2D {
    Track2D::new(
        rotate(&track.points, theta),
        rotate(&track.waypoints, theta),
    )
}
