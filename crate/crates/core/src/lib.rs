//! Kernel regression that honours fixed waypoints.
//!
//! The adaptive Nadaraya–Watson estimator multiplies the kernel weight of each
//! constrained observation by `λ ≥ 1`, pulling the fit toward it while leaving
//! the rest of the curve a local average. Iterated data sharpening reduces the
//! bias of that average at the cost of some roughness. Planar trajectories are
//! handled by fitting both coordinates against normalized arc length.
//!
//! ```
//! use anw_core::{anw_fit, AnwConfig, Dataset, KernelSpec};
//!
//! let data = Dataset::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![1]).unwrap();
//! let cfg = AnwConfig::new(KernelSpec::gaussian(1.0).unwrap(), 1e6).unwrap();
//! let fit = anw_fit(&data, &cfg, &[1.0]).unwrap();
//! assert!((fit.values[0] - 1.0).abs() < 1e-5);
//! ```

pub mod constrained;
pub mod data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod sharpening;
pub mod sim;
pub mod trajectory;
pub mod tuning;

pub use constrained::{
    anw_fit, anw_waypoint_gap, naive_fit, AdaptiveSmoother, AnwConfig, NaiveConfig,
};
pub use data::{Dataset, Estimator, FittedCurve, Provenance};
pub use error::{Error, Result};
pub use experiment::{
    run_dataset, run_replicates, run_route, run_simulation, ExperimentConfig, MethodRow, RunOutput,
    RunRecord, TuningMode,
};
pub use io::{emit, ingest_csv, Ingested, OutputFormat, Schema};
pub use kernel::{kernel_weight, nw_fit, uniform_grid, KernelFamily, KernelSpec};
pub use metrics::{css, rmse, smoothness, waypoint_error, CssConfig, MetricsReport};
pub use sharpening::{dsanw_fit, ids2_step, sharpen, SharpenState};
pub use sim::{generate, generate_track, Scenario, SimConfig, WaypointMode};
pub use trajectory::{augment_waypoints, parameterize, rotate, unrotate, Point2, Track2D};
pub use tuning::{cv_error, tune, tune_joint, Folds, TuningOptions, TuningResult};
