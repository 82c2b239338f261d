//! Penalty selection by SURE or cross-validation over a grid, and a
//! preliminary noise-variance estimate.

mod cv;
mod grid;
mod noise;
mod oracle;
mod path;
mod sure;

pub use cv::{fold_assignment, tune_cv, tune_cv_family, tune_cv_with_folds};
pub use grid::{surface_argmin, write_surface_csv, PenaltyGrid, SurfacePoint, TuneMethod};
pub use noise::{estimate_noise_variance, NoiseEstimate, NoiseOptions};
pub use oracle::tune_oracle;
pub use sure::{tune_sure, tune_sure_family, tune_sure_with};

use crate::estimator::EstimatorKind;
use crate::regression::LavaRegressionFit;
use crate::shrinkage::PenaltyPair;

/// Outcome of a grid search.
#[derive(Clone, Debug)]
pub struct TuneResult {
    pub kind: EstimatorKind,
    pub method: TuneMethod,
    pub chosen: PenaltyPair,
    /// Criterion value at `chosen`, the minimum of `surface`.
    pub criterion: f64,
    pub surface: Vec<SurfacePoint>,
    /// Grid points whose fit or criterion failed.
    pub failures: usize,
    pub sigma_u2_used: Option<f64>,
    /// Refit on the full data at `chosen`.
    pub fit: LavaRegressionFit,
}

impl TuneResult {
    pub(crate) fn new(
        kind: EstimatorKind,
        method: TuneMethod,
        chosen: PenaltyPair,
        criterion: f64,
        surface: Vec<SurfacePoint>,
        sigma_u2_used: Option<f64>,
        fit: LavaRegressionFit,
    ) -> Self {
        let failures = surface.iter().filter(|p| p.criterion.is_none()).count();
        Self { kind, method, chosen, criterion, surface, failures, sigma_u2_used, fit }
    }
}
