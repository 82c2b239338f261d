use std::sync::Arc;

use nalgebra::DVector;

use super::grid::{surface_argmin, PenaltyGrid, TuneMethod};
use super::path::sweep_grid;
use super::TuneResult;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::{DesignMatrix, SolverOptions};
use crate::linalg::ThinSvd;
use crate::regression::fit_estimator;

/// Penalties minimising `(1/n)‖Xθ̂ - mean‖²` for a known mean response.
pub fn tune_oracle(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    mean: &DVector<f64>,
    grid: &PenaltyGrid,
    svd: &Arc<ThinSvd>,
    opts: &SolverOptions,
) -> Result<TuneResult> {
    if mean.len() != d.n() {
        return Err(LavaError::DimensionMismatch { expected: d.n(), found: mean.len() });
    }
    let n = d.n() as f64;
    let surface = sweep_grid(kind, d, y, grid, svd, opts, |_, fit| Ok((&fit.fitted - mean).norm_squared() / n))?;
    let (chosen, criterion) =
        surface_argmin(&surface).ok_or_else(|| LavaError::InvalidInput("every grid point failed".into()))?;
    let fit = fit_estimator(kind, d, y, chosen, opts)?;
    Ok(TuneResult::new(kind, TuneMethod::Oracle, chosen, criterion, surface, None, fit))
}
