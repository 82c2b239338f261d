use std::sync::Arc;

use nalgebra::DVector;

use super::grid::{surface_argmin, PenaltyGrid, TuneMethod};
use super::path::{sweep_grid, Column};
use super::TuneResult;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::{DesignMatrix, SolverOptions};
use crate::linalg::ThinSvd;
use crate::regression::{
    df_elastic_net, df_elastic_net_from_gram, df_lava_with, fit_estimator, sure_from_df, LavaRegressionFit,
};
use crate::shrinkage::Penalty;

/// Degrees of freedom of a path fit, using the column's cached operators.
fn path_df(kind: EstimatorKind, column: &Column, fit: &LavaRegressionFit) -> Result<f64> {
    let proj = || column.proj.as_ref().ok_or_else(|| LavaError::InvalidInput("missing projection".into()));
    match kind {
        EstimatorKind::Lava => {
            let proj = proj()?;
            column.memo_df(&fit.active_set, || df_lava_with(proj, column.x_tilde(), &fit.active_set))
        }
        EstimatorKind::Lasso => Ok(fit.active_set.len() as f64),
        EstimatorKind::Ridge => Ok(proj()?.trace_p()),
        EstimatorKind::Ml => Ok(proj()?.svd().rank() as f64),
        EstimatorKind::ElasticNet => {
            if fit.active_set.is_empty() {
                return Ok(0.0);
            }
            let Penalty::Finite(l2) = fit.penalties.lambda2 else {
                return Err(LavaError::InvalidPenalty("elastic net needs a finite lambda2".into()));
            };
            column.memo_df(&fit.active_set, || match &column.gram {
                Some(g) => df_elastic_net_from_gram(g, column.d.x(), &fit.active_set, l2),
                None => df_elastic_net(column.d.x(), &fit.active_set, l2),
            })
        }
        other => Err(LavaError::InvalidInput(format!("no SURE for {other}"))),
    }
}

/// SURE-minimising penalties over `grid` with the solver defaults.
pub fn tune_sure(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    sigma_u2: f64,
) -> Result<TuneResult> {
    let svd = Arc::new(ThinSvd::new(d.x())?);
    tune_sure_with(kind, d, y, grid, sigma_u2, &svd, &SolverOptions::default())
}

/// As [`tune_sure`], reusing a precomputed SVD of the design.
pub fn tune_sure_with(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    sigma_u2: f64,
    svd: &Arc<ThinSvd>,
    opts: &SolverOptions,
) -> Result<TuneResult> {
    let mut out = tune_sure_family(&[kind], d, y, grid, sigma_u2, svd, opts)?;
    Ok(out.pop().expect("one result per kind"))
}

/// [`tune_sure_with`] for kinds sharing one path (lava with post-lava,
/// lasso with post-lasso), fitting the path once.
///
/// Refit estimators have no unbiased risk estimate of their own: post-lava
/// and post-lasso take the penalties chosen for lava and lasso, and their
/// surface is that of the underlying estimator.
pub fn tune_sure_family(
    kinds: &[EstimatorKind],
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    sigma_u2: f64,
    svd: &Arc<ThinSvd>,
    opts: &SolverOptions,
) -> Result<Vec<TuneResult>> {
    if !(sigma_u2 > 0.0 && sigma_u2.is_finite()) {
        return Err(LavaError::InvalidInput(format!("noise variance must be positive, got {sigma_u2}")));
    }
    let Some(base) = kinds.first().map(|k| k.base()) else {
        return Ok(Vec::new());
    };
    if kinds.iter().any(|k| k.base() != base) {
        return Err(LavaError::InvalidInput(format!("{kinds:?} do not share one path")));
    }
    let n = d.n();
    let surface = sweep_grid(base, d, y, grid, svd, opts, |column, fit| {
        let df = path_df(base, column, fit)?;
        Ok(sure_from_df(fit.rss(), n, sigma_u2, df))
    })?;
    kinds
        .iter()
        .map(|&kind| {
            let surface = surface.clone();
            let (chosen, criterion) =
                surface_argmin(&surface).ok_or_else(|| LavaError::InvalidInput("every grid point failed".into()))?;
            let fit = fit_estimator(kind, d, y, chosen, opts)?;
            Ok(TuneResult::new(kind, TuneMethod::Sure, chosen, criterion, surface, Some(sigma_u2), fit))
        })
        .collect()
}
