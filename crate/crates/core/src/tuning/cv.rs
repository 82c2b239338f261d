use std::sync::Arc;

use nalgebra::DVector;
use rand::seq::SliceRandom;

use super::grid::{surface_argmin, PenaltyGrid, SurfacePoint, TuneMethod};
use super::path::sweep_grid_family;
use super::TuneResult;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::{normalize_design, DesignMatrix, SolverOptions};
use crate::linalg::ThinSvd;
use crate::regression::fit_estimator;
use crate::rng;

/// Fold label of each row: rows are shuffled with the fold stream of
/// `seed`, then cut into `folds` contiguous blocks of near-equal size.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || n < folds {
        return Err(LavaError::InvalidInput(format!("need 2 <= folds <= n, got folds={folds}, n={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, rng::FOLD_STREAM));
    let mut labels = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        labels[row] = pos * folds / n;
    }
    Ok(labels)
}

/// K-fold cross-validation with a seeded fold assignment.
pub fn tune_cv(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    folds: usize,
    seed: u64,
) -> Result<TuneResult> {
    let labels = fold_assignment(d.n(), folds, seed)?;
    tune_cv_with_folds(kind, d, y, grid, &labels, &SolverOptions::default())
}

/// Cross-validation with explicit fold labels.
///
/// Each training fold is renormalized from the raw design when `d` is
/// normalized. The criterion is the pooled held-out mean squared error;
/// the chosen penalties are refit on all rows.
pub fn tune_cv_with_folds(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    labels: &[usize],
    opts: &SolverOptions,
) -> Result<TuneResult> {
    let mut out = tune_cv_family(&[kind], d, y, grid, labels, opts)?;
    Ok(out.pop().expect("one result per kind"))
}

/// [`tune_cv_with_folds`] for kinds sharing one path (lava with post-lava,
/// lasso with post-lasso), fitting each fold's path once.
pub fn tune_cv_family(
    kinds: &[EstimatorKind],
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    labels: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<TuneResult>> {
    let n = d.n();
    if labels.len() != n || y.len() != n {
        return Err(LavaError::DimensionMismatch { expected: n, found: labels.len().min(y.len()) });
    }
    let folds = labels.iter().max().map_or(0, |m| m + 1);
    if folds < 2 || (0..folds).any(|f| !labels.contains(&f)) {
        return Err(LavaError::InvalidInput("fold labels must cover 0..K with K >= 2 and no empty fold".into()));
    }
    let mut totals: Option<Vec<Vec<SurfacePoint>>> = None;
    for f in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| labels[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| labels[i] == f).collect();
        let raw_train = d.raw_rows(&train);
        let fold_design =
            if d.is_normalized() { normalize_design(&raw_train)? } else { DesignMatrix::unnormalized(raw_train)? };
        let raw_test = d.raw_rows(&test);
        let y_train = DVector::from_fn(train.len(), |i, _| y[train[i]]);
        let y_test = DVector::from_fn(test.len(), |i, _| y[test[i]]);
        let svd = Arc::new(ThinSvd::new(fold_design.x())?);
        let fold_surfaces = sweep_grid_family(kinds, &fold_design, &y_train, grid, &svd, opts, |column, fit| {
            let coef = column.d.to_original_scale(&fit.theta_hat);
            Ok((&y_test - &raw_test * coef).norm_squared())
        })?;
        totals = Some(match totals {
            None => fold_surfaces,
            Some(acc) => acc.into_iter().zip(fold_surfaces).map(|(a, b)| add_surfaces(a, b)).collect(),
        });
    }
    let mut results = Vec::with_capacity(kinds.len());
    for (&kind, total) in kinds.iter().zip(totals.unwrap_or_default()) {
        let surface: Vec<SurfacePoint> =
            total.into_iter().map(|pt| SurfacePoint { criterion: pt.criterion.map(|v| v / n as f64), ..pt }).collect();
        let (chosen, criterion) =
            surface_argmin(&surface).ok_or_else(|| LavaError::InvalidInput("every grid point failed".into()))?;
        let fit = fit_estimator(kind, d, y, chosen, opts)?;
        results.push(TuneResult::new(kind, TuneMethod::Cv, chosen, criterion, surface, None, fit));
    }
    Ok(results)
}

fn add_surfaces(a: Vec<SurfacePoint>, b: Vec<SurfacePoint>) -> Vec<SurfacePoint> {
    a.into_iter()
        .zip(b)
        .map(|(a, b)| SurfacePoint {
            penalties: a.penalties,
            criterion: match (a.criterion, b.criterion) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
        })
        .collect()
}
