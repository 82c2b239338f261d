use std::cell::{OnceCell, RefCell};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::grid::{PenaltyGrid, SurfacePoint};
use crate::error::Result;
use crate::estimator::EstimatorKind;
use crate::lasso::{coordinate_descent, DesignMatrix, QuadraticProblem, SolverOptions};
use crate::linalg::ThinSvd;
use crate::regression::{fit_lava_with, fit_post_lava_regression, LavaRegressionFit, RidgeProjection};
use crate::shrinkage::{Penalty, PenaltyPair};
use crate::LavaError;

/// Shared state for all grid points with the same ridge level.
pub(crate) struct Column<'a> {
    pub d: &'a DesignMatrix,
    pub proj: Option<RidgeProjection>,
    /// `X'X/n` of the design, for elastic-net columns.
    pub gram: Option<Arc<DMatrix<f64>>>,
    x_tilde: OnceCell<DMatrix<f64>>,
    /// Last active set scored and its degrees of freedom.
    df_memo: RefCell<Option<(Vec<usize>, f64)>>,
}

impl Column<'_> {
    /// `K^{1/2}X` for this column's ridge level, built on first use.
    pub fn x_tilde(&self) -> &DMatrix<f64> {
        self.x_tilde.get_or_init(|| self.proj.as_ref().expect("column has a projection").x_tilde())
    }

    /// `compute(active)`, reusing the previous value when consecutive
    /// grid points select the same set.
    pub fn memo_df(&self, active: &[usize], compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some((set, df)) = &*self.df_memo.borrow() {
            if set == active {
                return Ok(*df);
            }
        }
        let df = compute()?;
        *self.df_memo.borrow_mut() = Some((active.to_vec(), df));
        Ok(df)
    }
}

/// Fits `kind` at every grid point and scores each fit.
///
/// Columns (ridge levels) run in parallel; within a column λ₁ decreases
/// and each fit warm-starts from the previous one. Failed fits and failed
/// scores leave `criterion` empty. Points come back λ₁-major in increasing
/// order on both axes.
pub(crate) fn sweep_grid<F>(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    svd: &Arc<ThinSvd>,
    opts: &SolverOptions,
    score: F,
) -> Result<Vec<SurfacePoint>>
where
    F: Fn(&Column, &LavaRegressionFit) -> Result<f64> + Sync,
{
    let mut out = sweep_grid_family(&[kind], d, y, grid, svd, opts, score)?;
    Ok(out.pop().expect("one surface per kind"))
}

/// [`sweep_grid`] for several kinds sharing one path: lava with post-lava,
/// or lasso with post-lasso. Each path fit is computed once and refit for
/// the post kinds. Returns one surface per entry of `kinds`.
pub(crate) fn sweep_grid_family<F>(
    kinds: &[EstimatorKind],
    d: &DesignMatrix,
    y: &DVector<f64>,
    grid: &PenaltyGrid,
    svd: &Arc<ThinSvd>,
    opts: &SolverOptions,
    score: F,
) -> Result<Vec<Vec<SurfacePoint>>>
where
    F: Fn(&Column, &LavaRegressionFit) -> Result<f64> + Sync,
{
    let Some(&first) = kinds.first() else {
        return Ok(Vec::new());
    };
    let base = first.base();
    if kinds.iter().any(|&k| k.base() != base) {
        return Err(LavaError::InvalidInput(format!("{kinds:?} do not share one path")));
    }
    let (axis1, axis2) = grid.axes(first);
    let enet_problem =
        if base == EstimatorKind::ElasticNet { Some(QuadraticProblem::least_squares(d.x(), y)?) } else { None };

    // columns[j][m][i]: ridge level j, kind m, lasso level i.
    let columns: Vec<Result<Vec<Vec<Option<f64>>>>> = axis2
        .par_iter()
        .map(|&l2| -> Result<Vec<Vec<Option<f64>>>> {
            let column = Column {
                d,
                proj: match base {
                    EstimatorKind::ElasticNet => None,
                    _ => Some(RidgeProjection::from_svd(Arc::clone(svd), l2)?),
                },
                gram: enet_problem.as_ref().map(|p| Arc::clone(&p.a)),
                x_tilde: OnceCell::new(),
                df_memo: RefCell::new(None),
            };
            let gram = match (&column.proj, axis1.iter().any(|l| !l.is_infinite())) {
                (Some(p), true) => Some(Arc::new(p.profiled_gram())),
                _ => None,
            };
            let mut values = vec![vec![None; axis1.len()]; kinds.len()];
            let mut warm: Option<DVector<f64>> = None;
            for i in (0..axis1.len()).rev() {
                let l1 = axis1[i];
                let local = match &warm {
                    Some(w) => opts.with_warm_start(w.clone()),
                    None => opts.clone(),
                };
                let fit = match (&column.proj, &enet_problem) {
                    (Some(proj), _) => fit_lava_with(d, y, proj, gram.as_ref(), l1, &local).map(|mut f| {
                        f.kind = base;
                        warm = Some(f.delta_hat.clone());
                        f
                    }),
                    (None, Some(problem)) => enet_fit(d, y, problem, l1, l2, &local).inspect(|f| {
                        warm = Some(f.theta_hat.clone());
                    }),
                    (None, None) => unreachable!("elastic net always has a problem"),
                };
                let Ok(fit) = fit else { continue };
                for (m, &kind) in kinds.iter().enumerate() {
                    let scored = if kind == base {
                        score(&column, &fit)
                    } else {
                        fit_post_lava_regression(&fit, d, y).and_then(|post| score(&column, &post))
                    };
                    values[m][i] = scored.ok().filter(|v| v.is_finite());
                }
            }
            Ok(values)
        })
        .collect();

    let columns: Vec<Vec<Vec<Option<f64>>>> = columns.into_iter().collect::<Result<_>>()?;
    let surfaces = (0..kinds.len())
        .map(|m| {
            let mut out = Vec::with_capacity(axis1.len() * axis2.len());
            for (i, &l1) in axis1.iter().enumerate() {
                for (j, &l2) in axis2.iter().enumerate() {
                    out.push(SurfacePoint {
                        penalties: PenaltyPair { lambda1: l1, lambda2: l2 },
                        criterion: columns[j][m][i],
                    });
                }
            }
            out
        })
        .collect();
    Ok(surfaces)
}

fn enet_fit(
    d: &DesignMatrix,
    y: &DVector<f64>,
    problem: &QuadraticProblem,
    l1: Penalty,
    l2: Penalty,
    opts: &SolverOptions,
) -> Result<LavaRegressionFit> {
    let (Penalty::Finite(a), Penalty::Finite(b)) = (l1, l2) else {
        return Err(LavaError::InvalidPenalty("elastic net needs finite penalties".into()));
    };
    let out = coordinate_descent(problem, a, b, opts)?;
    if !out.converged {
        return Err(LavaError::NotConverged { iterations: out.iterations, kkt_residual: out.kkt_residual });
    }
    let obj = problem.objective(&out.delta, a, b);
    Ok(LavaRegressionFit::assemble(
        EstimatorKind::ElasticNet,
        PenaltyPair { lambda1: l1, lambda2: l2 },
        d,
        y,
        DVector::zeros(d.p()),
        out.delta,
        Some(obj),
        out.iterations,
        out.kkt_residual,
    ))
}
