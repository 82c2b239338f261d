use nalgebra::{DMatrix, DVector};

use super::fit::LavaRegressionFit;
use super::projection::RidgeProjection;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::DesignMatrix;
use crate::linalg::{select_columns, ThinSvd, FULL_RANK_RATIO};
use crate::shrinkage::Penalty;

/// Degrees-of-freedom estimate and the risk estimate built on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DfSure {
    pub df: f64,
    pub sure: f64,
}

/// `-σ² + RSS/n + 2σ² df/n`.
pub fn sure_from_df(rss: f64, n: usize, sigma_u2: f64, df: f64) -> f64 {
    let n = n as f64;
    -sigma_u2 + rss / n + 2.0 * sigma_u2 * df / n
}

fn check_sigma(sigma_u2: f64) -> Result<()> {
    if sigma_u2 > 0.0 && sigma_u2.is_finite() {
        Ok(())
    } else {
        Err(LavaError::InvalidInput(format!("noise variance must be positive, got {sigma_u2}")))
    }
}

/// `rank(X̃_Ĵ) + tr((I - Π_Ĵ) P)`, with `Π_Ĵ` the projection onto the
/// columns of `X̃ = K^{1/2}X` indexed by the active set.
pub fn df_lava_with(proj: &RidgeProjection, x_tilde: &DMatrix<f64>, active: &[usize]) -> Result<f64> {
    let trace_p = proj.trace_p();
    if active.is_empty() {
        return Ok(trace_p);
    }
    if let Some(captured) = captured_trace_full_rank(proj, active) {
        return Ok(active.len() as f64 + trace_p - captured);
    }
    let svd = ThinSvd::new(&select_columns(x_tilde, active))?;
    let rank = svd.rank();
    if rank == 0 {
        return Ok(trace_p);
    }
    // tr(Π P) = Σ over basis vectors q of Σ_k w_k (u_k'q)².
    let coords = proj.svd().u.tr_mul(&svd.range_basis());
    let w = proj.hat_weights();
    let mut captured = 0.0;
    for (k, row) in coords.row_iter().enumerate() {
        captured += w[k] * row.norm_squared();
    }
    Ok(rank as f64 + trace_p - captured)
}

/// `tr(Π_Ĵ P)` when `X̃_Ĵ` has full column rank, else `None`.
///
/// With `X̃_Ĵ = U E`, `E = diag(s d) V_Ĵ'` and `E = QR`, the trace is
/// `‖R⁻ᵀ B'‖²_F` for `B = diag(√w s d) V_Ĵ'`.
fn captured_trace_full_rank(proj: &RidgeProjection, active: &[usize]) -> Option<f64> {
    let svd = proj.svd();
    let r = svd.d.len();
    let k = active.len();
    if k > r {
        return None;
    }
    let w = proj.hat_weights();
    let sd: Vec<f64> = (0..r).map(|i| svd.d[i] * (1.0 - w[i]).max(0.0).sqrt()).collect();
    let e = DMatrix::from_fn(r, k, |i, j| sd[i] * svd.v[(active[j], i)]);
    let bt = DMatrix::from_fn(k, r, |j, i| w[i].sqrt() * sd[i] * svd.v[(active[j], i)]);
    let rf = e.qr().r();
    let diag = rf.diagonal().map(f64::abs);
    if !(diag.min() > FULL_RANK_RATIO * diag.max()) {
        return None;
    }
    let z = rf.transpose().solve_lower_triangular(&bt)?;
    Some(z.norm_squared())
}

/// `tr(X_Ĵ(X_Ĵ'X_Ĵ + nλ₂I)⁻¹X_Ĵ') = |Ĵ| - λ₂ tr(M⁻¹)` with
/// `M = X_Ĵ'X_Ĵ/n + λ₂I`, positive definite for `λ₂ > 0`.
pub fn df_elastic_net(x: &DMatrix<f64>, active: &[usize], lambda2: f64) -> Result<f64> {
    if active.is_empty() {
        return Ok(0.0);
    }
    let xs = select_columns(x, active);
    let gram = xs.tr_mul(&xs) / x.nrows() as f64;
    enet_trace(&gram, lambda2).map_or_else(|| enet_trace_svd(&xs, lambda2), Ok)
}

/// As [`df_elastic_net`] with `X'X/n` of the full design precomputed.
pub fn df_elastic_net_from_gram(gram: &DMatrix<f64>, x: &DMatrix<f64>, active: &[usize], lambda2: f64) -> Result<f64> {
    if active.is_empty() {
        return Ok(0.0);
    }
    let k = active.len();
    let sub = DMatrix::from_fn(k, k, |i, j| gram[(active[i], active[j])]);
    enet_trace(&sub, lambda2).map_or_else(|| enet_trace_svd(&select_columns(x, active), lambda2), Ok)
}

fn enet_trace(gram: &DMatrix<f64>, lambda2: f64) -> Option<f64> {
    if !(lambda2 > 0.0) {
        return None;
    }
    let k = gram.nrows();
    let m = gram + DMatrix::identity(k, k) * lambda2;
    let linv = m.cholesky()?.l().solve_lower_triangular(&DMatrix::identity(k, k))?;
    Some(k as f64 - lambda2 * linv.norm_squared())
}

fn enet_trace_svd(xs: &DMatrix<f64>, lambda2: f64) -> Result<f64> {
    let n = xs.nrows() as f64;
    let svd = ThinSvd::new(xs)?;
    Ok(svd.d.iter().filter(|s| **s > 0.0).map(|s| s * s / (s * s + n * lambda2)).sum())
}

/// Degrees of freedom and SURE of a lava fit, including its lasso and
/// ridge limits.
pub fn df_sure_lava(fit: &LavaRegressionFit, d: &DesignMatrix, y: &DVector<f64>, sigma_u2: f64) -> Result<DfSure> {
    check_sigma(sigma_u2)?;
    if y.len() != d.n() {
        return Err(LavaError::DimensionMismatch { expected: d.n(), found: y.len() });
    }
    let proj = RidgeProjection::new(d, fit.penalties.lambda2)?;
    let df = df_lava_with(&proj, &proj.x_tilde(), &fit.active_set)?;
    Ok(DfSure { df, sure: sure_from_df(fit.rss(), d.n(), sigma_u2, df) })
}

/// Standard degrees of freedom for the classical estimators: ridge
/// `tr(P)`, lasso `|Ĵ|`, elastic net the trace of the ridge hat matrix on
/// the active columns, least squares `rank(X)`.
pub fn df_sure_baseline(
    kind: EstimatorKind,
    fit: &LavaRegressionFit,
    d: &DesignMatrix,
    y: &DVector<f64>,
    sigma_u2: f64,
) -> Result<DfSure> {
    check_sigma(sigma_u2)?;
    if y.len() != d.n() {
        return Err(LavaError::DimensionMismatch { expected: d.n(), found: y.len() });
    }
    let df = match kind {
        EstimatorKind::Ridge => RidgeProjection::new(d, fit.penalties.lambda2)?.trace_p(),
        EstimatorKind::Lasso => fit.active_set.len() as f64,
        EstimatorKind::ElasticNet => {
            if fit.active_set.is_empty() {
                0.0
            } else {
                let l2 = match fit.penalties.lambda2 {
                    Penalty::Finite(v) => v,
                    Penalty::Infinite => {
                        return Err(LavaError::InvalidPenalty("elastic net needs a finite lambda2".into()))
                    }
                };
                df_elastic_net(d.x(), &fit.active_set, l2)?
            }
        }
        EstimatorKind::Ml => ThinSvd::new(d.x())?.rank() as f64,
        other => {
            return Err(LavaError::InvalidInput(format!("no baseline degrees of freedom for {other}")));
        }
    };
    Ok(DfSure { df, sure: sure_from_df(fit.rss(), d.n(), sigma_u2, df) })
}
