use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::projection::RidgeProjection;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::{coordinate_descent, fit_elastic_net, support, DesignMatrix, SolverOptions};
use crate::linalg::{least_squares, select_columns};
use crate::shrinkage::{Penalty, PenaltyPair};

/// A fitted regression estimator split into dense and sparse parts.
///
/// Pure ridge and least squares fill only `beta_hat`; lasso, post-lasso and
/// the elastic net fill only `delta_hat`. Coefficients refer to the columns
/// of the design as stored (normalized when the design is).
#[derive(Clone, Debug)]
pub struct LavaRegressionFit {
    pub kind: EstimatorKind,
    pub penalties: PenaltyPair,
    pub beta_hat: DVector<f64>,
    pub delta_hat: DVector<f64>,
    pub theta_hat: DVector<f64>,
    /// Support of `delta_hat`.
    pub active_set: Vec<usize>,
    pub fitted: DVector<f64>,
    pub residual: DVector<f64>,
    /// `(1/n)‖Y - Xθ̂‖² + λ₂‖β̂‖² + λ₁‖δ̂‖₁` at the lava penalties; for the
    /// elastic net its own objective; for refits the mean squared residual.
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

impl LavaRegressionFit {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        kind: EstimatorKind,
        penalties: PenaltyPair,
        d: &DesignMatrix,
        y: &DVector<f64>,
        beta: DVector<f64>,
        delta: DVector<f64>,
        objective: Option<f64>,
        iterations: usize,
        kkt_residual: f64,
    ) -> Self {
        let theta = &beta + &delta;
        let fitted = d.x() * &theta;
        let residual = y - &fitted;
        let objective = objective.unwrap_or_else(|| residual.norm_squared() / d.n() as f64);
        Self {
            kind,
            penalties,
            active_set: support(&delta),
            beta_hat: beta,
            delta_hat: delta,
            theta_hat: theta,
            fitted,
            residual,
            objective,
            iterations,
            kkt_residual,
        }
    }

    pub fn rss(&self) -> f64 {
        self.residual.norm_squared()
    }

    /// Writes `index,beta_hat,delta_hat,theta_hat,in_active_set` on the
    /// original column scale of `d`.
    pub fn write_coefficients<W: Write>(&self, d: &DesignMatrix, out: W) -> Result<()> {
        let beta = d.to_original_scale(&self.beta_hat);
        let delta = d.to_original_scale(&self.delta_hat);
        let theta = d.to_original_scale(&self.theta_hat);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "beta_hat", "delta_hat", "theta_hat", "in_active_set"])?;
        for j in 0..theta.len() {
            w.write_record([
                j.to_string(),
                beta[j].to_string(),
                delta[j].to_string(),
                theta[j].to_string(),
                (self.delta_hat[j] != 0.0).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn lava_objective(
    d: &DesignMatrix,
    y: &DVector<f64>,
    beta: &DVector<f64>,
    delta: &DVector<f64>,
    p: PenaltyPair,
) -> f64 {
    let r = y - d.x() * (beta + delta);
    let mut obj = r.norm_squared() / d.n() as f64;
    if let Penalty::Finite(l2) = p.lambda2 {
        obj += l2 * beta.norm_squared();
    }
    if let Penalty::Finite(l1) = p.lambda1 {
        obj += l1 * delta.lp_norm(1);
    }
    obj
}

fn check_response(d: &DesignMatrix, y: &DVector<f64>) -> Result<()> {
    if y.len() != d.n() {
        return Err(LavaError::DimensionMismatch { expected: d.n(), found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LavaError::InvalidInput("response has non-finite entries".into()));
    }
    Ok(())
}

/// Lava through a prepared projection. `gram` may carry a cached
/// `X̃'X̃/n` for the projection's λ₂; it is built when absent.
///
/// The sparse part solves the profiled lasso on `(K^{1/2}Y, K^{1/2}X)`; the
/// dense part is the ridge fit of `Y - Xδ̂`.
pub fn fit_lava_with(
    d: &DesignMatrix,
    y: &DVector<f64>,
    proj: &RidgeProjection,
    gram: Option<&Arc<DMatrix<f64>>>,
    lambda1: Penalty,
    opts: &SolverOptions,
) -> Result<LavaRegressionFit> {
    check_response(d, y)?;
    let penalties = PenaltyPair::new(lambda1, proj.lambda2())?;
    let (delta, iterations, kkt) = match lambda1 {
        Penalty::Infinite => (DVector::zeros(d.p()), 0, 0.0),
        Penalty::Finite(l1) => {
            let gram = match gram {
                Some(g) => Arc::clone(g),
                None => Arc::new(proj.profiled_gram()),
            };
            let problem = proj.profiled_problem(gram, y);
            let out = coordinate_descent(&problem, l1, 0.0, opts)?;
            if !out.converged {
                return Err(LavaError::NotConverged { iterations: out.iterations, kkt_residual: out.kkt_residual });
            }
            (out.delta, out.iterations, out.kkt_residual)
        }
    };
    let beta = proj.dense_part(&(y - d.x() * &delta));
    let obj = lava_objective(d, y, &beta, &delta, penalties);
    Ok(LavaRegressionFit::assemble(EstimatorKind::Lava, penalties, d, y, beta, delta, Some(obj), iterations, kkt))
}

/// Lava at `(λ₁, λ₂)`; either level may be `+∞` (lasso and ridge limits).
pub fn fit_lava_regression(
    d: &DesignMatrix,
    y: &DVector<f64>,
    p: PenaltyPair,
    opts: &SolverOptions,
) -> Result<LavaRegressionFit> {
    let proj = RidgeProjection::new(d, p.lambda2)?;
    fit_lava_with(d, y, &proj, None, p.lambda1, opts)
}

/// Refits the sparse part by least squares on the selected columns,
/// holding the dense part fixed: `δ̃_Ĵ = X_Ĵ⁺(Y - Xβ̂)`.
pub fn fit_post_lava_regression(
    fit: &LavaRegressionFit,
    d: &DesignMatrix,
    y: &DVector<f64>,
) -> Result<LavaRegressionFit> {
    check_response(d, y)?;
    let kind = match fit.kind {
        EstimatorKind::Lava => EstimatorKind::PostLava,
        EstimatorKind::Lasso => EstimatorKind::PostLasso,
        other => return Err(LavaError::InvalidInput(format!("cannot refit a {other} fit"))),
    };
    let mut delta = DVector::zeros(d.p());
    if !fit.active_set.is_empty() {
        let xj = select_columns(d.x(), &fit.active_set);
        let target = y - d.x() * &fit.beta_hat;
        let coef = least_squares(&xj, &target)?;
        for (k, &j) in fit.active_set.iter().enumerate() {
            delta[j] = coef[k];
        }
    }
    let mut out = LavaRegressionFit::assemble(
        kind,
        fit.penalties,
        d,
        y,
        fit.beta_hat.clone(),
        delta,
        None,
        fit.iterations,
        fit.kkt_residual,
    );
    // Keep the selection even where the refit lands on an exact zero.
    out.active_set = fit.active_set.clone();
    Ok(out)
}

/// Any of the seven estimators at the given penalties. Lasso and post-lasso
/// read `lambda1`, ridge reads `lambda2`, least squares ignores both.
pub fn fit_estimator(
    kind: EstimatorKind,
    d: &DesignMatrix,
    y: &DVector<f64>,
    p: PenaltyPair,
    opts: &SolverOptions,
) -> Result<LavaRegressionFit> {
    let need = |pen: Penalty, what: &str| -> Result<Penalty> {
        if pen.is_infinite() {
            Err(LavaError::InvalidPenalty(format!("{kind} needs a finite {what}")))
        } else {
            Ok(pen)
        }
    };
    match kind {
        EstimatorKind::Lava => fit_lava_regression(d, y, p, opts),
        EstimatorKind::PostLava => {
            let lava = fit_lava_regression(d, y, p, opts)?;
            fit_post_lava_regression(&lava, d, y)
        }
        EstimatorKind::Lasso | EstimatorKind::PostLasso => {
            let l1 = need(p.lambda1, "lambda1")?;
            let mut fit = fit_lava_regression(d, y, PenaltyPair::new(l1, Penalty::Infinite)?, opts)?;
            fit.kind = EstimatorKind::Lasso;
            if kind == EstimatorKind::PostLasso {
                fit = fit_post_lava_regression(&fit, d, y)?;
            }
            Ok(fit)
        }
        EstimatorKind::Ridge => {
            let l2 = need(p.lambda2, "lambda2")?;
            let mut fit = fit_lava_regression(d, y, PenaltyPair::new(Penalty::Infinite, l2)?, opts)?;
            fit.kind = EstimatorKind::Ridge;
            Ok(fit)
        }
        EstimatorKind::ElasticNet => {
            check_response(d, y)?;
            let enet = fit_elastic_net(d, y, p, opts)?;
            if !enet.converged {
                return Err(LavaError::NotConverged { iterations: enet.iterations, kkt_residual: enet.kkt_residual });
            }
            Ok(LavaRegressionFit::assemble(
                kind,
                p,
                d,
                y,
                DVector::zeros(d.p()),
                enet.delta,
                Some(enet.objective),
                enet.iterations,
                enet.kkt_residual,
            ))
        }
        EstimatorKind::Ml => {
            let pair = PenaltyPair::new(Penalty::Infinite, Penalty::Finite(0.0))?;
            let mut fit = fit_lava_regression(d, y, pair, opts)?;
            fit.kind = EstimatorKind::Ml;
            Ok(fit)
        }
    }
}
