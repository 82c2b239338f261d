//! Penalised least squares: lasso and elastic net by coordinate descent,
//! ridge in closed form through the SVD.

mod design;
mod solver;

pub use design::{normalize_design, DesignMatrix};
pub use solver::{coordinate_descent, kkt_from_gradient, QuadraticProblem, SolverOptions, SolverOutput};

use nalgebra::{DMatrix, DVector};

use crate::error::{LavaError, Result};
use crate::linalg::ThinSvd;
use crate::shrinkage::PenaltyPair;

#[derive(Clone, Debug)]
pub struct LassoFit {
    pub delta: DVector<f64>,
    /// Indices with `δ_j ≠ 0`, increasing.
    pub active_set: Vec<usize>,
    /// `(1/n)‖y - Xδ‖² + λ₁‖δ‖₁ (+ λ₂‖δ‖²)` recomputed from the residual.
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each sweep, when requested.
    pub trace: Vec<f64>,
}

pub fn support(delta: &DVector<f64>) -> Vec<usize> {
    delta.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect()
}

fn check_y(d: &DesignMatrix, y: &DVector<f64>) -> Result<()> {
    if d.n() != y.len() {
        return Err(LavaError::DimensionMismatch { expected: d.n(), found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LavaError::InvalidInput("response has non-finite entries".into()));
    }
    Ok(())
}

/// Penalised objective evaluated directly from `X` and `y`.
pub fn penalized_objective(
    d: &DesignMatrix,
    y: &DVector<f64>,
    delta: &DVector<f64>,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let r = y - d.x() * delta;
    r.norm_squared() / d.n() as f64 + lambda1 * delta.lp_norm(1) + lambda2 * delta.norm_squared()
}

/// KKT residual of an elastic-net candidate, computed from `X` and `y`.
pub fn check_kkt_penalized(
    d: &DesignMatrix,
    y: &DVector<f64>,
    delta: &DVector<f64>,
    lambda1: f64,
    lambda2: f64,
) -> f64 {
    let n = d.n() as f64;
    let grad = d.x().tr_mul(&(d.x() * delta - y)) * (2.0 / n) + delta * (2.0 * lambda2);
    kkt_from_gradient(&grad, delta, lambda1)
}

/// KKT residual of a lasso fit at level `λ₁`.
pub fn check_kkt(d: &DesignMatrix, y: &DVector<f64>, fit: &LassoFit, lambda1: f64) -> f64 {
    check_kkt_penalized(d, y, &fit.delta, lambda1, 0.0)
}

/// Solves a prepared quadratic problem and reports the fit against `(X, y)`.
pub fn fit_quadratic(
    d: &DesignMatrix,
    y: &DVector<f64>,
    problem: &QuadraticProblem,
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    let out = coordinate_descent(problem, lambda1, lambda2, opts)?;
    Ok(LassoFit {
        active_set: support(&out.delta),
        objective: penalized_objective(d, y, &out.delta, lambda1, lambda2),
        kkt_residual: check_kkt_penalized(d, y, &out.delta, lambda1, lambda2),
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        delta: out.delta,
    })
}

/// Minimises `(1/n)‖y - Xδ‖² + λ₁‖δ‖₁`. Hitting the sweep cap is reported
/// through `converged`, not as an error.
pub fn fit_lasso(d: &DesignMatrix, y: &DVector<f64>, lambda1: f64, opts: &SolverOptions) -> Result<LassoFit> {
    check_y(d, y)?;
    let problem = QuadraticProblem::least_squares(d.x(), y)?;
    fit_quadratic(d, y, &problem, lambda1, 0.0, opts)
}

/// Minimises `(1/n)‖y - Xθ‖² + λ₂‖θ‖² + λ₁‖θ‖₁`.
pub fn fit_elastic_net(d: &DesignMatrix, y: &DVector<f64>, p: PenaltyPair, opts: &SolverOptions) -> Result<LassoFit> {
    check_y(d, y)?;
    let (l1, l2) =
        p.both_finite().ok_or_else(|| LavaError::InvalidPenalty("elastic net needs finite penalties".into()))?;
    let problem = QuadraticProblem::least_squares(d.x(), y)?;
    fit_quadratic(d, y, &problem, l1, l2, opts)
}

/// `(X'X + nλ₂I)⁻¹X'y` from a precomputed SVD of `X`.
pub fn ridge_from_svd(svd: &ThinSvd, y: &DVector<f64>, lambda2: f64) -> Result<DVector<f64>> {
    let n = svd.u.nrows() as f64;
    let p = svd.v.nrows();
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(LavaError::InvalidPenalty(format!("ridge penalty must be finite and >= 0, got {lambda2}")));
    }
    if lambda2 == 0.0 && svd.rank() < p {
        return Err(LavaError::RankDeficient);
    }
    let mut w = svd.u.tr_mul(y);
    for i in 0..w.len() {
        let di = svd.d[i];
        w[i] *= if di == 0.0 { 0.0 } else { di / (di * di + n * lambda2) };
    }
    Ok(&svd.v * w)
}

pub fn fit_ridge(d: &DesignMatrix, y: &DVector<f64>, lambda2: f64) -> Result<DVector<f64>> {
    check_y(d, y)?;
    ridge_from_svd(&ThinSvd::new(d.x())?, y, lambda2)
}

/// Smallest λ₁ at which the lasso solution is zero: `‖(2/n)X'y‖_∞`.
pub fn lambda1_max(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let n = x.nrows() as f64;
    crate::linalg::max_abs(&(x.tr_mul(y) * (2.0 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_problem(n: usize, p: usize, seed: u64) -> (DesignMatrix, DVector<f64>) {
        let mut r = rng::stream(seed, 0);
        let x = DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
        (normalize_design(&x).unwrap(), y)
    }

    #[test]
    fn zero_response_gives_zero() {
        let (d, _) = random_problem(8, 3, 1);
        let fit = fit_lasso(&d, &DVector::zeros(8), 0.1, &SolverOptions::default()).unwrap();
        assert_eq!(fit.delta, DVector::zeros(3));
        assert_eq!(fit.objective, 0.0);
        assert!(fit.converged);
    }

    #[test]
    fn large_penalty_gives_zero() {
        let (d, y) = random_problem(12, 5, 2);
        let lmax = lambda1_max(d.x(), &y);
        let fit = fit_lasso(&d, &y, lmax, &SolverOptions::default()).unwrap();
        assert!(fit.active_set.is_empty());
        assert!(check_kkt(&d, &y, &fit, lmax) < 1e-12);
    }

    #[test]
    fn objective_and_kkt_consistent() {
        let (d, y) = random_problem(30, 10, 3);
        let fit = fit_lasso(&d, &y, 0.05, &SolverOptions::default()).unwrap();
        assert!(fit.converged && fit.kkt_residual < 1e-8);
        let again = penalized_objective(&d, &y, &fit.delta, 0.05, 0.0);
        assert!((fit.objective - again).abs() < 1e-10);
    }

    #[test]
    fn perturbation_breaks_kkt() {
        let (d, y) = random_problem(30, 6, 4);
        let mut fit = fit_lasso(&d, &y, 0.1, &SolverOptions::default()).unwrap();
        fit.delta[0] += 0.1;
        assert!(check_kkt(&d, &y, &fit, 0.1) > 1e-3);
    }

    #[test]
    fn elastic_net_zero_ridge_is_lasso() {
        let (d, y) = random_problem(20, 6, 5);
        let a = fit_lasso(&d, &y, 0.07, &SolverOptions::default()).unwrap();
        let b = fit_elastic_net(&d, &y, PenaltyPair::from_f64(0.07, 0.0).unwrap(), &SolverOptions::default()).unwrap();
        assert!((a.delta - b.delta).amax() < 1e-9);
        assert!(fit_elastic_net(&d, &y, PenaltyPair::lasso(0.1).unwrap(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let (d, y) = random_problem(15, 4, 6);
        let b = fit_ridge(&d, &y, 0.3).unwrap();
        let lhs = (d.x().tr_mul(d.x()) + DMatrix::identity(4, 4) * (15.0 * 0.3)) * &b;
        assert!((lhs - d.x().tr_mul(&y)).amax() < 1e-10);
        assert_eq!(fit_ridge(&d, &DVector::zeros(15), 0.3).unwrap(), DVector::zeros(4));
        assert!(fit_ridge(&d, &y, 1e12).unwrap().amax() < 1e-10);
    }

    #[test]
    fn ridge_zero_penalty_needs_full_rank() {
        let (d, y) = random_problem(3, 5, 7);
        assert!(matches!(fit_ridge(&d, &y, 0.0), Err(LavaError::RankDeficient)));
        let (d, y) = random_problem(10, 3, 7);
        assert!(fit_ridge(&d, &y, 0.0).is_ok());
    }

    #[test]
    fn warm_start_same_solution() {
        let (d, y) = random_problem(40, 8, 8);
        let cold = fit_lasso(&d, &y, 0.02, &SolverOptions::default()).unwrap();
        let seed = fit_lasso(&d, &y, 0.2, &SolverOptions::default()).unwrap();
        let warm = fit_lasso(&d, &y, 0.02, &SolverOptions::default().with_warm_start(seed.delta)).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-9);
    }
}
