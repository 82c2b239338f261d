use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{LavaError, Result};
use crate::shrinkage::soft_threshold;

/// `δ'Aδ - 2b'δ + c`, the smooth part of every penalised least-squares
/// problem in the crate. For plain least squares `A = X'X/n`, `b = X'y/n`,
/// `c = y'y/n`; the profiled lava problem uses the ridge-projected versions.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    /// Shared so that many right-hand sides can reuse one Gram matrix.
    pub a: Arc<DMatrix<f64>>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticProblem {
    pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(LavaError::DimensionMismatch { expected: x.nrows(), found: y.len() });
        }
        let n = x.nrows() as f64;
        Ok(Self { a: Arc::new(x.tr_mul(x) / n), b: x.tr_mul(y) / n, c: y.norm_squared() / n })
    }

    pub fn p(&self) -> usize {
        self.b.len()
    }

    /// Smooth part plus `λ₁‖δ‖₁ + λ₂‖δ‖²`.
    pub fn objective(&self, delta: &DVector<f64>, lambda1: f64, lambda2: f64) -> f64 {
        let ad = &*self.a * delta;
        self.objective_given_product(delta, &ad, lambda1, lambda2)
    }

    fn objective_given_product(&self, delta: &DVector<f64>, ad: &DVector<f64>, l1: f64, l2: f64) -> f64 {
        delta.dot(ad) - 2.0 * self.b.dot(delta) + self.c + l1 * delta.lp_norm(1) + l2 * delta.norm_squared()
    }

    /// Largest subgradient violation of the optimality conditions.
    pub fn kkt_residual(&self, delta: &DVector<f64>, lambda1: f64, lambda2: f64) -> f64 {
        let grad = 2.0 * (&*self.a * delta - &self.b) + 2.0 * lambda2 * delta;
        kkt_from_gradient(&grad, delta, lambda1)
    }
}

/// Max over coordinates of `|g_j + λ₁ sign δ_j|` on the support and
/// `(|g_j| - λ₁)₊` off it, where `g` is the gradient of the smooth part.
pub fn kkt_from_gradient(grad: &DVector<f64>, delta: &DVector<f64>, lambda1: f64) -> f64 {
    grad.iter()
        .zip(delta.iter())
        .map(|(g, d)| if *d != 0.0 { (g + lambda1 * d.signum()).abs() } else { (g.abs() - lambda1).max(0.0) })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Cap on coordinate sweeps, counting full and active-set sweeps alike.
    pub max_iter: usize,
    pub warm_start: Option<DVector<f64>>,
    /// Keep the objective after every sweep.
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100_000, warm_start: None, record_trace: false }
    }
}

impl SolverOptions {
    pub fn with_warm_start(&self, start: DVector<f64>) -> Self {
        Self { warm_start: Some(start), ..self.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOutput {
    pub delta: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub trace: Vec<f64>,
}

/// Cyclic coordinate descent for `δ'Aδ - 2b'δ + c + λ₁‖δ‖₁ + λ₂‖δ‖²`.
///
/// Alternates full sweeps with sweeps over the current support. Stops when
/// a full sweep moves no coordinate by `tol` or more and the KKT residual is
/// below `tol`.
pub fn coordinate_descent(
    problem: &QuadraticProblem,
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
) -> Result<SolverOutput> {
    let p = problem.p();
    if problem.a.shape() != (p, p) {
        return Err(LavaError::DimensionMismatch { expected: p, found: problem.a.nrows() });
    }
    if !(lambda1 >= 0.0 && lambda1.is_finite() && lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(LavaError::InvalidPenalty(format!(
            "coordinate descent needs finite non-negative penalties, got ({lambda1}, {lambda2})"
        )));
    }
    let mut delta = match &opts.warm_start {
        Some(w) if w.len() == p => w.clone(),
        Some(w) => return Err(LavaError::DimensionMismatch { expected: p, found: w.len() }),
        None => DVector::zeros(p),
    };
    let mut ad = &*problem.a * &delta;
    let half = 0.5 * lambda1;
    let mut trace = Vec::new();
    let mut last_obj = problem.objective_given_product(&delta, &ad, lambda1, lambda2);
    let mut iterations = 0;
    let mut kkt = f64::INFINITY;

    let sweep = |delta: &mut DVector<f64>, ad: &mut DVector<f64>, support_only: bool| -> f64 {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let dj = delta[j];
            if support_only && dj == 0.0 {
                continue;
            }
            let ajj = problem.a[(j, j)];
            let curv = ajj + lambda2;
            let rho = problem.b[j] - (ad[j] - ajj * dj);
            let new = if curv > 0.0 { soft_threshold(rho, half) / curv } else { 0.0 };
            let diff = new - dj;
            if diff != 0.0 {
                debug_assert!({
                    let phi = |t: f64| curv * t * t - 2.0 * rho * t + lambda1 * t.abs();
                    phi(new) <= phi(dj) + 1e-12 * (1.0 + phi(dj).abs())
                });
                ad.axpy(diff, &problem.a.column(j), 1.0);
                delta[j] = new;
                max_change = max_change.max(diff.abs());
            }
        }
        max_change
    };

    let mut converged = false;
    while iterations < opts.max_iter {
        let change = sweep(&mut delta, &mut ad, false);
        iterations += 1;
        let obj = problem.objective_given_product(&delta, &ad, lambda1, lambda2);
        debug_assert!(obj <= last_obj + 1e-10 * (1.0 + last_obj.abs()), "objective rose {last_obj} -> {obj}");
        last_obj = obj;
        if opts.record_trace {
            trace.push(obj);
        }
        if change < opts.tol {
            // Refresh the running product to shed accumulated rounding.
            ad = &*problem.a * &delta;
            kkt = problem.kkt_residual(&delta, lambda1, lambda2);
            if kkt < opts.tol {
                converged = true;
                break;
            }
            continue;
        }
        let mut inner = 0usize;
        while iterations < opts.max_iter {
            if inner % POLISH_EVERY == 0 {
                for _ in 0..POLISH_REPEAT {
                    let Some((better, blocked)) = polish_on_support(problem, &delta, lambda1, lambda2) else { break };
                    let mut ab = ad.clone();
                    for j in 0..p {
                        let diff = better[j] - delta[j];
                        if diff != 0.0 {
                            ab.axpy(diff, &problem.a.column(j), 1.0);
                        }
                    }
                    let obj = problem.objective_given_product(&better, &ab, lambda1, lambda2);
                    if obj > last_obj {
                        break;
                    }
                    delta = better;
                    ad = ab;
                    last_obj = obj;
                    if !blocked {
                        break;
                    }
                }
            }
            inner += 1;
            let change = sweep(&mut delta, &mut ad, true);
            iterations += 1;
            let obj = problem.objective_given_product(&delta, &ad, lambda1, lambda2);
            debug_assert!(obj <= last_obj + 1e-10 * (1.0 + last_obj.abs()), "objective rose {last_obj} -> {obj}");
            last_obj = obj;
            if opts.record_trace {
                trace.push(obj);
            }
            if change < opts.tol {
                break;
            }
        }
    }
    if !converged {
        kkt = problem.kkt_residual(&delta, lambda1, lambda2);
    }
    Ok(SolverOutput { delta, iterations, converged, kkt_residual: kkt, trace })
}

/// Largest support on which [`polish_on_support`] is attempted.
const POLISH_MAX: usize = 400;

/// Active-set sweeps between polishing attempts.
const POLISH_EVERY: usize = 16;

/// Consecutive polishing steps allowed while each one drops a coordinate.
const POLISH_REPEAT: usize = 3;

/// Minimiser of the objective on the face of `delta`'s current signs.
///
/// Solves `(A_SS + λ₂I) x = b_S - (λ₁/2) sign(δ_S)` and moves from `delta`
/// toward `x`, stopping early if a coordinate would change sign. The
/// objective is a convex quadratic along that segment, so the result never
/// increases it. The flag reports an early stop, which zeroes the
/// blocking coordinate. `None` when the system is not positive definite.
fn polish_on_support(
    problem: &QuadraticProblem,
    delta: &DVector<f64>,
    lambda1: f64,
    lambda2: f64,
) -> Option<(DVector<f64>, bool)> {
    let support: Vec<usize> = (0..delta.len()).filter(|&j| delta[j] != 0.0).collect();
    let k = support.len();
    if k == 0 || k > POLISH_MAX {
        return None;
    }
    let a = &*problem.a;
    let m = DMatrix::from_fn(k, k, |i, j| a[(support[i], support[j])] + if i == j { lambda2 } else { 0.0 });
    let rhs = DVector::from_fn(k, |i, _| problem.b[support[i]] - 0.5 * lambda1 * delta[support[i]].signum());
    let x = m.cholesky()?.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    // Walk from δ toward x and stop where the first coordinate reaches zero.
    let mut step = 1.0;
    let mut blocking = None;
    for (i, &j) in support.iter().enumerate() {
        let d = delta[j];
        if x[i] * d <= 0.0 {
            let t = d / (d - x[i]);
            if t < step {
                step = t;
                blocking = Some(i);
            }
        }
    }
    if step <= 0.0 {
        return None;
    }
    let mut out = DVector::zeros(delta.len());
    for (i, &j) in support.iter().enumerate() {
        out[j] = delta[j] + step * (x[i] - delta[j]);
    }
    if let Some(i) = blocking {
        out[support[i]] = 0.0;
    }
    Some((out, blocking.is_some()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> QuadraticProblem {
        let x = DMatrix::from_fn(10, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * j as f64);
        let y = DVector::from_fn(10, |i, _| (i as f64 * 0.7).sin());
        QuadraticProblem::least_squares(&x, &y).unwrap()
    }

    #[test]
    fn converges_with_small_kkt() {
        let q = problem();
        let out = coordinate_descent(&q, 0.05, 0.0, &SolverOptions::default()).unwrap();
        assert!(out.converged);
        assert!(out.kkt_residual < 1e-8);
        assert!((q.kkt_residual(&out.delta, 0.05, 0.0) - out.kkt_residual).abs() < 1e-12);
    }

    #[test]
    fn trace_non_increasing() {
        let q = problem();
        let opts = SolverOptions { record_trace: true, ..Default::default() };
        let out = coordinate_descent(&q, 0.01, 0.3, &opts).unwrap();
        assert!(!out.trace.is_empty());
        for w in out.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let q = problem();
        let opts = SolverOptions { max_iter: 1, tol: 1e-15, ..Default::default() };
        let out = coordinate_descent(&q, 0.001, 0.0, &opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 1);
        assert!(out.kkt_residual > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = problem();
        assert!(coordinate_descent(&q, -1.0, 0.0, &SolverOptions::default()).is_err());
        let bad = SolverOptions::default().with_warm_start(DVector::zeros(2));
        assert!(coordinate_descent(&q, 1.0, 0.0, &bad).is_err());
    }
}
