use nalgebra::DVector;

use crate::error::{LavaError, Result};
use crate::lasso::{fit_lasso, DesignMatrix, SolverOptions};
use crate::normal;

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseOptions {
    /// Multiplier on the noise-scaled lasso level.
    pub c: f64,
    pub alpha: f64,
    /// Stop once `|σ̂²_new/σ̂²_old - 1|` falls below this.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub solver: SolverOptions,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self { c: 1.1, alpha: 0.05, rel_tol: 1e-4, max_iter: 20, solver: SolverOptions::default() }
    }
}

/// Iterated lasso estimate of the noise variance.
///
/// Lasso penalties inflate residuals, so the estimate leans conservative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseEstimate {
    pub sigma2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when `|Ĵ| ≥ n` forced the residual degrees of freedom to 1.
    pub floored: bool,
}

/// Alternates a lasso fit at `λ = 2cσ̂Φ⁻¹(1 - α/(2p))/√n` with
/// `σ̂² = RSS/(n - |Ĵ|)`, starting from `σ̂² = ‖Y‖²/n`.
pub fn estimate_noise_variance(d: &DesignMatrix, y: &DVector<f64>, opts: &NoiseOptions) -> Result<NoiseEstimate> {
    let n = d.n();
    if n < 2 {
        return Err(LavaError::InvalidInput("noise estimation needs n > 1".into()));
    }
    if y.len() != n {
        return Err(LavaError::DimensionMismatch { expected: n, found: y.len() });
    }
    let z = normal::quantile(1.0 - opts.alpha / (2.0 * d.p() as f64));
    let start = y.norm_squared() / n as f64;
    let mut sigma2 = start;
    let mut warm: Option<DVector<f64>> = None;
    let mut floored = false;
    for it in 1..=opts.max_iter {
        if sigma2 <= 1e-14 * start || sigma2 == 0.0 {
            return Ok(NoiseEstimate { sigma2, iterations: it - 1, converged: true, floored });
        }
        let lambda = 2.0 * opts.c * sigma2.sqrt() * z / (n as f64).sqrt();
        let solver = match &warm {
            Some(w) => opts.solver.with_warm_start(w.clone()),
            None => opts.solver.clone(),
        };
        let fit = fit_lasso(d, y, lambda, &solver)?;
        if !fit.converged {
            return Err(LavaError::NotConverged { iterations: fit.iterations, kkt_residual: fit.kkt_residual });
        }
        let rss = (y - d.x() * &fit.delta).norm_squared();
        let dof = if fit.active_set.len() >= n {
            floored = true;
            1.0
        } else {
            (n - fit.active_set.len()) as f64
        };
        let next = rss / dof;
        let change = (next / sigma2 - 1.0).abs();
        sigma2 = next;
        warm = Some(fit.delta);
        if change < opts.rel_tol {
            return Ok(NoiseEstimate { sigma2, iterations: it, converged: true, floored });
        }
    }
    Ok(NoiseEstimate { sigma2, iterations: opts.max_iter, converged: false, floored })
}
