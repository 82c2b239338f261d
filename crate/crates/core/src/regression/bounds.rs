use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::projection::RidgeProjection;
use crate::error::{LavaError, Result};
use crate::lasso::DesignMatrix;
use crate::rng;
use crate::shrinkage::Penalty;

/// Draws per RNG stream in `score_quantile`.
const CHUNK: usize = 256;

/// Largest `p` accepted by the restricted-eigenvalue search.
pub const RE_MAX_P: usize = 12;

/// Ingredients of the prediction-error deviation bound at one ridge level.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub lambda2: f64,
    /// Simulated `(1-α)` quantile of `‖(2/n)X'KU‖_∞`, when computed.
    pub lambda1_quantile: Option<f64>,
    /// Union-bound level `2σ√(2 V̄ log(2p/α)/n)`.
    pub lambda_bar: f64,
    /// The same expression without the factor 2 under the root.
    pub lambda_bar_unscaled: f64,
    /// Largest diagonal entry of `V = λ₂² (S+λ₂)⁻¹ S (S+λ₂)⁻¹`, `S = X'X/n`.
    pub bar_v: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub norm_k: f64,
    /// Restricted-eigenvalue estimate `κ²` on the support of the sparse part.
    pub re_surrogate: Option<f64>,
}

impl DeviationReport {
    /// `8 λ₁² s / κ²`, an upper bound on the sparse-part term through
    /// `ι ≥ κ/√s`. Zero when the sparse part is empty.
    pub fn b1_upper(&self, lambda1: f64, sparsity: usize, kappa_sq: f64) -> f64 {
        if sparsity == 0 {
            0.0
        } else if kappa_sq > 0.0 {
            8.0 * lambda1 * lambda1 * sparsity as f64 / kappa_sq
        } else {
            f64::INFINITY
        }
    }

    /// `(B₁ ∨ B₂)‖K‖ + B₃ + B₄`.
    pub fn total(&self, b1: f64) -> f64 {
        b1.max(self.b2) * self.norm_k + self.b3 + self.b4
    }
}

fn check_lambda2(lambda2: f64) -> Result<()> {
    if lambda2 > 0.0 && lambda2.is_finite() {
        Ok(())
    } else {
        Err(LavaError::InvalidPenalty(format!("ridge level must be positive and finite, got {lambda2}")))
    }
}

/// Empirical `(1-α)` quantile of `‖(2/n)X'K U‖_∞` over `reps` draws of
/// `U ~ N(0, σ_u² I)`.
pub fn score_quantile(d: &DesignMatrix, lambda2: f64, sigma_u: f64, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    let proj = RidgeProjection::new(d, Penalty::Finite(lambda2))?;
    score_quantile_with(&proj, sigma_u, alpha, reps, seed)
}

pub fn score_quantile_with(proj: &RidgeProjection, sigma_u: f64, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    if reps < 100 {
        return Err(LavaError::InvalidInput(format!("score quantile needs reps >= 100, got {reps}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(sigma_u >= 0.0) {
        return Err(LavaError::InvalidInput(format!("need alpha in (0,1) and sigma_u >= 0; got {alpha}, {sigma_u}")));
    }
    let n = proj.n();
    let scale = 2.0 / n as f64;
    let chunks = reps.div_ceil(CHUNK);
    let maxima: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = CHUNK.min(reps - c * CHUNK);
            (0..len)
                .map(|_| {
                    let u = DVector::from_fn(n, |_, _| sigma_u * r.sample::<f64, _>(StandardNormal));
                    crate::linalg::max_abs(&proj.xt_k(&u)) * scale
                })
                .collect()
        })
        .collect();
    let mut all = maxima.concat();
    all.sort_by(f64::total_cmp);
    let idx = ((1.0 - alpha) * reps as f64).ceil() as usize;
    Ok(all[idx.clamp(1, reps) - 1])
}

/// `B₂ = (32/n)‖K^{1/2}Xβ₀‖²`, `B₃ = (4σ²/n)[√tr P² + √2 √‖P²‖ √log(1/ε)]²`,
/// `B₄ = 4β₀'Vβ₀` and the union-bound level, for a caller-chosen dense part.
pub fn bound_components(
    d: &DesignMatrix,
    lambda2: f64,
    beta0: &DVector<f64>,
    sigma_u: f64,
    alpha: f64,
    eps: f64,
) -> Result<DeviationReport> {
    check_lambda2(lambda2)?;
    if beta0.len() != d.p() {
        return Err(LavaError::DimensionMismatch { expected: d.p(), found: beta0.len() });
    }
    if !(alpha > 0.0 && alpha < 1.0 && eps > 0.0 && eps < 1.0 && sigma_u >= 0.0) {
        return Err(LavaError::InvalidInput(format!(
            "need alpha, eps in (0,1) and sigma_u >= 0; got {alpha}, {eps}, {sigma_u}"
        )));
    }
    let proj = RidgeProjection::new(d, Penalty::Finite(lambda2))?;
    let n = d.n() as f64;
    let p = d.p() as f64;
    let svd = proj.svd();

    // V = V_svd diag(λ₂² e/(e+λ₂)²) V_svd' with e = d²/n; zero off the span.
    let vw = svd.d.map(|di| {
        let e = di * di / n;
        lambda2 * lambda2 * e / ((e + lambda2) * (e + lambda2))
    });
    let bar_v =
        (0..d.p()).map(|j| svd.v.row(j).iter().zip(vw.iter()).map(|(v, w)| w * v * v).sum::<f64>()).fold(0.0, f64::max);
    let log_term = (2.0 * p / alpha).ln();
    let lambda_bar_unscaled = 2.0 * sigma_u * (bar_v * log_term / n).sqrt();

    let xb = d.x() * beta0;
    let b2 = 32.0 / n * proj.apply_k_half(&xb).norm_squared();
    let b4 = 4.0 / n * proj.apply_k(&xb).norm_squared();
    let root = proj.trace_p_sq().sqrt() + 2f64.sqrt() * proj.norm_p_sq().sqrt() * (1.0 / eps).ln().sqrt();
    let b3 = 4.0 * sigma_u * sigma_u / n * root * root;

    Ok(DeviationReport {
        lambda2,
        lambda1_quantile: None,
        lambda_bar: 2f64.sqrt() * lambda_bar_unscaled,
        lambda_bar_unscaled,
        bar_v,
        b2,
        b3,
        b4,
        norm_k: proj.norm_k(),
        re_surrogate: None,
    })
}

/// Euclidean projection onto `{v : ‖v‖₁ ≤ radius}`.
fn project_l1_ball(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    if v.lp_norm(1) <= radius {
        return v.clone();
    }
    if radius <= 0.0 {
        return DVector::zeros(v.len());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - radius) / (i + 1) as f64;
        if *m > t {
            tau = t;
        }
    }
    v.map(|x| x.signum() * (x.abs() - tau).max(0.0))
}

/// `min ‖v‖₁ ≤ ρ` of `[u; v]' G [u; v]` by accelerated projected gradient.
fn inner_minimum(
    g_jj: &DMatrix<f64>,
    g_cj: &DMatrix<f64>,
    g_cc: &DMatrix<f64>,
    lip: f64,
    u: &DVector<f64>,
    radius: f64,
) -> f64 {
    let base = u.dot(&(g_jj * u));
    if g_cc.nrows() == 0 || lip <= 0.0 {
        return base;
    }
    let lin = g_cj * u;
    let value = |v: &DVector<f64>| base + 2.0 * v.dot(&lin) + v.dot(&(g_cc * v));
    let step = 1.0 / lip;
    let mut v = DVector::zeros(g_cc.nrows());
    let mut z = v.clone();
    let mut t = 1.0f64;
    let mut best = value(&v);
    for _ in 0..400 {
        let grad = 2.0 * (g_cc * &z + &lin);
        let next = project_l1_ball(&(&z - grad * step), radius);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &next + (&next - &v) * ((t - 1.0) / t_next);
        let moved = (&next - &v).amax();
        v = next;
        t = t_next;
        best = best.min(value(&v));
        if moved < 1e-12 {
            break;
        }
    }
    best.max(0.0)
}

/// Random-search estimate of
/// `κ² = inf ‖X̃Δ‖²/n / ‖Δ_J‖²` over the cone `‖Δ_{Jᶜ}‖₁ ≤ (c+1)/(c-1) ‖Δ_J‖₁`.
///
/// For each direction on the support the off-support part is optimised
/// exactly (a convex problem); directions themselves are searched by random
/// restarts and local perturbation, so the result is an upper estimate of
/// the infimum. Returns `+∞` for an empty support.
pub fn restricted_eigenvalue_surrogate(d: &DesignMatrix, lambda2: f64, support: &[usize], c: f64) -> Result<f64> {
    check_lambda2(lambda2)?;
    let p = d.p();
    if p > RE_MAX_P {
        return Err(LavaError::TooLarge { p, limit: RE_MAX_P });
    }
    if !(c > 1.0) {
        return Err(LavaError::InvalidInput(format!("cone constant must exceed 1, got {c}")));
    }
    if support.iter().any(|&j| j >= p) {
        return Err(LavaError::InvalidInput("support index out of range".into()));
    }
    if support.is_empty() {
        return Ok(f64::INFINITY);
    }
    let proj = RidgeProjection::new(d, Penalty::Finite(lambda2))?;
    let g = proj.profiled_gram();
    let off: Vec<usize> = (0..p).filter(|j| !support.contains(j)).collect();
    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])]);
    let g_jj = sub(support, support);
    let g_cj = sub(&off, support);
    let g_cc = sub(&off, &off);
    let lip = if off.is_empty() { 0.0 } else { 2.0 * g_cc.symmetric_eigenvalues().max().max(0.0) };
    let ratio = (c + 1.0) / (c - 1.0);
    let objective = |u: &DVector<f64>| {
        let u = u / u.norm();
        inner_minimum(&g_jj, &g_cj, &g_cc, lip, &u, ratio * u.lp_norm(1))
    };

    let s = support.len();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    let eig = g_jj.clone().symmetric_eigen();
    for k in 0..s {
        starts.push(eig.eigenvectors.column(k).into_owned());
    }
    for k in 0..s {
        starts.push(DVector::from_fn(s, |i, _| if i == k { 1.0 } else { 0.0 }));
    }
    let mut r = rng::stream(0x5eed_ce11, p as u64);
    for _ in 0..200 {
        starts.push(DVector::from_fn(s, |_, _| r.sample::<f64, _>(StandardNormal)));
    }
    let (mut best_u, mut best) = starts
        .into_iter()
        .filter(|u| u.norm() > 0.0)
        .map(|u| {
            let f = objective(&u);
            (u, f)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    let mut step = 0.5;
    for _ in 0..300 {
        let trial = &best_u / best_u.norm() + DVector::from_fn(s, |_, _| step * r.sample::<f64, _>(StandardNormal));
        if trial.norm() == 0.0 {
            continue;
        }
        let f = objective(&trial);
        if f < best {
            best = f;
            best_u = trial;
        } else {
            step *= 0.97;
        }
    }
    Ok(best)
}
