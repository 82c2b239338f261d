use nalgebra::DMatrix;

use crate::error::{LavaError, Result};
use crate::shrinkage::{lava_weights, shrink_lava, PenaltyPair};

/// Unbiased estimate of the lava risk `E‖d(Z) - θ‖²`, averaged over the rows
/// of `samples` (each row is one draw of `Z`).
pub fn sure_lava_sequence(samples: &DMatrix<f64>, p: PenaltyPair, sigma: f64) -> Result<f64> {
    let (n, dim) = samples.shape();
    if n == 0 || dim == 0 {
        return Err(LavaError::InvalidInput("SURE needs at least one draw of length >= 1".into()));
    }
    if !(sigma > 0.0) {
        return Err(LavaError::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let lw = lava_weights(p);
    let s2 = sigma * sigma;
    let mut residual = 0.0;
    let mut crossings = 0usize;
    for z in samples.iter() {
        residual += (z - shrink_lava(*z, p).total()).powi(2);
        if z.abs() > lw.w {
            crossings += 1;
        }
    }
    let nf = n as f64;
    Ok((1.0 - 2.0 * lw.k) * dim as f64 * s2 + residual / nf + 2.0 * lw.k * s2 * crossings as f64 / nf)
}

/// Which hypotheses of the relative-risk bound hold at the given inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelativeRiskConditions {
    /// `σ√log p > 2M + 33σ`.
    pub noise_dominates: bool,
    /// `M² log p > 16σ²`.
    pub signal_visible: bool,
    /// `πc² log p ≥ 1`.
    pub level_large: bool,
    /// `2p/(πc²) ≥ log p`, used in the derivation but absent from the statement.
    pub level_small: bool,
}

impl RelativeRiskConditions {
    pub fn all_hold(&self) -> bool {
        self.noise_dominates && self.signal_visible && self.level_large && self.level_small
    }
}

/// Upper bound on the lava risk relative to the maximum-likelihood risk
/// `pσ²`, split into its three terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeRiskBound {
    pub bound: f64,
    /// `‖β‖²/(σ²p + ‖β‖²)`, the share of the dense signal in total variation.
    pub dense_share: f64,
    pub sparse_term: f64,
    pub threshold_term: f64,
    pub conditions: RelativeRiskConditions,
}

/// Evaluates the bound for a dense part `beta`, `s` large coefficients of
/// size at most `m_bound`, and plug-in level `c`. The value is reported
/// whether or not the conditions hold.
pub fn relative_risk_bound(
    beta: &[f64],
    sigma: f64,
    p: usize,
    s: usize,
    m_bound: f64,
    c: f64,
) -> Result<RelativeRiskBound> {
    if p == 0 || !(sigma > 0.0) || !(m_bound >= 0.0) || !(c > 0.0) || s > p {
        return Err(LavaError::InvalidInput(format!(
            "relative risk bound needs p >= 1, sigma > 0, M >= 0, c > 0, s <= p; got p={p}, sigma={sigma}, M={m_bound}, c={c}, s={s}"
        )));
    }
    let pf = p as f64;
    let s2 = sigma * sigma;
    let b2: f64 = beta.iter().map(|b| b * b).sum();
    let dense_share = b2 / (s2 * pf + b2);
    let sparse_term = 3.0 * s as f64 * m_bound * m_bound / (pf * s2);
    let root = pf.powf(1.0 / 16.0);
    let threshold_term = 4.0 / ((2.0 * std::f64::consts::PI).sqrt() * root) * (1.0 + 7.0 * m_bound / (sigma * root));
    let log_p = pf.ln();
    let pi = std::f64::consts::PI;
    let conditions = RelativeRiskConditions {
        noise_dominates: sigma * log_p.sqrt() > 2.0 * m_bound + 33.0 * sigma,
        signal_visible: m_bound * m_bound * log_p > 16.0 * s2,
        level_large: pi * c * c * log_p >= 1.0,
        level_small: 2.0 * pf / (pi * c * c) >= log_p,
    };
    Ok(RelativeRiskBound {
        bound: dense_share + sparse_term + threshold_term,
        dense_share,
        sparse_term,
        threshold_term,
        conditions,
    })
}
