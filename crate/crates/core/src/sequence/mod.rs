//! The Gaussian sequence model `Z ~ N_p(θ, σ²I)`.
//!
//! Exact risks of the coordinate-wise shrinkage estimators, canonical and
//! oracle penalty choices, Stein's unbiased risk estimate for lava, the
//! relative-risk bound against maximum likelihood, and a seeded Monte Carlo
//! oracle used to cross-check the closed forms.

mod kernel;
mod mc;
mod penalties;
mod risk;
mod sure;
mod table;

pub use kernel::{piecewise_sq_expectation, PiecewiseLinear};
pub use mc::{mc_risk, McEstimate};
pub use penalties::{oracle_penalties, plug_in_penalties, OracleChoice, OracleGrid, PlugInPenalties};
pub use risk::{apply_rule, risk_scalar, risk_vector};
pub use sure::{relative_risk_bound, sure_lava_sequence, RelativeRiskBound, RelativeRiskConditions};
pub use table::{RiskMethod, RiskRow, RiskTable, RISK_TABLE_HEADER};

use crate::error::{LavaError, Result};

/// Mean vector and per-coordinate noise level of a sequence model.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceModel {
    pub theta: Vec<f64>,
    pub sigma: f64,
}

impl SequenceModel {
    pub fn new(theta: Vec<f64>, sigma: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(LavaError::InvalidInput("sequence model needs p >= 1".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(LavaError::InvalidInput(format!("sigma must be positive, got {sigma}")));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(LavaError::InvalidInput("theta must be finite".into()));
        }
        Ok(Self { theta, sigma })
    }

    pub fn p(&self) -> usize {
        self.theta.len()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum()
    }
}

/// A decomposition `θ = β + δ` into dense and sparse parts.
///
/// The split is not identified by the data; callers pick it to evaluate
/// bounds or canonical penalties.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSplit {
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    /// Size of the small coefficients that generated `beta`.
    pub q: f64,
}

impl SignalSplit {
    pub fn new(beta: Vec<f64>, delta: Vec<f64>, q: f64) -> Result<Self> {
        if beta.len() != delta.len() {
            return Err(LavaError::DimensionMismatch { expected: beta.len(), found: delta.len() });
        }
        Ok(Self { beta, delta, q })
    }

    pub fn theta(&self) -> Vec<f64> {
        self.beta.iter().zip(&self.delta).map(|(b, d)| b + d).collect()
    }

    /// Number of non-zero entries of the sparse part.
    pub fn sparsity(&self) -> usize {
        self.delta.iter().filter(|d| **d != 0.0).count()
    }

    pub fn beta_norm2_sq(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum()
    }
}
