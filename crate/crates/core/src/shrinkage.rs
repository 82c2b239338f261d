//! Scalar shrinkage (decision) rules.
//!
//! Each rule maps an observation `z` to an estimate of its mean. The lava
//! rule splits the estimate into a ridge-penalised dense part and an
//! l1-penalised sparse part; the others are the classical lasso, ridge,
//! elastic net and hard/soft thresholding rules it interpolates between.

use std::fmt;
use std::str::FromStr;

use crate::error::{LavaError, Result};

/// A penalty level: a non-negative finite value or the `+∞` limit.
///
/// The infinite level is a sentinel, not a large float, so the lasso and
/// ridge limits of the lava rule are applied exactly.
/// Variants are ordered so that every finite level is below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Penalty {
    Finite(f64),
    Infinite,
}

impl Penalty {
    pub fn finite(self) -> Option<f64> {
        match self {
            Penalty::Finite(v) => Some(v),
            Penalty::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Penalty::Infinite)
    }

    /// Maps `f64::INFINITY` to the sentinel.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            Ok(Penalty::Infinite)
        } else if v.is_finite() && v >= 0.0 {
            Ok(Penalty::Finite(v))
        } else {
            Err(LavaError::InvalidPenalty(format!("penalty must be >= 0, got {v}")))
        }
    }

    /// Value as a float, with `+∞` for the sentinel.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(v) => write!(f, "{v}"),
            Penalty::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Penalty {
    type Err = LavaError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Penalty::Infinite);
        }
        let v: f64 = t.parse().map_err(|_| LavaError::InvalidPenalty(format!("cannot parse penalty {s:?}")))?;
        Penalty::from_f64(v)
    }
}

/// The `(λ₁, λ₂)` pair: λ₁ weighs the l1 penalty on the sparse part, λ₂ the
/// squared-l2 penalty on the dense part.
///
/// Single-penalty estimators read one component: lasso and post-lasso use
/// `lambda1`, ridge uses `lambda2`. This matches the lava limits, where
/// lasso is `(λ, ∞)` and ridge is `(∞, λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyPair {
    pub lambda1: Penalty,
    pub lambda2: Penalty,
}

impl PenaltyPair {
    pub fn new(lambda1: Penalty, lambda2: Penalty) -> Result<Self> {
        for l in [lambda1, lambda2] {
            if let Penalty::Finite(v) = l {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(LavaError::InvalidPenalty(format!("penalty must be finite and >= 0, got {v}")));
                }
            }
        }
        if lambda1.is_infinite() && lambda2.is_infinite() {
            return Err(LavaError::InvalidPenalty("lambda1 and lambda2 cannot both be infinite".into()));
        }
        Ok(Self { lambda1, lambda2 })
    }

    /// Convenience constructor from floats; `f64::INFINITY` selects a limit.
    pub fn from_f64(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(Penalty::from_f64(lambda1)?, Penalty::from_f64(lambda2)?)
    }

    /// Pair for a pure lasso penalty, `(λ, ∞)`.
    pub fn lasso(lambda: f64) -> Result<Self> {
        Self::new(Penalty::from_f64(lambda)?, Penalty::Infinite)
    }

    /// Pair for a pure ridge penalty, `(∞, λ)`.
    pub fn ridge(lambda: f64) -> Result<Self> {
        Self::new(Penalty::Infinite, Penalty::from_f64(lambda)?)
    }

    pub fn both_finite(&self) -> Option<(f64, f64)> {
        Some((self.lambda1.finite()?, self.lambda2.finite()?))
    }

    /// Whether `self` regularises at least as heavily as `other`, comparing
    /// λ₁ first and λ₂ second. Used to break ties in grid searches.
    pub fn at_least_as_heavy(&self, other: &PenaltyPair) -> bool {
        match self.lambda1.partial_cmp(&other.lambda1) {
            Some(std::cmp::Ordering::Greater) => true,
            Some(std::cmp::Ordering::Less) => false,
            _ => self.lambda2 >= other.lambda2,
        }
    }
}

/// Derived lava weights: `k = λ₂/(1+λ₂)` and threshold `w = λ₁/(2k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LavaWeights {
    pub k: f64,
    /// Threshold; `f64::INFINITY` when λ₁ is infinite or `k = 0`.
    pub w: f64,
}

/// Dense and sparse parts of the lava rule at one input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarSplit {
    pub d2: f64,
    pub d1: f64,
}

impl ScalarSplit {
    pub fn total(&self) -> f64 {
        self.d2 + self.d1
    }
}

/// `sign(0) = 0`.
#[inline]
pub fn sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(|z| - t)₊ sign(z)`; an infinite threshold maps everything to zero.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    (z.abs() - t).max(0.0) * sign(z)
}

pub fn lava_weights(p: PenaltyPair) -> LavaWeights {
    let k = match p.lambda2 {
        Penalty::Infinite => 1.0,
        Penalty::Finite(l2) => l2 / (1.0 + l2),
    };
    let w = match p.lambda1 {
        Penalty::Infinite => f64::INFINITY,
        Penalty::Finite(_) if k == 0.0 => f64::INFINITY,
        Penalty::Finite(l1) => l1 / (2.0 * k),
    };
    LavaWeights { k, w }
}

/// Joint minimiser of `(z-β-δ)² + λ₂β² + λ₁|δ|`.
pub fn shrink_lava(z: f64, p: PenaltyPair) -> ScalarSplit {
    let LavaWeights { k, w } = lava_weights(p);
    let d1 = soft_threshold(z, w);
    let d2 = (1.0 - k) * (z - d1);
    ScalarSplit { d2, d1 }
}

/// Lava with the sparse part refit without shrinkage: `z` above the
/// threshold, `(1-k)z` below it.
pub fn shrink_post_lava(z: f64, p: PenaltyPair) -> f64 {
    let LavaWeights { k, w } = lava_weights(p);
    if z.abs() > w {
        z
    } else {
        (1.0 - k) * z
    }
}

pub fn shrink_ridge(z: f64, lambda_r: f64) -> f64 {
    z / (1.0 + lambda_r)
}

pub fn shrink_lasso(z: f64, lambda_l: f64) -> f64 {
    soft_threshold(z, 0.5 * lambda_l)
}

/// Elastic net: soft threshold at `λ₁/2`, then scale by `1/(1+λ₂)`.
pub fn shrink_elastic_net(z: f64, lambda1: f64, lambda2: f64) -> f64 {
    soft_threshold(z, 0.5 * lambda1) / (1.0 + lambda2)
}

/// Hard thresholding at `λ_l/2`.
pub fn shrink_post_lasso(z: f64, lambda_l: f64) -> f64 {
    if z.abs() > 0.5 * lambda_l {
        z
    } else {
        0.0
    }
}
