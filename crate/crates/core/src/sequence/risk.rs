use super::kernel::{piecewise_sq_expectation, PiecewiseLinear};
use super::SequenceModel;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::normal;
use crate::shrinkage::{
    lava_weights, shrink_elastic_net, shrink_lasso, shrink_lava, shrink_post_lasso, shrink_post_lava, shrink_ridge,
    Penalty, PenaltyPair,
};

fn need_finite(p: Penalty, kind: EstimatorKind, which: &str) -> Result<f64> {
    p.finite().ok_or_else(|| LavaError::InvalidPenalty(format!("{kind} needs a finite {which}")))
}

/// Applies the decision rule of `kind` to one observation.
///
/// Lasso and post-lasso read `lambda1`, ridge reads `lambda2`.
pub fn apply_rule(kind: EstimatorKind, z: f64, p: PenaltyPair) -> Result<f64> {
    Ok(match kind {
        EstimatorKind::Lava => shrink_lava(z, p).total(),
        EstimatorKind::PostLava => shrink_post_lava(z, p),
        EstimatorKind::Lasso => shrink_lasso(z, need_finite(p.lambda1, kind, "lambda1")?),
        EstimatorKind::PostLasso => shrink_post_lasso(z, need_finite(p.lambda1, kind, "lambda1")?),
        EstimatorKind::Ridge => shrink_ridge(z, need_finite(p.lambda2, kind, "lambda2")?),
        EstimatorKind::ElasticNet => {
            let l1 = need_finite(p.lambda1, kind, "lambda1")?;
            let l2 = need_finite(p.lambda2, kind, "lambda2")?;
            shrink_elastic_net(z, l1, l2)
        }
        EstimatorKind::Ml => z,
    })
}

/// Exact `E[(d(Z) - θ)²]` for `Z ~ N(θ, σ²)`.
pub fn risk_scalar(kind: EstimatorKind, theta: f64, sigma: f64, p: PenaltyPair) -> Result<f64> {
    if !theta.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
        return Err(LavaError::InvalidInput(format!("theta={theta}, sigma={sigma}")));
    }
    // Limits go through the baseline formulas, so a lava risk at an infinite
    // level is bit-identical to the baseline it reduces to.
    let kind = match (kind, p.lambda1, p.lambda2) {
        (EstimatorKind::Lava, _, Penalty::Infinite) => EstimatorKind::Lasso,
        (EstimatorKind::PostLava, _, Penalty::Infinite) => EstimatorKind::PostLasso,
        (EstimatorKind::Lava | EstimatorKind::PostLava, Penalty::Infinite, _) => EstimatorKind::Ridge,
        (k, ..) => k,
    };
    let s2 = sigma * sigma;
    let risk = match kind {
        EstimatorKind::Ml => s2,
        EstimatorKind::Ridge => {
            let lr = need_finite(p.lambda2, kind, "lambda2")?;
            let kt = lr / (1.0 + lr);
            theta * theta * kt * kt + (1.0 - kt).powi(2) * s2
        }
        EstimatorKind::Lava => lava_risk(theta, sigma, p)?,
        EstimatorKind::PostLava => {
            let lw = lava_weights(p);
            let spec = PiecewiseLinear { h: 1.0, d: -theta, e: 1.0 - lw.k, m: -theta, f: 1.0, g: -theta, w: lw.w };
            piecewise_sq_expectation(&spec, theta, sigma)?
        }
        EstimatorKind::Lasso => {
            let half = 0.5 * need_finite(p.lambda1, kind, "lambda1")?;
            let spec =
                PiecewiseLinear { h: 1.0, d: -half - theta, e: 0.0, m: -theta, f: 1.0, g: half - theta, w: half };
            piecewise_sq_expectation(&spec, theta, sigma)?
        }
        EstimatorKind::PostLasso => {
            let half = 0.5 * need_finite(p.lambda1, kind, "lambda1")?;
            let spec = PiecewiseLinear { h: 1.0, d: -theta, e: 0.0, m: -theta, f: 1.0, g: -theta, w: half };
            piecewise_sq_expectation(&spec, theta, sigma)?
        }
        EstimatorKind::ElasticNet => {
            let l1 = need_finite(p.lambda1, kind, "lambda1")?;
            let l2 = need_finite(p.lambda2, kind, "lambda2")?;
            let slope = 1.0 / (1.0 + l2);
            let shift = 0.5 * l1 * slope;
            let spec = PiecewiseLinear {
                h: slope,
                d: -shift - theta,
                e: 0.0,
                m: -theta,
                f: slope,
                g: shift - theta,
                w: 0.5 * l1,
            };
            piecewise_sq_expectation(&spec, theta, sigma)?
        }
    };
    // Cancellation in the lava decomposition can leave a tiny negative value.
    Ok(risk.max(0.0))
}

/// Lava risk through `E(Z-d)² - σ² + 2 Cov(Z, d)`, where the residual
/// `d(z) - z` is piecewise linear and the covariance term is
/// `(1-k)σ² + kσ² P(|Z| > w)`.
fn lava_risk(theta: f64, sigma: f64, p: PenaltyPair) -> Result<f64> {
    let s2 = sigma * sigma;
    let lw = lava_weights(p);
    let (k, w) = (lw.k, lw.w);
    let half = match p.lambda1 {
        Penalty::Finite(l1) if w.is_finite() => 0.5 * l1,
        // Outer pieces never apply; any finite intercept is fine.
        _ => 0.0,
    };
    let residual = PiecewiseLinear { h: 0.0, d: -half, e: -k, m: 0.0, f: 0.0, g: half, w };
    let residual_sq = piecewise_sq_expectation(&residual, theta, sigma)?;
    let beyond =
        if w.is_infinite() { 0.0 } else { normal::sf((w - theta) / sigma) + normal::cdf((-w - theta) / sigma) };
    Ok(-s2 + residual_sq + 2.0 * (1.0 - k) * s2 + 2.0 * k * s2 * beyond)
}

/// Sum of coordinate risks. Runs of equal coordinates share one evaluation.
pub fn risk_vector(kind: EstimatorKind, model: &SequenceModel, p: PenaltyPair) -> Result<f64> {
    let mut total = 0.0;
    let mut last: Option<(f64, f64)> = None;
    for &t in &model.theta {
        let r = match last {
            Some((lt, lr)) if lt == t => lr,
            _ => risk_scalar(kind, t, model.sigma, p)?,
        };
        last = Some((t, r));
        total += r;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EstimatorKind as K;
    use crate::shrinkage::ScalarSplit;
    use proptest::prelude::*;

    fn pair(l1: f64, l2: f64) -> PenaltyPair {
        PenaltyPair::from_f64(l1, l2).unwrap()
    }

    #[test]
    fn ridge_examples() {
        assert_eq!(risk_scalar(K::Ridge, 0.0, 1.0, pair(f64::INFINITY, 0.0)).unwrap(), 1.0);
        let r = risk_scalar(K::Ridge, 2.0, 1.0, pair(f64::INFINITY, 1.0)).unwrap();
        assert!((r - 1.25).abs() < 1e-15);
    }

    #[test]
    fn penalty_requirements() {
        assert!(risk_scalar(K::Lasso, 0.0, 1.0, pair(f64::INFINITY, 1.0)).is_err());
        assert!(risk_scalar(K::Ridge, 0.0, 1.0, pair(1.0, f64::INFINITY)).is_err());
        assert!(risk_scalar(K::ElasticNet, 0.0, 1.0, pair(1.0, f64::INFINITY)).is_err());
        assert!(risk_scalar(K::Lava, 0.0, 0.0, pair(1.0, 1.0)).is_err());
    }

    #[test]
    fn lava_at_zero_penalty_is_identity() {
        // λ₂ = 0 leaves the data untouched.
        let r = risk_scalar(K::Lava, 1.3, 0.7, pair(2.0, 0.0)).unwrap();
        assert!((r - 0.49).abs() < 1e-14);
    }

    #[test]
    fn lava_via_direct_kernel() {
        // Independent route: E[(d_lava(Z) - θ)²] with the error itself as the kernel.
        for &(theta, sigma, l1, l2) in &[(0.0, 1.0, 1.0, 1.0), (3.0, 0.1, 0.7, 1.01), (-0.4, 2.0, 0.3, 7.0)] {
            let lw = lava_weights(pair(l1, l2));
            let spec = PiecewiseLinear {
                h: 1.0,
                d: -0.5 * l1 - theta,
                e: 1.0 - lw.k,
                m: -theta,
                f: 1.0,
                g: 0.5 * l1 - theta,
                w: lw.w,
            };
            let direct = piecewise_sq_expectation(&spec, theta, sigma).unwrap();
            let via = risk_scalar(K::Lava, theta, sigma, pair(l1, l2)).unwrap();
            assert!((direct - via).abs() < 1e-12 * (1.0 + direct), "{direct} vs {via}");
        }
    }

    #[test]
    fn apply_rule_agrees_with_split() {
        let p = pair(1.0, 1.0);
        let ScalarSplit { d2, d1 } = shrink_lava(2.0, p);
        assert_eq!(apply_rule(K::Lava, 2.0, p).unwrap(), d2 + d1);
        assert_eq!(apply_rule(K::Ml, 2.0, p).unwrap(), 2.0);
    }

    #[test]
    fn risk_vector_single_coordinate() {
        let m = SequenceModel::new(vec![0.8], 0.5).unwrap();
        let p = pair(0.4, 2.0);
        for kind in EstimatorKind::SHRINKAGE {
            let p = if kind == K::Lasso || kind == K::PostLasso {
                pair(0.4, f64::INFINITY)
            } else if kind == K::Ridge {
                pair(f64::INFINITY, 2.0)
            } else {
                p
            };
            assert_eq!(risk_vector(kind, &m, p).unwrap(), risk_scalar(kind, 0.8, 0.5, p).unwrap());
        }
    }

    #[test]
    fn lasso_risk_vanishes_at_zero_signal() {
        let m = SequenceModel::new(vec![0.0; 10], 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for l in [1.0, 4.0, 10.0, 20.0, 40.0] {
            let r = risk_vector(K::Lasso, &m, PenaltyPair::lasso(l).unwrap()).unwrap();
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < 1e-80);
    }

    proptest! {
        #[test]
        fn lasso_is_lava_limit(theta in -5.0..5.0f64, sigma in 0.05..3.0f64, l in 0.0..8.0f64) {
            let a = risk_scalar(K::Lasso, theta, sigma, PenaltyPair::lasso(l).unwrap()).unwrap();
            let b = risk_scalar(K::Lava, theta, sigma, PenaltyPair::lasso(l).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        }

        #[test]
        fn ridge_is_lava_limit(theta in -5.0..5.0f64, sigma in 0.05..3.0f64, l in 0.0..50.0f64) {
            let a = risk_scalar(K::Ridge, theta, sigma, PenaltyPair::ridge(l).unwrap()).unwrap();
            let b = risk_scalar(K::Lava, theta, sigma, PenaltyPair::ridge(l).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        }

        #[test]
        fn post_lasso_is_post_lava_limit(theta in -5.0..5.0f64, sigma in 0.05..3.0f64, l in 0.0..8.0f64) {
            let a = risk_scalar(K::PostLasso, theta, sigma, PenaltyPair::lasso(l).unwrap()).unwrap();
            let b = risk_scalar(K::PostLava, theta, sigma, PenaltyPair::lasso(l).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn enet_at_zero_ridge_is_lasso(theta in -5.0..5.0f64, sigma in 0.05..3.0f64, l in 0.0..8.0f64) {
            let a = risk_scalar(K::ElasticNet, theta, sigma, pair(l, 0.0)).unwrap();
            let b = risk_scalar(K::Lasso, theta, sigma, PenaltyPair::lasso(l).unwrap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn risks_are_nonnegative(
            theta in -10.0..10.0f64, sigma in 0.01..5.0f64,
            l1 in 0.0..20.0f64, l2 in 0.0..100.0f64,
        ) {
            for kind in EstimatorKind::ALL {
                let r = risk_scalar(kind, theta, sigma, pair(l1, l2)).unwrap();
                prop_assert!(r >= 0.0 && r.is_finite());
            }
        }
    }
}
