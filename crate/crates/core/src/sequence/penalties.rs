use super::risk::risk_vector;
use super::SequenceModel;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::normal;
use crate::shrinkage::{Penalty, PenaltyPair};
use crate::util::log_spaced;

/// Canonical penalty levels for the sequence model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlugInPenalties {
    pub lambda_l: f64,
    pub lambda_r: Penalty,
    pub lambda1: f64,
    pub lambda2: Penalty,
}

impl PlugInPenalties {
    /// The penalty pair each estimator is evaluated at. Elastic net borrows
    /// the lava pair and must have a finite ridge level.
    pub fn for_kind(&self, kind: EstimatorKind) -> Result<PenaltyPair> {
        let lava = PenaltyPair::new(Penalty::Finite(self.lambda1), self.lambda2)?;
        match kind {
            EstimatorKind::Lava | EstimatorKind::PostLava | EstimatorKind::ElasticNet | EstimatorKind::Ml => Ok(lava),
            EstimatorKind::Lasso | EstimatorKind::PostLasso => {
                PenaltyPair::new(Penalty::Finite(self.lambda_l), Penalty::Infinite)
            }
            EstimatorKind::Ridge => PenaltyPair::new(Penalty::Infinite, self.lambda_r),
        }
    }
}

fn ratio_or_infinite(num: f64, den: f64) -> Penalty {
    if den > 0.0 {
        Penalty::Finite(num / den)
    } else {
        Penalty::Infinite
    }
}

/// `λ_l = λ₁ = 2σΦ⁻¹(1 - c/(2p))`, `λ_r = σ²p/‖θ‖²`, `λ₂ = σ²p/‖β‖²`.
///
/// A zero norm sends the matching ridge level to `+∞`.
pub fn plug_in_penalties(
    p: usize,
    sigma: f64,
    c: f64,
    norm2_theta_sq: f64,
    norm2_beta_sq: f64,
) -> Result<PlugInPenalties> {
    if p == 0 || !(c > 0.0 && c < 1.0) || !(sigma > 0.0) {
        return Err(LavaError::InvalidInput(format!(
            "plug-in needs p >= 1, c in (0,1), sigma > 0; got p={p}, c={c}, sigma={sigma}"
        )));
    }
    if !(norm2_theta_sq >= 0.0 && norm2_beta_sq >= 0.0) {
        return Err(LavaError::InvalidInput("signal norms must be >= 0".into()));
    }
    let pf = p as f64;
    let lambda_l = 2.0 * sigma * normal::quantile(1.0 - c / (2.0 * pf));
    let s2p = sigma * sigma * pf;
    Ok(PlugInPenalties {
        lambda_l,
        lambda_r: ratio_or_infinite(s2p, norm2_theta_sq),
        lambda1: lambda_l,
        lambda2: ratio_or_infinite(s2p, norm2_beta_sq),
    })
}

/// Candidate levels for an oracle search. `Infinite` entries add the
/// lasso and ridge limits to two-penalty searches.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleGrid {
    pub lambda1: Vec<Penalty>,
    pub lambda2: Vec<Penalty>,
}

impl OracleGrid {
    /// 50 levels of λ₁ over `σ·[1e-4, 1e4]` and 50 of λ₂ over `[1e-4, 1e4]`,
    /// each followed by the `+∞` limit.
    pub fn default_for(sigma: f64) -> Self {
        Self::log_spaced(sigma, 50, 50)
    }

    pub fn log_spaced(sigma: f64, n1: usize, n2: usize) -> Self {
        let mut lambda1: Vec<Penalty> =
            log_spaced(1e-4 * sigma, 1e4 * sigma, n1).into_iter().map(Penalty::Finite).collect();
        let mut lambda2: Vec<Penalty> = log_spaced(1e-4, 1e4, n2).into_iter().map(Penalty::Finite).collect();
        lambda1.push(Penalty::Infinite);
        lambda2.push(Penalty::Infinite);
        Self { lambda1, lambda2 }
    }

    /// The pairs searched for `kind`. Single-penalty kinds scan one axis;
    /// elastic net skips infinite levels; `(∞, ∞)` is never produced.
    pub fn candidates(&self, kind: EstimatorKind) -> Vec<PenaltyPair> {
        let finite1 = self.lambda1.iter().copied().filter(|l| !l.is_infinite());
        let finite2 = self.lambda2.iter().copied().filter(|l| !l.is_infinite());
        match kind {
            EstimatorKind::Lasso | EstimatorKind::PostLasso => {
                finite1.map(|l| PenaltyPair { lambda1: l, lambda2: Penalty::Infinite }).collect()
            }
            EstimatorKind::Ridge => finite2.map(|l| PenaltyPair { lambda1: Penalty::Infinite, lambda2: l }).collect(),
            EstimatorKind::ElasticNet => {
                let l2: Vec<Penalty> = finite2.collect();
                finite1.flat_map(|a| l2.iter().map(move |&b| PenaltyPair { lambda1: a, lambda2: b })).collect()
            }
            EstimatorKind::Lava | EstimatorKind::PostLava => self
                .lambda1
                .iter()
                .flat_map(|&a| self.lambda2.iter().map(move |&b| PenaltyPair { lambda1: a, lambda2: b }))
                .filter(|p| !(p.lambda1.is_infinite() && p.lambda2.is_infinite()))
                .collect(),
            EstimatorKind::Ml => vec![PenaltyPair { lambda1: Penalty::Infinite, lambda2: Penalty::Finite(0.0) }],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleChoice {
    pub penalties: PenaltyPair,
    pub risk: f64,
}

/// Risk-minimising grid point; ties go to the heavier penalty.
pub fn oracle_penalties(kind: EstimatorKind, model: &SequenceModel, grid: &OracleGrid) -> Result<OracleChoice> {
    let mut best: Option<OracleChoice> = None;
    for p in grid.candidates(kind) {
        let risk = risk_vector(kind, model, p)?;
        let better = match best {
            None => true,
            Some(b) => risk < b.risk || (risk == b.risk && p.at_least_as_heavy(&b.penalties)),
        };
        if better {
            best = Some(OracleChoice { penalties: p, risk });
        }
    }
    best.ok_or_else(|| LavaError::InvalidInput(format!("oracle grid has no candidates for {kind}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EstimatorKind as K;

    #[test]
    fn plug_in_lambda1() {
        let pp = plug_in_penalties(100, 0.1, 0.05, 9.0, 0.99).unwrap();
        let expected = 0.2 * 3.480_756_404_346_212_8;
        assert!((pp.lambda1 - expected).abs() < 1e-12);
        assert_eq!(pp.lambda_l, pp.lambda1);
        let Penalty::Finite(l2) = pp.lambda2 else { panic!() };
        assert!((l2 - 1.0 / 0.99).abs() < 1e-12);
    }

    #[test]
    fn zero_norms_give_infinite_ridge() {
        let pp = plug_in_penalties(10, 1.0, 0.05, 0.0, 0.0).unwrap();
        assert!(pp.lambda_r.is_infinite() && pp.lambda2.is_infinite());
        assert_eq!(pp.for_kind(K::Lava).unwrap(), PenaltyPair::lasso(pp.lambda1).unwrap());
        assert!(plug_in_penalties(10, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_signal_picks_largest_single_penalty() {
        let m = SequenceModel::new(vec![0.0; 5], 1.0).unwrap();
        let grid = OracleGrid::log_spaced(1.0, 20, 20);
        let ridge = oracle_penalties(K::Ridge, &m, &grid).unwrap();
        assert_eq!(ridge.penalties.lambda2, Penalty::Finite(1e4));
        let lasso = oracle_penalties(K::Lasso, &m, &grid).unwrap();
        let Penalty::Finite(l) = lasso.penalties.lambda1 else { panic!() };
        assert!((l - 1e4).abs() < 1e-6);
    }

    #[test]
    fn candidate_counts() {
        let grid = OracleGrid::log_spaced(1.0, 3, 4);
        assert_eq!(grid.candidates(K::Lasso).len(), 3);
        assert_eq!(grid.candidates(K::Ridge).len(), 4);
        assert_eq!(grid.candidates(K::ElasticNet).len(), 12);
        assert_eq!(grid.candidates(K::Lava).len(), 4 * 5 - 1);
    }

    #[test]
    fn oracle_beats_plug_in() {
        let mut theta = vec![0.0; 100];
        theta[0] = 3.0;
        let m = SequenceModel::new(theta, 0.1).unwrap();
        let oracle = oracle_penalties(K::Lava, &m, &OracleGrid::default_for(0.1)).unwrap();
        let pp = plug_in_penalties(100, 0.1, 0.05, 9.0, 0.0).unwrap();
        let plug = risk_vector(K::Lava, &m, pp.for_kind(K::Lava).unwrap()).unwrap();
        assert!(oracle.risk <= plug);
    }

    #[test]
    fn heavier_orders_infinite_last() {
        let a = PenaltyPair::lasso(1.0).unwrap();
        let b = PenaltyPair::from_f64(1.0, 5.0).unwrap();
        assert!(a.at_least_as_heavy(&b));
        assert!(!b.at_least_as_heavy(&a));
    }
}
