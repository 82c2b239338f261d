use std::fmt;
use std::str::FromStr;

use crate::error::LavaError;

/// The estimators compared throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Lava,
    PostLava,
    Lasso,
    PostLasso,
    Ridge,
    ElasticNet,
    /// Maximum likelihood: the unshrunk observation.
    Ml,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::Lava,
        EstimatorKind::PostLava,
        EstimatorKind::Lasso,
        EstimatorKind::PostLasso,
        EstimatorKind::Ridge,
        EstimatorKind::ElasticNet,
        EstimatorKind::Ml,
    ];

    /// The six shrinkage estimators (everything except `Ml`).
    pub const SHRINKAGE: [EstimatorKind; 6] = [
        EstimatorKind::Lava,
        EstimatorKind::PostLava,
        EstimatorKind::Lasso,
        EstimatorKind::PostLasso,
        EstimatorKind::Ridge,
        EstimatorKind::ElasticNet,
    ];

    /// The estimator whose fit a post-selection refit starts from; identity
    /// for everything else.
    pub fn base(self) -> EstimatorKind {
        match self {
            EstimatorKind::PostLava => EstimatorKind::Lava,
            EstimatorKind::PostLasso => EstimatorKind::Lasso,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Lava => "lava",
            EstimatorKind::PostLava => "post-lava",
            EstimatorKind::Lasso => "lasso",
            EstimatorKind::PostLasso => "post-lasso",
            EstimatorKind::Ridge => "ridge",
            EstimatorKind::ElasticNet => "elastic-net",
            EstimatorKind::Ml => "ml",
        }
    }

    /// Whether the estimator is tuned over `(λ₁, λ₂)` pairs rather than one level.
    pub fn uses_pair(self) -> bool {
        matches!(self, EstimatorKind::Lava | EstimatorKind::PostLava | EstimatorKind::ElasticNet)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = LavaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let kind = match norm.as_str() {
            "lava" => EstimatorKind::Lava,
            "post-lava" | "postlava" => EstimatorKind::PostLava,
            "lasso" => EstimatorKind::Lasso,
            "post-lasso" | "postlasso" => EstimatorKind::PostLasso,
            "ridge" => EstimatorKind::Ridge,
            "elastic-net" | "elasticnet" | "enet" => EstimatorKind::ElasticNet,
            "ml" | "mle" | "ols" => EstimatorKind::Ml,
            _ => return Err(LavaError::InvalidInput(format!("unknown estimator {s:?}"))),
        };
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("svm".parse::<EstimatorKind>().is_err());
    }
}
