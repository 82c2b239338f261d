use std::fmt;
use std::io::Write;

use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::shrinkage::Penalty;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiskMethod {
    Analytic,
    MonteCarlo,
}

impl fmt::Display for RiskMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskMethod::Analytic => "analytic",
            RiskMethod::MonteCarlo => "mc",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskRow {
    pub estimator: EstimatorKind,
    pub lambda1: Penalty,
    pub lambda2: Penalty,
    pub q: f64,
    pub risk: f64,
    pub se: f64,
    pub method: RiskMethod,
}

/// Risks with provenance. Analytic rows carry `se = 0`, Monte Carlo rows
/// a positive standard error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RiskTable {
    rows: Vec<RiskRow>,
}

pub const RISK_TABLE_HEADER: [&str; 7] = ["estimator", "lambda1", "lambda2", "q", "risk", "se", "method"];

impl RiskTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[RiskRow] {
        &self.rows
    }

    pub fn push_analytic(&mut self, estimator: EstimatorKind, lambda1: Penalty, lambda2: Penalty, q: f64, risk: f64) {
        self.rows.push(RiskRow { estimator, lambda1, lambda2, q, risk, se: 0.0, method: RiskMethod::Analytic });
    }

    pub fn push_mc(
        &mut self,
        estimator: EstimatorKind,
        lambda1: Penalty,
        lambda2: Penalty,
        q: f64,
        risk: f64,
        se: f64,
    ) -> Result<()> {
        if !(se > 0.0) {
            return Err(LavaError::InvalidInput(format!("Monte Carlo rows need se > 0, got {se}")));
        }
        self.rows.push(RiskRow { estimator, lambda1, lambda2, q, risk, se, method: RiskMethod::MonteCarlo });
        Ok(())
    }

    pub fn find(&self, estimator: EstimatorKind, q: f64) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.q == q)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RISK_TABLE_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.estimator.name().to_string(),
                r.lambda1.to_string(),
                r.lambda2.to_string(),
                r.q.to_string(),
                r.risk.to_string(),
                r.se.to_string(),
                r.method.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
