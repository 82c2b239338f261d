use std::io::Write;

use super::config::Scenario;
use crate::error::Result;
use crate::estimator::EstimatorKind;
use crate::shrinkage::Penalty;

pub const SIM_HEADER: [&str; 9] =
    ["scenario", "estimator", "q", "risk", "se", "reps", "failures", "lambda1_mean", "lambda2_mean"];

/// Aggregated risk of one estimator at one dense-signal level.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRow {
    pub scenario: Scenario,
    pub estimator: EstimatorKind,
    pub q: f64,
    /// Mean loss over successful replications; NaN if none succeeded.
    pub risk: f64,
    pub se: f64,
    /// Successful replications. Analytic sequence rows record 0.
    pub reps: usize,
    pub failures: usize,
    pub lambda1_mean: Penalty,
    pub lambda2_mean: Penalty,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimResult {
    pub rows: Vec<SimRow>,
}

/// Mean of the chosen levels; `+∞` if any choice was infinite, NaN if empty.
pub fn mean_penalty(levels: &[Penalty]) -> Penalty {
    if levels.iter().any(|l| l.is_infinite()) {
        return Penalty::Infinite;
    }
    let sum: f64 = levels.iter().filter_map(|l| l.finite()).sum();
    Penalty::Finite(sum / levels.len() as f64)
}

impl SimResult {
    pub fn find(&self, estimator: EstimatorKind, q: f64) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.q == q)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SIM_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.scenario.to_string(),
                r.estimator.name().to_string(),
                r.q.to_string(),
                r.risk.to_string(),
                r.se.to_string(),
                r.reps.to_string(),
                r.failures.to_string(),
                r.lambda1_mean.to_string(),
                r.lambda2_mean.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_means() {
        assert_eq!(mean_penalty(&[Penalty::Finite(1.0), Penalty::Finite(3.0)]), Penalty::Finite(2.0));
        assert_eq!(mean_penalty(&[Penalty::Finite(1.0), Penalty::Infinite]), Penalty::Infinite);
    }

    #[test]
    fn csv_layout() {
        let r = SimResult {
            rows: vec![SimRow {
                scenario: Scenario::Regression,
                estimator: EstimatorKind::PostLava,
                q: 0.5,
                risk: 0.25,
                se: 0.01,
                reps: 19,
                failures: 1,
                lambda1_mean: Penalty::Finite(0.1),
                lambda2_mean: Penalty::Infinite,
            }],
        };
        assert_eq!(
            r.to_csv_string().unwrap(),
            "scenario,estimator,q,risk,se,reps,failures,lambda1_mean,lambda2_mean\nregression,post-lava,0.5,0.25,0.01,19,1,0.1,inf\n"
        );
    }
}
