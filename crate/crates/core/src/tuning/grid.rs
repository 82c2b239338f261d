use std::fmt;
use std::io::Write;

use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::shrinkage::{Penalty, PenaltyPair};
use crate::util::log_spaced;

/// Candidate penalty levels, each axis positive and strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyGrid {
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(LavaError::InvalidInput(format!("{name} grid is empty")));
    }
    if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(LavaError::InvalidInput(format!("{name} grid values must be positive and finite")));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LavaError::InvalidInput(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

impl PenaltyGrid {
    pub fn new(lambda1: Vec<f64>, lambda2: Vec<f64>) -> Result<Self> {
        check_axis("lambda1", &lambda1)?;
        check_axis("lambda2", &lambda2)?;
        Ok(Self { lambda1, lambda2 })
    }

    /// 30 levels of λ₁ over `[0.01, 10]·2σ̂√(log(2p)/n)` and 30 of λ₂ over
    /// `[1e-4, 1e4]`, log-spaced.
    pub fn default_for(sigma_hat: f64, n: usize, p: usize) -> Result<Self> {
        Self::scaled(sigma_hat, n, p, 30, 30)
    }

    pub fn scaled(sigma_hat: f64, n: usize, p: usize, n1: usize, n2: usize) -> Result<Self> {
        let base = 2.0 * sigma_hat * ((2.0 * p as f64).ln() / n as f64).sqrt();
        if !(base > 0.0 && base.is_finite()) {
            return Err(LavaError::InvalidInput(format!("cannot scale the grid with sigma={sigma_hat}, n={n}, p={p}")));
        }
        Self::new(log_spaced(0.01 * base, 10.0 * base, n1), log_spaced(1e-4, 1e4, n2))
    }

    /// Parses `lambda1=LO:HI:N;lambda2=LO:HI:N` (log-spaced). Either axis may
    /// be omitted, in which case `fallback` supplies it.
    pub fn parse_spec(spec: &str, fallback: &PenaltyGrid) -> Result<Self> {
        let mut l1 = fallback.lambda1.clone();
        let mut l2 = fallback.lambda2.clone();
        for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, range) = part
                .split_once('=')
                .ok_or_else(|| LavaError::InvalidInput(format!("grid spec entry {part:?} lacks '='")))?;
            let fields: Vec<&str> = range.split(':').collect();
            let bad = || LavaError::InvalidInput(format!("grid range {range:?} must be LO:HI:N"));
            if fields.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = fields[0].trim().parse().map_err(|_| bad())?;
            let hi: f64 = fields[1].trim().parse().map_err(|_| bad())?;
            let n: usize = fields[2].trim().parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi >= lo) || n == 0 || (n > 1 && hi == lo) {
                return Err(bad());
            }
            let axis = log_spaced(lo, hi, n);
            match key.trim() {
                "lambda1" => l1 = axis,
                "lambda2" => l2 = axis,
                other => return Err(LavaError::InvalidInput(format!("unknown grid axis {other:?}"))),
            }
        }
        Self::new(l1, l2)
    }

    pub fn lambda1(&self) -> &[f64] {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &[f64] {
        &self.lambda2
    }

    /// Axes searched for `kind`: an empty list stands for the fixed limit
    /// level of that axis (`+∞`, or zero ridge for least squares).
    pub(crate) fn axes(&self, kind: EstimatorKind) -> (Vec<Penalty>, Vec<Penalty>) {
        let fin = |v: &[f64]| v.iter().map(|x| Penalty::Finite(*x)).collect::<Vec<_>>();
        match kind {
            EstimatorKind::Lava | EstimatorKind::PostLava | EstimatorKind::ElasticNet => {
                (fin(&self.lambda1), fin(&self.lambda2))
            }
            EstimatorKind::Lasso | EstimatorKind::PostLasso => (fin(&self.lambda1), vec![Penalty::Infinite]),
            EstimatorKind::Ridge => (vec![Penalty::Infinite], fin(&self.lambda2)),
            EstimatorKind::Ml => (vec![Penalty::Infinite], vec![Penalty::Finite(0.0)]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TuneMethod {
    Sure,
    Cv,
    /// Distance to a known mean; simulation only.
    Oracle,
}

impl fmt::Display for TuneMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuneMethod::Sure => "sure",
            TuneMethod::Cv => "cv",
            TuneMethod::Oracle => "oracle",
        })
    }
}

/// One evaluated grid point; `criterion` is `None` when the fit failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub penalties: PenaltyPair,
    pub criterion: Option<f64>,
}

/// Minimum of a criterion surface; ties go to the heavier penalty pair.
pub fn surface_argmin(surface: &[SurfacePoint]) -> Option<(PenaltyPair, f64)> {
    let mut best: Option<(PenaltyPair, f64)> = None;
    for pt in surface {
        let Some(v) = pt.criterion else { continue };
        best = match best {
            None => Some((pt.penalties, v)),
            Some((bp, bv)) if v < bv || (v == bv && pt.penalties.at_least_as_heavy(&bp)) => Some((pt.penalties, v)),
            keep => keep,
        };
    }
    best
}

/// Writes `method,lambda1,lambda2,criterion`; failed points are omitted.
pub fn write_surface_csv<W: Write>(method: TuneMethod, surface: &[SurfacePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "lambda1", "lambda2", "criterion"])?;
    for pt in surface {
        if let Some(v) = pt.criterion {
            w.write_record([
                method.to_string(),
                pt.penalties.lambda1.to_string(),
                pt.penalties.lambda2.to_string(),
                v.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PenaltyGrid::new(vec![], vec![1.0]).is_err());
        assert!(PenaltyGrid::new(vec![1.0, 1.0], vec![1.0]).is_err());
        assert!(PenaltyGrid::new(vec![0.0], vec![1.0]).is_err());
        assert!(PenaltyGrid::new(vec![0.1, 1.0], vec![1.0]).is_ok());
    }

    #[test]
    fn default_grid_shape() {
        let g = PenaltyGrid::default_for(1.0, 100, 200).unwrap();
        assert_eq!(g.lambda1().len(), 30);
        assert_eq!(g.lambda2().len(), 30);
        let base = 2.0 * ((400f64).ln() / 100.0).sqrt();
        assert!((g.lambda1()[0] - 0.01 * base).abs() < 1e-15);
        assert_eq!(g.lambda2()[29], 1e4);
    }

    #[test]
    fn parse_spec() {
        let fb = PenaltyGrid::new(vec![1.0], vec![2.0]).unwrap();
        let g = PenaltyGrid::parse_spec("lambda1=0.01:1:3; lambda2=0.1:10:2", &fb).unwrap();
        assert_eq!(g.lambda1().len(), 3);
        assert!((g.lambda1()[1] - 0.1).abs() < 1e-15);
        assert_eq!(g.lambda2(), &[0.1, 10.0]);
        let only = PenaltyGrid::parse_spec("lambda2=1:1:1", &fb).unwrap();
        assert_eq!(only.lambda1(), &[1.0]);
        assert!(PenaltyGrid::parse_spec("lambda3=1:2:3", &fb).is_err());
        assert!(PenaltyGrid::parse_spec("lambda1=1:2", &fb).is_err());
        assert!(PenaltyGrid::parse_spec("lambda1=-1:2:3", &fb).is_err());
    }

    #[test]
    fn argmin_prefers_heavier_on_ties() {
        let pt = |a: f64, b: f64, v: Option<f64>| SurfacePoint {
            penalties: PenaltyPair::from_f64(a, b).unwrap(),
            criterion: v,
        };
        let s = [pt(1.0, 1.0, Some(0.5)), pt(2.0, 1.0, Some(0.5)), pt(0.5, 3.0, Some(0.7)), pt(9.0, 9.0, None)];
        let (p, v) = surface_argmin(&s).unwrap();
        assert_eq!(p, PenaltyPair::from_f64(2.0, 1.0).unwrap());
        assert_eq!(v, 0.5);
        assert!(surface_argmin(&[pt(1.0, 1.0, None)]).is_none());
    }

    #[test]
    fn surface_csv() {
        let s = [SurfacePoint { penalties: PenaltyPair::lasso(0.5).unwrap(), criterion: Some(1.25) }];
        let mut buf = Vec::new();
        write_surface_csv(TuneMethod::Cv, &s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "method,lambda1,lambda2,criterion\ncv,0.5,inf,1.25\n");
    }
}
