use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{NoiseSource, Scenario, SimConfig, Tuning};
use super::generate::{gen_coefficients, gen_design};
use super::result::{mean_penalty, SimResult, SimRow};
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::lasso::{normalize_design, DesignMatrix, SolverOptions};
use crate::linalg::ThinSvd;
use crate::regression::fit_estimator;
use crate::rng;
use crate::sequence::McEstimate;
use crate::shrinkage::{Penalty, PenaltyPair};
use crate::tuning::{
    estimate_noise_variance, fold_assignment, tune_cv_family, tune_oracle, tune_sure_family, NoiseOptions, PenaltyGrid,
};

/// The fixed design of a regression experiment.
pub struct RegressionSetup {
    pub raw: DMatrix<f64>,
    pub design: DesignMatrix,
    pub svd: Arc<ThinSvd>,
}

impl RegressionSetup {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let raw = gen_design(cfg.design, cfg.n, cfg.p, cfg.seed);
        let design = if cfg.normalize { normalize_design(&raw)? } else { DesignMatrix::unnormalized(raw.clone())? };
        let svd = Arc::new(ThinSvd::new(design.x())?);
        Ok(Self { raw, design, svd })
    }
}

/// Outcome of one estimator in one replication: loss and chosen penalties.
pub type RepOutcome = Option<(f64, PenaltyPair)>;

/// Noise draw and fold seed of replication `r`; the same for every `q`.
fn replication_noise(seed: u64, r: usize, n: usize) -> (DVector<f64>, u64) {
    let mut stream = rng::stream(seed, r as u64);
    let u = DVector::from_fn(n, |_, _| stream.sample(StandardNormal));
    (u, stream.random())
}

/// Groups estimators that are computed along one shared path, keeping the
/// configured order within each group.
fn families(kinds: &[EstimatorKind]) -> Vec<Vec<EstimatorKind>> {
    let mut groups: Vec<Vec<EstimatorKind>> = Vec::new();
    for &k in kinds {
        match groups.iter_mut().find(|g| g[0].base() == k.base()) {
            Some(g) => {
                if !g.contains(&k) {
                    g.push(k);
                }
            }
            None => groups.push(vec![k]),
        }
    }
    groups
}

/// Tunes and fits every configured estimator on one response draw.
///
/// Post-lava and post-lasso share the path of lava and lasso: under SURE
/// they take the same penalties, under cross-validation each fold's path
/// is fitted once and scored for both.
pub fn run_replication(
    cfg: &SimConfig,
    setup: &RegressionSetup,
    mean: &DVector<f64>,
    y: &DVector<f64>,
    fold_seed: u64,
) -> Vec<RepOutcome> {
    let d = &setup.design;
    let n = d.n();
    let opts = SolverOptions::default();
    let sigma2 = match cfg.noise {
        NoiseSource::Known => Some(cfg.sigma() * cfg.sigma()),
        NoiseSource::Estimated => estimate_noise_variance(d, y, &NoiseOptions::default()).ok().map(|e| e.sigma2),
    };
    let grid =
        sigma2.and_then(|s2| PenaltyGrid::scaled(s2.sqrt(), n, d.p(), cfg.grid_lambda1(), cfg.grid_lambda2()).ok());
    let labels = match cfg.tuning {
        Tuning::Cv { folds } => fold_assignment(n, folds, fold_seed).ok(),
        _ => None,
    };
    let loss = |fitted: &DVector<f64>| (fitted - mean).norm_squared() / n as f64;
    let mut outcomes: BTreeMap<EstimatorKind, (f64, PenaltyPair)> = BTreeMap::new();

    for family in families(&cfg.estimators) {
        let results: Result<Vec<(EstimatorKind, f64, PenaltyPair)>> = (|| {
            if family == [EstimatorKind::Ml] {
                let pair = PenaltyPair { lambda1: Penalty::Infinite, lambda2: Penalty::Finite(0.0) };
                return Ok(vec![(
                    EstimatorKind::Ml,
                    loss(&fit_estimator(EstimatorKind::Ml, d, y, pair, &opts)?.fitted),
                    pair,
                )]);
            }
            let grid = grid.as_ref().ok_or_else(|| LavaError::InvalidInput("no usable noise level".into()))?;
            let tuned = match cfg.tuning {
                Tuning::Cv { .. } => {
                    let labels = labels.as_ref().ok_or_else(|| LavaError::InvalidInput("no fold assignment".into()))?;
                    tune_cv_family(&family, d, y, grid, labels, &opts)?
                }
                Tuning::Oracle => family
                    .iter()
                    .map(|&k| tune_oracle(k, d, y, mean, grid, &setup.svd, &opts))
                    .collect::<Result<Vec<_>>>()?,
                Tuning::Sure => {
                    let s2 = sigma2.expect("grid exists only with a noise level");
                    tune_sure_family(&family, d, y, grid, s2, &setup.svd, &opts)?
                }
                Tuning::PlugIn => {
                    return Err(LavaError::InvalidInput("plug-in tuning needs the sequence scenario".into()))
                }
            };
            Ok(tuned.into_iter().map(|t| (t.kind, loss(&t.fit.fitted), t.chosen)).collect())
        })();
        // A failed family search fails each member; retry members alone so
        // one bad refit does not sink its partner.
        match results {
            Ok(list) => {
                for (k, l, p) in list {
                    outcomes.insert(k, (l, p));
                }
            }
            Err(_) if family.len() > 1 => {
                for &k in &family {
                    let single = SimConfig { estimators: vec![k], ..cfg.clone() };
                    if let Some(Some(o)) = run_replication(&single, setup, mean, y, fold_seed).pop() {
                        outcomes.insert(k, o);
                    }
                }
            }
            Err(_) => {}
        }
    }
    cfg.estimators.iter().map(|k| outcomes.get(k).copied()).collect()
}

/// Prediction risk `(1/n)‖Xθ̂ - Xθ‖²` per estimator and `q`, averaged over
/// replications that share one fixed design.
pub fn run_regression_experiment(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if cfg.scenario != Scenario::Regression {
        return Err(LavaError::InvalidInput("run_regression_experiment needs scenario=regression".into()));
    }
    let setup = RegressionSetup::new(cfg)?;
    let sigma = cfg.sigma();
    let mut rows = Vec::new();
    for &q in &cfg.q_grid {
        let mean = &setup.raw * gen_coefficients(cfg.p, q);
        let outcomes: Vec<Vec<RepOutcome>> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let (u, fold_seed) = replication_noise(cfg.seed, r, cfg.n);
                let y = &mean + u * sigma;
                run_replication(cfg, &setup, &mean, &y, fold_seed)
            })
            .collect();
        for (e, &kind) in cfg.estimators.iter().enumerate() {
            let ok: Vec<(f64, PenaltyPair)> = outcomes.iter().filter_map(|o| o[e]).collect();
            let losses: Vec<f64> = ok.iter().map(|o| o.0).collect();
            let (risk, se) = if losses.is_empty() {
                (f64::NAN, 0.0)
            } else {
                let est = McEstimate::from_samples(&losses);
                (est.mean, est.se)
            };
            let l1: Vec<Penalty> = ok.iter().map(|o| o.1.lambda1).collect();
            let l2: Vec<Penalty> = ok.iter().map(|o| o.1.lambda2).collect();
            rows.push(SimRow {
                scenario: Scenario::Regression,
                estimator: kind,
                q,
                risk,
                se,
                reps: ok.len(),
                failures: cfg.reps - ok.len(),
                lambda1_mean: mean_penalty(&l1),
                lambda2_mean: mean_penalty(&l2),
            });
        }
    }
    Ok(SimResult { rows })
}
