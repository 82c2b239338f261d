use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::risk::apply_rule;
use super::SequenceModel;
use crate::error::{LavaError, Result};
use crate::estimator::EstimatorKind;
use crate::rng;
use crate::shrinkage::PenaltyPair;

/// Replications per RNG stream; fixed so output never depends on thread count.
const CHUNK: usize = 1024;

/// Sample mean of a loss and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { mean, se: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, se: (var / n).sqrt() }
    }
}

/// Monte Carlo estimate of `E‖d(Z) - θ‖²` from `reps` seeded draws.
pub fn mc_risk(
    kind: EstimatorKind,
    model: &SequenceModel,
    p: PenaltyPair,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    if reps < 2 {
        return Err(LavaError::InvalidInput(format!("mc_risk needs reps >= 2, got {reps}")));
    }
    apply_rule(kind, 0.0, p)?;
    let chunks = reps.div_ceil(CHUNK);
    let losses: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = CHUNK.min(reps - c * CHUNK);
            (0..len)
                .map(|_| {
                    model
                        .theta
                        .iter()
                        .map(|&t| {
                            let e: f64 = r.sample(StandardNormal);
                            let z = t + model.sigma * e;
                            // Penalties were validated above.
                            let d = apply_rule(kind, z, p).unwrap_or(f64::NAN);
                            (d - t).powi(2)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(McEstimate::from_samples(&losses.concat()))
}
