//! Seeded simulation experiments comparing the estimators.
//!
//! The sequence scenario evaluates exact risks; the regression scenario
//! draws a fixed design once and replicates the noise, each replication on
//! its own random stream.

mod config;
mod generate;
mod regression;
mod result;
mod sequence;

pub use config::{parse_q_grid, DesignKind, NoiseSource, Scenario, SimConfig, Tuning, CONFIG_KEYS};
pub use generate::{design_covariance, gen_coefficients, gen_design};
pub use regression::{run_regression_experiment, run_replication, RegressionSetup, RepOutcome};
pub use result::{mean_penalty, SimResult, SimRow, SIM_HEADER};
pub use sequence::{run_sequence_experiment, sequence_plug_in};

use crate::error::Result;

/// Runs whichever scenario `cfg` selects.
pub fn run_experiment(cfg: &SimConfig) -> Result<SimResult> {
    match cfg.scenario {
        Scenario::Sequence => run_sequence_experiment(cfg),
        Scenario::Regression => run_regression_experiment(cfg),
    }
}
