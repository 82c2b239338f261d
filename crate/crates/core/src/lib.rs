//! Lava and post-lava estimation of sparse plus dense signals.
//!
//! The crate covers the scalar shrinkage rules, exact risks in the Gaussian
//! sequence model, penalised least squares solvers, lava in fixed-design
//! regression, penalty tuning and a seeded simulation harness.

pub mod error;
pub mod estimator;
pub mod lasso;
pub mod linalg;
pub mod normal;
pub mod regression;
pub mod rng;
pub mod sequence;
pub mod shrinkage;
pub mod sim;
pub mod tuning;
pub mod util;

pub use error::{LavaError, Result};
pub use estimator::EstimatorKind;
pub use lasso::{DesignMatrix, LassoFit, SolverOptions};
pub use regression::{LavaRegressionFit, RidgeProjection};
pub use sequence::{RiskTable, SequenceModel, SignalSplit};
pub use shrinkage::{LavaWeights, Penalty, PenaltyPair, ScalarSplit};
pub use sim::{SimConfig, SimResult};
pub use tuning::{PenaltyGrid, TuneResult};
