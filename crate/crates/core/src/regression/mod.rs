//! Lava and post-lava in fixed-design regression.
//!
//! The dense part is profiled out in closed form, leaving a lasso problem on
//! ridge-projected data. Degrees of freedom, SURE and the deviation-bound
//! ingredients all act through the SVD of the design.

mod bounds;
mod df;
mod fit;
mod projection;

pub use bounds::{
    bound_components, restricted_eigenvalue_surrogate, score_quantile, score_quantile_with, DeviationReport, RE_MAX_P,
};
pub use df::{
    df_elastic_net, df_elastic_net_from_gram, df_lava_with, df_sure_baseline, df_sure_lava, sure_from_df, DfSure,
};
pub use fit::{fit_estimator, fit_lava_regression, fit_lava_with, fit_post_lava_regression, LavaRegressionFit};
pub use projection::RidgeProjection;
