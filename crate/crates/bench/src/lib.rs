//! Fixed instances shared by the benchmarks.

use lava_core::lasso::{normalize_design, DesignMatrix};
use lava_core::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Normalized Gaussian design and a sparse-plus-dense response, `θ₁ = 3`,
/// `θⱼ = 0.1` otherwise, unit noise.
pub fn regression_instance(n: usize, p: usize, seed: u64) -> (DesignMatrix, DVector<f64>) {
    let mut r = rng::stream(seed, 0);
    let x = DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal));
    let theta = DVector::from_fn(p, |j, _| if j == 0 { 3.0 } else { 0.1 });
    let y = &x * theta + DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    (normalize_design(&x).expect("Gaussian columns are nonzero"), y)
}
