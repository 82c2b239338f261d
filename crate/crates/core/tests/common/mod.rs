//! Brute-force oracles and instance builders shared by the integration tests.
#![allow(dead_code)]

use lava_core::lasso::DesignMatrix;
use lava_core::rng;
use lava_core::shrinkage::soft_threshold;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn normal_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 0);
    DMatrix::from_fn(n, p, |_, _| r.sample(StandardNormal))
}

pub fn normal_vector(n: usize, seed: u64, index: u64) -> DVector<f64> {
    let mut r = rng::stream(seed, index);
    DVector::from_fn(n, |_, _| r.sample(StandardNormal))
}

/// `X` with `X'X/n = I`, from the thin QR of a Gaussian matrix.
pub fn orthonormal_design(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    assert!(n >= p);
    let q = normal_matrix(n, p, seed).qr().q();
    q * (n as f64).sqrt()
}

/// Columns sharing one factor: `x_j = f + noise_scale * e_j`.
pub fn collinear_design(n: usize, p: usize, noise_scale: f64, seed: u64) -> DMatrix<f64> {
    let f = normal_vector(n, seed, 1);
    let e = normal_matrix(n, p, seed ^ 0x5eed);
    DMatrix::from_fn(n, p, |i, j| f[i] + noise_scale * e[(i, j)])
}

pub fn design(x: DMatrix<f64>) -> DesignMatrix {
    DesignMatrix::unnormalized(x).unwrap()
}

/// Minimises `(z-b-d)² + λ₂b² + λ₁|d|` over a grid that zooms around the
/// incumbent. The objective is convex, so the zoom cannot lose the minimum.
pub fn brute_force_scalar_lava(z: f64, l1: f64, l2: f64) -> (f64, f64) {
    let f = |b: f64, d: f64| (z - b - d).powi(2) + l2 * b * b + l1 * d.abs();
    let (mut cb, mut cd) = (0.0, 0.0);
    let mut half = z.abs() + 1.0;
    const STEPS: i32 = 40;
    for _ in 0..30 {
        let h = half / STEPS as f64;
        let (mut best, mut bb, mut bd) = (f64::INFINITY, cb, cd);
        for i in -STEPS..=STEPS {
            for j in -STEPS..=STEPS {
                let (b, d) = (cb + i as f64 * h, cd + j as f64 * h);
                // Exact zero for the sparse part must be reachable.
                let d = if d.abs() < 0.5 * h { 0.0 } else { d };
                let v = f(b, d);
                if v < best {
                    best = v;
                    bb = b;
                    bd = d;
                }
            }
        }
        cb = bb;
        cd = bd;
        half = 4.0 * h;
    }
    (cb, cd)
}

/// Joint minimiser of `(1/n)‖Y - X(β+δ)‖² + λ₂‖β‖² + λ₁‖δ‖₁` by alternating
/// an exact ridge step in `β` with exact coordinate steps in `δ`.
pub fn alternating_lava(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    l1: f64,
    l2: f64,
    tol: f64,
) -> (DVector<f64>, DVector<f64>) {
    let (n, p) = x.shape();
    let nf = n as f64;
    let ridge = (x.transpose() * x + DMatrix::identity(p, p) * (nf * l2)).cholesky().unwrap();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared() / nf).collect();
    let mut beta = DVector::zeros(p);
    let mut delta = DVector::<f64>::zeros(p);
    for _ in 0..1_000_000 {
        let new_beta = ridge.solve(&(x.transpose() * (y - x * &delta)));
        let mut r = y - x * (&new_beta + &delta);
        let mut moved = (&new_beta - &beta).amax();
        beta = new_beta;
        for j in 0..p {
            let xj = x.column(j);
            let old = delta[j];
            let rho = xj.dot(&r) / nf + col_sq[j] * old;
            let new = soft_threshold(rho, 0.5 * l1) / col_sq[j];
            if new != old {
                r.axpy(old - new, &xj, 1.0);
                delta[j] = new;
                moved = moved.max((new - old).abs());
            }
        }
        if moved < tol {
            break;
        }
    }
    (beta, delta)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
