use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::DesignKind;
use crate::rng::{self, StreamRng};

/// `(3, 0.1q, …, 0.1q)`: one strong coefficient over a dense layer scaled by `q`.
pub fn gen_coefficients(p: usize, q: f64) -> DVector<f64> {
    DVector::from_fn(p, |j, _| if j == 0 { 3.0 } else { 0.1 * q })
}

fn normal_matrix(rng: &mut StreamRng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Row-major fill so the draw order does not depend on storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Loadings of a factor design; drawn first from the design stream.
fn loadings(rng: &mut StreamRng, p: usize, factors: usize) -> DMatrix<f64> {
    normal_matrix(rng, p, factors)
}

/// `n` i.i.d. rows from the design distribution, drawn from the design
/// stream of `seed`.
pub fn gen_design(kind: DesignKind, n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, rng::DESIGN_STREAM);
    match kind {
        DesignKind::Independent => normal_matrix(&mut rng, n, p),
        DesignKind::Factor { factors } => {
            let l = loadings(&mut rng, p, factors);
            let f = normal_matrix(&mut rng, n, factors);
            let e = normal_matrix(&mut rng, n, p);
            f * l.transpose() + e
        }
    }
}

/// Row covariance of the design [`gen_design`] draws for the same arguments.
pub fn design_covariance(kind: DesignKind, p: usize, seed: u64) -> DMatrix<f64> {
    match kind {
        DesignKind::Independent => DMatrix::identity(p, p),
        DesignKind::Factor { factors } => {
            let mut rng = rng::stream(seed, rng::DESIGN_STREAM);
            let l = loadings(&mut rng, p, factors);
            &l * l.transpose() + DMatrix::identity(p, p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert_eq!(gen_coefficients(4, 0.0).as_slice(), &[3.0, 0.0, 0.0, 0.0]);
        assert_eq!(gen_coefficients(4, 1.0).as_slice(), &[3.0, 0.1, 0.1, 0.1]);
        assert_eq!(gen_coefficients(1, 7.0).as_slice(), &[3.0]);
    }

    #[test]
    fn designs_are_deterministic() {
        for kind in [DesignKind::Independent, DesignKind::Factor { factors: 3 }] {
            assert_eq!(gen_design(kind, 5, 4, 3), gen_design(kind, 5, 4, 3));
            assert_ne!(gen_design(kind, 5, 4, 3), gen_design(kind, 5, 4, 4));
        }
    }

    #[test]
    fn independent_moments() {
        let n = 10_000;
        let x = gen_design(DesignKind::Independent, n, 3, 1);
        for j in 0..3 {
            let col = x.column(j);
            let mean = col.mean();
            let var = col.map(|v| (v - mean).powi(2)).sum() / (n as f64 - 1.0);
            // SE of the mean is 0.01, of the variance about 0.014.
            assert!(mean.abs() < 0.05, "mean {mean}");
            assert!((var - 1.0).abs() < 0.07, "var {var}");
        }
    }

    #[test]
    fn factor_covariance_converges() {
        let kind = DesignKind::Factor { factors: 3 };
        let sigma = design_covariance(kind, 4, 9);
        let err = |n: usize| {
            let x = gen_design(kind, n, 4, 9);
            let emp = x.transpose() * &x / n as f64;
            (emp - &sigma).norm() / sigma.norm()
        };
        let (e1, e2) = (err(200), err(20_000));
        assert!(e2 < e1, "{e1} -> {e2}");
        assert!(e2 < 0.05, "{e2}");
    }
}
