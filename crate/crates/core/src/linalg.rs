//! Thin SVD helpers shared by the solvers and the projection operators.

use nalgebra::{DMatrix, DVector};

use crate::error::{LavaError, Result};

/// `X = U diag(d) V'` with `r = min(n, p)` columns in `U` and `V`, singular
/// values sorted in decreasing order. Values below the numerical-rank
/// threshold are stored as exact zeros.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
    rank: usize,
}

/// `max(rows, cols) · ε · σ_max`.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

impl ThinSvd {
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(LavaError::InvalidInput("SVD of an empty matrix".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LavaError::InvalidInput("matrix has non-finite entries".into()));
        }
        let svd = nalgebra::linalg::SVD::try_new(x.clone(), true, true, f64::EPSILON, 10_000)
            .ok_or_else(|| LavaError::InvalidInput("SVD failed to converge".into()))?;
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V'").transpose();
        let mut d = svd.singular_values;
        let tol = rank_tolerance(n, p, d.max());
        let mut rank = 0;
        for s in d.iter_mut() {
            if *s > tol {
                rank += 1;
            } else {
                *s = 0.0;
            }
        }
        Ok(Self { u, d, v, rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Orthonormal basis of the column space (the first `rank` left vectors).
    pub fn range_basis(&self) -> DMatrix<f64> {
        self.u.columns(0, self.rank).into_owned()
    }

    /// Moore-Penrose pseudo-inverse applied to `y`.
    pub fn pinv_apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let r = self.rank;
        let mut uty = self.u.columns(0, r).tr_mul(y);
        for i in 0..r {
            uty[i] /= self.d[i];
        }
        self.v.columns(0, r) * uty
    }
}

/// Least-squares coefficients `x⁺y`: Householder QR when `x` has clearly
/// full column rank, the SVD pseudo-inverse otherwise.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, k) = x.shape();
    if k <= n && k > 0 {
        let qr = x.clone().qr();
        let r = qr.r();
        let diag = r.diagonal().map(f64::abs);
        if diag.min() > FULL_RANK_RATIO * diag.max() {
            let qty = qr.q().tr_mul(y);
            if let Some(c) = r.solve_upper_triangular(&qty) {
                return Ok(c);
            }
        }
    }
    Ok(ThinSvd::new(x)?.pinv_apply(y))
}

/// Smallest `|R_ii| / max |R_jj|` for which a QR factor is treated as full rank.
pub const FULL_RANK_RATIO: f64 = 1e-7;

/// Columns `cols` of `x`, in order.
pub fn select_columns(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, j| x[(i, cols[j])])
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
