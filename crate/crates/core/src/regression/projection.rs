use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{LavaError, Result};
use crate::lasso::{DesignMatrix, QuadraticProblem};
use crate::linalg::ThinSvd;
use crate::shrinkage::Penalty;

/// The ridge hat matrix `P = X(X'X + nλ₂I)⁻¹X'`, its complement `K = I - P`
/// and `K^{1/2}`, all applied through the thin SVD `X = U diag(d) V'`.
///
/// With `w_i = d_i²/(d_i² + nλ₂)` and `s_i = √(1 - w_i)`:
/// `P = U diag(w) U'` and `K^{1/2} = I + U diag(s - 1) U'`. The infinite
/// level gives `P = 0`; the zero level gives the projection onto the column
/// space of `X`.
#[derive(Clone, Debug)]
pub struct RidgeProjection {
    lambda2: Penalty,
    svd: Arc<ThinSvd>,
    hat: DVector<f64>,
    root: DVector<f64>,
}

impl RidgeProjection {
    pub fn new(d: &DesignMatrix, lambda2: Penalty) -> Result<Self> {
        Self::from_svd(Arc::new(ThinSvd::new(d.x())?), lambda2)
    }

    pub fn from_svd(svd: Arc<ThinSvd>, lambda2: Penalty) -> Result<Self> {
        let n = svd.u.nrows() as f64;
        let hat = match lambda2 {
            Penalty::Infinite => DVector::zeros(svd.d.len()),
            Penalty::Finite(l2) if l2 >= 0.0 && l2.is_finite() => {
                svd.d.map(|di| if di == 0.0 { 0.0 } else { di * di / (di * di + n * l2) })
            }
            Penalty::Finite(l2) => {
                return Err(LavaError::InvalidPenalty(format!("ridge level must be >= 0, got {l2}")))
            }
        };
        let root = hat.map(|w| (1.0 - w).max(0.0).sqrt());
        Ok(Self { lambda2, svd, hat, root })
    }

    pub fn lambda2(&self) -> Penalty {
        self.lambda2
    }

    pub fn svd(&self) -> &Arc<ThinSvd> {
        &self.svd
    }

    pub fn n(&self) -> usize {
        self.svd.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.svd.v.nrows()
    }

    /// Eigenvalues `w_i` of `P` on the span of `U`; `P` vanishes elsewhere.
    pub fn hat_weights(&self) -> &DVector<f64> {
        &self.hat
    }

    fn apply_diag(&self, y: &DVector<f64>, f: impl Fn(usize) -> f64) -> DVector<f64> {
        let mut c = self.svd.u.tr_mul(y);
        for i in 0..c.len() {
            c[i] *= f(i);
        }
        &self.svd.u * c
    }

    pub fn apply_p(&self, y: &DVector<f64>) -> DVector<f64> {
        self.apply_diag(y, |i| self.hat[i])
    }

    pub fn apply_k(&self, y: &DVector<f64>) -> DVector<f64> {
        y - self.apply_p(y)
    }

    pub fn apply_k_half(&self, y: &DVector<f64>) -> DVector<f64> {
        y + self.apply_diag(y, |i| self.root[i] - 1.0)
    }

    /// `X'K y = V diag(d s²) U'y`.
    pub fn xt_k(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut c = self.svd.u.tr_mul(y);
        for i in 0..c.len() {
            c[i] *= self.svd.d[i] * self.root[i] * self.root[i];
        }
        &self.svd.v * c
    }

    /// `(X'X + nλ₂I)⁻¹X' r`; the minimum-norm least-squares solution at
    /// `λ₂ = 0` and zero at `λ₂ = ∞`.
    pub fn dense_part(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = self.n() as f64;
        let mut c = self.svd.u.tr_mul(r);
        for i in 0..c.len() {
            let di = self.svd.d[i];
            c[i] *= match self.lambda2 {
                _ if di == 0.0 => 0.0,
                Penalty::Infinite => 0.0,
                Penalty::Finite(l2) => di / (di * di + n * l2),
            };
        }
        &self.svd.v * c
    }

    /// `X̃ = K^{1/2}X = U diag(s d) V'`.
    pub fn x_tilde(&self) -> DMatrix<f64> {
        let sd = self.svd.d.component_mul(&self.root);
        &self.svd.u * DMatrix::from_diagonal(&sd) * self.svd.v.transpose()
    }

    /// `X̃'X̃/n = V diag(s²d²/n) V'`.
    pub fn profiled_gram(&self) -> DMatrix<f64> {
        let n = self.n() as f64;
        let e = self.svd.d.zip_map(&self.root, |d, s| s * s * d * d / n);
        let ve = &self.svd.v * DMatrix::from_diagonal(&e);
        ve * self.svd.v.transpose()
    }

    /// The lasso problem in `δ` left after minimising over the dense part:
    /// `‖K^{1/2}(y - Xδ)‖²/n`.
    pub fn profiled_problem(&self, gram: Arc<DMatrix<f64>>, y: &DVector<f64>) -> QuadraticProblem {
        let n = self.n() as f64;
        let uty = self.svd.u.tr_mul(y);
        let explained: f64 = uty.iter().zip(self.hat.iter()).map(|(c, w)| w * c * c).sum();
        QuadraticProblem { a: gram, b: self.xt_k(y) / n, c: (y.norm_squared() - explained) / n }
    }

    pub fn trace_p(&self) -> f64 {
        self.hat.sum()
    }

    pub fn trace_p_sq(&self) -> f64 {
        self.hat.norm_squared()
    }

    /// Operator norm of `P²`.
    pub fn norm_p_sq(&self) -> f64 {
        self.hat.iter().fold(0.0, |m, w| m.max(w * w))
    }

    /// Operator norm of `K`; 1 whenever `K` has a direction outside the span
    /// of `U` or a null singular value.
    pub fn norm_k(&self) -> f64 {
        if self.n() > self.hat.len() {
            return 1.0;
        }
        self.hat.iter().fold(0.0, |m, w| m.max(1.0 - w))
    }
}
