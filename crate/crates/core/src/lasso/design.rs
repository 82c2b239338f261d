use nalgebra::{DMatrix, DVector};

use crate::error::{LavaError, Result};

/// A fixed design with the column scales needed to map coefficients back
/// to the original units.
///
/// When `normalized`, every column satisfies `‖x_j‖²/n = 1`. Then
/// `x_normalized[:, j] = x_raw[:, j] / scale_j`, so a coefficient `b_j` on the
/// normalized column is `b_j / scale_j` on the raw one.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    column_scales: DVector<f64>,
    normalized: bool,
}

impl DesignMatrix {
    /// Uses `x` unchanged, with unit scales.
    pub fn unnormalized(x: DMatrix<f64>) -> Result<Self> {
        check_shape(&x)?;
        let p = x.ncols();
        Ok(Self { x, column_scales: DVector::from_element(p, 1.0), normalized: false })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_scales(&self) -> &DVector<f64> {
        &self.column_scales
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Coefficients on the stored columns expressed on the raw columns.
    pub fn to_original_scale(&self, coef: &DVector<f64>) -> DVector<f64> {
        coef.component_div(&self.column_scales)
    }

    /// Rows `rows` of the raw design.
    pub fn raw_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.p(), |i, j| self.x[(rows[i], j)] * self.column_scales[j])
    }
}

fn check_shape(x: &DMatrix<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(LavaError::InvalidInput("design must have at least one row and one column".into()));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(LavaError::InvalidInput(format!("design has a non-finite entry {v}")));
    }
    Ok(())
}

/// Scales each column to `‖x_j‖²/n = 1`.
pub fn normalize_design(raw: &DMatrix<f64>) -> Result<DesignMatrix> {
    check_shape(raw)?;
    let n = raw.nrows() as f64;
    let mut x = raw.clone();
    let mut scales = DVector::zeros(raw.ncols());
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let s = (col.norm_squared() / n).sqrt();
        if s == 0.0 {
            return Err(LavaError::ZeroColumn { column: j });
        }
        col /= s;
        scales[j] = s;
    }
    Ok(DesignMatrix { x, column_scales: scales, normalized: true })
}
