//! Small dense helpers shared by the analytic modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) fn ensure_square<T: nalgebra::Scalar>(m: &DMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn ensure_finite(m: &RealMatrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn max_abs_complex(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Symmetrizes `m` if its asymmetry is below `rel_tol * max(1, max|m_ij|)`.
pub fn symmetrized(m: &RealMatrix, rel_tol: f64) -> Result<RealMatrix> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let asymmetry = max_abs(&(m - m.transpose()));
    let tolerance = rel_tol * max_abs(m).max(1.0);
    if asymmetry > tolerance {
        return Err(Error::NotSymmetric { asymmetry, tolerance });
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(m: &RealMatrix) -> Result<RealMatrix> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let out = m.clone().exp();
    ensure_finite(&out)?;
    Ok(out)
}

pub fn expm_complex(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.clone().exp())
}

/// `xᵀ M x`.
pub(crate) fn quad_form(m: &RealMatrix, x: &DVector<f64>) -> f64 {
    x.dot(&(m * x))
}

/// Row-major flattening, the layout used by config files.
pub fn to_row_major(m: &RealMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn from_row_major(dim: usize, data: &[f64]) -> Result<RealMatrix> {
    if data.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: data.len(),
        });
    }
    Ok(RealMatrix::from_row_slice(dim, dim, data))
}
