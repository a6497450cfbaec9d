//! Column-stacking `vec`, implicit Kronecker products, and the commutation,
//! symmetrizer and skew-symmetrizer operators on vectorized square matrices.

use super::Matrix;
use crate::error::{invalid, Result};

/// Stacks the columns of `m`.
pub fn vec(m: &Matrix) -> Vec<f64> {
    m.transpose().into_vec()
}

/// Inverse of [`vec`] for a `rows x (len / rows)` matrix.
pub fn unvec(v: &[f64], rows: usize) -> Result<Matrix> {
    if rows == 0 || v.len() % rows != 0 {
        return Err(invalid(format!(
            "cannot unvec a vector of length {} into {rows} rows",
            v.len()
        )));
    }
    let cols = v.len() / rows;
    Ok(Matrix::from_row_major(cols, rows, v.to_vec())?.transpose())
}

fn square_side(len: usize) -> Result<usize> {
    let p = (len as f64).sqrt().round() as usize;
    if p * p != len || p == 0 {
        return Err(invalid(format!("vector length {len} is not a perfect square")));
    }
    Ok(p)
}

fn check_square_len(v: &[f64], p: usize) -> Result<()> {
    if v.len() != p * p {
        return Err(invalid(format!(
            "expected a vector of length {} (p = {p}), got {}",
            p * p,
            v.len()
        )));
    }
    Ok(())
}

/// `(M ⊗ N) v` computed as `vec(N V M^T)` with `V = unvec(v)`.
pub fn kron_matvec(m: &Matrix, n: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.cols() * n.cols() {
        return Err(invalid(format!(
            "kron_matvec: ({}x{}) ⊗ ({}x{}) applied to a vector of length {}",
            m.rows(),
            m.cols(),
            n.rows(),
            n.cols(),
            v.len()
        )));
    }
    // Row-major storage of V^T is exactly vec(V).
    let vt = Matrix::from_row_major(m.cols(), n.cols(), v.to_vec())?;
    // vec(N V M^T) is the row-major data of (N V M^T)^T = M V^T N^T.
    let out = m.matmul(&vt)?.matmul_t(n)?;
    Ok(out.into_vec())
}

/// Materializes `M ⊗ N`. Only meant for small problems and test oracles.
pub fn kron_explicit(m: &Matrix, n: &Matrix) -> Matrix {
    let (mr, mc) = m.shape();
    let (nr, nc) = n.shape();
    Matrix::from_fn(mr * nr, mc * nc, |row, col| {
        m[(row / nr, col / nc)] * n[(row % nr, col % nc)]
    })
}

/// `P v = vec(M^T)` where `M = unvec(v, p)`.
pub fn apply_commutation(v: &[f64], p: usize) -> Result<Vec<f64>> {
    check_square_len(v, p)?;
    let mut out = vec![0.0; v.len()];
    for j in 0..p {
        for i in 0..p {
            out[i * p + j] = v[j * p + i];
        }
    }
    Ok(out)
}

fn half_combine(v: &[f64], p: usize, sign: f64) -> Result<Vec<f64>> {
    check_square_len(v, p)?;
    let mut out = vec![0.0; v.len()];
    for j in 0..p {
        for i in 0..p {
            out[j * p + i] = 0.5 * (v[j * p + i] + sign * v[i * p + j]);
        }
    }
    Ok(out)
}

/// `S v = ½ vec(M + M^T)`.
pub fn apply_symmetrizer(v: &[f64], p: usize) -> Result<Vec<f64>> {
    half_combine(v, p, 1.0)
}

/// `A v = ½ vec(M - M^T)`.
pub fn apply_skew_symmetrizer(v: &[f64], p: usize) -> Result<Vec<f64>> {
    half_combine(v, p, -1.0)
}

/// Infers `p` from `len(v) = p²`.
pub fn infer_side(v: &[f64]) -> Result<usize> {
    square_side(v.len())
}
