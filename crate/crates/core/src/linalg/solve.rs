use super::Matrix;
use crate::error::{invalid, Error, Result};

/// Pivots smaller than this (relative to `max|M|`) are treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Solves `M x = b` by LU factorization with partial pivoting.
pub fn dense_solve(m: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.rows();
    if !m.is_square() {
        return Err(invalid(format!(
            "dense_solve needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if b.len() != n {
        return Err(invalid(format!(
            "dense_solve: {n}x{n} system with right-hand side of length {}",
            b.len()
        )));
    }
    let scale = m.max_abs();
    let tol = PIVOT_TOL * if scale > 0.0 { scale } else { 1.0 };

    let mut lu = m.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val <= tol {
            return Err(Error::SingularMatrix {
                column: col,
                pivot: piv_val,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            x.swap(col, piv);
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / d;
            if factor == 0.0 {
                continue;
            }
            lu[(r, col)] = 0.0;
            let (top, bottom) = lu.as_mut_slice().split_at_mut(r * n);
            let pivot_row = &top[col * n + col + 1..col * n + n];
            let row = &mut bottom[col + 1..n];
            for (a, &p) in row.iter_mut().zip(pivot_row) {
                *a -= factor * p;
            }
            x[r] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| lu[(i, j)] * x[j]).sum();
        x[i] = (x[i] - s) / lu[(i, i)];
    }
    Ok(x)
}
