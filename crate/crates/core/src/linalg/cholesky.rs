use super::Matrix;
use crate::error::{invalid, Error, Result};

/// Lower-triangular `G` with `M = G G^T`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    pub lower: Matrix,
}

pub fn cholesky(m: &Matrix) -> Result<CholeskyFactor> {
    m.check_symmetric("cholesky input")?;
    let n = m.rows();
    let mut g = Matrix::zeros(n, n);
    for j in 0..n {
        let gj = g.row(j);
        let mut diag = m[(j, j)] - gj[..j].iter().map(|x| x * x).sum::<f64>();
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: diag,
            });
        }
        diag = diag.sqrt();
        g[(j, j)] = diag;
        for i in j + 1..n {
            let s: f64 = g.row(i)[..j]
                .iter()
                .zip(&g.row(j)[..j])
                .map(|(a, b)| a * b)
                .sum();
            g[(i, j)] = (m[(i, j)] - s) / diag;
        }
    }
    Ok(CholeskyFactor { lower: g })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves `G X = B` by forward substitution, column by column of `B`.
    pub fn solve_lower(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(invalid(format!(
                "triangular solve: factor is {n}x{n}, right-hand side has {} rows",
                b.rows()
            )));
        }
        let g = &self.lower;
        let mut x = b.clone();
        for i in 0..n {
            for k in 0..i {
                let gik = g[(i, k)];
                if gik == 0.0 {
                    continue;
                }
                let (done, rest) = x.as_mut_slice().split_at_mut(i * b.cols());
                let xk = &done[k * b.cols()..(k + 1) * b.cols()];
                for (xi, &v) in rest[..b.cols()].iter_mut().zip(xk) {
                    *xi -= gik * v;
                }
            }
            let inv = 1.0 / g[(i, i)];
            for xi in x.row_mut(i) {
                *xi *= inv;
            }
        }
        Ok(x)
    }

    /// `G G^T`
    pub fn reconstruct(&self) -> Matrix {
        self.lower
            .matmul_t(&self.lower)
            .expect("factor is square")
    }
}
