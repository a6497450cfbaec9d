//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! the implicit QL algorithm (after the EISPACK `tred2`/`tql2` pair).

use super::Matrix;
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Columns are orthonormal eigenvectors.
    pub vectors: Matrix,
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    /// `V diag(values) V^T`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled
            .matmul_t(&self.vectors)
            .expect("eigenvector matrix is square")
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn sym_eig(m: &Matrix) -> Result<EigenDecomposition> {
    m.check_symmetric("sym_eig input")?;
    let n = m.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            vectors: Matrix::zeros(0, 0),
            values: Vec::new(),
        });
    }

    // Work on the symmetrized input so tiny asymmetries do not leak in.
    let mut v = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);

    // tql2 rotates columns of V; keep them as rows of Z = V^T for locality.
    let mut z = v.transpose();
    tql2(&mut z, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| z[(order[j], i)]);
    Ok(EigenDecomposition { vectors, values })
}

fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (d, e). `z` holds eigenvectors as rows.
fn tql2(z: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = z.as_mut_slice().split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_i1 = &mut hi[..n];
                    for (zi, zi1) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let hk = *zi1;
                        *zi1 = s * *zi + c * hk;
                        *zi = c * *zi - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    fn orthonormality_error(v: &Matrix) -> f64 {
        let vtv = v.t_matmul(v).unwrap();
        max_abs_diff(vtv.as_slice(), Matrix::identity(v.rows()).as_slice())
    }

    #[test]
    fn identity() {
        let eig = sym_eig(&Matrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
        assert!(orthonormality_error(&eig.vectors) < 1e-12);
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let eig = sym_eig(&Matrix::from_diag(&[3.0, 2.0])).unwrap();
        assert!((eig.values[0] - 2.0).abs() < 1e-15);
        assert!((eig.values[1] - 3.0).abs() < 1e-15);
        assert!(eig.vectors[(1, 0)].abs() > 0.999_999);
    }

    #[test]
    fn one_by_one() {
        let eig = sym_eig(&Matrix::from_diag(&[-4.5])).unwrap();
        assert_eq!(eig.values, vec![-4.5]);
        assert_eq!(eig.vectors[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn random_reconstruction() {
        for seed in 0..20 {
            let n = 1 + (seed as usize % 9);
            let m = random_symmetric(n, seed);
            let eig = sym_eig(&m).unwrap();
            let err = max_abs_diff(eig.reconstruct().as_slice(), m.as_slice());
            assert!(err < 1e-10, "n={n} err={err}");
            assert!(orthonormality_error(&eig.vectors) < 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        // rank-one plus identity: eigenvalue 1 with multiplicity n-1
        let u = [1.0, 2.0, -1.0, 0.5];
        let mut m = Matrix::from_fn(4, 4, |i, j| u[i] * u[j]);
        m.add_diag(1.0);
        let eig = sym_eig(&m).unwrap();
        for &l in &eig.values[..3] {
            assert!((l - 1.0).abs() < 1e-12);
        }
        assert!((eig.values[3] - (1.0 + 6.25)).abs() < 1e-12);
        assert!(max_abs_diff(eig.reconstruct().as_slice(), m.as_slice()) < 1e-12);
    }

    #[test]
    fn psd_eigenvalues_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = Matrix::from_fn(8, 3, |_, _| rng.gen_range(-1.0..1.0));
        let k = b.matmul_t(&b).unwrap();
        let eig = sym_eig(&k).unwrap();
        let bound = -1e-10 * eig.max_abs_value();
        assert!(eig.values.iter().all(|&l| l >= bound));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sym_eig(&Matrix::zeros(2, 3)).is_err());
        let m = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(sym_eig(&m).is_err());
    }
}
