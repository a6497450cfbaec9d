//! O(p³) solvers for complete training graphs.
//!
//! A shifted Kronecker system `(M ⊗ N + λI) vec(A) = vec(Y)` with
//! diagonalizable `M = V Λ V⁻¹` and `N = U Σ U⁻¹` has the solution
//! `A = U (C ⊙ E) V^T` where `E = U⁻¹ Y V⁻ᵀ` and `C[i][j] = 1 / (Σ_i Λ_j + λ)`.

use super::{DualCoefficients, Objective, SolverKind, TrainConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::Direction;
use crate::kernels::PairwiseKind;
use crate::linalg::{center_columns, cholesky, hadamard, sym_eig, CholeskyFactor, Matrix};

/// Eigenvalue floor, relative to the largest magnitude, for PSD kernels.
const PSD_TOL: f64 = 1e-8;

/// `M = vectors · diag(values) · inverse`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub vectors: Matrix,
    pub inverse: Matrix,
    pub values: Vec<f64>,
}

impl Diagonalization {
    /// Orthogonal diagonalization of a symmetric matrix.
    pub fn symmetric(m: &Matrix) -> Result<Self> {
        let eig = sym_eig(m)?;
        Ok(Diagonalization {
            inverse: eig.vectors.transpose(),
            vectors: eig.vectors,
            values: eig.values,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Solves `(M ⊗ N + λI) vec(A) = vec(Y)`; `M` acts on columns (start nodes)
/// of `A`, `N` on rows (end nodes).
pub fn shifted_kronecker_solve(
    m: &Diagonalization,
    n: &Diagonalization,
    y: &Matrix,
    lambda: f64,
) -> Result<Matrix> {
    if y.shape() != (n.dim(), m.dim()) {
        return Err(invalid(format!(
            "shifted system: label matrix {:?} does not match factors ({}, {})",
            y.shape(),
            n.dim(),
            m.dim()
        )));
    }
    let e = n.inverse.matmul(y)?.matmul_t(&m.inverse)?;
    let c = Matrix::from_fn(n.dim(), m.dim(), |i, j| {
        1.0 / (n.values[i] * m.values[j] + lambda)
    });
    n.vectors.matmul(&hadamard(&c, &e)?)?.matmul_t(&m.vectors)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("closed-form solvers need lambda > 0, got {lambda}")));
    }
    Ok(())
}

fn check_labels(k: &Matrix, y: &Matrix) -> Result<()> {
    if y.shape() != k.shape() {
        return Err(invalid(format!(
            "label matrix {:?} does not match kernel matrix {:?}",
            y.shape(),
            k.shape()
        )));
    }
    Ok(())
}

/// Regression with the ordinary Kronecker kernel: `(K ⊗ K + λI) vec(A) = vec(Y)`.
pub fn solve_rls_closed_form(k: &Matrix, y: &Matrix, lambda: f64) -> Result<DualCoefficients> {
    check_lambda(lambda)?;
    k.check_symmetric("kernel matrix")?;
    check_labels(k, y)?;
    let d = Diagonalization::symmetric(k)?;
    let max = d.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = d.values.first().copied().unwrap_or(0.0);
    if min < -PSD_TOL * max {
        return Err(Error::NotPositiveSemiDefinite { min_eigenvalue: min });
    }
    DualCoefficients::new(shifted_kronecker_solve(&d, &d, y, lambda)?)
}

/// Diagonal jitter `1e-8 · trace(K) / p`.
fn jitter_for(k: &Matrix) -> f64 {
    let p = k.rows().max(1) as f64;
    let t = k.trace();
    if t > 0.0 {
        1e-8 * t / p
    } else {
        1e-8
    }
}

/// Cholesky factor of `K`, retrying once with diagonal jitter.
fn factor_with_jitter(k: &Matrix) -> Result<(Matrix, CholeskyFactor)> {
    match cholesky(k) {
        Ok(g) => Ok((k.clone(), g)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let mut kj = k.clone();
            kj.add_diag(jitter_for(k));
            let g = cholesky(&kj)?;
            Ok((kj, g))
        }
        Err(e) => Err(e),
    }
}

/// Solves `(K ⊗ K C + λI) z = (I ⊗ C) vec(Y)` with `C` the `p x p`
/// centering matrix, returning `Z = unvec(z)`.
///
/// `K C` is diagonalized through `K = G Gᵀ` and `Gᵀ C G = W Σ Wᵀ`, giving
/// `K C = (G W) Σ (G W)⁻¹` with `(G W)⁻¹ = Wᵀ G⁻¹`.
pub fn solve_centered_kronecker_system(k: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    k.check_symmetric("kernel matrix")?;
    check_labels(k, y)?;
    let (k, g) = factor_with_jitter(k)?;
    let start = Diagonalization::symmetric(&k)?;

    let gt_c_g = g.lower.t_matmul(&center_columns(&g.lower))?;
    let sym = Matrix::from_fn(gt_c_g.rows(), gt_c_g.cols(), |i, j| {
        0.5 * (gt_c_g[(i, j)] + gt_c_g[(j, i)])
    });
    let inner = sym_eig(&sym)?;
    let vectors = g.lower.matmul(&inner.vectors)?;
    // (G W)⁻¹ = Wᵀ G⁻¹, with G⁻¹ from a triangular solve against I.
    let g_inv = g.solve_lower(&Matrix::identity(k.rows()))?;
    let inverse = inner.vectors.t_matmul(&g_inv)?;
    let end = Diagonalization {
        vectors,
        inverse,
        values: inner.values,
    };
    shifted_kronecker_solve(&start, &end, &center_columns(y), lambda)
}

/// Conditional ranking (edges grouped by start node) with the ordinary
/// Kronecker kernel.
///
/// Returns `A = C Z` for `Z` from [`solve_centered_kronecker_system`]. This
/// `A` satisfies `((I ⊗ C)(K ⊗ K) + λI) vec(A) = (I ⊗ C) vec(Y)` and hence
/// minimizes the centered squared loss plus `λ aᵀ(K ⊗ K)a`.
pub fn solve_rankrls_closed_form(k: &Matrix, y: &Matrix, lambda: f64) -> Result<DualCoefficients> {
    let z = solve_centered_kronecker_system(k, y, lambda)?;
    DualCoefficients::new(center_columns(&z))
}

/// Regression with the symmetric or reciprocal kernel through the ordinary
/// solver on `½(Y + Yᵀ)` or `½(Y - Yᵀ)`. Predictions must apply the matching
/// symmetrization (see [`crate::model::Model`]).
pub fn solve_with_label_transform(
    k: &Matrix,
    y: &Matrix,
    lambda: f64,
    kind: PairwiseKind,
) -> Result<DualCoefficients> {
    check_labels(k, y)?;
    let sign = match kind {
        PairwiseKind::Symmetric => 1.0,
        PairwiseKind::Reciprocal => -1.0,
        PairwiseKind::Ordinary => return solve_rls_closed_form(k, y, lambda),
    };
    let yt = y.transpose();
    let transformed = Matrix::from_fn(y.rows(), y.cols(), |i, j| 0.5 * (y[(i, j)] + sign * yt[(i, j)]));
    solve_rls_closed_form(k, &transformed, lambda)
}

/// Dispatches on objective and pairwise kind for a complete-graph label matrix.
pub fn solve_closed_form(k: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<DualCoefficients> {
    if cfg.solver != SolverKind::ClosedForm {
        return Err(invalid("solve_closed_form called with an iterative configuration"));
    }
    cfg.validate()?;
    match (cfg.objective, cfg.pairwise) {
        (Objective::Regression, kind) => solve_with_label_transform(k, y, cfg.lambda, kind),
        (Objective::Ranking, PairwiseKind::Ordinary) => match cfg.direction {
            Direction::Outgoing => solve_rankrls_closed_form(k, y, cfg.lambda),
            // Grouping by end node is the outgoing problem on Yᵀ, transposed back.
            Direction::Incoming => {
                let a = solve_rankrls_closed_form(k, &y.transpose(), cfg.lambda)?;
                DualCoefficients::new(a.matrix().transpose())
            }
        },
        (Objective::Ranking, kind) => Err(Error::Unsupported(format!(
            "no closed form for ranking with the {kind} kernel; use the iterative solver"
        ))),
    }
}
