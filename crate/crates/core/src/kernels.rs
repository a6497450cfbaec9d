//! Node kernels and the three Kronecker pairwise (edge) kernels.
//!
//! Edges are indexed globally: the directed edge `start -> end` between
//! nodes `h` and `i` (0-based) of a `p`-node set sits at flat index
//! `h * p + i`. A `p x p` matrix `A` stored as `vec(A)` therefore keeps the
//! value of edge `h -> i` at `A[(i, h)]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    apply_skew_symmetrizer, apply_symmetrizer, dot, kron_matvec, Matrix,
};

/// Default limit on the number of entries of a materialized edge-kernel matrix.
pub const DEFAULT_MATERIALIZATION_CAP: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeKernel {
    Linear,
    Gaussian { gamma: f64 },
    /// The caller supplies kernel matrices directly.
    Precomputed,
}

impl NodeKernel {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        let k = NodeKernel::Gaussian { gamma };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NodeKernel::Gaussian { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(invalid(
                format!("gaussian kernel needs gamma > 0, got {gamma}"),
            )),
            _ => Ok(()),
        }
    }

    /// Kernel value between two feature vectors of equal length.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(invalid(format!(
                "feature dimension mismatch: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        match *self {
            NodeKernel::Linear => Ok(dot(x, y)),
            NodeKernel::Gaussian { gamma } => {
                self.validate()?;
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok((-gamma * sq).exp())
            }
            NodeKernel::Precomputed => Err(Error::Unsupported(
                "precomputed kernels cannot be evaluated from features".into(),
            )),
        }
    }
}

/// Kernel matrix between the rows of `a` (`r x d`) and the rows of `b` (`p x d`).
pub fn node_kernel_matrix(a: &Matrix, b: &Matrix, kernel: &NodeKernel) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(invalid(format!(
            "feature dimension mismatch: {} vs {}",
            a.cols(),
            b.cols()
        )));
    }
    match *kernel {
        NodeKernel::Linear => a.matmul_t(b),
        NodeKernel::Gaussian { gamma } => {
            kernel.validate()?;
            Ok(Matrix::from_fn(a.rows(), b.rows(), |i, j| {
                let sq: f64 = a
                    .row(i)
                    .iter()
                    .zip(b.row(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                (-gamma * sq).exp()
            }))
        }
        NodeKernel::Precomputed => Err(Error::Unsupported(
            "precomputed kernels must be passed as matrices".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairwiseKind {
    Ordinary,
    Symmetric,
    Reciprocal,
}

impl PairwiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PairwiseKind::Ordinary => "ordinary",
            PairwiseKind::Symmetric => "symmetric",
            PairwiseKind::Reciprocal => "reciprocal",
        }
    }
}

impl fmt::Display for PairwiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairwiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinary" => Ok(PairwiseKind::Ordinary),
            "symmetric" => Ok(PairwiseKind::Symmetric),
            "reciprocal" => Ok(PairwiseKind::Reciprocal),
            other => Err(invalid(format!("unknown pairwise kernel kind '{other}'"))),
        }
    }
}

/// Edge kernel between `e = (v, v')` and `ē = (v̄, v̄')` from the four node
/// kernel values `k(v,v̄)`, `k(v',v̄')`, `k(v,v̄')`, `k(v',v̄)`.
pub fn pairwise_kernel_value(
    kind: PairwiseKind,
    k_start_start: f64,
    k_end_end: f64,
    k_start_end: f64,
    k_end_start: f64,
) -> f64 {
    let direct = k_start_start * k_end_end;
    match kind {
        PairwiseKind::Ordinary => direct,
        PairwiseKind::Symmetric => 0.5 * (direct + k_start_end * k_end_start),
        PairwiseKind::Reciprocal => 0.5 * (direct - k_start_end * k_end_start),
    }
}

/// Explicit `r² x p²` edge-kernel matrix for a node kernel matrix `K` (`r x p`).
pub fn pairwise_kernel_matrix(kind: PairwiseKind, k: &Matrix) -> Result<Matrix> {
    pairwise_kernel_matrix_with_cap(kind, k, DEFAULT_MATERIALIZATION_CAP)
}

pub fn pairwise_kernel_matrix_with_cap(kind: PairwiseKind, k: &Matrix, cap: u128) -> Result<Matrix> {
    let (r, p) = k.shape();
    let requested = (r as u128).pow(2) * (p as u128).pow(2);
    if requested > cap {
        return Err(Error::ResourceLimit {
            what: "pairwise kernel matrix",
            requested,
            cap,
        });
    }
    if kind != PairwiseKind::Ordinary && r != p {
        // S^{r²} acting on rows still works for r != p, but the cross terms
        // k(v, v̄') pair a row node with a column node; require r == p so
        // that the mixed kernel values exist.
        return Err(Error::Unsupported(format!(
            "{kind} pairwise kernel matrix needs a square node kernel matrix, got {r}x{p}"
        )));
    }
    Ok(Matrix::from_fn(r * r, p * p, |row, col| {
        let (h, i) = (row / r, row % r);
        let (kk, j) = (col / p, col % p);
        pairwise_kernel_value(kind, k[(h, kk)], k[(i, j)], k[(h, j)], k[(i, kk)])
    }))
}

/// Applies the edge kernel implicitly: `(K_left ⊗ K_right) v`, followed by the
/// symmetrizer or skew-symmetrizer for the symmetric and reciprocal kinds.
/// `K_left` acts on start nodes, `K_right` on end nodes.
pub fn pairwise_operator_apply(
    kind: PairwiseKind,
    k_left: &Matrix,
    k_right: &Matrix,
    v: &[f64],
) -> Result<Vec<f64>> {
    if kind != PairwiseKind::Ordinary {
        if !k_left.is_square() || k_left.shape() != k_right.shape() || k_left != k_right {
            return Err(invalid(format!(
                "{kind} pairwise operator needs identical square left and right kernels"
            )));
        }
    }
    let out = kron_matvec(k_left, k_right, v)?;
    match kind {
        PairwiseKind::Ordinary => Ok(out),
        PairwiseKind::Symmetric => apply_symmetrizer(&out, k_left.rows()),
        PairwiseKind::Reciprocal => apply_skew_symmetrizer(&out, k_left.rows()),
    }
}
