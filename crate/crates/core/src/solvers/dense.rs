//! Brute-force reference solver.
//!
//! Builds `B`, `Π` and the pairwise kernel matrix explicitly and solves
//! `(Bᵀ Π B K̄ + λI) a = Bᵀ Π y` with a dense LU factorization. Only meant
//! for small problems and for cross-checking the fast solvers.

use super::{DualCoefficients, Objective, TrainConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::{build_bookkeeping, BlockStructure, GraphDataset};
use crate::kernels::{pairwise_kernel_matrix_with_cap, DEFAULT_MATERIALIZATION_CAP};
use crate::linalg::{dense_solve, Matrix};

pub fn solve_dense_oracle(k: &Matrix, ds: &GraphDataset, cfg: &TrainConfig) -> Result<DualCoefficients> {
    solve_dense_oracle_with_cap(k, ds, cfg, DEFAULT_MATERIALIZATION_CAP)
}

/// As [`solve_dense_oracle`], refusing to materialize more than `cap` entries
/// in any explicit matrix.
pub fn solve_dense_oracle_with_cap(
    k: &Matrix,
    ds: &GraphDataset,
    cfg: &TrainConfig,
    cap: u128,
) -> Result<DualCoefficients> {
    if !(cfg.lambda >= 0.0) || !cfg.lambda.is_finite() {
        return Err(invalid(format!("lambda must be finite and >= 0, got {}", cfg.lambda)));
    }
    let p = ds.node_count();
    if k.shape() != (p, p) {
        return Err(invalid(format!(
            "kernel matrix {:?} does not match {p} nodes",
            k.shape()
        )));
    }
    k.check_symmetric("kernel matrix")?;
    let q = ds.edge_count() as u128;
    let pp = (p * p) as u128;
    for (what, requested) in [("edge projection matrix", q * q), ("bookkeeping matrix", q * pp)] {
        if requested > cap {
            return Err(Error::ResourceLimit { what, requested, cap });
        }
    }

    let kbar = pairwise_kernel_matrix_with_cap(cfg.pairwise, k, cap)?;
    let book = build_bookkeeping(ds)?;
    let pi = match cfg.objective {
        Objective::Ranking => BlockStructure::from_dataset(ds, cfg.direction).to_matrix(),
        Objective::Regression => Matrix::identity(ds.edge_count()),
    };
    let b = book.to_matrix();

    // Bᵀ Π B and Bᵀ Π y
    let btpi = b.t_matmul(&pi)?;
    let btpib = btpi.matmul(&b)?;
    let rhs = btpi.matvec(&ds.labels())?;

    let mut system = btpib.matmul(&kbar)?;
    system.add_diag(cfg.lambda);
    let a = dense_solve(&system, &rhs)?;
    DualCoefficients::from_vec(&a, p)
}
