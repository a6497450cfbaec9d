//! BiCGSTAB training for arbitrary edge multisets.
//!
//! Solves the reduced system `(Bᵀ Π B K̄ + λI) a = Bᵀ Π y`, where `B` gathers
//! training edges from the `p²` pair space, `Π` is the block-centering
//! operator `L` for ranking (identity for regression) and `K̄` is the
//! pairwise kernel applied implicitly. One matvec costs O(p³ + q).

use std::ops::ControlFlow;

use super::{DualCoefficients, IterativeOptions, Objective, SolverKind, TrainConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::{build_bookkeeping, BlockStructure, Bookkeeping, GraphDataset};
use crate::kernels::{pairwise_operator_apply, PairwiseKind};
use crate::linalg::{axpy, dot, norm, Matrix};

const BREAKDOWN_TOL: f64 = 1e-300;

/// State handed to the per-iteration callback.
#[derive(Debug)]
pub struct IterationInfo<'a> {
    /// 1-based iteration number.
    pub iteration: usize,
    pub relative_residual: f64,
    /// Current iterate as a `p x p` dual matrix.
    pub dual: &'a Matrix,
}

#[derive(Clone, Debug)]
pub struct IterativeOutcome {
    /// Best-residual iterate.
    pub dual: DualCoefficients,
    pub iterations: usize,
    /// True relative residual `‖b - M a‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
}

struct ReducedSystem<'a> {
    kernel: &'a Matrix,
    kind: PairwiseKind,
    book: Bookkeeping,
    blocks: Option<BlockStructure>,
    lambda: f64,
}

impl ReducedSystem<'_> {
    fn project(&self, w: Vec<f64>) -> Result<Vec<f64>> {
        match &self.blocks {
            Some(bs) => bs.apply_centering(&w),
            None => Ok(w),
        }
    }

    fn rhs(&self, labels: &[f64]) -> Result<Vec<f64>> {
        self.book.scatter_add(&self.project(labels.to_vec())?)
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let kv = pairwise_operator_apply(self.kind, self.kernel, self.kernel, v)?;
        let mut out = self.book.scatter_add(&self.project(self.book.gather(&kv)?)?)?;
        axpy(self.lambda, v, &mut out);
        Ok(out)
    }
}

fn as_dual(x: &[f64], p: usize) -> Matrix {
    // x is vec(A); its row-major reading is Aᵀ.
    Matrix::from_row_major(p, p, x.to_vec())
        .expect("iterate has p² entries")
        .transpose()
}

pub fn solve_iterative(k: &Matrix, ds: &GraphDataset, cfg: &TrainConfig) -> Result<DualCoefficients> {
    solve_iterative_with(k, ds, cfg, |_| ControlFlow::Continue(())).map(|o| o.dual)
}

/// Runs BiCGSTAB from `a = 0`, calling `callback` after every iteration.
/// Returning `ControlFlow::Break` from the callback stops early.
pub fn solve_iterative_with<F>(
    k: &Matrix,
    ds: &GraphDataset,
    cfg: &TrainConfig,
    mut callback: F,
) -> Result<IterativeOutcome>
where
    F: FnMut(&IterationInfo<'_>) -> ControlFlow<()>,
{
    let opts: IterativeOptions = match cfg.solver {
        SolverKind::Iterative(o) => o,
        SolverKind::ClosedForm => {
            return Err(invalid("solve_iterative called with a closed-form configuration"))
        }
    };
    cfg.validate()?;
    let p = ds.node_count();
    if k.shape() != (p, p) {
        return Err(invalid(format!(
            "kernel matrix {:?} does not match {p} nodes",
            k.shape()
        )));
    }
    k.check_symmetric("kernel matrix")?;

    let system = ReducedSystem {
        kernel: k,
        kind: cfg.pairwise,
        book: build_bookkeeping(ds)?,
        blocks: match cfg.objective {
            Objective::Ranking => Some(BlockStructure::from_dataset(ds, cfg.direction)),
            Objective::Regression => None,
        },
        lambda: cfg.lambda,
    };
    let b = system.rhs(&ds.labels())?;
    let n = b.len();
    let b_norm = norm(&b);

    let mut x = vec![0.0; n];
    if b_norm == 0.0 || opts.max_iter == 0 {
        let rel = if b_norm == 0.0 { 0.0 } else { 1.0 };
        return Ok(IterativeOutcome {
            dual: DualCoefficients::zeros(p),
            iterations: 0,
            relative_residual: rel,
            converged: b_norm == 0.0,
        });
    }

    let mut r = b.clone();
    let r_hat = b.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut dir = vec![0.0; n];

    let mut best_x = x.clone();
    let mut best_res = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    let breakdown = |iteration: usize, reason: &'static str, best: &[f64]| Error::SolverBreakdown {
        iteration,
        reason,
        last_iterate: Box::new(as_dual(best, p)),
    };

    for it in 1..=opts.max_iter {
        iterations = it;
        let rho_next = dot(&r_hat, &r);
        if rho_next.abs() < BREAKDOWN_TOL {
            return Err(breakdown(it, "rho vanished", &best_x));
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for ((d, &ri), &vi) in dir.iter_mut().zip(&r).zip(&v) {
            *d = ri + beta * (*d - omega * vi);
        }
        v = system.apply(&dir)?;
        let denom = dot(&r_hat, &v);
        if denom.abs() < BREAKDOWN_TOL {
            return Err(breakdown(it, "r̂·v vanished", &best_x));
        }
        alpha = rho / denom;

        let mut s = r.clone();
        axpy(-alpha, &v, &mut s);
        let s_rel = norm(&s) / b_norm;
        if !s_rel.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        if s_rel <= opts.residual_tol {
            axpy(alpha, &dir, &mut x);
            best_x.clone_from(&x);
            converged = true;
            let _ = callback(&IterationInfo {
                iteration: it,
                relative_residual: s_rel,
                dual: &as_dual(&x, p),
            });
            break;
        }

        let t = system.apply(&s)?;
        let tt = dot(&t, &t);
        if tt < BREAKDOWN_TOL {
            return Err(breakdown(it, "t·t vanished", &best_x));
        }
        omega = dot(&t, &s) / tt;
        axpy(alpha, &dir, &mut x);
        axpy(omega, &s, &mut x);
        r = s;
        axpy(-omega, &t, &mut r);

        let rel = norm(&r) / b_norm;
        if !rel.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        if rel < best_res {
            best_res = rel;
            best_x.clone_from(&x);
        }
        if rel <= opts.residual_tol {
            converged = true;
        }
        let flow = callback(&IterationInfo {
            iteration: it,
            relative_residual: rel,
            dual: &as_dual(&x, p),
        });
        if converged || flow.is_break() {
            break;
        }
        if omega == 0.0 {
            return Err(breakdown(it, "omega vanished", &best_x));
        }
    }

    // Report the true residual of the returned iterate.
    let mut res = system.apply(&best_x)?;
    for (ri, bi) in res.iter_mut().zip(&b) {
        *ri = bi - *ri;
    }
    Ok(IterativeOutcome {
        dual: DualCoefficients::new(as_dual(&best_x, p))?,
        iterations,
        relative_residual: norm(&res) / b_norm,
        converged,
    })
}
