//! Training algorithms for Kronecker pairwise-kernel models.
//!
//! All solvers return dual coefficients as a `p x p` matrix `A` with
//! `A[(end, start)]` the weight of edge `start -> end`, so `vec(A)` is the
//! dual vector under the global edge index.

mod closed_form;
mod dense;
mod identity;
mod iterative;

pub use closed_form::{
    shifted_kronecker_solve, solve_centered_kronecker_system, solve_closed_form,
    solve_rankrls_closed_form, solve_rls_closed_form, solve_with_label_transform, Diagonalization,
};
pub use dense::{solve_dense_oracle, solve_dense_oracle_with_cap};
pub use identity::{check_inversion_identity, check_inversion_identity_with_probes, InversionCheck};
pub use iterative::{solve_iterative, solve_iterative_with, IterationInfo, IterativeOutcome};

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::graph::Direction;
use crate::kernels::PairwiseKind;
use crate::linalg::{unvec, vec, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Squared loss on edge labels.
    Regression,
    /// Squared loss on label differences within each conditioning group.
    Ranking,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::Regression => "regression",
            Objective::Ranking => "ranking",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Objective::Regression),
            "ranking" => Ok(Objective::Ranking),
            other => Err(invalid(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    pub max_iter: usize,
    /// Stop once `‖r‖ / ‖b‖` falls below this.
    pub residual_tol: f64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            max_iter: 200,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverKind {
    ClosedForm,
    Iterative(IterativeOptions),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub objective: Objective,
    pub pairwise: PairwiseKind,
    pub lambda: f64,
    pub solver: SolverKind,
    /// Conditioning direction for the ranking objective.
    pub direction: Direction,
}

impl TrainConfig {
    pub fn new(objective: Objective, pairwise: PairwiseKind, lambda: f64, solver: SolverKind) -> Self {
        TrainConfig {
            objective,
            pairwise,
            lambda,
            solver,
            direction: Direction::Outgoing,
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        match self.solver {
            SolverKind::ClosedForm if self.lambda <= 0.0 => {
                Err(invalid("the closed-form solver needs lambda > 0"))
            }
            SolverKind::ClosedForm
                if self.objective == Objective::Ranking && self.pairwise != PairwiseKind::Ordinary =>
            {
                Err(Error::Unsupported(format!(
                    "no closed form for ranking with the {} kernel; use the iterative solver",
                    self.pairwise
                )))
            }
            SolverKind::Iterative(opts) if !(opts.residual_tol >= 0.0) => Err(invalid(format!(
                "residual tolerance must be >= 0, got {}",
                opts.residual_tol
            ))),
            _ => Ok(()),
        }
    }
}

/// Dual coefficients `A`, with `A[(end, start)]` the weight of edge `start -> end`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCoefficients(Matrix);

impl DualCoefficients {
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(invalid(format!(
                "dual coefficient matrix must be square, got {:?}",
                a.shape()
            )));
        }
        Ok(DualCoefficients(a))
    }

    pub fn zeros(p: usize) -> Self {
        DualCoefficients(Matrix::zeros(p, p))
    }

    pub fn from_vec(a: &[f64], p: usize) -> Result<Self> {
        DualCoefficients::new(unvec(a, p)?)
    }

    pub fn node_count(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `vec(A)`, the dual vector under the global edge index.
    pub fn to_vec(&self) -> Vec<f64> {
        vec(&self.0)
    }
}
