//! Trained models: prediction for unseen node pairs and conditional ranking.
//!
//! The score of edge `s -> e` is `k_eᵀ A k_s`, where `k_s` and `k_e` are
//! node-kernel vectors against the training nodes. In batch form
//! `H = K_end A K_startᵀ`, with `H[(e, s)]` the score of `s -> e`.

mod persist;

pub use persist::{load_model, save_model, FORMAT_TAG, FORMAT_VERSION};

use std::ops::ControlFlow;

use crate::error::{invalid, Error, Result};
use crate::graph::{build_label_matrix, Direction, GraphDataset};
use crate::kernels::{node_kernel_matrix, NodeKernel, PairwiseKind};
use crate::linalg::Matrix;
use crate::solvers::{
    solve_closed_form, solve_iterative_with, DualCoefficients, IterationInfo, Objective,
    SolverKind, TrainConfig,
};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSummary {
    pub solver: SolverKind,
    pub direction: Direction,
    /// BiCGSTAB iterations run; `None` for the closed form.
    pub iterations: Option<usize>,
    pub relative_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    dual: DualCoefficients,
    kernel: NodeKernel,
    pairwise: PairwiseKind,
    /// `None` for precomputed kernels.
    train_features: Option<Matrix>,
    objective: Objective,
    lambda: f64,
    summary: TrainingSummary,
}

impl Model {
    /// Assembles a model from its parts, checking that shapes agree.
    pub fn from_parts(
        dual: DualCoefficients,
        kernel: NodeKernel,
        pairwise: PairwiseKind,
        train_features: Option<Matrix>,
        objective: Objective,
        lambda: f64,
        summary: TrainingSummary,
    ) -> Result<Self> {
        kernel.validate()?;
        match (&train_features, kernel) {
            (Some(_), NodeKernel::Precomputed) => {
                return Err(invalid("precomputed-kernel models carry no training features"))
            }
            (None, NodeKernel::Linear | NodeKernel::Gaussian { .. }) => {
                return Err(invalid("feature-kernel models need training features"))
            }
            (Some(x), _) if x.rows() != dual.node_count() => {
                return Err(invalid(format!(
                    "dual coefficients cover {} nodes but {} feature rows were given",
                    dual.node_count(),
                    x.rows()
                )))
            }
            _ => {}
        }
        Ok(Model {
            dual,
            kernel,
            pairwise,
            train_features,
            objective,
            lambda,
            summary,
        })
    }

    /// Trains on the dataset's node features with the given node kernel.
    pub fn fit(ds: &GraphDataset, kernel: NodeKernel, cfg: &TrainConfig) -> Result<Self> {
        Model::fit_with(ds, kernel, cfg, |_| ControlFlow::Continue(()))
    }

    /// As [`Model::fit`], forwarding per-iteration progress of the iterative
    /// solver to `callback`.
    pub fn fit_with<F>(ds: &GraphDataset, kernel: NodeKernel, cfg: &TrainConfig, callback: F) -> Result<Self>
    where
        F: FnMut(&IterationInfo<'_>) -> ControlFlow<()>,
    {
        if kernel == NodeKernel::Precomputed {
            return Err(invalid("use fit_precomputed for precomputed kernels"));
        }
        let k = node_kernel_matrix(ds.features(), ds.features(), &kernel)?;
        let (dual, summary) = train(&k, ds, cfg, callback)?;
        Model::from_parts(
            dual,
            kernel,
            cfg.pairwise,
            Some(ds.features().clone()),
            cfg.objective,
            cfg.lambda,
            summary,
        )
    }

    /// Trains on a supplied `p x p` kernel matrix; dataset features are ignored.
    pub fn fit_precomputed(k: &Matrix, ds: &GraphDataset, cfg: &TrainConfig) -> Result<Self> {
        let (dual, summary) = train(k, ds, cfg, |_| ControlFlow::Continue(()))?;
        Model::from_parts(
            dual,
            NodeKernel::Precomputed,
            cfg.pairwise,
            None,
            cfg.objective,
            cfg.lambda,
            summary,
        )
    }

    pub fn dual(&self) -> &DualCoefficients {
        &self.dual
    }

    pub fn kernel(&self) -> NodeKernel {
        self.kernel
    }

    pub fn pairwise(&self) -> PairwiseKind {
        self.pairwise
    }

    pub fn train_features(&self) -> Option<&Matrix> {
        self.train_features.as_ref()
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn summary(&self) -> &TrainingSummary {
        &self.summary
    }

    pub fn node_count(&self) -> usize {
        self.dual.node_count()
    }

    /// Kernel rows of `feats` against the training nodes.
    fn kernel_rows(&self, feats: &Matrix) -> Result<Matrix> {
        let train = self.train_features.as_ref().ok_or_else(|| {
            Error::Unsupported("precomputed-kernel models need predict_scores_from_kernels".into())
        })?;
        if feats.cols() != train.cols() {
            return Err(invalid(format!(
                "features have dimension {}, model was trained on {}",
                feats.cols(),
                train.cols()
            )));
        }
        node_kernel_matrix(feats, train, &self.kernel)
    }

    /// Score grid `t x s` for edges from each row of `start` to each row of
    /// `end`. Symmetric and reciprocal models need `start == end`.
    pub fn predict_scores(&self, start: &Matrix, end: &Matrix) -> Result<Matrix> {
        if self.pairwise != PairwiseKind::Ordinary && start != end {
            return Err(distinct_sets(self.pairwise));
        }
        let k_start = self.kernel_rows(start)?;
        let k_end = if start == end { k_start.clone() } else { self.kernel_rows(end)? };
        self.predict_scores_from_kernels(&k_start, &k_end)
    }

    /// As [`Model::predict_scores`], from kernel rows `K_start` (`s x p`) and
    /// `K_end` (`t x p`) against the training nodes.
    pub fn predict_scores_from_kernels(&self, k_start: &Matrix, k_end: &Matrix) -> Result<Matrix> {
        let p = self.node_count();
        if k_start.cols() != p || k_end.cols() != p {
            return Err(invalid(format!(
                "kernel rows must have {p} columns, got {} and {}",
                k_start.cols(),
                k_end.cols()
            )));
        }
        let raw = k_end.matmul(self.dual.matrix())?.matmul_t(k_start)?;
        let sign = match self.pairwise {
            PairwiseKind::Ordinary => return Ok(raw),
            PairwiseKind::Symmetric => 1.0,
            PairwiseKind::Reciprocal => -1.0,
        };
        if k_start != k_end {
            return Err(distinct_sets(self.pairwise));
        }
        let n = raw.rows();
        Ok(Matrix::from_fn(n, n, |i, j| 0.5 * (raw[(i, j)] + sign * raw[(j, i)])))
    }

    /// Scores of the training edges of `ds` (which must share this model's
    /// training nodes), in edge order.
    pub fn score_edges(&self, ds: &GraphDataset) -> Result<Vec<f64>> {
        let h = match &self.train_features {
            Some(_) => self.predict_scores(ds.features(), ds.features())?,
            None => {
                return Err(Error::Unsupported(
                    "precomputed-kernel models need predict_scores_from_kernels".into(),
                ))
            }
        };
        if h.rows() != ds.node_count() {
            return Err(invalid("dataset node count does not match the score grid"));
        }
        Ok(ds.edges().iter().map(|e| h[(e.end, e.start)]).collect())
    }

    /// Orders `candidates` by the score of `condition -> candidate`
    /// (outgoing) or `candidate -> condition` (incoming), highest first.
    /// Ties keep ascending candidate order.
    pub fn rank_candidates(
        &self,
        condition: &[f64],
        candidates: &Matrix,
        direction: Direction,
    ) -> Result<Vec<(usize, f64)>> {
        if candidates.rows() == 0 {
            return Err(invalid("rank_candidates needs at least one candidate"));
        }
        if condition.len() != candidates.cols() {
            return Err(invalid(format!(
                "condition has dimension {}, candidates {}",
                condition.len(),
                candidates.cols()
            )));
        }
        let cond = Matrix::from_row_major(1, condition.len(), condition.to_vec())?;
        let c = candidates.rows();
        let scores: Vec<f64> = match self.pairwise {
            PairwiseKind::Ordinary => match direction {
                Direction::Outgoing => self.predict_scores(&cond, candidates)?.into_vec(),
                Direction::Incoming => self.predict_scores(candidates, &cond)?.into_vec(),
            },
            _ => {
                // Square grid over the condition followed by the candidates.
                let mut rows = cond.into_vec();
                rows.extend_from_slice(candidates.as_slice());
                let all = Matrix::from_row_major(c + 1, condition.len(), rows)?;
                let h = self.predict_scores(&all, &all)?;
                (1..=c)
                    .map(|j| match direction {
                        Direction::Outgoing => h[(j, 0)],
                        Direction::Incoming => h[(0, j)],
                    })
                    .collect()
            }
        };
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked)
    }
}

fn distinct_sets(kind: PairwiseKind) -> Error {
    Error::Unsupported(format!(
        "{kind} models score square grids only; start and end node sets must be identical"
    ))
}

fn train<F>(
    k: &Matrix,
    ds: &GraphDataset,
    cfg: &TrainConfig,
    callback: F,
) -> Result<(DualCoefficients, TrainingSummary)>
where
    F: FnMut(&IterationInfo<'_>) -> ControlFlow<()>,
{
    cfg.validate()?;
    if k.shape() != (ds.node_count(), ds.node_count()) {
        return Err(invalid(format!(
            "kernel matrix {:?} does not match {} nodes",
            k.shape(),
            ds.node_count()
        )));
    }
    match cfg.solver {
        SolverKind::ClosedForm => {
            let y = build_label_matrix(ds)?;
            let dual = solve_closed_form(k, &y, cfg)?;
            Ok((
                dual,
                TrainingSummary {
                    solver: cfg.solver,
                    direction: cfg.direction,
                    iterations: None,
                    relative_residual: None,
                },
            ))
        }
        SolverKind::Iterative(_) => {
            let out = solve_iterative_with(k, ds, cfg, callback)?;
            Ok((
                out.dual,
                TrainingSummary {
                    solver: cfg.solver,
                    direction: cfg.direction,
                    iterations: Some(out.iterations),
                    relative_residual: Some(out.relative_residual),
                },
            ))
        }
    }
}
