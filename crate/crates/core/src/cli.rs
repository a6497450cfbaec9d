//! Command-line front end.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datasets::{
    gen_rps, read_edges_csv, read_nodes_csv, read_predictions_csv, write_edges_csv,
    write_nodes_csv, write_predictions_csv, RpsConfig,
};
use crate::error::{invalid, Error, Result};
use crate::graph::{Direction, Edge, GraphDataset};
use crate::kernels::{NodeKernel, PairwiseKind};
use crate::linalg::Matrix;
use crate::losses::{pairwise_rank_loss, regression_loss, GroupedScores};
use crate::model::{load_model, save_model, Model};
use crate::solvers::{IterativeOptions, Objective, SolverKind, TrainConfig};

pub const DEFAULT_LAMBDA: f64 = 1.0 / (1u64 << 30) as f64;

#[derive(Debug, Parser)]
#[command(name = "kronrank", version, about = "Kronecker-kernel conditional ranking on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a rock-paper-scissors tournament.
    GenRps {
        #[arg(long, default_value_t = 100)]
        players: usize,
        #[arg(long, default_value_t = 1000)]
        games: usize,
        #[arg(long, default_value_t = 100)]
        test_players: usize,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a model and write it to a file.
    Train {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Ranking)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = PairwiseArg::Ordinary)]
        pairwise: PairwiseArg,
        #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = SolverArg::Iterative)]
        solver: SolverArg,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = DirectionArg::Outgoing)]
        direction: DirectionArg,
        #[arg(long)]
        out_model: PathBuf,
    },
    /// Write scores for every start/end pair of two node files.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        start_nodes: PathBuf,
        /// Defaults to the start node file.
        #[arg(long)]
        end_nodes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the ranking of all other nodes conditioned on one node.
    Rank {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        nodes: PathBuf,
        /// Id of the conditioning node in the node file.
        #[arg(long)]
        condition: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Outgoing)]
        direction: DirectionArg,
    },
    /// Score predictions against ground-truth edges.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        /// Edge file with the true labels.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Outgoing)]
        direction: DirectionArg,
    },
    /// Time training on synthetic complete graphs.
    Bench {
        /// Comma-separated node counts.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        sizes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = SolverArg::Closed)]
        solver: SolverArg,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        /// Use p random edges instead of the complete graph (iterative only).
        #[arg(long)]
        sparse: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ObjectiveArg {
    Regression,
    Ranking,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairwiseArg {
    Ordinary,
    Symmetric,
    Reciprocal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelArg {
    Linear,
    Gaussian,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolverArg {
    Closed,
    Iterative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DirectionArg {
    Outgoing,
    Incoming,
}

impl From<ObjectiveArg> for Objective {
    fn from(a: ObjectiveArg) -> Self {
        match a {
            ObjectiveArg::Regression => Objective::Regression,
            ObjectiveArg::Ranking => Objective::Ranking,
        }
    }
}

impl From<PairwiseArg> for PairwiseKind {
    fn from(a: PairwiseArg) -> Self {
        match a {
            PairwiseArg::Ordinary => PairwiseKind::Ordinary,
            PairwiseArg::Symmetric => PairwiseKind::Symmetric,
            PairwiseArg::Reciprocal => PairwiseKind::Reciprocal,
        }
    }
}

impl From<DirectionArg> for Direction {
    fn from(a: DirectionArg) -> Self {
        match a {
            DirectionArg::Outgoing => Direction::Outgoing,
            DirectionArg::Incoming => Direction::Incoming,
        }
    }
}

fn solver_kind(solver: SolverArg, max_iter: usize, tol: f64) -> Result<SolverKind> {
    match solver {
        SolverArg::Closed => Ok(SolverKind::ClosedForm),
        SolverArg::Iterative if max_iter == 0 => Err(invalid("--max-iter must be >= 1")),
        SolverArg::Iterative => Ok(SolverKind::Iterative(IterativeOptions {
            max_iter,
            residual_tol: tol,
        })),
    }
}

/// Runs one command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::GenRps {
            players,
            games,
            test_players,
            w,
            seed,
            out_dir,
        } => cmd_gen_rps(
            &RpsConfig {
                n_train_players: players,
                n_train_games: games,
                n_test_players: test_players,
                w,
                seed,
            },
            &out_dir,
            out,
        ),
        Command::Train {
            nodes,
            edges,
            objective,
            pairwise,
            kernel,
            gamma,
            lambda,
            solver,
            max_iter,
            tol,
            direction,
            out_model,
        } => {
            let kernel = match kernel {
                KernelArg::Linear => NodeKernel::Linear,
                KernelArg::Gaussian => NodeKernel::gaussian(gamma)?,
            };
            let cfg = TrainConfig::new(
                objective.into(),
                pairwise.into(),
                lambda,
                solver_kind(solver, max_iter, tol)?,
            )
            .with_direction(direction.into());
            cmd_train(&nodes, &edges, kernel, &cfg, &out_model, out)
        }
        Command::Predict {
            model,
            start_nodes,
            end_nodes,
            out: path,
        } => cmd_predict(&model, &start_nodes, end_nodes.as_deref(), &path, out),
        Command::Rank {
            model,
            nodes,
            condition,
            direction,
        } => cmd_rank(&model, &nodes, &condition, direction.into(), out),
        Command::Evaluate {
            predictions,
            truth,
            direction,
        } => cmd_evaluate(&predictions, &truth, direction.into(), out),
        Command::Bench {
            sizes,
            solver,
            repeats,
            max_iter,
            sparse,
            seed,
        } => cmd_bench(&sizes, solver, repeats, max_iter, sparse, seed, out),
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text)
        .map_err(|e| Error::io("<stdout>", e))
}

pub fn cmd_gen_rps(cfg: &RpsConfig, out_dir: &Path, out: &mut dyn Write) -> Result<()> {
    let data = gen_rps(cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let test = data.test_dataset()?;
    write_nodes_csv(out_dir.join("train_nodes.csv"), data.train.node_ids(), data.train.features())?;
    write_edges_csv(out_dir.join("train_edges.csv"), data.train.node_ids(), data.train.edges())?;
    write_nodes_csv(out_dir.join("test_nodes.csv"), test.node_ids(), test.features())?;
    write_edges_csv(out_dir.join("test_truth.csv"), test.node_ids(), test.edges())?;
    emit(
        out,
        format_args!(
            "wrote {} training players, {} training edges, {} test players to {}\n",
            data.train.node_count(),
            data.train.edge_count(),
            test.node_count(),
            out_dir.display()
        ),
    )
}

pub fn cmd_train(
    nodes: &Path,
    edges: &Path,
    kernel: NodeKernel,
    cfg: &TrainConfig,
    out_model: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    cfg.validate()?;
    let (ids, features) = read_nodes_csv(nodes)?;
    let edge_list = read_edges_csv(edges, &ids)?;
    let ds = GraphDataset::new(ids, features, edge_list)?;
    let start = Instant::now();
    let model = Model::fit(&ds, kernel, cfg)?;
    let secs = start.elapsed().as_secs_f64();
    save_model(&model, out_model)?;
    let s = model.summary();
    match (s.iterations, s.relative_residual) {
        (Some(it), Some(res)) => emit(
            out,
            format_args!(
                "trained on {} nodes, {} edges in {secs:.3}s ({it} iterations, relative residual {res:e})\n",
                ds.node_count(),
                ds.edge_count()
            ),
        ),
        _ => emit(
            out,
            format_args!(
                "trained on {} nodes, {} edges in {secs:.3}s (closed form)\n",
                ds.node_count(),
                ds.edge_count()
            ),
        ),
    }
}

pub fn cmd_predict(
    model: &Path,
    start_nodes: &Path,
    end_nodes: Option<&Path>,
    path: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let model = load_model(model)?;
    let (start_ids, start_x) = read_nodes_csv(start_nodes)?;
    let (end_ids, end_x) = match end_nodes {
        Some(p) => read_nodes_csv(p)?,
        None => (start_ids.clone(), start_x.clone()),
    };
    let grid = model.predict_scores(&start_x, &end_x)?;
    write_predictions_csv(path, &start_ids, &end_ids, &grid)?;
    emit(
        out,
        format_args!("wrote {} scores to {}\n", grid.rows() * grid.cols(), path.display()),
    )
}

pub fn cmd_rank(
    model: &Path,
    nodes: &Path,
    condition: &str,
    direction: Direction,
    out: &mut dyn Write,
) -> Result<()> {
    let model = load_model(model)?;
    let (ids, x) = read_nodes_csv(nodes)?;
    let c = ids
        .iter()
        .position(|id| id == condition)
        .ok_or_else(|| invalid(format!("condition id '{condition}' not in {}", nodes.display())))?;
    let others: Vec<usize> = (0..ids.len()).filter(|&i| i != c).collect();
    if others.is_empty() {
        return Err(invalid("no candidates besides the condition node"));
    }
    let mut data = Vec::with_capacity(others.len() * x.cols());
    for &i in &others {
        data.extend_from_slice(x.row(i));
    }
    let candidates = Matrix::from_row_major(others.len(), x.cols(), data)?;
    let ranked = model.rank_candidates(x.row(c), &candidates, direction)?;
    emit(out, format_args!("rank,id,score\n"))?;
    for (r, (j, score)) in ranked.iter().enumerate() {
        emit(out, format_args!("{},{},{score}\n", r + 1, ids[others[*j]]))?;
    }
    Ok(())
}

pub fn cmd_evaluate(predictions: &Path, truth: &Path, direction: Direction, out: &mut dyn Write) -> Result<()> {
    let rows = read_predictions_csv(predictions)?;
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |s: &str| -> usize {
        if let Some(&i) = index.get(s) {
            return i;
        }
        ids.push(s.to_string());
        index.insert(s.to_string(), ids.len() - 1);
        ids.len() - 1
    };
    let mut scores = HashMap::new();
    for r in &rows {
        let key = (intern(&r.start), intern(&r.end));
        scores.insert(key, r.score);
    }
    let edges = read_edges_csv(truth, &ids)?;
    let preds = edges
        .iter()
        .map(|e: &Edge| {
            scores.get(&(e.start, e.end)).copied().ok_or_else(|| {
                invalid(format!("no prediction for edge {} -> {}", ids[e.start], ids[e.end]))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let labels: Vec<f64> = edges.iter().map(|e| e.label).collect();
    let rank = pairwise_rank_loss(&GroupedScores::from_edges(&edges, &preds, direction)?)?;
    let reg = regression_loss(&preds, &labels)?;
    emit(out, format_args!("edges {}\n", edges.len()))?;
    emit(out, format_args!("rank_loss {rank}\n"))?;
    emit(out, format_args!("regression_loss {reg}\n"))
}

/// Synthetic complete graph with Gaussian-kernel node features.
pub fn synthetic_dataset(p: usize, sparse: bool, seed: u64) -> Result<GraphDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 5;
    let x = Matrix::from_fn(p, d, |_, _| rng.gen_range(-1.0..1.0));
    let edges = if sparse {
        (0..p)
            .map(|_| Edge::new(rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(-1.0..1.0)))
            .collect()
    } else {
        (0..p * p)
            .map(|k| Edge::new(k / p, k % p, rng.gen_range(-1.0..1.0)))
            .collect()
    };
    GraphDataset::with_numbered_nodes(x, edges)
}

pub fn cmd_bench(
    sizes: &[usize],
    solver: SolverArg,
    repeats: usize,
    max_iter: usize,
    sparse: bool,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(invalid("--sizes needs positive node counts"));
    }
    if repeats == 0 {
        return Err(invalid("--repeats must be >= 1"));
    }
    let kind = solver_kind(solver, max_iter, 0.0)?;
    if sparse && kind == SolverKind::ClosedForm {
        return Err(Error::Unsupported("the closed form needs a complete graph; drop --sparse".into()));
    }
    let cfg = TrainConfig::new(Objective::Regression, PairwiseKind::Ordinary, 1e-3, kind);
    emit(out, format_args!("p,q,seconds\n"))?;
    for &p in sizes {
        let ds = synthetic_dataset(p, sparse, seed)?;
        let kernel = NodeKernel::gaussian(0.2)?;
        let mut best = f64::INFINITY;
        for _ in 0..repeats {
            let start = Instant::now();
            Model::fit(&ds, kernel, &cfg)?;
            best = best.min(start.elapsed().as_secs_f64());
        }
        emit(out, format_args!("{p},{},{best}\n", ds.edge_count()))?;
    }
    Ok(())
}
