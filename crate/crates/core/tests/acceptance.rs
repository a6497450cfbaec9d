//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::fs;
use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::Instant;

use kronrank::datasets::{
    gen_rps, read_edges_csv, read_nodes_csv, read_predictions_csv, write_edges_csv,
    write_nodes_csv, write_predictions_csv, RpsConfig,
};
use kronrank::graph::{BlockStructure, Direction, Edge, GraphDataset};
use kronrank::kernels::{node_kernel_matrix, pairwise_operator_apply, NodeKernel, PairwiseKind};
use kronrank::linalg::{dense_solve, vec, Matrix};
use kronrank::losses::{centered_squared_loss, pairwise_rank_loss, GroupedScores};
use kronrank::model::Model;
use kronrank::solvers::{
    check_inversion_identity, solve_centered_kronecker_system, solve_iterative_with,
    solve_rls_closed_form, IterativeOptions, Objective, SolverKind, TrainConfig,
};
use kronrank::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
}

fn random_pd(r: &mut ChaCha8Rng, p: usize) -> Matrix {
    let b = uniform(r, p, p);
    let mut k = b.matmul_t(&b).unwrap();
    k.add_diag(0.1);
    k
}

fn centering(p: usize) -> Matrix {
    Matrix::from_fn(p, p, |i, j| f64::from(u8::from(i == j)) - 1.0 / p as f64)
}

/// Explicit `M ⊗ N` under the pair index `h * p + i`.
fn kron(m: &Matrix, n: &Matrix) -> Matrix {
    let (a, b) = (m.rows(), n.rows());
    Matrix::from_fn(a * b, m.cols() * n.cols(), |r, c| {
        m[(r / b, c / n.cols())] * n[(r % b, c % n.cols())]
    })
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_rls() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let p = 3 + t % 10;
        let k = random_pd(&mut r, p);
        let y = uniform(&mut r, p, p);
        let lambda = r.gen_range(0.01..1.0);
        let a = solve_rls_closed_form(&k, &y, lambda).map_err(|e| e.to_string())?;
        let mut sys = kron(&k, &k);
        sys.add_diag(lambda);
        let exact = dense_solve(&sys, &vec(&y)).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(&a.to_vec(), &exact));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-8 && secs < 1.0, format!("max rel err {worst:.2e}, {secs:.3}s"))
}

fn closed_form_rankrls() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let p = 3 + t % 10;
        let k = random_pd(&mut r, p);
        let y = uniform(&mut r, p, p);
        let lambda = r.gen_range(0.01..1.0);
        let c = centering(p);
        let z = solve_centered_kronecker_system(&k, &y, lambda).map_err(|e| e.to_string())?;
        let mut sys = kron(&k, &k.matmul(&c).unwrap());
        sys.add_diag(lambda);
        let rhs = kron(&Matrix::identity(p), &c).matvec(&vec(&y)).unwrap();
        let exact = dense_solve(&sys, &rhs).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(&vec(&z), &exact));
    }
    check(worst < 1e-8, format!("max rel err {worst:.2e}"))
}

fn inversion_identity() -> Outcome {
    let mut r = rng(3);
    let (mut sym, mut skew): (f64, f64) = (0.0, 0.0);
    for t in 0..20 {
        let p = 1 + t % 6;
        let n = uniform(&mut r, p, p);
        let lambda = 10f64.powf(r.gen_range(-2.0..1.0));
        let c = check_inversion_identity(&n, lambda).map_err(|e| e.to_string())?;
        sym = sym.max(c.symmetric);
        skew = skew.max(c.skew);
    }
    check(sym < 1e-9 && skew < 1e-9, format!("symmetric {sym:.2e}, skew {skew:.2e}"))
}

fn label_transform() -> Outcome {
    let mut r = rng(4);
    let kernel = NodeKernel::Gaussian { gamma: 0.5 };
    let mut worst: f64 = 0.0;
    for kind in [PairwiseKind::Symmetric, PairwiseKind::Reciprocal] {
        for p in 2..=5 {
            let x = uniform(&mut r, p, 3);
            let y = uniform(&mut r, p, p);
            let lambda = 0.1;
            let ds = GraphDataset::complete_from_labels(x.clone(), &y).unwrap();
            let cfg = TrainConfig::new(Objective::Regression, kind, lambda, SolverKind::ClosedForm);
            let model = Model::fit(&ds, kernel, &cfg).map_err(|e| e.to_string())?;

            // dense RLS with the explicit (skew-)symmetrized kernel S(K⊗K)S or A(K⊗K)A
            let k = node_kernel_matrix(&x, &x, &kernel).unwrap();
            let sign = if kind == PairwiseKind::Symmetric { 1.0 } else { -1.0 };
            let n = p * p;
            let kk = kron(&k, &k);
            let flip = |idx: usize| (idx % p) * p + idx / p;
            let mut sys = Matrix::from_fn(n, n, |a, b| {
                0.25 * (kk[(a, b)] + sign * kk[(flip(a), b)] + sign * kk[(a, flip(b))] + kk[(flip(a), flip(b))])
            });
            sys.add_diag(lambda);
            let dual = dense_solve(&sys, &vec(&y)).map_err(|e| e.to_string())?;

            let held = uniform(&mut r, 8, 3);
            let kh = node_kernel_matrix(&held, &x, &kernel).unwrap();
            let grid = model.predict_scores(&held, &held).map_err(|e| e.to_string())?;
            let mut count = 0;
            'pairs: for s in 0..8 {
                for e in 0..8 {
                    if count == 50 {
                        break 'pairs;
                    }
                    count += 1;
                    let mut want = 0.0;
                    for h in 0..p {
                        for i in 0..p {
                            let kv = 0.5 * (kh[(s, h)] * kh[(e, i)] + sign * kh[(e, h)] * kh[(s, i)]);
                            want += dual[h * p + i] * kv;
                        }
                    }
                    worst = worst.max((grid[(e, s)] - want).abs());
                }
            }
        }
    }
    check(worst < 1e-7, format!("max abs diff {worst:.2e} over 50 held-out pairs per case"))
}

fn vec_trick() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for p in 1..=8 {
        let b = uniform(&mut r, p, p);
        let k = b.add(&b.transpose()).unwrap();
        let v: Vec<f64> = (0..p * p).map(|_| r.gen_range(-1.0..1.0)).collect();
        for (kind, sign) in [
            (PairwiseKind::Ordinary, 0.0),
            (PairwiseKind::Symmetric, 1.0),
            (PairwiseKind::Reciprocal, -1.0),
        ] {
            let explicit = Matrix::from_fn(p * p, p * p, |row, col| {
                let (h, i, kk, j) = (row / p, row % p, col / p, col % p);
                let direct = k[(h, kk)] * k[(i, j)];
                if kind == PairwiseKind::Ordinary {
                    direct
                } else {
                    0.5 * (direct + sign * k[(h, j)] * k[(i, kk)])
                }
            });
            let want = explicit.matvec(&v).unwrap();
            let got = pairwise_operator_apply(kind, &k, &k, &v).map_err(|e| e.to_string())?;
            worst = worst.max(max_abs(&got, &want));
        }
    }
    check(worst < 1e-12, format!("max abs diff {worst:.2e}"))
}

fn rankrls_as_regression() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for p in 2..=5 {
        for complete in [true, false] {
            let k = random_pd(&mut r, p);
            let edges: Vec<Edge> = if complete {
                (0..p * p).map(|e| Edge::new(e / p, e % p, 0.0)).collect()
            } else {
                (0..2 * p).map(|_| Edge::new(r.gen_range(0..p), r.gen_range(0..p), 0.0)).collect()
            };
            let q = edges.len();
            let l = BlockStructure::from_edges(&edges, Direction::Outgoing).to_matrix();
            let kbar = Matrix::from_fn(q, q, |a, b| k[(edges[a].start, edges[b].start)] * k[(edges[a].end, edges[b].end)]);
            let raw: Vec<f64> = (0..q).map(|_| r.gen_range(-1.0..1.0)).collect();
            let y = l.matvec(&raw).unwrap();
            let lambda = 0.3;

            let mut lhs1 = l.matmul(&kbar).unwrap();
            lhs1.add_diag(lambda);
            let a1 = dense_solve(&lhs1, &l.matvec(&y).unwrap()).map_err(|e| e.to_string())?;
            let mut lhs2 = l.matmul(&kbar).unwrap().matmul(&l).unwrap();
            lhs2.add_diag(lambda);
            let a2 = dense_solve(&lhs2, &y).map_err(|e| e.to_string())?;
            worst = worst.max(max_abs(&a1, &a2));
        }
    }
    check(worst < 1e-8, format!("max abs diff {worst:.2e}"))
}

fn iterative_matches_closed_form() -> Outcome {
    let mut r = rng(7);
    let p = 20;
    let x = uniform(&mut r, p, 4);
    let y = uniform(&mut r, p, p);
    let ds = GraphDataset::complete_from_labels(x, &y).unwrap();
    let kernel = NodeKernel::Gaussian { gamma: 0.5 };
    let probe = uniform(&mut r, 30, 4);
    let mut parts = Vec::new();
    let mut ok = true;
    for objective in [Objective::Regression, Objective::Ranking] {
        let lambda = 1e-2;
        let closed = TrainConfig::new(objective, PairwiseKind::Ordinary, lambda, SolverKind::ClosedForm);
        let iter = TrainConfig::new(
            objective,
            PairwiseKind::Ordinary,
            lambda,
            SolverKind::Iterative(IterativeOptions {
                max_iter: 200,
                residual_tol: 1e-12,
            }),
        );
        let a = Model::fit(&ds, kernel, &closed).map_err(|e| e.to_string())?;
        let b = Model::fit(&ds, kernel, &iter).map_err(|e| e.to_string())?;
        let ha = a.predict_scores(&probe, &probe).unwrap();
        let hb = b.predict_scores(&probe, &probe).unwrap();
        let diff = rel_err(hb.as_slice(), ha.as_slice());
        let its = b.summary().iterations.unwrap_or(0);
        ok &= diff < 1e-6 && its <= 200;
        parts.push(format!("{objective}: rel diff {diff:.2e} after {its} iterations"));
    }
    check(ok, parts.join("; "))
}

fn rps_loss(w: f64, seed: u64, kind: PairwiseKind) -> Result<f64, Error> {
    let data = gen_rps(&RpsConfig {
        w,
        seed,
        ..RpsConfig::default()
    })?;
    let cfg = TrainConfig::new(
        Objective::Ranking,
        kind,
        2f64.powi(-30),
        SolverKind::Iterative(IterativeOptions {
            max_iter: 200,
            residual_tol: 1e-10,
        }),
    );
    let model = Model::fit(&data.train, NodeKernel::Linear, &cfg)?;
    let h = model.predict_scores(&data.test_features, &data.test_features)?;
    let edges = data.test_edges();
    let preds: Vec<f64> = edges.iter().map(|e| h[(e.end, e.start)]).collect();
    pairwise_rank_loss(&GroupedScores::from_edges(&edges, &preds, Direction::Outgoing)?)
}

fn rps_end_to_end() -> Outcome {
    let start = Instant::now();
    let mean = |w: f64, kind| -> Result<f64, String> {
        let mut total = 0.0;
        for seed in 0..20 {
            total += rps_loss(w, 1000 + seed, kind).map_err(|e| e.to_string())?;
        }
        Ok(total / 20.0)
    };
    let ord: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&w| mean(w, PairwiseKind::Ordinary))
        .collect::<Result<_, _>>()?;
    let rec100 = mean(100.0, PairwiseKind::Reciprocal)?;
    let secs = start.elapsed().as_secs_f64();
    let a = (0.45..=0.55).contains(&ord[0]);
    let b = ord[2] < ord[1] && ord[1] < ord[0];
    let c = ord[2] < 0.05;
    let d = rec100 <= ord[2];
    let detail = format!(
        "ordinary w1 {:.4} w10 {:.4} w100 {:.4}; reciprocal w100 {rec100:.4}; (a) {a} (b) {b} (c) {c} (d) {d}; {secs:.1}s",
        ord[0], ord[1], ord[2]
    );
    check(a && b && c && d && secs < 300.0, detail)
}

fn time_fit(ds: &GraphDataset, k: &Matrix, cfg: &TrainConfig, repeats: usize) -> Result<f64, String> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        let t = Instant::now();
        Model::fit_precomputed(k, ds, cfg).map_err(|e| e.to_string())?;
        best = best.min(t.elapsed().as_secs_f64());
    }
    Ok(best)
}

fn complete_graph(p: usize, seed: u64) -> (GraphDataset, Matrix) {
    let mut r = rng(seed);
    let x = uniform(&mut r, p, 5);
    let y = uniform(&mut r, p, p);
    let k = node_kernel_matrix(&x, &x, &NodeKernel::Gaussian { gamma: 0.2 }).unwrap();
    (GraphDataset::complete_from_labels(x, &y).unwrap(), k)
}

fn scaling() -> Outcome {
    let closed = TrainConfig::new(Objective::Ranking, PairwiseKind::Ordinary, 1e-3, SolverKind::ClosedForm);
    let (ds, k) = complete_graph(500, 8);
    let t500 = time_fit(&ds, &k, &closed, 1)?;

    let mut times = Vec::new();
    for p in [100, 200, 400] {
        let (ds, k) = complete_graph(p, 9);
        times.push(time_fit(&ds, &k, &closed, 3)?);
    }
    let ratios = [times[1] / times[0], times[2] / times[1]];

    // Per-iteration cost of the iterative solver at p = 200 for q = p and q = p².
    let p = 200;
    let mut r = rng(10);
    let x = uniform(&mut r, p, 5);
    let k = node_kernel_matrix(&x, &x, &NodeKernel::Gaussian { gamma: 0.2 }).unwrap();
    let sparse: Vec<Edge> = (0..p)
        .map(|_| Edge::new(r.gen_range(0..p), r.gen_range(0..p), r.gen_range(-1.0..1.0)))
        .collect();
    let dense: Vec<Edge> = (0..p * p).map(|e| Edge::new(e / p, e % p, r.gen_range(-1.0..1.0))).collect();
    let iter_cfg = TrainConfig::new(
        Objective::Ranking,
        PairwiseKind::Ordinary,
        1e-3,
        SolverKind::Iterative(IterativeOptions {
            max_iter: 30,
            residual_tol: 0.0,
        }),
    );
    let mut per_iter = Vec::new();
    for edges in [sparse, dense] {
        let ds = GraphDataset::with_numbered_nodes(x.clone(), edges).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let t = Instant::now();
            let out = solve_iterative_with(&k, &ds, &iter_cfg, |_| ControlFlow::Continue(()))
                .map_err(|e| e.to_string())?;
            best = best.min(t.elapsed().as_secs_f64() / out.iterations.max(1) as f64);
        }
        per_iter.push(best);
    }
    let spread = (per_iter[1] - per_iter[0]).abs() / per_iter[0].min(per_iter[1]);

    let ok = t500 < 60.0 && ratios.iter().all(|&x| x <= 10.0) && spread < 0.2;
    check(
        ok,
        format!(
            "p=500 closed form {t500:.2}s; t(p) at 100/200/400 = {:.4}/{:.4}/{:.4}s, ratios {:.2}/{:.2}; \
             per-iteration q=p {:.2}ms vs q=p² {:.2}ms (spread {:.1}%)",
            times[0],
            times[1],
            times[2],
            ratios[0],
            ratios[1],
            per_iter[0] * 1e3,
            per_iter[1] * 1e3,
            spread * 100.0
        ),
    )
}

fn loss_suite() -> Outcome {
    let single = |pairs: Vec<(f64, f64)>| GroupedScores::new(vec![pairs]).unwrap();
    let labels = [0.5, -1.0, 2.0, 3.5, 0.0];
    let perfect = pairwise_rank_loss(&single(labels.iter().map(|&y| (y, y)).collect())).unwrap();
    let reversed = pairwise_rank_loss(&single(labels.iter().map(|&y| (-y, y)).collect())).unwrap();
    let constant = pairwise_rank_loss(&single(labels.iter().map(|&y| (1.0, y)).collect())).unwrap();
    let exact = perfect == 0.0 && reversed == 1.0 && constant == 0.5;

    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n_groups = r.gen_range(1..5);
        let groups: Vec<Vec<(f64, f64)>> = (0..n_groups)
            .map(|_| {
                (0..r.gen_range(1..6))
                    .map(|_| (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let ids: Vec<usize> = groups.iter().enumerate().flat_map(|(g, v)| vec![g; v.len()]).collect();
        let l = BlockStructure::from_group_ids(&ids).to_matrix();
        let flat: Vec<(f64, f64)> = groups.iter().flatten().copied().collect();
        let resid: Vec<f64> = flat.iter().map(|(h, y)| y - h).collect();
        let lr = l.matvec(&resid).unwrap();
        let matrix_form: f64 = (0..flat.len())
            .map(|e| 2.0 * groups[ids[e]].len() as f64 * resid[e] * lr[e])
            .sum();
        let got = centered_squared_loss(&GroupedScores::new(groups).unwrap());
        worst = worst.max((got - matrix_form).abs() / matrix_form.abs().max(1.0));
    }
    check(
        exact && worst < 1e-10,
        format!("perfect {perfect}, reversed {reversed}, constant {constant}; centered loss max rel diff {worst:.2e}"),
    )
}

fn ingestion() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = gen_rps(&RpsConfig {
        n_train_players: 10,
        n_train_games: 30,
        n_test_players: 5,
        w: 10.0,
        seed: 5,
    })
    .map_err(|e| e.to_string())?;
    let nodes = dir.path().join("nodes.csv");
    let edges = dir.path().join("edges.csv");
    let preds = dir.path().join("preds.csv");
    let ids = data.train.node_ids();
    write_nodes_csv(&nodes, ids, data.train.features()).map_err(|e| e.to_string())?;
    write_edges_csv(&edges, ids, data.train.edges()).map_err(|e| e.to_string())?;
    let (ids_back, feats_back) = read_nodes_csv(&nodes).map_err(|e| e.to_string())?;
    let edges_back = read_edges_csv(&edges, &ids_back).map_err(|e| e.to_string())?;
    let grid = data.test_win_prob.clone();
    let test_ids: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
    write_predictions_csv(&preds, &test_ids, &test_ids, &grid).map_err(|e| e.to_string())?;
    let pred_back = read_predictions_csv(&preds).map_err(|e| e.to_string())?;
    let round_trip = ids_back == ids
        && &feats_back == data.train.features()
        && edges_back == data.train.edges()
        && pred_back.iter().all(|row| {
            let s: usize = row.start[1..].parse().unwrap();
            let e: usize = row.end[1..].parse().unwrap();
            row.score == grid[(e, s)]
        });

    fs::write(&edges, "start,end,label\np0,p1,1\np0,nobody,1\n").unwrap();
    let unknown = matches!(
        read_edges_csv(&edges, ids),
        Err(Error::Parse { line: 3, ref message, .. }) if message.contains("nobody")
    );
    fs::write(&nodes, "id,f1\np0,oops\n").unwrap();
    let non_numeric = matches!(read_nodes_csv(&nodes), Err(Error::Parse { line: 2, .. }));
    fs::write(&edges, "start,end\n").unwrap();
    let missing_column = matches!(read_edges_csv(&edges, ids), Err(Error::Parse { line: 1, .. }));
    fs::write(&edges, "start,end,label\n").unwrap();
    let empty = read_edges_csv(&edges, ids).map(|v| v.is_empty()).unwrap_or(false);
    check(
        round_trip && unknown && non_numeric && missing_column && empty,
        format!(
            "round trip {round_trip}, unknown id {unknown}, non-numeric {non_numeric}, \
             missing column {missing_column}, empty edges {empty}; published 20-newsgroups, \
             bacterial and enzyme numbers are not reproduced (datasets not bundled)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form RLS matches dense solve", closed_form_rls),
        ("closed-form RankRLS matches dense solve", closed_form_rankrls),
        ("inversion identities", inversion_identity),
        ("label transform matches symmetrized-kernel RLS", label_transform),
        ("implicit pairwise operator matches explicit matrix", vec_trick),
        ("ranking dual equals centered regression dual", rankrls_as_regression),
        ("BiCGSTAB agrees with the closed form", iterative_matches_closed_form),
        ("rock-paper-scissors end to end", rps_end_to_end),
        ("scaling", scaling),
        ("loss functions", loss_suite),
        ("dataset ingestion", ingestion),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:>2}] {name}: {detail} ({:.2}s)", i + 1, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
