//! Versioned plain-text model files.
//!
//! ```text
//! kronrank-model
//! version 1
//! objective ranking
//! pairwise reciprocal
//! direction outgoing
//! kernel gaussian 5.0000000000000000e-1
//! lambda 9.3132257461547852e-10
//! solver iterative 200 1.0000000000000000e-10
//! iterations 200
//! relative_residual 3.1415926535897931e-7
//! nodes 2
//! feature_dim 3
//! dual
//! <nodes rows of nodes values>
//! features
//! <nodes rows of feature_dim values>
//! end
//! ```
//!
//! Floats carry 17 significant digits, so a save/load round trip is exact.
//! Precomputed-kernel models write `kernel precomputed`, `feature_dim 0`
//! and an empty `features` block. `iterations` and `relative_residual` are
//! `none` for the closed form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Model, TrainingSummary};
use crate::error::{Error, Result};
use crate::graph::Direction;
use crate::kernels::{NodeKernel, PairwiseKind};
use crate::linalg::Matrix;
use crate::solvers::{DualCoefficients, IterativeOptions, Objective, SolverKind};

pub const FORMAT_TAG: &str = "kronrank-model";
pub const FORMAT_VERSION: u32 = 1;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

pub(crate) fn render(m: &Model) -> String {
    let mut out = String::new();
    let p = m.node_count();
    let d = m.train_features().map_or(0, |x| x.cols());
    let kernel = match m.kernel() {
        NodeKernel::Linear => "linear".to_string(),
        NodeKernel::Gaussian { gamma } => format!("gaussian {}", num(gamma)),
        NodeKernel::Precomputed => "precomputed".to_string(),
    };
    let s = m.summary();
    let solver = match s.solver {
        SolverKind::ClosedForm => "closed".to_string(),
        SolverKind::Iterative(o) => format!("iterative {} {}", o.max_iter, num(o.residual_tol)),
    };
    let opt_num = |x: Option<f64>| x.map_or("none".to_string(), num);
    let _ = writeln!(out, "{FORMAT_TAG}");
    let _ = writeln!(out, "version {FORMAT_VERSION}");
    let _ = writeln!(out, "objective {}", m.objective());
    let _ = writeln!(out, "pairwise {}", m.pairwise());
    let _ = writeln!(out, "direction {}", s.direction.as_str());
    let _ = writeln!(out, "kernel {kernel}");
    let _ = writeln!(out, "lambda {}", num(m.lambda()));
    let _ = writeln!(out, "solver {solver}");
    let _ = writeln!(
        out,
        "iterations {}",
        s.iterations.map_or("none".to_string(), |i| i.to_string())
    );
    let _ = writeln!(out, "relative_residual {}", opt_num(s.relative_residual));
    let _ = writeln!(out, "nodes {p}");
    let _ = writeln!(out, "feature_dim {d}");
    out.push_str("dual\n");
    write_rows(&mut out, m.dual().matrix());
    out.push_str("features\n");
    if let Some(x) = m.train_features() {
        write_rows(&mut out, x);
    }
    out.push_str("end\n");
    out
}

fn write_rows(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| num(x)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedModel(msg.into())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .ok_or_else(|| malformed(format!("file ends before {what}")))
    }

    /// Reads `key value...` and returns the value part.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.next_line(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v)),
            _ => Err(malformed(format!("line {n}: expected '{key} ...', found '{line}'"))),
        }
    }

    fn literal(&mut self, word: &str) -> Result<()> {
        let (n, line) = self.next_line(word)?;
        if line != word {
            return Err(malformed(format!("line {n}: expected '{word}', found '{line}'")));
        }
        Ok(())
    }

    fn rows(&mut self, what: &str, rows: usize, cols: usize) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = self.next_line(what)?;
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(parse_f64(n, tok)?);
            }
            if data.len() - before != cols {
                return Err(malformed(format!(
                    "line {n}: {what} row has {} values, expected {cols}",
                    data.len() - before
                )));
            }
        }
        Matrix::from_row_major(rows, cols, data).map_err(|e| malformed(e.to_string()))
    }
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let x: f64 = tok
        .parse()
        .map_err(|_| malformed(format!("line {line}: '{tok}' is not a number")))?;
    if !x.is_finite() {
        return Err(malformed(format!("line {line}: non-finite value '{tok}'")));
    }
    Ok(x)
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| malformed(format!("line {line}: '{tok}' is not a count")))
}

fn parse_opt<T>(line: usize, tok: &str, f: impl Fn(usize, &str) -> Result<T>) -> Result<Option<T>> {
    if tok == "none" {
        Ok(None)
    } else {
        f(line, tok).map(Some)
    }
}

pub(crate) fn parse(text: &str) -> Result<Model> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, tag) = lines.next_line("the format tag")?;
    if tag.trim_end_matches('\r') != FORMAT_TAG {
        return Err(malformed(format!("not a model file (first line '{tag}')")));
    }
    let (_, version) = lines.field("version")?;
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::VersionMismatch {
            found: version.to_string(),
            expected: FORMAT_VERSION,
        });
    }
    let wrap = |n: usize, e: Error| malformed(format!("line {n}: {e}"));

    let (n, v) = lines.field("objective")?;
    let objective: Objective = v.parse().map_err(|e| wrap(n, e))?;
    let (n, v) = lines.field("pairwise")?;
    let pairwise: PairwiseKind = v.parse().map_err(|e| wrap(n, e))?;
    let (n, v) = lines.field("direction")?;
    let direction: Direction = v.parse().map_err(|e| wrap(n, e))?;

    let (n, v) = lines.field("kernel")?;
    let kernel = match v.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["linear"] => NodeKernel::Linear,
        ["precomputed"] => NodeKernel::Precomputed,
        ["gaussian", g] => NodeKernel::gaussian(parse_f64(n, g)?).map_err(|e| wrap(n, e))?,
        _ => return Err(malformed(format!("line {n}: unknown kernel '{v}'"))),
    };
    let (n, v) = lines.field("lambda")?;
    let lambda = parse_f64(n, v)?;
    let (n, v) = lines.field("solver")?;
    let solver = match v.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["closed"] => SolverKind::ClosedForm,
        ["iterative", it, tol] => SolverKind::Iterative(IterativeOptions {
            max_iter: parse_usize(n, it)?,
            residual_tol: parse_f64(n, tol)?,
        }),
        _ => return Err(malformed(format!("line {n}: unknown solver '{v}'"))),
    };
    let (n, v) = lines.field("iterations")?;
    let iterations = parse_opt(n, v, parse_usize)?;
    let (n, v) = lines.field("relative_residual")?;
    let relative_residual = parse_opt(n, v, parse_f64)?;
    let (n, v) = lines.field("nodes")?;
    let p = parse_usize(n, v)?;
    if p == 0 {
        return Err(malformed(format!("line {n}: model has no nodes")));
    }
    let (n, v) = lines.field("feature_dim")?;
    let d = parse_usize(n, v)?;

    lines.literal("dual")?;
    let dual = lines.rows("dual", p, p)?;
    lines.literal("features")?;
    let features = match kernel {
        NodeKernel::Precomputed => None,
        _ => Some(lines.rows("features", p, d)?),
    };
    lines.literal("end")?;

    let summary = TrainingSummary {
        solver,
        direction,
        iterations,
        relative_residual,
    };
    let dual = DualCoefficients::new(dual).map_err(|e| malformed(e.to_string()))?;
    Model::from_parts(dual, kernel, pairwise, features, objective, lambda, summary)
        .map_err(|e| malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(kernel: NodeKernel, seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 4;
        let feats = match kernel {
            NodeKernel::Precomputed => None,
            _ => Some(Matrix::from_fn(p, 3, |_, _| rng.gen_range(-1.0..1.0))),
        };
        Model::from_parts(
            DualCoefficients::new(Matrix::from_fn(p, p, |_, _| rng.gen::<f64>() * 1e-3 - 7e-4)).unwrap(),
            kernel,
            PairwiseKind::Reciprocal,
            feats,
            Objective::Ranking,
            2f64.powi(-30),
            TrainingSummary {
                solver: SolverKind::Iterative(IterativeOptions::default()),
                direction: Direction::Incoming,
                iterations: Some(17),
                relative_residual: Some(rng.gen()),
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (i, kernel) in [NodeKernel::Linear, NodeKernel::Gaussian { gamma: 0.3 }, NodeKernel::Precomputed]
            .into_iter()
            .enumerate()
        {
            let m = sample(kernel, i as u64);
            let path = dir.path().join(format!("m{i}.txt"));
            save_model(&m, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, m);
            if let Some(x) = m.train_features() {
                assert_eq!(back.predict_scores(x, x).unwrap(), m.predict_scores(x, x).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_summary_round_trips() {
        let m = Model::from_parts(
            DualCoefficients::zeros(1),
            NodeKernel::Linear,
            PairwiseKind::Ordinary,
            Some(Matrix::zeros(1, 2)),
            Objective::Regression,
            0.5,
            TrainingSummary {
                solver: SolverKind::ClosedForm,
                direction: Direction::Outgoing,
                iterations: None,
                relative_residual: None,
            },
        )
        .unwrap();
        let text = render(&m);
        assert!(text.contains("iterations none\n"));
        assert_eq!(parse(&text).unwrap(), m);
    }

    #[test]
    fn truncated_file_is_malformed() {
        let text = render(&sample(NodeKernel::Linear, 1));
        for cut in [10, text.len() / 2, text.len() - 5] {
            let err = parse(&text[..cut]).unwrap_err();
            assert!(matches!(err, Error::MalformedModel(_)), "cut {cut}: {err}");
        }
    }

    #[test]
    fn unknown_version_is_reported() {
        let text = render(&sample(NodeKernel::Linear, 2)).replace("version 1\n", "version 7\n");
        match parse(&text) {
            Err(Error::VersionMismatch { found, expected }) => {
                assert_eq!(found, "7");
                assert_eq!(expected, FORMAT_VERSION);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(parse("hello\n"), Err(Error::MalformedModel(_))));
        let text = render(&sample(NodeKernel::Linear, 3)).replace("nodes 4", "nodes 5");
        assert!(matches!(parse(&text), Err(Error::MalformedModel(_))));
    }

    #[test]
    fn crlf_is_accepted() {
        let m = sample(NodeKernel::Linear, 4);
        let text = render(&m).replace('\n', "\r\n");
        assert_eq!(parse(&text).unwrap(), m);
    }
}
