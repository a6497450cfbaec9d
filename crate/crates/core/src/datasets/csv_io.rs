//! CSV files for nodes, edges and predictions.
//!
//! * nodes: header `id,f1,...,fd`, then one row per node
//! * edges: header `start,end,label`, endpoints given by node id
//! * predictions: header `start,end,score`
//!
//! Floats are written in shortest round-trip form. Reading accepts LF and
//! CRLF line endings; writing uses LF.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use crate::error::{invalid, Error, Result};
use crate::graph::Edge;
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRow {
    pub start: String,
    pub end: String,
    pub score: f64,
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(file))
}

fn headers(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    let h = rdr.headers().map_err(|e| csv_err(path, e))?;
    Ok(h.iter().map(|s| s.trim().to_string()).collect())
}

fn records(path: &Path, rdr: csv::Reader<File>) -> impl Iterator<Item = Result<(u64, StringRecord)>> + '_ {
    rdr.into_records().map(move |r| {
        let rec = r.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        Ok((line, rec))
    })
}

fn number(path: &Path, line: u64, column: &str, field: &str) -> Result<f64> {
    let x: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("column '{column}': '{field}' is not a number")))?;
    if !x.is_finite() {
        return Err(parse_err(path, line, format!("column '{column}': non-finite value '{field}'")));
    }
    Ok(x)
}

fn expect_headers(path: &Path, found: &[String], expected: &[&str]) -> Result<()> {
    if found != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header '{}', found '{}'", expected.join(","), found.join(",")),
        ));
    }
    Ok(())
}

fn check_width(path: &Path, line: u64, rec: &StringRecord, width: usize) -> Result<()> {
    if rec.len() != width {
        return Err(parse_err(
            path,
            line,
            format!("expected {width} columns, found {}", rec.len()),
        ));
    }
    Ok(())
}

/// Reads node ids and their `p x d` feature matrix.
pub fn read_nodes_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Matrix)> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    if head.first().map(String::as_str) != Some("id") {
        return Err(parse_err(path, 1, "first column of the header must be 'id'"));
    }
    let d = head.len() - 1;
    let mut ids = Vec::new();
    let mut seen = HashMap::new();
    let mut data = Vec::new();
    for item in records(path, rdr) {
        let (line, rec) = item?;
        check_width(path, line, &rec, d + 1)?;
        let id = rec[0].trim().to_string();
        if id.is_empty() {
            return Err(parse_err(path, line, "empty node id"));
        }
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(parse_err(path, line, format!("duplicate node id '{id}' (first on line {first})")));
        }
        for (col, field) in head[1..].iter().zip(rec.iter().skip(1)) {
            data.push(number(path, line, col, field)?);
        }
        ids.push(id);
    }
    let features = Matrix::from_row_major(ids.len(), d, data)?;
    Ok((ids, features))
}

/// Reads edges whose endpoints are resolved against `ids`.
pub fn read_edges_csv(path: impl AsRef<Path>, ids: &[String]) -> Result<Vec<Edge>> {
    let path = path.as_ref();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    expect_headers(path, &head, &["start", "end", "label"])?;
    let lookup = |line: u64, id: &str| {
        index
            .get(id.trim())
            .copied()
            .ok_or_else(|| parse_err(path, line, format!("unknown node id '{}'", id.trim())))
    };
    let mut edges = Vec::new();
    for item in records(path, rdr) {
        let (line, rec) = item?;
        check_width(path, line, &rec, 3)?;
        let start = lookup(line, &rec[0])?;
        let end = lookup(line, &rec[1])?;
        let label = number(path, line, "label", &rec[2])?;
        edges.push(Edge::new(start, end, label));
    }
    Ok(edges)
}

pub fn write_nodes_csv(path: impl AsRef<Path>, ids: &[String], features: &Matrix) -> Result<()> {
    let path = path.as_ref();
    if ids.len() != features.rows() {
        return Err(invalid(format!(
            "{} ids for {} feature rows",
            ids.len(),
            features.rows()
        )));
    }
    let mut w = writer(path)?;
    let mut head = vec!["id".to_string()];
    head.extend((1..=features.cols()).map(|j| format!("f{j}")));
    w.write_record(&head).map_err(|e| csv_err(path, e))?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(features.row(i).iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_edges_csv(path: impl AsRef<Path>, ids: &[String], edges: &[Edge]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(["start", "end", "label"]).map_err(|e| csv_err(path, e))?;
    for e in edges {
        let (s, t) = match (ids.get(e.start), ids.get(e.end)) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(invalid(format!("edge {} -> {} has no id", e.start, e.end))),
        };
        w.write_record([s.as_str(), t.as_str(), &e.label.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a `t x s` score grid (`grid[(e, s)]` scores `start_ids[s] -> end_ids[e]`)
/// as one row per pair, start-major.
pub fn write_predictions_csv(
    path: impl AsRef<Path>,
    start_ids: &[String],
    end_ids: &[String],
    grid: &Matrix,
) -> Result<()> {
    let path = path.as_ref();
    if grid.shape() != (end_ids.len(), start_ids.len()) {
        return Err(invalid(format!(
            "score grid is {:?}, expected {}x{}",
            grid.shape(),
            end_ids.len(),
            start_ids.len()
        )));
    }
    let mut w = writer(path)?;
    w.write_record(["start", "end", "score"]).map_err(|e| csv_err(path, e))?;
    for (s, sid) in start_ids.iter().enumerate() {
        for (e, eid) in end_ids.iter().enumerate() {
            w.write_record([sid.as_str(), eid.as_str(), &grid[(e, s)].to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions_csv(path: impl AsRef<Path>) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    expect_headers(path, &head, &["start", "end", "score"])?;
    let mut rows = Vec::new();
    for item in records(path, rdr) {
        let (line, rec) = item?;
        check_width(path, line, &rec, 3)?;
        rows.push(PredictionRow {
            start: rec[0].trim().to_string(),
            end: rec[1].trim().to_string(),
            score: number(path, line, "score", &rec[2])?,
        });
    }
    Ok(rows)
}
