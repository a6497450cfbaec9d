//! Ranking and regression losses over edges grouped by conditioning node.
//!
//! The reported ranking loss is normalized by the number of comparable
//! pairs (pairs within a group whose labels differ), so a constant
//! predictor scores exactly 0.5 and a perfect one scores 0.

use crate::error::{invalid, Error, Result};
use crate::graph::{BlockStructure, Direction, Edge};

/// `(prediction, label)` pairs, one list per conditioning node.
#[derive(Clone, Debug, Default)]
pub struct GroupedScores {
    groups: Vec<Vec<(f64, f64)>>,
}

impl GroupedScores {
    pub fn new(groups: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        if groups.iter().any(|g| g.is_empty()) {
            return Err(invalid("grouped scores contain an empty group"));
        }
        if groups.iter().flatten().any(|(h, y)| !h.is_finite() || !y.is_finite()) {
            return Err(invalid("grouped scores must be finite"));
        }
        Ok(GroupedScores { groups })
    }

    /// Groups edges by their conditioning node, pairing each with its prediction.
    pub fn from_edges(edges: &[Edge], predictions: &[f64], direction: Direction) -> Result<Self> {
        if edges.len() != predictions.len() {
            return Err(invalid(format!(
                "{} edges but {} predictions",
                edges.len(),
                predictions.len()
            )));
        }
        let bs = BlockStructure::from_edges(edges, direction);
        let mut groups = vec![Vec::new(); bs.group_sizes().len()];
        for (k, (e, &h)) in edges.iter().zip(predictions).enumerate() {
            groups[bs.group_of(k)].push((h, e.label));
        }
        GroupedScores::new(groups)
    }

    pub fn groups(&self) -> &[Vec<(f64, f64)>] {
        &self.groups
    }
}

/// Fraction of comparable pairs (`y_e < y_ē` within a group) that are
/// ordered wrongly; prediction ties count one half.
pub fn pairwise_rank_loss(gs: &GroupedScores) -> Result<f64> {
    let mut errors = 0.0;
    let mut pairs = 0u64;
    for group in &gs.groups {
        for &(h_e, y_e) in group {
            for &(h_f, y_f) in group {
                if y_e < y_f {
                    pairs += 1;
                    let d = h_e - h_f;
                    if d > 0.0 {
                        errors += 1.0;
                    } else if d == 0.0 {
                        errors += 0.5;
                    }
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::UndefinedLoss);
    }
    Ok(errors / pairs as f64)
}

/// `Σ (y - h)²`.
pub fn regression_loss(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(invalid(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    Ok(predictions
        .iter()
        .zip(labels)
        .map(|(h, y)| (y - h) * (y - h))
        .sum())
}

/// `Σ_v Σ_{e,ē ∈ E_v} (y_e - y_ē - h_e + h_ē)²` over ordered pairs, computed
/// per group as `2 l Σ (r - mean r)²` with `r = y - h`.
pub fn centered_squared_loss(gs: &GroupedScores) -> f64 {
    gs.groups
        .iter()
        .map(|g| {
            let l = g.len() as f64;
            let mean = g.iter().map(|(h, y)| y - h).sum::<f64>() / l;
            let ss: f64 = g
                .iter()
                .map(|(h, y)| {
                    let c = y - h - mean;
                    c * c
                })
                .sum();
            2.0 * l * ss
        })
        .sum()
}
