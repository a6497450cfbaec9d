//! Rock-paper-scissors players with biased mixed strategies.
//!
//! A player's features are its move probabilities `(rock, paper, scissors)`.
//! Strategies are drawn as `u ~ U(0,1]³`, one favorite move chosen uniformly
//! has its weight multiplied by `w`, and the vector is normalized. Larger
//! `w` pushes players toward pure strategies.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; draws happen in
//! a fixed order (training strategies, games, test strategies), so a seed
//! fully determines the output.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::{Edge, GraphDataset};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Rock = 0,
    Paper = 1,
    Scissors = 2,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Rock, Move::Paper, Move::Scissors];

    pub fn beats(self, other: Move) -> bool {
        self as usize == (other as usize + 1) % 3
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RpsConfig {
    pub n_train_players: usize,
    pub n_train_games: usize,
    pub n_test_players: usize,
    /// Weight multiplier for each player's favorite move, at least 1.
    pub w: f64,
    pub seed: u64,
}

impl Default for RpsConfig {
    fn default() -> Self {
        RpsConfig {
            n_train_players: 100,
            n_train_games: 1000,
            n_test_players: 100,
            w: 1.0,
            seed: 0,
        }
    }
}

impl RpsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_train_players < 2 {
            return Err(invalid("games need at least 2 training players"));
        }
        if self.n_train_games == 0 || self.n_test_players == 0 {
            return Err(invalid("game and test player counts must be >= 1"));
        }
        if !(self.w >= 1.0) || !self.w.is_finite() {
            return Err(invalid(format!("w must be finite and >= 1, got {}", self.w)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RpsData {
    /// Two edges per game: winner -> loser labelled +1, loser -> winner -1.
    pub train: GraphDataset,
    pub test_features: Matrix,
    /// `test_win_prob[(v, v')]` is the probability that test player `v`
    /// beats `v'` in a game without a tie.
    pub test_win_prob: Matrix,
}

impl RpsData {
    /// Every ordered pair of distinct test players, labelled with the
    /// start player's win probability.
    pub fn test_edges(&self) -> Vec<Edge> {
        let n = self.test_win_prob.rows();
        (0..n)
            .flat_map(|v| (0..n).filter(move |&u| u != v).map(move |u| (v, u)))
            .map(|(v, u)| Edge::new(v, u, self.test_win_prob[(v, u)]))
            .collect()
    }

    pub fn test_dataset(&self) -> Result<GraphDataset> {
        let ids = (0..self.test_features.rows()).map(|i| format!("t{i}")).collect();
        GraphDataset::new(ids, self.test_features.clone(), self.test_edges())
    }
}

fn strategy(rng: &mut ChaCha8Rng, w: f64) -> [f64; 3] {
    // 1 - U[0,1) lies in (0,1], so every move keeps positive probability.
    let mut u = [0.0; 3];
    for x in &mut u {
        *x = 1.0 - rng.gen::<f64>();
    }
    u[rng.gen_range(0..3)] *= w;
    let total: f64 = u.iter().sum();
    u.map(|x| x / total)
}

fn strategies(rng: &mut ChaCha8Rng, n: usize, w: f64) -> Matrix {
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        data.extend_from_slice(&strategy(rng, w));
    }
    Matrix::from_row_major(n, 3, data).expect("3 values per player")
}

/// Probability that a player with strategy `s` beats one with strategy `t`,
/// conditioned on the game not being a tie. Returns ½ when a tie is certain.
pub fn win_probability(s: &[f64], t: &[f64]) -> f64 {
    let mut win = 0.0;
    let mut lose = 0.0;
    for a in Move::ALL {
        for b in Move::ALL {
            if a.beats(b) {
                win += s[a as usize] * t[b as usize];
                lose += s[b as usize] * t[a as usize];
            }
        }
    }
    // win + lose equals 1 - P(tie) but avoids cancellation when ties dominate.
    let decisive = win + lose;
    if decisive <= 0.0 {
        0.5
    } else {
        win / decisive
    }
}

/// Plays one game, redrawing both moves on a tie. Returns whether `s` wins.
pub fn simulate_game<R: Rng>(s: &[f64], t: &[f64], rng: &mut R) -> Result<bool> {
    let ds = WeightedIndex::new(s).map_err(|e| invalid(format!("bad strategy: {e}")))?;
    let dt = WeightedIndex::new(t).map_err(|e| invalid(format!("bad strategy: {e}")))?;
    let tie: f64 = (0..3).map(|m| s[m] * t[m]).sum();
    if tie >= 1.0 {
        return Err(invalid("both players always play the same move; the game never ends"));
    }
    loop {
        let a = Move::ALL[ds.sample(rng)];
        let b = Move::ALL[dt.sample(rng)];
        if a.beats(b) {
            return Ok(true);
        }
        if b.beats(a) {
            return Ok(false);
        }
    }
}

pub fn gen_rps(cfg: &RpsConfig) -> Result<RpsData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_train_players;
    let train_x = strategies(&mut rng, n, cfg.w);

    let mut edges = Vec::with_capacity(2 * cfg.n_train_games);
    for _ in 0..cfg.n_train_games {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (winner, loser) = if simulate_game(train_x.row(a), train_x.row(b), &mut rng)? {
            (a, b)
        } else {
            (b, a)
        };
        edges.push(Edge::new(winner, loser, 1.0));
        edges.push(Edge::new(loser, winner, -1.0));
    }
    let ids = (0..n).map(|i| format!("p{i}")).collect();
    let train = GraphDataset::new(ids, train_x, edges)?;

    let test_x = strategies(&mut rng, cfg.n_test_players, cfg.w);
    let m = cfg.n_test_players;
    let test_win_prob = Matrix::from_fn(m, m, |v, u| win_probability(test_x.row(v), test_x.row(u)));
    Ok(RpsData {
        train,
        test_features: test_x,
        test_win_prob,
    })
}
