//! Numerical check of the symmetrizer inversion identities
//!
//! ```text
//! (S N̄ S + λI)⁻¹ = S (N̄ + λI)⁻¹ S + (1/λ) A
//! (A N̄ A + λI)⁻¹ = A (N̄ + λI)⁻¹ A + (1/λ) S
//! ```
//!
//! with `N̄ = N ⊗ N`, evaluated on probe vectors against explicit dense
//! matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dense_solve, Matrix};

/// Largest `p` for which `N ⊗ N` is built explicitly.
pub const MAX_IDENTITY_SIDE: usize = 8;

const PROBE_SEED: u64 = 0x5eed_1de7;
const RANDOM_PROBES: usize = 4;

/// Maximum absolute deviation between both sides of each identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionCheck {
    pub symmetric: f64,
    pub skew: f64,
}

impl InversionCheck {
    pub fn max(&self) -> f64 {
        self.symmetric.max(self.skew)
    }
}

/// Checks both identities on a fixed set of seeded random probes plus one
/// symmetric and one antisymmetric probe.
pub fn check_inversion_identity(n: &Matrix, lambda: f64) -> Result<InversionCheck> {
    let p = n.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut probes: Vec<Vec<f64>> = (0..RANDOM_PROBES)
        .map(|_| (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let base = probes[0].clone();
    // vec of M + Mᵀ and M - Mᵀ
    probes.push(flip_sum(&base, p, 1.0));
    probes.push(flip_sum(&base, p, -1.0));
    check_inversion_identity_with_probes(n, lambda, &probes)
}

pub fn check_inversion_identity_with_probes(
    n: &Matrix,
    lambda: f64,
    probes: &[Vec<f64>],
) -> Result<InversionCheck> {
    if !n.is_square() {
        return Err(invalid(format!("N must be square, got {:?}", n.shape())));
    }
    if !n.all_finite() {
        return Err(invalid("N contains non-finite entries"));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be finite and > 0, got {lambda}")));
    }
    let p = n.rows();
    if p > MAX_IDENTITY_SIDE {
        return Err(Error::ResourceLimit {
            what: "explicit N ⊗ N for the inversion identity",
            requested: (p as u128).pow(4),
            cap: (MAX_IDENTITY_SIDE as u128).pow(4),
        });
    }
    let pp = p * p;
    if let Some(bad) = probes.iter().find(|v| v.len() != pp) {
        return Err(invalid(format!("probe of length {} for p = {p}", bad.len())));
    }

    // Entry ((h,i),(k,j)) of N ⊗ N is N[h][k] N[i][j].
    let nbar = Matrix::from_fn(pp, pp, |r, c| n[(r / p, c / p)] * n[(r % p, c % p)]);
    let mut shifted = nbar.clone();
    shifted.add_diag(lambda);
    let sym_lhs = {
        let mut m = project_both_sides(&nbar, p, 1.0);
        m.add_diag(lambda);
        m
    };
    let skew_lhs = {
        let mut m = project_both_sides(&nbar, p, -1.0);
        m.add_diag(lambda);
        m
    };

    let mut check = InversionCheck {
        symmetric: 0.0,
        skew: 0.0,
    };
    for x in probes {
        let sx = half_flip_sum(x, p, 1.0);
        let ax = half_flip_sum(x, p, -1.0);

        let left = dense_solve(&sym_lhs, x)?;
        let inner = half_flip_sum(&dense_solve(&shifted, &sx)?, p, 1.0);
        let right: Vec<f64> = inner.iter().zip(&ax).map(|(u, a)| u + a / lambda).collect();
        check.symmetric = check.symmetric.max(max_dev(&left, &right));

        let left = dense_solve(&skew_lhs, x)?;
        let inner = half_flip_sum(&dense_solve(&shifted, &ax)?, p, -1.0);
        let right: Vec<f64> = inner.iter().zip(&sx).map(|(u, s)| u + s / lambda).collect();
        check.skew = check.skew.max(max_dev(&left, &right));
    }
    Ok(check)
}

fn flipped(k: usize, p: usize) -> usize {
    (k % p) * p + k / p
}

/// `v + sign * P v`, where `P` swaps the two factors of the pair index.
fn flip_sum(v: &[f64], p: usize, sign: f64) -> Vec<f64> {
    (0..v.len()).map(|k| v[k] + sign * v[flipped(k, p)]).collect()
}

fn half_flip_sum(v: &[f64], p: usize, sign: f64) -> Vec<f64> {
    flip_sum(v, p, sign).into_iter().map(|x| 0.5 * x).collect()
}

/// `¼ (M ± P M ± M P + P M P)`, i.e. `S M S` or `A M A`.
fn project_both_sides(m: &Matrix, p: usize, sign: f64) -> Matrix {
    let n = m.rows();
    Matrix::from_fn(n, n, |r, c| {
        let (rf, cf) = (flipped(r, p), flipped(c, p));
        0.25 * (m[(r, c)] + sign * m[(rf, c)] + sign * m[(r, cf)] + m[(rf, cf)])
    })
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply_skew_symmetrizer, apply_symmetrizer};

    #[test]
    fn zero_n_gives_scaled_identity() {
        let check = check_inversion_identity(&Matrix::zeros(3, 3), 0.5).unwrap();
        assert!(check.max() < 1e-15);
    }

    #[test]
    fn random_n_satisfies_both_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 1..=6 {
            let n = Matrix::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
            let check = check_inversion_identity(&n, 0.1).unwrap();
            assert!(check.symmetric < 1e-9, "p={p} {check:?}");
            assert!(check.skew < 1e-9, "p={p} {check:?}");
        }
    }

    #[test]
    fn skew_identity_on_symmetric_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = 4;
        let n = Matrix::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
        let m = Matrix::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
        let sym = m.add(&m.transpose()).unwrap().into_vec();
        let check = check_inversion_identity_with_probes(&n, 0.1, &[sym]).unwrap();
        assert!(check.skew < 1e-9);
    }

    #[test]
    fn local_projectors_match_library_ones() {
        let v: Vec<f64> = (0..9).map(|x| x as f64 * 0.7 - 2.0).collect();
        let s = half_flip_sum(&v, 3, 1.0);
        let a = half_flip_sum(&v, 3, -1.0);
        assert!(max_dev(&s, &apply_symmetrizer(&v, 3).unwrap()) < 1e-15);
        assert!(max_dev(&a, &apply_skew_symmetrizer(&v, 3).unwrap()) < 1e-15);
    }

    #[test]
    fn rejects_large_and_bad_inputs() {
        let err = check_inversion_identity(&Matrix::identity(9), 1.0).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
        assert!(check_inversion_identity(&Matrix::identity(2), 0.0).is_err());
        assert!(check_inversion_identity(&Matrix::zeros(2, 3), 1.0).is_err());
        assert!(check_inversion_identity_with_probes(&Matrix::identity(2), 1.0, &[vec![1.0]]).is_err());
    }
}
