//! Uniformly distributed random subspaces and the worst-case coherence
//! experiment over unions of them.
//!
//! A subspace is sampled by orthonormalizing an `n × r` Gaussian matrix; the
//! resulting distribution on the Grassmannian is invariant under orthogonal
//! transforms. Every block, trial and grid point owns its own seeded stream,
//! so the experiments produce identical numbers on any number of threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::frame::{BlockFrame, Field};
use crate::matrix::CMatrix;
use crate::rng::{self, derive_key, gaussian_matrix};
use crate::scalar::Real;

/// Parameters of a union of `m` independent uniform `r`-dimensional
/// subspaces of `R^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomFrameSpec {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub seed: u64,
}

impl RandomFrameSpec {
    pub fn new(n: usize, r: usize, m: usize, seed: u64) -> Result<Self> {
        let spec = RandomFrameSpec { n, r, m, seed };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.r == 0 || self.r >= self.n {
            return Err(Error::domain(format!(
                "need 1 <= r < n, got n={} r={}",
                self.n, self.r
            )));
        }
        if self.m < 2 {
            return Err(Error::domain(format!("need at least 2 blocks, got m={}", self.m)));
        }
        Ok(())
    }
}

/// `n × r` matrix with orthonormal columns spanning a uniformly random
/// subspace. A rank-deficient Gaussian draw is retried once.
///
/// No sign convention is applied to the columns: average coherence depends
/// on the basis and not only on the subspace, and fixing signs would bias
/// every block towards the same orthant.
pub fn sample_subspace<T: Real, R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<CMatrix<T>> {
    if r == 0 || r > n {
        return Err(Error::domain(format!("need 1 <= r <= n, got n={n} r={r}")));
    }
    match gaussian_matrix::<T, R>(n, r, false, rng).orthonormalize_unnormalized() {
        Err(Error::Degenerate(_)) => gaussian_matrix::<T, R>(n, r, false, rng).orthonormalize_unnormalized(),
        other => other,
    }
}

/// Union of `m` independent random subspaces. Block `i` draws from the
/// stream keyed by `(seed, i)`.
pub fn sample_block_frame<T: Real>(spec: &RandomFrameSpec) -> Result<BlockFrame<T>> {
    spec.check()?;
    let blocks = (0..spec.m)
        .into_par_iter()
        .map(|i| sample_subspace::<T, _>(spec.n, spec.r, &mut rng::stream(spec.seed, &[i as u64])))
        .collect::<Result<Vec<_>>>()?;
    BlockFrame::from_blocks(&blocks, Field::Real)
}

/// Number of blocks used at each grid point: `⌊(n/r)²⌋`, capped, and at
/// least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCountRule {
    pub cap: usize,
}

impl Default for BlockCountRule {
    fn default() -> Self {
        BlockCountRule { cap: 400 }
    }
}

impl BlockCountRule {
    pub fn blocks(&self, n: usize, r: usize) -> usize {
        ((n * n) / (r * r)).min(self.cap).max(2)
    }
}

/// One grid point of the coherence curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuCurveRow {
    pub beta: f64,
    pub r: usize,
    pub m: usize,
    pub mean_mu: f64,
    pub max_mu: f64,
    /// `sqrt(â(β)·β)`.
    pub theory_mu: f64,
}

impl MuCurveRow {
    /// Whether the squared empirical mean stays below `â(β)·β`.
    pub fn below_threshold(&self) -> bool {
        self.mean_mu * self.mean_mu <= self.theory_mu * self.theory_mu
    }
}

/// Subspace dimensions `r` giving `β = r/n` on the grid `[0.05, 0.45]` in
/// steps of 0.05 (rounded to the nearest integer).
pub fn default_r_grid(n: usize) -> Vec<usize> {
    (1..=9)
        .map(|k| ((k as f64) * 0.05 * n as f64).round() as usize)
        .filter(|&r| r >= 1 && 2 * r < n)
        .collect()
}

/// Average and maximum worst-case coherence of random unions of subspaces
/// over `trials` draws per dimension in `r_grid`, next to the theoretical
/// threshold `sqrt(â(β)·β)`.
pub fn empirical_mu_curve(
    n: usize,
    r_grid: &[usize],
    rule: BlockCountRule,
    trials: usize,
    seed: u64,
) -> Result<Vec<MuCurveRow>> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    for &r in r_grid {
        if r == 0 || 2 * r >= n {
            return Err(Error::domain(format!("need 1 <= r and 2r < n, got n={n} r={r}")));
        }
    }
    r_grid
        .iter()
        .map(|&r| {
            let m = rule.blocks(n, r);
            let mus = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let spec = RandomFrameSpec {
                        n,
                        r,
                        m,
                        seed: derive_key(seed, &[r as u64, t as u64]),
                    };
                    sample_block_frame::<f64>(&spec)?.mu()
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean_mu = mus.iter().sum::<f64>() / trials as f64;
            let max_mu = mus.iter().cloned().fold(0.0, f64::max);
            let beta = r as f64 / n as f64;
            let a_hat = bounds::solve_a_hat(beta)?.a_hat;
            Ok(MuCurveRow {
                beta,
                r,
                m,
                mean_mu,
                max_mu,
                theory_mu: (a_hat * beta).sqrt(),
            })
        })
        .collect()
}

/// Largest squared principal cosine `λ₁ = ‖U*V‖₂²` for `pairs` independent
/// pairs of random `r`-dimensional subspaces of `R^n`.
pub fn sample_lambda1(n: usize, r: usize, pairs: usize, seed: u64) -> Result<Vec<f64>> {
    (0..pairs)
        .into_par_iter()
        .map(|t| {
            let mut s = rng::stream(seed, &[t as u64]);
            let u = sample_subspace::<f64, _>(n, r, &mut s)?;
            let v = sample_subspace::<f64, _>(n, r, &mut s)?;
            let c = u.adjoint_mul(&v)?;
            let norm = c.spectral_norm();
            Ok(norm * norm)
        })
        .collect()
}

/// Mean of `‖U*V‖_F²` over `pairs` random subspace pairs; tends to `r²/n`.
pub fn mean_frobenius_sq(n: usize, r: usize, pairs: usize, seed: u64) -> Result<f64> {
    let values = (0..pairs)
        .into_par_iter()
        .map(|t| {
            let mut s = rng::stream(seed, &[t as u64]);
            let u = sample_subspace::<f64, _>(n, r, &mut s)?;
            let v = sample_subspace::<f64, _>(n, r, &mut s)?;
            let f = u.adjoint_mul(&v)?.frobenius_norm();
            Ok(f * f)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum::<f64>() / pairs.max(1) as f64)
}

/// Fraction of samples at or above `x`.
pub fn exceedance(samples: &[f64], x: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&s| s >= x).count() as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_dimension_sample_is_orthogonal() {
        let mut s = rng::stream(3, &[]);
        let u = sample_subspace::<f64, _>(5, 5, &mut s).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn frames_are_reproducible_and_orthonormal() {
        let spec = RandomFrameSpec::new(20, 2, 25, 99).unwrap();
        let a = sample_block_frame::<f64>(&spec).unwrap();
        let b = sample_block_frame::<f64>(&spec).unwrap();
        assert_eq!(a.matrix().data(), b.matrix().data());
        assert!(a.validate().block_orthonormal);
        assert!(a.mu().unwrap() < 1.0);
    }

    #[test]
    fn two_blocks_reduce_to_one_pair() {
        let spec = RandomFrameSpec::new(10, 3, 2, 5).unwrap();
        let a = sample_block_frame::<f64>(&spec).unwrap();
        let direct = a.block(0).adjoint_mul(&a.block(1)).unwrap().spectral_norm();
        assert!((a.mu().unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn block_count_rule() {
        let rule = BlockCountRule::default();
        assert_eq!(rule.blocks(200, 10), 400);
        assert_eq!(rule.blocks(200, 30), 44);
        assert_eq!(rule.blocks(200, 90), 4);
        assert_eq!(rule.blocks(10, 9), 2);
    }

    #[test]
    fn default_grid_at_two_hundred() {
        assert_eq!(default_r_grid(200), vec![10, 20, 30, 40, 50, 60, 70, 80, 90]);
    }

    #[test]
    fn curve_rejects_half_dimension() {
        assert!(empirical_mu_curve(20, &[10], BlockCountRule::default(), 1, 0).is_err());
    }

    #[test]
    fn exceedance_counts_inclusive() {
        assert_eq!(exceedance(&[0.1, 0.5, 0.9, 0.5], 0.5), 0.75);
        assert_eq!(exceedance(&[], 0.5), 0.0);
    }
}
