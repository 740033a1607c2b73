//! Per-block sign flipping.
//!
//! Negating a block leaves every `‖A_i* A_j‖₂` unchanged, so worst-case block
//! coherence is fixed while the block sums that drive average coherence can
//! be made small. [`flip`] is the greedy pass; [`random_flip_search`] keeps
//! the best of many uniformly drawn sign patterns.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::BlockFrame;
use crate::matrix::hermitian_max_eigenvalue;
use crate::rng;
use crate::scalar::Real;

/// Constant in the existence argument for random signs, `e^(−1)/256`.
/// Recorded for reference; no routine depends on it.
pub const C0: f64 = 0.001_437_029_067_075_946_6;

const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormVariant {
    /// `‖·‖₂`, as in the greedy rule proper.
    #[default]
    Spectral,
    /// `‖·‖_F`, for which the parallelogram law holds exactly.
    Frobenius,
}

impl std::str::FromStr for NormVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(NormVariant::Spectral),
            "frobenius" => Ok(NormVariant::Frobenius),
            other => Err(Error::domain(format!("unknown norm variant `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipConfig {
    pub norm_variant: NormVariant,
    /// Constant `c` of the target `ν ≤ c·μ·sqrt(r ln m / n)`.
    pub c: f64,
    pub search_trials: usize,
}

impl Default for FlipConfig {
    fn default() -> Self {
        Self {
            norm_variant: NormVariant::Spectral,
            c: 1.0,
            search_trials: 0,
        }
    }
}

impl FlipConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::domain(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Norms seen at one greedy step `k → k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipStep {
    /// `‖F_k + A_{k+1}‖`.
    pub plus: f64,
    /// `‖F_k − A_{k+1}‖`.
    pub minus: f64,
    /// `‖F_{k+1}‖`.
    pub after: f64,
}

#[derive(Clone, Debug)]
pub struct FlipResult<T> {
    /// One sign per block; the first is always `+1`.
    pub signs: Vec<i8>,
    pub flipped: BlockFrame<T>,
    pub mu_before: f64,
    pub mu_after: f64,
    pub nu_before: f64,
    pub nu_after: f64,
    /// `(√m + 1)/(m − 1)`.
    pub bound_lemma2: f64,
    /// Greedy trace; empty for random search.
    pub steps: Vec<FlipStep>,
    pub norm_variant: NormVariant,
}

/// Serializable part of a [`FlipResult`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipSummary {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub norm_variant: NormVariant,
    pub signs: Vec<i8>,
    pub mu_before: f64,
    pub mu_after: f64,
    pub nu_before: f64,
    pub nu_after: f64,
    pub bound_lemma2: f64,
    pub within_lemma2: bool,
}

impl<T: Real> FlipResult<T> {
    pub fn summary(&self) -> FlipSummary {
        FlipSummary {
            n: self.flipped.n(),
            r: self.flipped.r(),
            m: self.flipped.m(),
            norm_variant: self.norm_variant,
            signs: self.signs.clone(),
            mu_before: self.mu_before,
            mu_after: self.mu_after,
            nu_before: self.nu_before,
            nu_after: self.nu_after,
            bound_lemma2: self.bound_lemma2,
            within_lemma2: self.nu_after <= self.bound_lemma2,
        }
    }
}

/// `(√m + 1)/(m − 1)`, the claimed average coherence after greedy flipping.
pub fn lemma2_bound(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("need m >= 2, got {m}")));
    }
    let mf = m as f64;
    Ok((mf.sqrt() + 1.0) / (mf - 1.0))
}

/// Smallest `c` with
/// `((m−1)/(m−n/r)) · (1/ln m) · ((√m+1)/(m−1)) ≤ c² (r/n)²`.
pub fn thm14_min_c(m: usize, n: usize, r: usize) -> Result<f64> {
    if r == 0 || m < 3 {
        return Err(Error::domain(format!("need r >= 1 and m >= 3, got m = {m}, r = {r}")));
    }
    let (mf, ratio) = (m as f64, n as f64 / r as f64);
    if mf <= ratio {
        return Err(Error::domain(format!("need m > n/r, got m = {m}, n/r = {ratio}")));
    }
    Ok(ratio * (condition_lhs(mf, ratio)).sqrt())
}

fn condition_lhs(m: f64, ratio: f64) -> f64 {
    (m - 1.0) / (m - ratio) / m.ln() * ((m.sqrt() + 1.0) / (m - 1.0))
}

/// Whether `c` satisfies the sufficient condition of [`thm14_min_c`].
pub fn thm14_condition_holds(m: usize, n: usize, r: usize, c: f64) -> bool {
    let ratio = n as f64 / r as f64;
    condition_lhs(m as f64, ratio) <= c * c / (ratio * ratio)
}

/// `c·μ·sqrt(r ln m / n)`, the average-coherence level one-step group
/// thresholding asks for.
pub fn one_step_target(c: f64, mu: f64, m: usize, n: usize, r: usize) -> f64 {
    c * mu * (r as f64 * (m as f64).ln() / n as f64).sqrt()
}

fn matrix_norm<T: Real>(v: &[Complex<T>], n: usize, r: usize, variant: NormVariant) -> T {
    match variant {
        NormVariant::Frobenius => v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt(),
        NormVariant::Spectral => {
            let mut g = vec![Complex::zero(); r * r];
            for a in 0..r {
                for b in 0..r {
                    g[a * r + b] = (0..n).fold(Complex::<T>::zero(), |acc, i| {
                        acc + v[a * n + i].conj() * v[b * n + i]
                    });
                }
            }
            hermitian_max_eigenvalue(r, &g).max(T::zero()).sqrt()
        }
    }
}

/// Greedy signs and the per-step norms.
pub fn flip_signs<T: Real>(a: &BlockFrame<T>, variant: NormVariant) -> Result<(Vec<i8>, Vec<FlipStep>)> {
    let (n, r, m) = (a.n(), a.r(), a.m());
    if m < 2 {
        return Err(Error::domain("flipping needs at least two blocks"));
    }
    let block = |i: usize| -> Vec<Complex<T>> {
        let b = a.block(i);
        let mut out = Vec::with_capacity(n * r);
        for c in 0..r {
            for row in 0..n {
                out.push(b[(row, c)]);
            }
        }
        out
    };
    let mut signs = vec![1i8; m];
    let mut steps = Vec::with_capacity(m - 1);
    let mut acc = block(0);
    let mut plus = vec![Complex::zero(); n * r];
    let mut minus = vec![Complex::zero(); n * r];
    for k in 1..m {
        let next = block(k);
        for ((p, q), (f, x)) in plus.iter_mut().zip(minus.iter_mut()).zip(acc.iter().zip(&next)) {
            *p = f + x;
            *q = f - x;
        }
        let np = matrix_norm(&plus, n, r, variant);
        let nm = matrix_norm(&minus, n, r, variant);
        let keep = np <= nm + T::lit(TIE_TOL) * nm.max(T::one());
        if keep {
            acc.copy_from_slice(&plus);
        } else {
            signs[k] = -1;
            acc.copy_from_slice(&minus);
        }
        steps.push(FlipStep {
            plus: np.as_f64(),
            minus: nm.as_f64(),
            after: if keep { np.as_f64() } else { nm.as_f64() },
        });
    }
    Ok((signs, steps))
}

/// Greedy flipping pass over the blocks in order.
pub fn flip<T: Real>(a: &BlockFrame<T>, cfg: &FlipConfig) -> Result<FlipResult<T>> {
    cfg.check()?;
    let (signs, steps) = flip_signs(a, cfg.norm_variant)?;
    finish(a, signs, steps, cfg.norm_variant)
}

fn finish<T: Real>(
    a: &BlockFrame<T>,
    signs: Vec<i8>,
    steps: Vec<FlipStep>,
    norm_variant: NormVariant,
) -> Result<FlipResult<T>> {
    let flipped = a.with_block_signs(&signs)?;
    Ok(FlipResult {
        mu_before: a.mu()?.as_f64(),
        mu_after: flipped.mu()?.as_f64(),
        nu_before: a.nu()?.as_f64(),
        nu_after: flipped.nu()?.as_f64(),
        bound_lemma2: lemma2_bound(a.m())?,
        signs,
        flipped,
        steps,
        norm_variant,
    })
}

/// Sign pattern drawn for one trial: `+1` first, the rest uniform.
pub fn random_signs(m: usize, seed: u64, trial: u64) -> Vec<i8> {
    let mut s = rng::stream(seed, &[trial]);
    (0..m)
        .map(|i| if i == 0 || s.gen::<bool>() { 1 } else { -1 })
        .collect()
}

/// Best of `trials` random sign patterns by average block coherence; ties go
/// to the lowest trial index.
pub fn random_flip_search<T: Real>(a: &BlockFrame<T>, trials: usize, seed: u64) -> Result<FlipResult<T>> {
    if trials == 0 {
        return Err(Error::domain("random flip search needs at least one trial"));
    }
    let scored: Vec<(usize, T)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = random_signs(a.m(), seed, t as u64);
            a.nu_with_signs(Some(&s)).map(|nu| (t, nu))
        })
        .collect::<Result<_>>()?;
    let (best, _) = scored
        .into_iter()
        .fold(None::<(usize, T)>, |acc, (t, nu)| match acc {
            Some((_, b)) if b <= nu => acc,
            _ => Some((t, nu)),
        })
        .expect("at least one trial");
    finish(a, random_signs(a.m(), seed, best as u64), Vec::new(), NormVariant::Spectral)
}
