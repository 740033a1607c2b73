//! Closed-form limits on block coherence and subspace packings, the tail
//! bound on the largest squared singular value of a pair of random
//! subspaces, and the asymptotic threshold `â(β)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Field;
use crate::special::{log_beta, reg_inc_beta};

/// Dimensions of a block frame: `m` blocks of width `r` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub field: Field,
}

impl BoundInputs {
    /// Requires `m ≥ 2`, `1 ≤ r < n` and `m·r > n`.
    pub fn new(m: usize, n: usize, r: usize, field: Field) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("need at least two blocks, got m = {m}")));
        }
        if r == 0 || r >= n {
            return Err(Error::domain(format!("need 1 <= r < n, got r = {r}, n = {n}")));
        }
        if m.checked_mul(r).is_none_or(|mr| mr <= n) {
            return Err(Error::domain(format!(
                "m·r = {} does not exceed n = {n}",
                m.saturating_mul(r)
            )));
        }
        Ok(Self { m, n, r, field })
    }

    fn f(&self) -> (f64, f64, f64) {
        (self.m as f64, self.n as f64, self.r as f64)
    }
}

/// `sqrt((mr − n) / (n(m − 1)))`, the lower bound on worst-case block
/// coherence of any frame of these dimensions.
pub fn welch_block_lower(b: &BoundInputs) -> Result<f64> {
    let (m, n, r) = b.f();
    Ok(((m * r - n) / (n * (m - 1.0))).sqrt())
}

/// `sqrt(r/n)`, the lower bound for unions of orthonormal bases.
pub fn orthobases_lower(n: usize, r: usize) -> Result<f64> {
    if r == 0 || r >= n || !n.is_multiple_of(r) {
        return Err(Error::domain(format!(
            "unions of orthobases need r | n and r < n, got r = {r}, n = {n}"
        )));
    }
    Ok((r as f64 / n as f64).sqrt())
}

/// Rankin bound on the minimum chordal distance, `sqrt(r(n−r)/n · m/(m−1))`.
pub fn rankin_chordal(b: &BoundInputs) -> Result<f64> {
    let (m, n, r) = b.f();
    Ok((r * (n - r) / n * m / (m - 1.0)).sqrt())
}

/// `sqrt(r(n−r)/n)`, the `m → ∞` form of [`rankin_chordal`].
pub fn rankin_chordal_tight(n: usize, r: usize) -> Result<f64> {
    if r == 0 || r >= n {
        return Err(Error::domain(format!("need 1 <= r < n, got r = {r}, n = {n}")));
    }
    let (n, r) = (n as f64, r as f64);
    Ok((r * (n - r) / n).sqrt())
}

/// Upper bound on the minimum spectral distance,
/// `min(1, sqrt((n−r)/n · m/(m−1)))`.
pub fn spectral_distance_upper(b: &BoundInputs) -> Result<f64> {
    let (m, n, r) = b.f();
    Ok(((n - r) / n * m / (m - 1.0)).sqrt().min(1.0))
}

/// Maximum number of `r`-dimensional equi-isoclinic subspaces in dimension `n`.
pub fn max_equiisoclinic(n: usize, r: usize, field: Field) -> Result<u64> {
    if r == 0 || r > n {
        return Err(Error::domain(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    let (n, r) = (n as u64, r as u64);
    Ok(match field {
        Field::Complex => n * n - r * r + 1,
        Field::Real => n * (n + 1) / 2 - r * (r + 1) / 2 + 1,
    })
}

/// Maximum number of blocks in a union of orthonormal bases in dimension `n`
/// meeting the orthobases bound.
pub fn max_blocks_orthobases(n: usize, field: Field) -> Result<u64> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    let n = n as u64;
    Ok(match field {
        Field::Complex => 2 * (n + 1) * (n - 1),
        Field::Real => (n - 1) * (n + 2),
    })
}

/// Natural log of the prefactor of [`tail_bound_g`],
/// `ln(√π · B((2r−1)/2, (n−2r+1)/2) / B(r/2, (n−r)/2)²)`.
fn log_tail_prefactor(n: f64, r: f64) -> Result<f64> {
    Ok(0.5 * std::f64::consts::PI.ln() + log_beta((2.0 * r - 1.0) / 2.0, (n - 2.0 * r + 1.0) / 2.0)?
        - 2.0 * log_beta(r / 2.0, (n - r) / 2.0)?)
}

/// Upper bound `G(λ₁)` on `P{λ₁ ≥ x}` for the largest squared singular value
/// `λ₁` of `A_i* A_j` with `A_i`, `A_j` independent uniform real `r`-planes
/// in dimension `n`.
pub fn tail_bound_g(lambda1: f64, n: usize, r: usize) -> Result<f64> {
    if r == 0 || n < 2 * r {
        return Err(Error::domain(format!(
            "tail bound needs n >= 2r (otherwise lambda1 = 1), got n = {n}, r = {r}"
        )));
    }
    if !(lambda1 > 0.0 && lambda1 < 1.0) {
        return Err(Error::domain(format!("lambda1 must lie in (0, 1), got {lambda1}")));
    }
    let (nf, rf) = (n as f64, r as f64);
    let tail = reg_inc_beta(1.0 - lambda1, (nf - 2.0 * rf + 1.0) / 2.0, (2.0 * rf - 1.0) / 2.0)?;
    if tail == 0.0 {
        return Ok(0.0);
    }
    Ok((log_tail_prefactor(nf, rf)? + tail.ln()).exp())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::domain(format!(
            "beta must lie in (0, 1/2), got {beta}; n = 2r is not covered"
        )));
    }
    Ok(())
}

/// Limiting exponent `lim (1/n) ln G(aβ)`:
/// `β ln a + ((1 − 2β)/2) ln(1 − aβ) − (1 − β) ln(1 − β)`.
pub fn exponent_psi(a: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(a >= 2.0 && a * beta < 1.0) {
        return Err(Error::domain(format!(
            "a must lie in [2, 1/beta), got a = {a}, beta = {beta}"
        )));
    }
    Ok(beta * a.ln() + (1.0 - 2.0 * beta) / 2.0 * (-a * beta).ln_1p() - (1.0 - beta) * (-beta).ln_1p())
}

/// The same exponent written in `s = ln(1 − aβ)`, which stays resolvable
/// when the root crowds against `a = 1/β`.
fn psi_log(s: f64, beta: f64) -> f64 {
    beta * ((-(s.exp_m1())).ln() - beta.ln()) + (1.0 - 2.0 * beta) / 2.0 * s
        - (1.0 - beta) * (-beta).ln_1p()
}

/// Root `â(β)` of [`exponent_psi`] in `[2, 1/β)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub beta: f64,
    pub a_hat: f64,
    pub residual: f64,
}

const BISECT_TOL: f64 = 1e-12;

/// Solves `ψ(a, β) = 0` on `[2, 1/β)` by bisection.
///
/// The search runs in `s = ln(1 − aβ)`: `ψ` is positive at `a = 2` and
/// decreasing in `a`, so it is increasing in `s`, and the bracket is widened
/// towards `s → −∞` until the sign changes.
pub fn solve_a_hat(beta: f64) -> Result<ThresholdSolution> {
    check_beta(beta)?;
    let s_hi0 = (-2.0 * beta).ln_1p();
    if psi_log(s_hi0, beta) <= 0.0 {
        return Err(Error::Convergence(format!(
            "exponent is not positive at a = 2 for beta = {beta}"
        )));
    }
    let mut hi = s_hi0;
    let mut width = 1.0;
    let mut lo = hi - width;
    while psi_log(lo, beta) >= 0.0 {
        width *= 2.0;
        lo = hi - width;
        if width > 1e9 {
            return Err(Error::Convergence(format!("no sign change found for beta = {beta}")));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi_log(mid, beta) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        let a_width = (hi.exp() - lo.exp()) / beta;
        if a_width < BISECT_TOL && hi - lo < BISECT_TOL * hi.abs().max(1.0) {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(ThresholdSolution {
        beta,
        a_hat: -s.exp_m1() / beta,
        residual: psi_log(s, beta),
    })
}
