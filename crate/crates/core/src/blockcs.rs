//! Block-sparse recovery experiments.
//!
//! Signals are supported on `k` of the `m` blocks and measured as `y = A x`.
//! Recovery keeps the `k` blocks with the largest correlation `‖A_i* y‖₂`,
//! and quality is the non-discovery proportion: the fraction of the true
//! support that was missed.

use num_complex::Complex;
use num_traits::Zero;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flipping::{flip_signs, lemma2_bound, NormVariant};
use crate::frame::{BlockFrame, Field};
use crate::random::{sample_block_frame, RandomFrameSpec};
use crate::rng::{self, derive_key, gaussian};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub m: usize,
    pub r: usize,
    pub k: usize,
    pub dynamic_range: f64,
    pub field: Field,
    pub seed: u64,
}

impl SignalSpec {
    pub fn check(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::domain("block size must be positive"));
        }
        if self.k == 0 || self.k > self.m {
            return Err(Error::domain(format!(
                "need 1 <= k <= m, got k={} m={}",
                self.k, self.m
            )));
        }
        if !(self.dynamic_range >= 1.0) || !self.dynamic_range.is_finite() {
            return Err(Error::domain(format!(
                "dynamic range must be a finite number >= 1, got {}",
                self.dynamic_range
            )));
        }
        Ok(())
    }
}

/// A block-sparse coefficient vector of length `m·r` and its support in
/// ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSignal<T> {
    pub coefficients: Vec<Complex<T>>,
    pub support: Vec<usize>,
}

/// Draws `k` blocks uniformly; each active entry gets a magnitude uniform in
/// `[1, dynamic_range]` and a uniform sign (real) or phase (complex).
pub fn gen_signal<T: Real, R: Rng + ?Sized>(spec: &SignalSpec, rng: &mut R) -> Result<BlockSignal<T>> {
    spec.check()?;
    let mut support = index::sample(rng, spec.m, spec.k).into_vec();
    support.sort_unstable();
    let mut coefficients = vec![Complex::zero(); spec.m * spec.r];
    for &b in &support {
        for c in &mut coefficients[b * spec.r..(b + 1) * spec.r] {
            let mag = if spec.dynamic_range > 1.0 {
                rng.gen_range(1.0..=spec.dynamic_range)
            } else {
                1.0
            };
            *c = match spec.field {
                Field::Real => {
                    let s = if rng.gen::<bool>() { mag } else { -mag };
                    Complex::new(T::lit(s), T::zero())
                }
                Field::Complex => {
                    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                    Complex::new(T::lit(mag * theta.cos()), T::lit(mag * theta.sin()))
                }
            };
        }
    }
    Ok(BlockSignal { coefficients, support })
}

/// `A x` for a coefficient vector of length `m·r`.
pub fn measure<T: Real>(a: &BlockFrame<T>, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    a.matrix().mul_vec(x)
}

/// The `k` blocks with the largest `‖A_i* y‖₂`, ties to the lower index,
/// returned in ascending order.
pub fn one_step_group_threshold<T: Real>(a: &BlockFrame<T>, y: &[Complex<T>], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > a.m() {
        return Err(Error::domain(format!("need 1 <= k <= m, got k={k} m={}", a.m())));
    }
    let scores = a.block_correlations(y)?;
    let mut order: Vec<usize> = (0..a.m()).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// `|S \ Ŝ| / |S|`.
pub fn ndp(true_support: &[usize], est_support: &[usize]) -> f64 {
    if true_support.is_empty() {
        return 0.0;
    }
    let missed = true_support.iter().filter(|s| !est_support.contains(s)).count();
    missed as f64 / true_support.len() as f64
}

/// A frame entering the recovery experiment.
#[derive(Clone, Debug)]
pub enum FrameSource {
    /// The same frame in every trial.
    Fixed { label: String, frame: BlockFrame<f64> },
    /// A fresh union of random real subspaces in every trial.
    RandomSubspaces { label: String, n: usize, r: usize, m: usize },
}

impl FrameSource {
    pub fn label(&self) -> &str {
        match self {
            FrameSource::Fixed { label, .. } | FrameSource::RandomSubspaces { label, .. } => label,
        }
    }

    fn shape(&self) -> (usize, usize, usize) {
        match self {
            FrameSource::Fixed { frame, .. } => (frame.n(), frame.r(), frame.m()),
            FrameSource::RandomSubspaces { n, r, m, .. } => (*n, *r, *m),
        }
    }

    fn field(&self) -> Field {
        match self {
            FrameSource::Fixed { frame, .. } => frame.field(),
            FrameSource::RandomSubspaces { .. } => Field::Real,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdpRow {
    pub label: String,
    pub k: usize,
    pub dynamic_range: f64,
    pub mean_ndp: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdpConfig {
    pub k_grid: Vec<usize>,
    pub dynamic_ranges: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Additive Gaussian noise at this signal-to-noise ratio in dB; `None`
    /// for noiseless measurements.
    pub snr_db: Option<f64>,
}

/// Mean non-discovery proportion for every frame, sparsity and dynamic
/// range. Trial `t` of cell `(frame, k, range)` draws its signal, noise and
/// (for random sources) its frame from streams keyed by that cell and `t`.
pub fn run_ndp_experiment(sources: &[FrameSource], cfg: &NdpConfig) -> Result<Vec<NdpRow>> {
    let first = sources.first().ok_or_else(|| Error::dim("no frames given"))?;
    let shape = first.shape();
    if let Some(bad) = sources.iter().find(|s| s.shape() != shape) {
        return Err(Error::dim(format!(
            "frame `{}` has shape (n, r, m) = {:?}, expected {:?}",
            bad.label(),
            bad.shape(),
            shape
        )));
    }
    if cfg.trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let (_, r, m) = shape;
    let mut rows = Vec::new();
    for (f, source) in sources.iter().enumerate() {
        for &k in &cfg.k_grid {
            for (d, &dr) in cfg.dynamic_ranges.iter().enumerate() {
                let spec = SignalSpec {
                    m,
                    r,
                    k,
                    dynamic_range: dr,
                    field: source.field(),
                    seed: cfg.seed,
                };
                spec.check()?;
                let cell = [f as u64, k as u64, d as u64];
                let values = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| ndp_trial(source, &spec, cfg.snr_db, &cell, t as u64))
                    .collect::<Result<Vec<f64>>>()?;
                let (mean_ndp, stderr) = mean_and_stderr(&values);
                rows.push(NdpRow {
                    label: source.label().to_string(),
                    k,
                    dynamic_range: dr,
                    mean_ndp,
                    stderr,
                    trials: cfg.trials,
                });
            }
        }
    }
    Ok(rows)
}

fn ndp_trial(source: &FrameSource, spec: &SignalSpec, snr_db: Option<f64>, cell: &[u64; 3], t: u64) -> Result<f64> {
    let path = [cell[0], cell[1], cell[2], t];
    let sampled;
    let frame = match source {
        FrameSource::Fixed { frame, .. } => frame,
        FrameSource::RandomSubspaces { n, r, m, .. } => {
            let key = derive_key(spec.seed, &[path[0], path[1], path[2], path[3], 0]);
            sampled = sample_block_frame::<f64>(&RandomFrameSpec::new(*n, *r, *m, key)?)?;
            &sampled
        }
    };
    let mut s = rng::stream(spec.seed, &[path[0], path[1], path[2], path[3], 1]);
    let signal = gen_signal::<f64, _>(spec, &mut s)?;
    let mut y = measure(frame, &signal.coefficients)?;
    if let Some(db) = snr_db {
        add_noise(&mut y, db, frame.field(), &mut s);
    }
    let est = one_step_group_threshold(frame, &y, spec.k)?;
    Ok(ndp(&signal.support, &est))
}

/// Adds white Gaussian noise with total power `‖y‖² / 10^(snr/10)`.
pub fn add_noise<R: Rng + ?Sized>(y: &mut [Complex<f64>], snr_db: f64, field: Field, rng: &mut R) {
    let power: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / y.len().max(1) as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    for z in y.iter_mut() {
        match field {
            Field::Real => z.re += sigma * gaussian::<f64, _>(rng),
            Field::Complex => {
                let h = sigma * std::f64::consts::FRAC_1_SQRT_2;
                z.re += h * gaussian::<f64, _>(rng);
                z.im += h * gaussian::<f64, _>(rng);
            }
        }
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One realization of the flipping experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRun {
    pub realization: usize,
    pub mu_before: f64,
    pub mu_after: f64,
    pub nu_before: f64,
    pub nu_after: f64,
    /// Whether every `‖A_i* A_j‖₂` is bit-identical after flipping.
    pub gram_map_preserved: bool,
    pub within_lemma2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRow {
    pub r: usize,
    pub nu_before_mean: f64,
    pub nu_after_mean: f64,
    /// `100·(before − after)/before` on the means.
    pub improvement_pct: f64,
    pub decreased_runs: usize,
    pub runs: Vec<FlipRun>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipTable {
    pub n: usize,
    pub m: usize,
    pub realizations: usize,
    pub seed: u64,
    pub lemma2_bound: f64,
    pub rows: Vec<FlipRow>,
}

/// Average block coherence before and after greedy flipping for unions of
/// `m` random `r`-dimensional subspaces of `R^n`.
pub fn run_flipping_table(n: usize, m: usize, r_set: &[usize], realizations: usize, seed: u64) -> Result<FlipTable> {
    if realizations == 0 {
        return Err(Error::domain("need at least one realization"));
    }
    let bound = lemma2_bound(m)?;
    let mut rows = Vec::with_capacity(r_set.len());
    for &r in r_set {
        let mut runs = Vec::with_capacity(realizations);
        for t in 0..realizations {
            let spec = RandomFrameSpec::new(n, r, m, derive_key(seed, &[r as u64, t as u64]))?;
            let a = sample_block_frame::<f64>(&spec)?;
            let (signs, _) = flip_signs(&a, NormVariant::Spectral)?;
            let b = a.with_block_signs(&signs)?;
            let before = a.gram_map();
            let after = b.gram_map();
            let nu_before = a.nu()?;
            let nu_after = b.nu()?;
            runs.push(FlipRun {
                realization: t,
                mu_before: before.max_off_diagonal(),
                mu_after: after.max_off_diagonal(),
                nu_before,
                nu_after,
                gram_map_preserved: before == after,
                within_lemma2: nu_after <= bound,
            });
        }
        let k = runs.len() as f64;
        let nu_before_mean = runs.iter().map(|x| x.nu_before).sum::<f64>() / k;
        let nu_after_mean = runs.iter().map(|x| x.nu_after).sum::<f64>() / k;
        rows.push(FlipRow {
            r,
            nu_before_mean,
            nu_after_mean,
            improvement_pct: 100.0 * (nu_before_mean - nu_after_mean) / nu_before_mean,
            decreased_runs: runs.iter().filter(|x| x.nu_after < x.nu_before).count(),
            runs,
        });
    }
    Ok(FlipTable {
        n,
        m,
        realizations,
        seed,
        lemma2_bound: bound,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;

    fn block_diagonal(m: usize, r: usize) -> BlockFrame<f64> {
        BlockFrame::new(CMatrix::identity(m * r), r, Field::Real).unwrap()
    }

    #[test]
    fn ndp_cases() {
        assert_eq!(ndp(&[1, 2, 3], &[1, 2, 3]), 0.0);
        assert_eq!(ndp(&[1, 2], &[3, 4]), 1.0);
        assert_eq!(ndp(&[0, 1, 2, 3], &[0, 1, 7, 8]), 0.5);
    }

    #[test]
    fn threshold_finds_matching_block() {
        let a = block_diagonal(5, 2);
        let mut y = vec![Complex::zero(); 10];
        y[6] = Complex::new(1.0, 0.0);
        assert_eq!(one_step_group_threshold(&a, &y, 1).unwrap(), vec![3]);
    }

    #[test]
    fn zero_measurement_picks_first_blocks() {
        let a = block_diagonal(5, 2);
        let y = vec![Complex::zero(); 10];
        assert_eq!(one_step_group_threshold(&a, &y, 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn threshold_checks_lengths() {
        let a = block_diagonal(5, 2);
        assert!(one_step_group_threshold(&a, &[Complex::zero(); 3], 1).is_err());
        assert!(one_step_group_threshold(&a, &[Complex::zero(); 10], 0).is_err());
    }

    #[test]
    fn unit_range_signal_has_unit_entries() {
        let spec = SignalSpec {
            m: 6,
            r: 2,
            k: 6,
            dynamic_range: 1.0,
            field: Field::Complex,
            seed: 0,
        };
        let s = gen_signal::<f64, _>(&spec, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(s.support, (0..6).collect::<Vec<_>>());
        assert!(s.coefficients.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_sparsity_rejected() {
        let spec = SignalSpec {
            m: 6,
            r: 2,
            k: 0,
            dynamic_range: 1.0,
            field: Field::Real,
            seed: 0,
        };
        assert!(gen_signal::<f64, _>(&spec, &mut rng::stream(1, &[])).is_err());
    }

    #[test]
    fn full_support_has_zero_ndp() {
        let sources = vec![FrameSource::RandomSubspaces {
            label: "random".into(),
            n: 8,
            r: 2,
            m: 6,
        }];
        let cfg = NdpConfig {
            k_grid: vec![6],
            dynamic_ranges: vec![10.0],
            trials: 5,
            seed: 3,
            snr_db: None,
        };
        let rows = run_ndp_experiment(&sources, &cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_ndp, 0.0);
    }

    #[test]
    fn mismatched_frames_rejected() {
        let sources = vec![
            FrameSource::RandomSubspaces { label: "a".into(), n: 8, r: 2, m: 6 },
            FrameSource::RandomSubspaces { label: "b".into(), n: 8, r: 2, m: 7 },
        ];
        let cfg = NdpConfig {
            k_grid: vec![1],
            dynamic_ranges: vec![1.0],
            trials: 1,
            seed: 0,
            snr_db: None,
        };
        assert!(run_ndp_experiment(&sources, &cfg).is_err());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[0.5, 0.5, 0.5]), (0.5, 0.0));
    }
}
