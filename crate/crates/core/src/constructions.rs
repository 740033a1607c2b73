//! Deterministic frames: equiangular tight frames, flat unions of orthonormal
//! bases, and the Kronecker-product block frames built from them.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{BlockFrame, Field};
use crate::matrix::{dft_matrix, hadamard_sylvester, root_of_unity, CMatrix};
use crate::scalar::Real;

pub mod kerdock;

pub use kerdock::{kerdock_real, kerdock_from_set, KerdockSet};

const VERIFY_TOL: f64 = 1e-8;

pub fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// ETF from the Steiner 2-(v, 2, 1) design (all pairs of `v` points).
///
/// Rows are indexed by the `v(v−1)/2` pairs. Each point owns `v` columns;
/// the `v − 1` pairs containing it receive rows `1..v` of the unnormalized
/// `v × v` DFT, scaled by `1/sqrt(v − 1)`.
pub fn steiner_pairs_etf<T: Real>(v: usize) -> Result<CMatrix<T>> {
    if v < 3 {
        return Err(Error::domain(format!("Steiner pairs ETF needs v >= 3, got {v}")));
    }
    let b = v * (v - 1) / 2;
    let mut pairs = Vec::with_capacity(b);
    for x in 0..v {
        for y in x + 1..v {
            pairs.push((x, y));
        }
    }
    let scale = T::one() / T::of(v - 1).sqrt();
    let mut out = CMatrix::zeros(b, v * v);
    for point in 0..v {
        let rows: Vec<usize> = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(x, y))| x == point || y == point)
            .map(|(i, _)| i)
            .collect();
        for (slot, &row) in rows.iter().enumerate() {
            let dft_row = slot + 1;
            for c in 0..v {
                out[(row, point * v + c)] = root_of_unity::<T>(dft_row * c, v) * scale;
            }
        }
    }
    Ok(out)
}

/// Harmonic ETF from the quadratic residues mod a prime `p ≡ 3 (mod 4)`.
pub fn harmonic_qr_etf<T: Real>(p: usize) -> Result<CMatrix<T>> {
    if !is_prime(p) || p % 4 != 3 {
        return Err(Error::domain(format!(
            "harmonic ETF needs a prime p = 3 mod 4, got {p}"
        )));
    }
    let mut residues: Vec<usize> = (1..p).map(|x| x * x % p).collect();
    residues.sort_unstable();
    residues.dedup();
    let k = residues.len();
    let scale = T::one() / T::of(k).sqrt();
    Ok(CMatrix::from_fn(k, p, |i, j| root_of_unity::<T>(residues[i] * j, p) * scale))
}

/// Alltop Gabor frame: all `p²` time-frequency shifts of
/// `x(t) = p^(−1/2) exp(2πi t³/p)`.
///
/// Column `τ·p + ω` is `x(t − τ) e^{2πiωt/p}` with its global phase fixed so
/// the entry at `t = 0` is real-positive. Columns sharing `τ` form one
/// orthonormal basis.
pub fn alltop_gabor<T: Real>(p: usize) -> Result<CMatrix<T>> {
    if p < 5 || !is_prime(p) {
        return Err(Error::domain(format!("Alltop frame needs a prime p >= 5, got {p}")));
    }
    let scale = T::one() / T::of(p).sqrt();
    Ok(CMatrix::from_fn(p, p * p, |t, col| {
        let (tau, omega) = (col / p, col % p);
        let shifted = (t + p - tau) % p;
        let origin = (p - tau) % p;
        // x(t − τ) · conj(x(−τ)) · e^{2πiωt/p}
        let cube = |u: usize| u * u % p * u % p;
        let exponent = (cube(shifted) + p - cube(origin) + omega * t) % p;
        root_of_unity::<T>(exponent, p) * scale
    }))
}

/// Discrete chirp frame: columns `p^(−1/2) exp(2πi(a t² + b t)/p)` at
/// index `a·p + b`; columns sharing the chirp rate `a` form one basis.
pub fn discrete_chirp<T: Real>(p: usize) -> Result<CMatrix<T>> {
    if p < 3 || !is_prime(p) {
        return Err(Error::domain(format!("chirp frame needs an odd prime, got {p}")));
    }
    let scale = T::one() / T::of(p).sqrt();
    Ok(CMatrix::from_fn(p, p * p, |t, col| {
        let (a, b) = (col / p, col % p);
        root_of_unity::<T>((a * (t * t % p) + b * t) % p, p) * scale
    }))
}

/// `[I | H]` with `H` the unitary Sylvester–Hadamard matrix of order `2^k`.
pub fn id_hadamard_union<T: Real>(k: u32) -> Result<CMatrix<T>> {
    if k == 0 {
        return Err(Error::domain("identity/Hadamard union needs k >= 1"));
    }
    let h = hadamard_sylvester::<T>(k)?;
    let n = h.rows();
    Ok(CMatrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::zero()
            }
        } else {
            h[(i, j - n)]
        }
    }))
}

fn unit_columns<T: Real>(p: &CMatrix<T>, tol: T) -> bool {
    (0..p.cols()).all(|j| {
        let norm: T = (0..p.rows()).map(|i| p[(i, j)].norm_sqr()).sum::<T>().sqrt();
        (norm - T::one()).abs() < tol
    })
}

/// Unit columns, equal off-diagonal Gram moduli, and `PP* = (cols/rows)·I`.
/// A square unitary matrix is not overcomplete and is rejected.
pub fn verify_etf<T: Real>(p: &CMatrix<T>) -> bool {
    let tol = T::lit(VERIFY_TOL);
    let (n, m) = (p.rows(), p.cols());
    if m <= n || !unit_columns(p, tol) {
        return false;
    }
    let g = p.adjoint_mul(p).expect("Gram");
    let target = g[(0, 1)].norm();
    for i in 0..m {
        for j in i + 1..m {
            if (g[(i, j)].norm() - target).abs() > tol {
                return false;
            }
        }
    }
    let frame_op = p.matmul(&p.adjoint()).expect("frame operator");
    let ratio = T::of(m) / T::of(n);
    let mut dev = T::zero();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { ratio } else { T::zero() };
            dev += (frame_op[(i, j)] - Complex::new(want, T::zero())).norm_sqr();
        }
    }
    dev.sqrt() < tol
}

/// Every consecutive `n × n` group is unitary and every cross-basis inner
/// product has modulus `n^(−1/2)`.
pub fn verify_flat_union<T: Real>(p: &CMatrix<T>) -> bool {
    let tol = T::lit(VERIFY_TOL);
    let (n, m) = (p.rows(), p.cols());
    if m % n != 0 || m / n < 2 || !unit_columns(p, tol) {
        return false;
    }
    let target = T::one() / T::of(n).sqrt();
    let g = p.adjoint_mul(p).expect("Gram");
    for i in 0..m {
        for j in i + 1..m {
            let v = g[(i, j)].norm();
            let want = if i / n == j / n { T::zero() } else { target };
            if (v - want).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn check_unitary<T: Real>(q: &CMatrix<T>) -> Result<()> {
    if q.rows() != q.cols() || q.unitarity_defect() > T::lit(1e-10) {
        return Err(Error::Construction("Kronecker factor Q must be unitary".into()));
    }
    Ok(())
}

fn kron_frame<T: Real>(p: &CMatrix<T>, q: &CMatrix<T>) -> Result<BlockFrame<T>> {
    let field = if p.is_real() && q.is_real() {
        Field::Real
    } else {
        Field::Complex
    };
    BlockFrame::new(p.kronecker(q)?, q.cols(), field)
}

/// `P ⊗ Q` for an ETF `P` and unitary `r × r` `Q`; blocks are `p_i ⊗ Q`.
pub fn kron_construct1<T: Real>(p: &CMatrix<T>, q: &CMatrix<T>) -> Result<BlockFrame<T>> {
    if !verify_etf(p) {
        return Err(Error::Construction("P is not an equiangular tight frame".into()));
    }
    check_unitary(q)?;
    kron_frame(p, q)
}

/// `P ⊗ Q` for a flat union of orthonormal bases `P` and unitary `Q`.
pub fn kron_construct2<T: Real>(p: &CMatrix<T>, q: &CMatrix<T>) -> Result<BlockFrame<T>> {
    if !verify_flat_union(p) {
        return Err(Error::Construction(
            "P is not a flat union of orthonormal bases".into(),
        ));
    }
    check_unitary(q)?;
    kron_frame(p, q)
}

/// Base families of the catalog.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    SteinerPairsEtf { v: usize },
    HarmonicQrEtf { p: usize },
    AlltopGabor { p: usize },
    DiscreteChirp { p: usize },
    IdHadamardUnion { k: u32 },
    KerdockReal { k: u32 },
    ExternalFile { path: String },
}

/// Second Kronecker factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum KronFactor {
    None,
    /// Sylvester–Hadamard of order `2^k`.
    Hadamard(u32),
    /// DFT of size `r`.
    Dft(usize),
    /// Sylvester–Hadamard when `r` is a power of two, otherwise DFT.
    Default(usize),
}

impl KronFactor {
    pub fn matrix<T: Real>(&self) -> Result<CMatrix<T>> {
        match *self {
            KronFactor::None => Ok(CMatrix::identity(1)),
            KronFactor::Hadamard(k) => hadamard_sylvester(k),
            KronFactor::Dft(r) => dft_matrix(r),
            KronFactor::Default(r) if r.is_power_of_two() => {
                hadamard_sylvester(r.trailing_zeros())
            }
            KronFactor::Default(r) => dft_matrix(r),
        }
    }
}

/// Declarative description of a deterministic frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecipe {
    #[serde(flatten)]
    pub family: Family,
    pub kron: KronFactor,
}

impl FrameRecipe {
    /// Checks family parameters without building anything.
    pub fn check(&self) -> Result<()> {
        match self.family {
            Family::SteinerPairsEtf { v } if v < 3 => {
                Err(Error::domain(format!("steiner needs v >= 3, got {v}")))
            }
            Family::HarmonicQrEtf { p } if !is_prime(p) || p % 4 != 3 => Err(Error::domain(
                format!("harmonic needs a prime p = 3 mod 4, got {p}"),
            )),
            Family::AlltopGabor { p } if p < 5 || !is_prime(p) => {
                Err(Error::domain(format!("alltop needs a prime p >= 5, got {p}")))
            }
            Family::DiscreteChirp { p } if p < 3 || !is_prime(p) => {
                Err(Error::domain(format!("chirp needs an odd prime, got {p}")))
            }
            Family::IdHadamardUnion { k } if k == 0 || k > 16 => {
                Err(Error::domain(format!("id-hadamard needs 1 <= k <= 16, got {k}")))
            }
            Family::KerdockReal { k } if k < 4 || k % 2 != 0 || k > 8 => Err(Error::domain(
                format!("kerdock needs an even k with 4 <= k <= 8, got {k}"),
            )),
            _ => Ok(()),
        }
    }

    /// Builds the base matrix `P` (external files are loaded by the caller).
    pub fn base<T: Real>(&self) -> Result<CMatrix<T>> {
        self.check()?;
        match &self.family {
            Family::SteinerPairsEtf { v } => steiner_pairs_etf(*v),
            Family::HarmonicQrEtf { p } => harmonic_qr_etf(*p),
            Family::AlltopGabor { p } => alltop_gabor(*p),
            Family::DiscreteChirp { p } => discrete_chirp(*p),
            Family::IdHadamardUnion { k } => id_hadamard_union(*k),
            Family::KerdockReal { k } => kerdock_real(*k),
            Family::ExternalFile { path } => Err(Error::Construction(format!(
                "external frame `{path}` must be loaded from its file"
            ))),
        }
    }

    /// True for families that produce ETFs (Kronecker construction 1).
    pub fn is_etf_family(&self) -> bool {
        matches!(
            self.family,
            Family::SteinerPairsEtf { .. } | Family::HarmonicQrEtf { .. }
        )
    }

    /// Builds `P ⊗ Q`, routed through the construction matching the family.
    pub fn build<T: Real>(&self) -> Result<BlockFrame<T>> {
        let p = self.base::<T>()?;
        self.assemble(&p)
    }

    /// Kronecker step for an already built or loaded base matrix.
    pub fn assemble<T: Real>(&self, p: &CMatrix<T>) -> Result<BlockFrame<T>> {
        let q = self.kron.matrix::<T>()?;
        if self.is_etf_family() {
            kron_construct1(p, &q)
        } else if verify_flat_union(p) {
            kron_construct2(p, &q)
        } else if verify_etf(p) {
            kron_construct1(p, &q)
        } else {
            kron_frame(p, &q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::column_coherence;

    #[test]
    fn steiner_shapes_and_coherence() {
        let p = steiner_pairs_etf::<f64>(4).unwrap();
        assert_eq!((p.rows(), p.cols()), (6, 16));
        assert!(verify_etf(&p));
        assert!((column_coherence(&p).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let p5 = steiner_pairs_etf::<f64>(5).unwrap();
        assert_eq!((p5.rows(), p5.cols()), (10, 25));
        assert!(verify_etf(&p5));
        assert!((column_coherence(&p5).unwrap() - 0.25).abs() < 1e-12);
        assert!(steiner_pairs_etf::<f64>(2).is_err());
    }

    #[test]
    fn harmonic_etfs() {
        let p = harmonic_qr_etf::<f64>(7).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 7));
        assert!(verify_etf(&p));
        assert!((column_coherence(&p).unwrap() - (4.0f64 / 18.0).sqrt()).abs() < 1e-12);
        let p11 = harmonic_qr_etf::<f64>(11).unwrap();
        assert_eq!((p11.rows(), p11.cols()), (5, 11));
        assert!(verify_etf(&p11));
        assert!(harmonic_qr_etf::<f64>(13).is_err());
        assert!(harmonic_qr_etf::<f64>(15).is_err());
    }

    #[test]
    fn union_families_are_flat() {
        for p in [5, 7, 11] {
            let a = alltop_gabor::<f64>(p).unwrap();
            assert!(verify_flat_union(&a), "alltop {p}");
            let c = discrete_chirp::<f64>(p).unwrap();
            assert!(verify_flat_union(&c), "chirp {p}");
        }
        assert!(verify_flat_union(&discrete_chirp::<f64>(3).unwrap()));
        assert!(alltop_gabor::<f64>(3).is_err());
        assert!(alltop_gabor::<f64>(9).is_err());
        assert!(discrete_chirp::<f64>(2).is_err());
        for k in 1..=8 {
            assert!(verify_flat_union(&id_hadamard_union::<f64>(k).unwrap()));
        }
    }

    #[test]
    fn id_hadamard_small() {
        let u = id_hadamard_union::<f64>(1).unwrap();
        assert_eq!((u.rows(), u.cols()), (2, 4));
        let g = u.adjoint_mul(&u).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert!((g[(i, j)].norm() - 0.5f64.sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn verifiers_reject_non_examples() {
        assert!(!verify_etf(&dft_matrix::<f64>(4).unwrap()));
        assert!(!verify_flat_union(&dft_matrix::<f64>(4).unwrap()));
        assert!(!verify_flat_union(&steiner_pairs_etf::<f64>(4).unwrap()));
    }

    #[test]
    fn kron_rejects_bad_inputs() {
        let h = hadamard_sylvester::<f64>(1).unwrap();
        let not_etf = id_hadamard_union::<f64>(2).unwrap();
        assert!(matches!(kron_construct1(&not_etf, &h), Err(Error::Construction(_))));
        let steiner = steiner_pairs_etf::<f64>(4).unwrap();
        assert!(matches!(kron_construct2(&steiner, &h), Err(Error::Construction(_))));
        let not_unitary = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(kron_construct1(&steiner, &not_unitary).is_err());
    }

    #[test]
    fn default_factor_choice() {
        assert_eq!(KronFactor::Default(4).matrix::<f64>().unwrap(), hadamard_sylvester(2).unwrap());
        assert_eq!(KronFactor::Default(3).matrix::<f64>().unwrap(), dft_matrix(3).unwrap());
    }

    #[test]
    fn recipe_checks() {
        let bad = FrameRecipe {
            family: Family::KerdockReal { k: 5 },
            kron: KronFactor::None,
        };
        assert!(bad.check().is_err());
        let ok = FrameRecipe {
            family: Family::SteinerPairsEtf { v: 4 },
            kron: KronFactor::Hadamard(1),
        };
        let f = ok.build::<f64>().unwrap();
        assert_eq!((f.m(), f.n(), f.r()), (16, 12, 2));
    }
}
