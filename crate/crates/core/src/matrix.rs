//! Dense complex matrices and the small set of kernels the rest of the crate
//! needs: norms, Kronecker products, orthonormalization and the structured
//! unitary matrices (DFT, Sylvester–Hadamard).

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest size handled by the exact eigen path of [`CMatrix::spectral_norm`].
const EXACT_EIGEN_DIM: usize = 8;
const POWER_MAX_ITER: usize = 10_000;
const POWER_TOL: f64 = 1e-13;
const RANK_TOL: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim(format!("empty matrix {rows}x{cols}")));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::dim("matrix size overflows usize"))?;
        if data.len() != len {
            return Err(Error::dim(format!(
                "expected {len} entries for {rows}x{cols}, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix with zero imaginary parts from row-major real values.
    pub fn from_real(rows: usize, cols: usize, values: &[T]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        )
    }

    /// Builds a matrix from its columns, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex<T>>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::dim("column length mismatch"));
        }
        let cols = columns.len();
        Self::new(
            rows,
            cols,
            (0..rows * cols)
                .map(|k| columns[k % cols][k / cols])
                .collect(),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Columns `start..start+width` as a new matrix.
    pub fn column_range(&self, start: usize, width: usize) -> CMatrix<T> {
        CMatrix::from_fn(self.rows, width, |i, j| self[(i, start + j)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self* · rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::dim(format!(
                "cannot form adjoint product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)].conj();
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::dim("vector length does not match columns"));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::dim(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    /// Largest entrywise modulus of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `‖M*M − I‖_F`.
    pub fn unitarity_defect(&self) -> T {
        let g = self
            .adjoint_mul(self)
            .expect("adjoint product of a matrix with itself");
        g.sub(&Self::identity(self.cols)).expect("square").frobenius_norm()
    }

    /// Largest singular value.
    ///
    /// The Gram matrix on the smaller side is formed; sizes up to
    /// [`EXACT_EIGEN_DIM`] go straight to a Jacobi eigen solve, larger ones
    /// use power iteration from the all-ones vector and drop back to Jacobi
    /// if the iteration does not settle.
    pub fn spectral_norm(&self) -> T {
        let gram = if self.cols <= self.rows {
            self.adjoint_mul(self).expect("self product")
        } else {
            self.matmul(&self.adjoint()).expect("self product")
        };
        hermitian_max_eigenvalue(gram.rows, &gram.data).max(T::zero()).sqrt()
    }

    pub fn kronecker(&self, rhs: &Self) -> Result<Self> {
        let rows = self
            .rows
            .checked_mul(rhs.rows)
            .ok_or_else(|| Error::dim("Kronecker row count overflows"))?;
        let cols = self
            .cols
            .checked_mul(rhs.cols)
            .ok_or_else(|| Error::dim("Kronecker column count overflows"))?;
        rows.checked_mul(cols)
            .ok_or_else(|| Error::dim("Kronecker size overflows"))?;
        Ok(Self::from_fn(rows, cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        }))
    }

    /// Orthonormal basis of the column space, via twice-iterated modified
    /// Gram–Schmidt. Each output column has its first nonzero entry made
    /// real-positive.
    pub fn orthonormalize(&self) -> Result<Self> {
        self.gram_schmidt(true)
    }

    /// Gram–Schmidt without the phase convention, so `Q = G R⁻¹` with a
    /// positive diagonal `R`. For a Gaussian `G` this `Q` is Haar
    /// distributed, which the phase-normalized basis is not.
    pub fn orthonormalize_unnormalized(&self) -> Result<Self> {
        self.gram_schmidt(false)
    }

    fn gram_schmidt(&self, fix_phase: bool) -> Result<Self> {
        if self.cols > self.rows {
            return Err(Error::dim(format!(
                "cannot orthonormalize {} columns in dimension {}",
                self.cols, self.rows
            )));
        }
        let tol = T::lit(RANK_TOL);
        let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let mut v = self.column(j);
            let original = vec_norm(&v);
            if original == T::zero() {
                return Err(Error::Degenerate(format!("column {j} is zero")));
            }
            for _ in 0..2 {
                for q in &basis {
                    let proj = dot(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = vec_norm(&v);
            if norm < tol * original {
                return Err(Error::Degenerate(format!(
                    "column {j} is numerically dependent on earlier columns"
                )));
            }
            let inv = T::one() / norm;
            for x in v.iter_mut() {
                *x *= inv;
            }
            if fix_phase {
                normalize_phase(&mut v);
            }
            basis.push(v);
        }
        Self::from_columns(self.rows, &basis)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `a* b`.
#[inline]
pub fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Rotates `v` so its first entry of non-negligible modulus is real-positive.
pub fn normalize_phase<T: Real>(v: &mut [Complex<T>]) {
    let thresh = T::lit(1e-10) * vec_norm(v);
    if let Some(z) = v.iter().copied().find(|z| z.norm() > thresh) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
        // exact real-positive pivot
        if let Some(x) = v.iter_mut().find(|x| x.norm() > thresh) {
            x.im = T::zero();
        }
    }
}

/// Unitary DFT of size `p`: entries `p^(−1/2)·exp(2πi·jk/p)`.
pub fn dft_matrix<T: Real>(p: usize) -> Result<CMatrix<T>> {
    if p == 0 {
        return Err(Error::domain("DFT size must be positive"));
    }
    let scale = T::one() / T::of(p).sqrt();
    Ok(CMatrix::from_fn(p, p, |j, k| root_of_unity::<T>((j * k) % p, p) * scale))
}

/// `exp(2πi·k/p)` with the exponent already reduced mod `p`.
pub fn root_of_unity<T: Real>(k: usize, p: usize) -> Complex<T> {
    let theta = T::TAU() * T::of(k % p) / T::of(p);
    Complex::new(theta.cos(), theta.sin())
}

/// Sylvester–Hadamard matrix of order `2^k` scaled to be unitary.
pub fn hadamard_sylvester<T: Real>(k: u32) -> Result<CMatrix<T>> {
    if k > 16 {
        return Err(Error::domain(format!("Hadamard order 2^{k} exceeds 2^16")));
    }
    let n = 1usize << k;
    let scale = T::one() / T::of(n).sqrt();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        Complex::new(sign * scale, T::zero())
    }))
}

/// Largest eigenvalue of a Hermitian `d × d` matrix stored row-major.
pub fn hermitian_max_eigenvalue<T: Real>(d: usize, h: &[Complex<T>]) -> T {
    match d {
        0 => T::zero(),
        1 => h[0].re,
        2 => {
            let (a, c) = (h[0].re, h[3].re);
            let half = (a - c) / T::lit(2.0);
            (a + c) / T::lit(2.0) + (half * half + h[1].norm_sqr()).sqrt()
        }
        _ if d <= EXACT_EIGEN_DIM => max_of(&hermitian_eigenvalues(d, h)),
        _ => power_iteration(d, h).unwrap_or_else(|| max_of(&hermitian_eigenvalues(d, h))),
    }
}

fn max_of<T: Real>(v: &[T]) -> T {
    v.iter().copied().fold(T::neg_infinity(), T::max)
}

fn power_iteration<T: Real>(d: usize, h: &[Complex<T>]) -> Option<T> {
    let tol = T::lit(POWER_TOL);
    let mut v = vec![Complex::new(T::one() / T::of(d).sqrt(), T::zero()); d];
    let mut w = vec![Complex::zero(); d];
    let mut prev: Option<T> = None;
    for _ in 0..POWER_MAX_ITER {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = h[i * d..(i + 1) * d]
                .iter()
                .zip(&v)
                .fold(Complex::zero(), |acc, (a, b)| acc + a * b);
        }
        let lambda = dot(&v, &w).re;
        let norm = vec_norm(&w);
        if norm == T::zero() {
            return None;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / norm;
        }
        if let Some(p) = prev {
            if (lambda - p).abs() <= tol * lambda.abs().max(T::min_positive_value()) {
                return Some(lambda);
            }
        }
        prev = Some(lambda);
    }
    None
}

/// All eigenvalues (unsorted) of a Hermitian matrix by cyclic Jacobi.
///
/// Complex input is embedded as the real symmetric `[[Re, −Im], [Im, Re]]`,
/// which doubles every eigenvalue; one copy of each pair is returned.
pub fn hermitian_eigenvalues<T: Real>(d: usize, h: &[Complex<T>]) -> Vec<T> {
    if h.iter().all(|z| z.im == T::zero()) {
        let a: Vec<T> = h.iter().map(|z| z.re).collect();
        return symmetric_eigenvalues(d, a);
    }
    let dd = 2 * d;
    let mut a = vec![T::zero(); dd * dd];
    for i in 0..d {
        for j in 0..d {
            let z = h[i * d + j];
            a[i * dd + j] = z.re;
            a[(i + d) * dd + (j + d)] = z.re;
            a[i * dd + (j + d)] = -z.im;
            a[(i + d) * dd + j] = z.im;
        }
    }
    let mut ev = symmetric_eigenvalues(dd, a);
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    ev.into_iter().step_by(2).collect()
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Real>(d: usize, mut a: Vec<T>) -> Vec<T> {
    let total: T = a.iter().map(|x| *x * *x).sum();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..d {
            for q in p + 1..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..d).map(|i| a[i * d + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_and_diagonal_norms() {
        assert!((CMatrix::<f64>::identity(3).spectral_norm() - 1.0).abs() < 1e-12);
        let d = CMatrix::<f64>::from_real(2, 2, &[3.0, 0.0, 0.0, -4.0]).unwrap();
        assert!((d.spectral_norm() - 4.0).abs() < 1e-12);
        assert!((CMatrix::<f64>::identity(5).frobenius_norm() - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(CMatrix::<f64>::zeros(2, 3).frobenius_norm(), 0.0);
    }

    #[test]
    fn empty_matrix_rejected() {
        assert!(matches!(
            CMatrix::<f64>::new(0, 3, vec![]),
            Err(Error::Dimension(_))
        ));
        assert!(CMatrix::<f64>::new(2, 2, vec![c(f64::NAN, 0.0); 4]).is_err());
    }

    #[test]
    fn large_power_iteration_path() {
        // 12x12 diagonal goes through power iteration
        let mut m = CMatrix::<f64>::zeros(12, 12);
        for i in 0..12 {
            m[(i, i)] = c(1.0 + i as f64 * 0.25, 0.0);
        }
        assert!((m.spectral_norm() - 3.75).abs() < 1e-10);
    }

    #[test]
    fn complex_jacobi_matches_closed_form() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let h = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let mut ev = hermitian_eigenvalues(2, &h);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!((hermitian_max_eigenvalue(2, &h) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kronecker_with_scalar_one_is_identity_map() {
        let p = CMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 1.0));
        let one = CMatrix::identity(1);
        assert_eq!(p.kronecker(&one).unwrap(), p);
    }

    #[test]
    fn dft_small_cases() {
        let f1 = dft_matrix::<f64>(1).unwrap();
        assert_eq!(f1[(0, 0)], c(1.0, 0.0));
        let f2 = dft_matrix::<f64>(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, j, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            assert!((f2[(i, j)] - c(s * h, 0.0)).norm() < 1e-15);
        }
        for p in 1..=64 {
            assert!(dft_matrix::<f64>(p).unwrap().unitarity_defect() < 1e-12);
        }
        assert!(dft_matrix::<f64>(0).is_err());
    }

    #[test]
    fn hadamard_small_cases() {
        assert_eq!(hadamard_sylvester::<f64>(0).unwrap(), CMatrix::identity(1));
        let h1 = hadamard_sylvester::<f64>(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h1[(1, 1)] - c(-s, 0.0)).norm() < 1e-15);
        assert!((h1[(0, 1)] - c(s, 0.0)).norm() < 1e-15);
        for k in 0..=8 {
            assert!(hadamard_sylvester::<f64>(k).unwrap().unitarity_defect() < 1e-12);
        }
        assert!(hadamard_sylvester::<f64>(17).is_err());
    }

    #[test]
    fn orthonormalize_rejects_dependent_columns() {
        let m = CMatrix::from_real(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        assert!(matches!(m.orthonormalize(), Err(Error::Degenerate(_))));
        let wide = CMatrix::<f64>::zeros(2, 3);
        assert!(wide.orthonormalize().is_err());
    }

    #[test]
    fn orthonormalize_phase_convention() {
        let m = CMatrix::new(
            2,
            2,
            vec![c(0.0, 2.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, -3.0)],
        )
        .unwrap();
        let u = m.orthonormalize().unwrap();
        assert!(u.unitarity_defect() < 1e-12);
        assert!(u[(0, 0)].im == 0.0 && u[(0, 0)].re > 0.0);
        assert!(u[(1, 1)].im == 0.0 && u[(1, 1)].re > 0.0);
    }

    #[test]
    fn f32_kernels_work() {
        let h = hadamard_sylvester::<f32>(3).unwrap();
        assert!((h.spectral_norm() - 1.0).abs() < 1e-5);
    }
}
