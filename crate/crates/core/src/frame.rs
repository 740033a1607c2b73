//! Block frames and their coherence metrics.
//!
//! A [`BlockFrame`] keeps the `n × (m·r)` matrix twice: once row-major as a
//! [`CMatrix`] and once as split real/imaginary column-major planes so the
//! cross-Gram kernels `A_i* A_j` stream over contiguous memory. Frames tagged
//! [`Field::Real`] skip the imaginary plane entirely.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigenvalues, hermitian_max_eigenvalue, CMatrix};
use crate::scalar::Real;

/// Structural tolerance (unit columns, orthonormal blocks, tightness).
pub const STRUCTURE_TOL: f64 = 1e-8;
/// Tolerance on equality of principal angles across all block pairs.
pub const ISOCLINIC_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::domain(format!("unknown field `{other}`"))),
        }
    }
}

/// `m` blocks of `r` columns in dimension `n`.
#[derive(Clone, Debug)]
pub struct BlockFrame<T> {
    n: usize,
    r: usize,
    m: usize,
    field: Field,
    data: CMatrix<T>,
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Real> PartialEq for BlockFrame<T> {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.field == other.field && self.data == other.data
    }
}

impl<T: Real> BlockFrame<T> {
    /// Checked constructor: blocks must have orthonormal columns and a
    /// `real` frame must have no imaginary parts.
    pub fn new(data: CMatrix<T>, r: usize, field: Field) -> Result<Self> {
        let frame = Self::unchecked(data, r, field)?;
        if frame.r >= frame.n {
            return Err(Error::domain(format!(
                "block width r = {} must be below the dimension n = {}",
                frame.r, frame.n
            )));
        }
        if field == Field::Real && !frame.data.is_real() {
            return Err(Error::domain("frame tagged real has nonzero imaginary parts"));
        }
        if !frame.has_unit_columns() {
            return Err(Error::domain("frame columns are not unit norm"));
        }
        if !frame.has_orthonormal_blocks() {
            return Err(Error::domain("frame blocks are not orthonormal"));
        }
        Ok(frame)
    }

    /// Shape-only constructor, for inspecting arbitrary matrices with
    /// [`BlockFrame::validate`].
    pub fn unchecked(data: CMatrix<T>, r: usize, field: Field) -> Result<Self> {
        let (n, cols) = (data.rows(), data.cols());
        if r == 0 || cols % r != 0 {
            return Err(Error::dim(format!(
                "{cols} columns do not split into blocks of width {r}"
            )));
        }
        let m = cols / r;
        let mut re = vec![T::zero(); n * cols];
        let mut im = match field {
            Field::Real => Vec::new(),
            Field::Complex => vec![T::zero(); n * cols],
        };
        for i in 0..n {
            for k in 0..cols {
                let z = data[(i, k)];
                re[k * n + i] = z.re;
                if field == Field::Complex {
                    im[k * n + i] = z.im;
                }
            }
        }
        if field == Field::Real {
            im.shrink_to_fit();
        }
        Ok(Self {
            n,
            r,
            m,
            field,
            data,
            re,
            im,
        })
    }

    /// Concatenates equally shaped blocks.
    pub fn from_blocks(blocks: &[CMatrix<T>], field: Field) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::dim("no blocks given"))?;
        let (n, r) = (first.rows(), first.cols());
        if blocks.iter().any(|b| b.rows() != n || b.cols() != r) {
            return Err(Error::dim("blocks differ in shape"));
        }
        let cols = r * blocks.len();
        let data = CMatrix::from_fn(n, cols, |i, k| blocks[k / r][(i, k % r)]);
        Self::new(data, r, field)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn block(&self, i: usize) -> CMatrix<T> {
        self.data.column_range(i * self.r, self.r)
    }

    /// Column `k` of the real plane.
    #[inline]
    fn col_re(&self, k: usize) -> &[T] {
        &self.re[k * self.n..(k + 1) * self.n]
    }

    #[inline]
    fn col_im(&self, k: usize) -> &[T] {
        &self.im[k * self.n..(k + 1) * self.n]
    }

    /// `A_i* A_j` as an `r × r` row-major array.
    pub fn cross_gram(&self, i: usize, j: usize) -> Vec<Complex<T>> {
        let r = self.r;
        let mut out = vec![Complex::zero(); r * r];
        for a in 0..r {
            let ka = i * r + a;
            for b in 0..r {
                let kb = j * r + b;
                out[a * r + b] = self.column_dot(ka, kb);
            }
        }
        out
    }

    /// `a_k* a_l` for global column indices.
    #[inline]
    fn column_dot(&self, k: usize, l: usize) -> Complex<T> {
        let (xr, yr) = (self.col_re(k), self.col_re(l));
        match self.field {
            Field::Real => Complex::new(dot_real(xr, yr), T::zero()),
            Field::Complex => {
                let (xi, yi) = (self.col_im(k), self.col_im(l));
                let re = dot_real(xr, yr) + dot_real(xi, yi);
                let im = dot_real(xr, yi) - dot_real(xi, yr);
                Complex::new(re, im)
            }
        }
    }

    /// `‖A_i* A_j‖₂`.
    pub fn cross_gram_norm(&self, i: usize, j: usize) -> T {
        let c = self.cross_gram(i, j);
        small_spectral_norm(self.r, &c)
    }

    /// Worst-case block coherence: the largest `‖A_i* A_j‖₂` over `i ≠ j`.
    pub fn mu(&self) -> Result<T> {
        self.require_pairs()?;
        Ok((0..self.m)
            .into_par_iter()
            .map(|i| {
                (i + 1..self.m)
                    .map(|j| self.cross_gram_norm(i, j))
                    .fold(T::zero(), T::max)
            })
            .reduce(T::zero, T::max))
    }

    /// Average block coherence: `max_i ‖Σ_{j≠i} A_i* A_j‖₂ / (m − 1)`.
    ///
    /// The block sum is accumulated once in ascending block order, so the
    /// result is bit-stable for a given frame.
    pub fn nu(&self) -> Result<T> {
        self.nu_with_signs(None)
    }

    /// Average block coherence of the frame with blocks `s_i A_i`.
    pub fn nu_with_signs(&self, signs: Option<&[i8]>) -> Result<T> {
        self.require_pairs()?;
        if let Some(s) = signs {
            if s.len() != self.m {
                return Err(Error::dim(format!("{} signs for {} blocks", s.len(), self.m)));
            }
        }
        let (n, r) = (self.n, self.r);
        let sum = self.signed_block_sum(signs);
        let worst = (0..self.m)
            .into_par_iter()
            .map(|i| {
                // s_i A_i* (S − s_i A_i) has the norm of A_i* (s_i S − A_i)
                let flip = signs.is_some_and(|s| s[i] < 0);
                let mut c = vec![Complex::zero(); r * r];
                for a in 0..r {
                    let k = i * r + a;
                    for b in 0..r {
                        let mut acc = Complex::zero();
                        let own = i * r + b;
                        for row in 0..n {
                            let x = self.entry_cm(row, k);
                            let s = sum[b * n + row];
                            let y = if flip { -s } else { s } - self.entry_cm(row, own);
                            acc += x.conj() * y;
                        }
                        c[a * r + b] = acc;
                    }
                }
                small_spectral_norm(r, &c)
            })
            .reduce(T::zero, T::max);
        Ok(worst / T::of(self.m - 1))
    }

    #[inline]
    fn entry_cm(&self, row: usize, k: usize) -> Complex<T> {
        let re = self.re[k * self.n + row];
        let im = match self.field {
            Field::Real => T::zero(),
            Field::Complex => self.im[k * self.n + row],
        };
        Complex::new(re, im)
    }

    /// `Σ_j s_j A_j` as an `n × r` column-major array, ascending in `j`.
    pub fn signed_block_sum(&self, signs: Option<&[i8]>) -> Vec<Complex<T>> {
        let (n, r) = (self.n, self.r);
        let mut sum = vec![Complex::zero(); n * r];
        for j in 0..self.m {
            let neg = signs.is_some_and(|s| s[j] < 0);
            for b in 0..r {
                let k = j * r + b;
                for row in 0..n {
                    let z = self.entry_cm(row, k);
                    let dst = &mut sum[b * n + row];
                    if neg {
                        *dst -= z;
                    } else {
                        *dst += z;
                    }
                }
            }
        }
        sum
    }

    /// Symmetric `m × m` map of `‖A_i* A_j‖₂` with ones on the diagonal.
    pub fn gram_map(&self) -> GramMap<T> {
        let m = self.m;
        let rows: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| self.cross_gram_norm(i, j)).collect())
            .collect();
        let mut values = vec![T::zero(); m * m];
        for (i, row) in rows.into_iter().enumerate() {
            values[i * m + i] = T::one();
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        GramMap { m, values }
    }

    /// Copy with block `i` negated wherever `signs[i] < 0`.
    pub fn with_block_signs(&self, signs: &[i8]) -> Result<Self> {
        if signs.len() != self.m {
            return Err(Error::dim(format!(
                "{} signs for {} blocks",
                signs.len(),
                self.m
            )));
        }
        let cols = self.m * self.r;
        let data = CMatrix::from_fn(self.n, cols, |i, k| {
            let z = self.data[(i, k)];
            if signs[k / self.r] < 0 {
                -z
            } else {
                z
            }
        });
        Self::unchecked(data, self.r, self.field)
    }

    pub fn has_unit_columns(&self) -> bool {
        let tol = T::lit(STRUCTURE_TOL);
        (0..self.m * self.r).all(|k| (self.column_dot(k, k).re.sqrt() - T::one()).abs() < tol)
    }

    /// `‖A_i* A_i − I‖_F` below tolerance for every block.
    pub fn has_orthonormal_blocks(&self) -> bool {
        let tol = T::lit(STRUCTURE_TOL);
        let r = self.r;
        (0..self.m).all(|i| {
            let g = self.cross_gram(i, i);
            let mut dev = T::zero();
            for a in 0..r {
                for b in 0..r {
                    let target = if a == b { T::one() } else { T::zero() };
                    dev += (g[a * r + b] - Complex::new(target, T::zero())).norm_sqr();
                }
            }
            dev.sqrt() < tol
        })
    }

    /// `‖A_i* y‖₂` for every block.
    pub fn block_correlations(&self, y: &[Complex<T>]) -> Result<Vec<T>> {
        if y.len() != self.n {
            return Err(Error::dim(format!(
                "measurement has length {}, frame dimension is {}",
                y.len(),
                self.n
            )));
        }
        let yr: Vec<T> = y.iter().map(|z| z.re).collect();
        let yi: Vec<T> = y.iter().map(|z| z.im).collect();
        Ok((0..self.m)
            .map(|i| {
                let mut acc = T::zero();
                for a in 0..self.r {
                    let k = i * self.r + a;
                    let xr = self.col_re(k);
                    let (re, im) = match self.field {
                        Field::Real => (dot_real(xr, &yr), dot_real(xr, &yi)),
                        Field::Complex => {
                            let xi = self.col_im(k);
                            (
                                dot_real(xr, &yr) + dot_real(xi, &yi),
                                dot_real(xr, &yi) - dot_real(xi, &yr),
                            )
                        }
                    };
                    acc += re * re + im * im;
                }
                acc.sqrt()
            })
            .collect())
    }

    /// Structural checks, reported rather than enforced.
    pub fn validate(&self) -> Validation {
        let tol = T::lit(STRUCTURE_TOL);
        let (n, r, m) = (self.n, self.r, self.m);
        let cols = m * r;
        let unit_columns = self.has_unit_columns();
        let block_orthonormal = self.has_orthonormal_blocks();

        let is_tight = {
            let ratio = T::of(cols) / T::of(n);
            let gram = self.data.matmul(&self.data.adjoint()).expect("A A*");
            let mut dev = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { ratio } else { T::zero() };
                    dev += (gram[(i, j)] - Complex::new(target, T::zero())).norm_sqr();
                }
            }
            dev.sqrt() < tol
        };

        let is_union_of_orthobases = n % r == 0 && cols % n == 0 && {
            (0..cols / n).all(|g| self.data.column_range(g * n, n).unitarity_defect() < tol)
        };

        let equi_isoclinic = if m < 2 {
            true
        } else {
            let (lo, hi) = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut lo = T::infinity();
                    let mut hi = T::neg_infinity();
                    for j in i + 1..m {
                        for s in self.singular_values(i, j) {
                            lo = lo.min(s);
                            hi = hi.max(s);
                        }
                    }
                    (lo, hi)
                })
                .reduce(
                    || (T::infinity(), T::neg_infinity()),
                    |a, b| (a.0.min(b.0), a.1.max(b.1)),
                );
            hi - lo <= T::lit(ISOCLINIC_TOL)
        };

        Validation {
            unit_columns,
            block_orthonormal,
            is_tight,
            is_union_of_orthobases,
            equi_isoclinic,
            field_consistent: self.field == Field::Complex || self.data.is_real(),
            frame_regime: r < n && n <= cols,
        }
    }

    /// Singular values of `A_i* A_j`.
    pub fn singular_values(&self, i: usize, j: usize) -> Vec<T> {
        let r = self.r;
        let c = self.cross_gram(i, j);
        let h = gram_of(r, &c);
        hermitian_eigenvalues(r, &h)
            .into_iter()
            .map(|e| e.max(T::zero()).sqrt())
            .collect()
    }

    /// Metrics, structure flags and the relevant lower bounds in one record.
    pub fn coherence_report(&self) -> Result<CoherenceReport> {
        let mu = self.mu()?.as_f64();
        let nu = self.nu()?.as_f64();
        let v = self.validate();
        let gm = self.gram_map();
        let gram_map = GramMap {
            m: gm.m,
            values: gm.values.into_iter().map(Real::as_f64).collect(),
        };
        let inputs = bounds::BoundInputs::new(self.m, self.n, self.r, self.field);
        Ok(CoherenceReport {
            n: self.n,
            r: self.r,
            m: self.m,
            field: self.field,
            mu,
            nu,
            welch_block_lower: inputs.ok().and_then(|b| bounds::welch_block_lower(&b).ok()),
            orthobases_lower: bounds::orthobases_lower(self.n, self.r).ok(),
            is_union_of_orthobases: v.is_union_of_orthobases,
            equi_isoclinic: v.equi_isoclinic,
            validation: v,
            gram_map,
        })
    }

    fn require_pairs(&self) -> Result<()> {
        if self.m < 2 {
            Err(Error::domain(format!(
                "coherence needs at least two blocks, frame has {}",
                self.m
            )))
        } else {
            Ok(())
        }
    }
}

#[inline]
fn dot_real<T: Real>(x: &[T], y: &[T]) -> T {
    // four accumulators let the compiler vectorize the reduction
    let mut acc = [T::zero(); 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let o = 4 * c;
        acc[0] += x[o] * y[o];
        acc[1] += x[o + 1] * y[o + 1];
        acc[2] += x[o + 2] * y[o + 2];
        acc[3] += x[o + 3] * y[o + 3];
    }
    let mut tail = T::zero();
    for o in 4 * chunks..x.len() {
        tail += x[o] * y[o];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `C* C` for a square `r × r` row-major `C`.
fn gram_of<T: Real>(r: usize, c: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut h = vec![Complex::zero(); r * r];
    for a in 0..r {
        for b in a..r {
            let mut acc = Complex::zero();
            for k in 0..r {
                acc += c[k * r + a].conj() * c[k * r + b];
            }
            h[a * r + b] = acc;
            h[b * r + a] = acc.conj();
        }
        h[a * r + a].im = T::zero();
    }
    h
}

/// Spectral norm of a square `r × r` row-major matrix.
pub(crate) fn small_spectral_norm<T: Real>(r: usize, c: &[Complex<T>]) -> T {
    if r == 1 {
        return c[0].norm();
    }
    hermitian_max_eigenvalue(r, &gram_of(r, c)).max(T::zero()).sqrt()
}

/// Pairwise cross-Gram spectral norms, row-major `m × m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMap<T> {
    pub m: usize,
    pub values: Vec<T>,
}

impl<T: Real> GramMap<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.m + j]
    }

    pub fn max_off_diagonal(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.m {
            for j in 0..self.m {
                if i != j {
                    best = best.max(self.get(i, j));
                }
            }
        }
        best
    }

    pub fn off_diagonal(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.m * self.m)
            .filter(move |k| k / self.m != k % self.m)
            .map(move |k| self.values[k])
    }
}

/// Flags reported by [`BlockFrame::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub unit_columns: bool,
    pub block_orthonormal: bool,
    pub is_tight: bool,
    pub is_union_of_orthobases: bool,
    pub equi_isoclinic: bool,
    pub field_consistent: bool,
    /// `r < n ≤ m·r`.
    pub frame_regime: bool,
}

/// Coherence metrics and structure of one frame.
///
/// The gram map is carried in memory but kept out of the JSON encoding; it
/// is written separately as CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub field: Field,
    pub mu: f64,
    pub nu: f64,
    pub welch_block_lower: Option<f64>,
    pub orthobases_lower: Option<f64>,
    pub is_union_of_orthobases: bool,
    pub equi_isoclinic: bool,
    pub validation: Validation,
    #[serde(skip)]
    pub gram_map: GramMap<f64>,
}

impl Default for GramMap<f64> {
    fn default() -> Self {
        GramMap { m: 0, values: Vec::new() }
    }
}

/// Average column coherence `max_i |Σ_{j≠i} p_i* p_j| / (m − 1)`.
pub fn nu1<T: Real>(p: &CMatrix<T>) -> Result<T> {
    let m = p.cols();
    if m < 2 {
        return Err(Error::domain("average column coherence needs two columns"));
    }
    let n = p.rows();
    let mut sum = vec![Complex::<T>::zero(); n];
    for j in 0..m {
        for (i, s) in sum.iter_mut().enumerate() {
            *s += p[(i, j)];
        }
    }
    let worst = (0..m)
        .map(|i| {
            (0..n)
                .fold(Complex::zero(), |acc: Complex<T>, row| {
                    acc + p[(row, i)].conj() * (sum[row] - p[(row, i)])
                })
                .norm()
        })
        .fold(T::zero(), T::max);
    Ok(worst / T::of(m - 1))
}

/// Largest `|p_i* p_j|` over distinct columns.
pub fn column_coherence<T: Real>(p: &CMatrix<T>) -> Result<T> {
    if p.cols() < 2 {
        return Err(Error::domain("coherence needs two columns"));
    }
    let g = p.adjoint_mul(p)?;
    let m = p.cols();
    let mut best = T::zero();
    for i in 0..m {
        for j in i + 1..m {
            best = best.max(g[(i, j)].norm());
        }
    }
    Ok(best)
}

fn check_pair<T: Real>(ai: &CMatrix<T>, aj: &CMatrix<T>) -> Result<()> {
    if ai.rows() != aj.rows() || ai.cols() != aj.cols() {
        return Err(Error::dim(format!(
            "subspace bases differ in shape: {}x{} vs {}x{}",
            ai.rows(),
            ai.cols(),
            aj.rows(),
            aj.cols()
        )));
    }
    Ok(())
}

/// Chordal distance `sqrt(r − ‖A_i* A_j‖_F²)`, clamped at zero.
pub fn chordal_distance<T: Real>(ai: &CMatrix<T>, aj: &CMatrix<T>) -> Result<T> {
    check_pair(ai, aj)?;
    let f = ai.adjoint_mul(aj)?.frobenius_norm();
    Ok((T::of(ai.cols()) - f * f).max(T::zero()).sqrt())
}

/// Spectral distance `sqrt(1 − ‖A_i* A_j‖₂²)`, clamped at zero.
pub fn spectral_distance<T: Real>(ai: &CMatrix<T>, aj: &CMatrix<T>) -> Result<T> {
    check_pair(ai, aj)?;
    let s = ai.adjoint_mul(aj)?.spectral_norm();
    Ok((T::one() - s * s).max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_diagonal(m: usize, r: usize) -> BlockFrame<f64> {
        BlockFrame::new(CMatrix::identity(m * r), r, Field::Real).unwrap()
    }

    #[test]
    fn orthogonal_blocks_have_zero_coherence() {
        let f = block_diagonal(4, 2);
        assert_eq!(f.mu().unwrap(), 0.0);
        assert_eq!(f.nu().unwrap(), 0.0);
        let g = f.gram_map();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn single_block_rejected() {
        let f = BlockFrame::unchecked(CMatrix::<f64>::identity(3), 3, Field::Real).unwrap();
        assert!(matches!(f.mu(), Err(Error::Domain(_))));
        assert!(matches!(f.nu(), Err(Error::Domain(_))));
    }

    #[test]
    fn nu1_edge_cases() {
        assert_eq!(nu1(&CMatrix::<f64>::identity(3)).unwrap(), 0.0);
        let rep = CMatrix::<f64>::from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((nu1(&rep).unwrap() - 1.0).abs() < 1e-15);
        assert!(nu1(&CMatrix::<f64>::identity(1)).is_err());
    }

    #[test]
    fn distances_of_coincident_and_orthogonal_subspaces() {
        let e = CMatrix::<f64>::identity(4);
        let a = e.column_range(0, 2);
        let b = e.column_range(2, 2);
        assert_eq!(chordal_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(spectral_distance(&a, &a).unwrap(), 0.0);
        assert!((chordal_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(spectral_distance(&a, &b).unwrap(), 1.0);
        assert!(chordal_distance(&a, &e.column_range(0, 3)).is_err());
    }

    #[test]
    fn one_principal_angle() {
        let theta = 0.7f64;
        let a = CMatrix::from_real(2, 1, &[1.0, 0.0]).unwrap();
        let b = CMatrix::from_real(2, 1, &[theta.cos(), theta.sin()]).unwrap();
        assert!((chordal_distance(&a, &b).unwrap() - theta.sin()).abs() < 1e-14);
        assert!((spectral_distance(&a, &b).unwrap() - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn validate_reports_non_unit_columns() {
        let g = CMatrix::from_real(3, 4, &[2.0, 0.5, 1.0, 0.0, 0.3, 1.0, 0.0, 2.0, 1.0, 0.1, 0.2, 0.4])
            .unwrap();
        let f = BlockFrame::unchecked(g.clone(), 2, Field::Real).unwrap();
        let v = f.validate();
        assert!(!v.unit_columns);
        assert!(!v.block_orthonormal);
        assert!(BlockFrame::new(g, 2, Field::Real).is_err());
    }

    #[test]
    fn real_tag_rejects_complex_entries() {
        let mut u = CMatrix::<f64>::identity(4);
        u[(0, 0)] = Complex::new(0.0, 1.0);
        assert!(BlockFrame::new(u.clone(), 2, Field::Real).is_err());
        assert!(BlockFrame::new(u, 2, Field::Complex).is_ok());
    }

    #[test]
    fn block_sign_flip_keeps_gram_map() {
        let s = 0.5f64.sqrt();
        let data = CMatrix::from_real(2, 4, &[1.0, 0.0, s, s, 0.0, 1.0, s, -s]).unwrap();
        let f = BlockFrame::new(data, 1, Field::Real).unwrap();
        let g = f.with_block_signs(&[1, -1, 1, -1]).unwrap();
        assert_eq!(f.gram_map(), g.gram_map());
        assert!(f.validate().is_union_of_orthobases);
        assert!(f.with_block_signs(&[1]).is_err());
    }
}
