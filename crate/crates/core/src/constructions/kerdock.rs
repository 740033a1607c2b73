//! Real Kerdock frames.
//!
//! A Kerdock set is a family of `2^(k−1)` alternating (symmetric, zero
//! diagonal) binary `k × k` matrices whose pairwise differences are
//! nonsingular over GF(2). Each matrix `A` gives the quadratic form
//! `Q_A(x) = Σ_{i<j} A_ij x_i x_j` and the basis of `±1` vectors
//! `h_{A,a}(x) = 2^(−k/2) (−1)^{Q_A(x) + a·x + ε_A}`; distinct bases are
//! mutually unbiased. `ε_A` (the complement bit of the Kerdock codeword) is
//! set on the second half of the set so that the columns sum to zero.
//!
//! Sets are generated from trace forms over GF(2^(k−1)): for `m = k − 1`
//! odd, `S_c(x, y) = Tr(c·x·y)` is a nonsingular symmetric form for every
//! `c ≠ 0`, and bordering it with its diagonal `d` as
//! `[[S + d dᵀ, d], [dᵀ, 0]]` yields an alternating form on `k` bits.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;

use super::verify_flat_union;

/// Irreducible polynomials over GF(2) for the odd field degrees in use.
fn field_polynomial(m: u32) -> Option<u32> {
    match m {
        3 => Some(0b1011),
        5 => Some(0b10_0101),
        7 => Some(0b1000_0011),
        _ => None,
    }
}

fn gf_mul(mut a: u32, mut b: u32, m: u32, poly: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> m) & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

fn gf_trace(x: u32, m: u32, poly: u32) -> u32 {
    let mut acc = 0;
    let mut y = x;
    for _ in 0..m {
        acc ^= y;
        y = gf_mul(y, y, m, poly);
    }
    acc & 1
}

/// Rank over GF(2) of a square matrix stored as row bitmasks.
pub fn gf2_rank(rows: &[u32]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in 0..32 {
        let mask = 1u32 << bit;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Binary `k × k` matrices as row bitmasks (bit `j` of row `i` is entry `(i, j)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KerdockSet {
    pub k: u32,
    pub matrices: Vec<Vec<u32>>,
}

impl KerdockSet {
    /// Trace-form construction for even `k` with `4 ≤ k ≤ 8`.
    pub fn generate(k: u32) -> Result<Self> {
        if !k.is_multiple_of(2) || k < 4 {
            return Err(Error::domain(format!("Kerdock sets need an even k >= 4, got {k}")));
        }
        let m = k - 1;
        let poly = field_polynomial(m).ok_or_else(|| {
            Error::Construction(format!(
                "no field polynomial for GF(2^{m}); supply a Kerdock set file instead"
            ))
        })?;
        let mut matrices = Vec::with_capacity(1 << m);
        for c in 0..(1u32 << m) {
            let sym = |i: u32, j: u32| gf_trace(gf_mul(c, gf_mul(1 << i, 1 << j, m, poly), m, poly), m, poly);
            let diag: Vec<u32> = (0..m).map(|i| sym(i, i)).collect();
            let mut rows = vec![0u32; k as usize];
            for i in 0..m {
                let mut row = 0;
                for j in 0..m {
                    if sym(i, j) ^ (diag[i as usize] & diag[j as usize]) == 1 {
                        row |= 1 << j;
                    }
                }
                if diag[i as usize] == 1 {
                    row |= 1 << m;
                    rows[m as usize] |= 1 << i;
                }
                rows[i as usize] = row;
            }
            matrices.push(rows);
        }
        Ok(Self { k, matrices })
    }

    /// Count `2^(k−1)`, alternating members, nonsingular pairwise differences.
    pub fn validate(&self) -> Result<()> {
        let k = self.k as usize;
        if k == 0 || k > 32 {
            return Err(Error::Construction(format!("unsupported Kerdock size k = {k}")));
        }
        let expected = 1usize << (k - 1);
        if self.matrices.len() != expected {
            return Err(Error::Construction(format!(
                "Kerdock set for k = {k} needs {expected} matrices, found {}",
                self.matrices.len()
            )));
        }
        for (idx, a) in self.matrices.iter().enumerate() {
            if a.len() != k {
                return Err(Error::Construction(format!("matrix {idx} has {} rows", a.len())));
            }
            for i in 0..k {
                if a[i] >> k != 0 || (a[i] >> i) & 1 != 0 {
                    return Err(Error::Construction(format!(
                        "matrix {idx} is not alternating (row {i})"
                    )));
                }
                for j in 0..k {
                    if (a[i] >> j) & 1 != (a[j] >> i) & 1 {
                        return Err(Error::Construction(format!("matrix {idx} is not symmetric")));
                    }
                }
            }
        }
        for (i, a) in self.matrices.iter().enumerate() {
            for (j, b) in self.matrices.iter().enumerate().skip(i + 1) {
                let diff: Vec<u32> = a.iter().zip(b).map(|(x, y)| x ^ y).collect();
                if gf2_rank(&diff) != k {
                    return Err(Error::Construction(format!(
                        "difference of matrices {i} and {j} is singular over GF(2)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses one matrix per line, rows as whitespace-separated hex words.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut matrices = Vec::new();
        let mut k = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rows = line
                .split_whitespace()
                .map(|w| {
                    u32::from_str_radix(w.trim_start_matches("0x"), 16).map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad hex row `{w}`: {e}"),
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            match k {
                None => k = Some(rows.len()),
                Some(k) if k != rows.len() => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected {k} rows, found {}", rows.len()),
                    })
                }
                _ => {}
            }
            matrices.push(rows);
        }
        let k = k.ok_or(Error::Parse { line: 0, msg: "empty Kerdock set file".into() })?;
        Ok(Self { k: k as u32, matrices })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in &self.matrices {
            let words: Vec<String> = a.iter().map(|r| format!("{r:x}")).collect();
            let _ = writeln!(out, "{}", words.join(" "));
        }
        out
    }
}

fn quadratic_form(a: &[u32], x: u32) -> u32 {
    let mut acc = 0;
    for (i, row) in a.iter().enumerate() {
        if (x >> i) & 1 == 1 {
            let upper = row & !((2u32 << i) - 1);
            acc ^= (upper & x).count_ones() & 1;
        }
    }
    acc
}

/// Real Kerdock frame of dimension `2^k` with `2^(k−1)` bases.
pub fn kerdock_real<T: Real>(k: u32) -> Result<CMatrix<T>> {
    kerdock_from_set(&KerdockSet::generate(k)?)
}

/// Frame from a (validated) Kerdock set; fails if the result is not a flat
/// union of orthonormal bases.
pub fn kerdock_from_set<T: Real>(set: &KerdockSet) -> Result<CMatrix<T>> {
    set.validate()?;
    let k = set.k;
    let n = 1usize << k;
    let bases = set.matrices.len();
    let scale = T::one() / T::of(n).sqrt();
    let forms: Vec<Vec<u32>> = set
        .matrices
        .iter()
        .map(|a| (0..n as u32).map(|x| quadratic_form(a, x)).collect())
        .collect();
    let frame = CMatrix::from_fn(n, bases * n, |x, col| {
        let (t, a) = (col / n, col % n);
        let complement = u32::from(t >= bases / 2);
        let bit = forms[t][x] ^ ((a & x) as u32).count_ones() & 1 ^ complement;
        let v = if bit & 1 == 0 { scale } else { -scale };
        Complex::new(v, T::zero())
    });
    if !verify_flat_union(&frame) {
        return Err(Error::Construction(
            "generated Kerdock frame is not a flat union; supply a validated Kerdock set file".into(),
        ));
    }
    Ok(frame)
}
