//! Text formats for frames and experiment tables.
//!
//! Frames are stored as BFM text:
//!
//! ```text
//! BFM 1
//! n=4 r=1 m=2 field=real
//! 1:0,0:0
//! ...
//! ```
//!
//! followed by `n` rows of `m·r` comma-separated `<re>:<im>` entries. Numbers
//! are written with the shortest decimal that parses back to the same
//! `f64`, so write, read, write is byte-identical.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::blockcs::NdpRow;
use crate::bounds::ThresholdSolution;
use crate::error::{Error, Result};
use crate::frame::{BlockFrame, Field, GramMap};
use crate::matrix::CMatrix;
use crate::random::MuCurveRow;

const MAGIC: &str = "BFM 1";

pub fn write_bfm(frame: &BlockFrame<f64>) -> String {
    let a = frame.matrix();
    let mut out = String::with_capacity(a.rows() * a.cols() * 24);
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(
        out,
        "n={} r={} m={} field={}",
        frame.n(),
        frame.r(),
        frame.m(),
        frame.field().as_str()
    );
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            let z = a[(i, j)];
            let _ = write!(out, "{}:{}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a BFM document. Structural checks (unit columns, orthonormal
/// blocks) are left to the caller, so malformed but well-formatted frames
/// can still be analysed.
pub fn read_bfm(text: &str) -> Result<BlockFrame<f64>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim_end() == MAGIC => {}
        Some((_, l)) => return Err(parse_err(1, format!("expected `{MAGIC}`, found `{l}`"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let (hline, header) = lines.next().ok_or_else(|| parse_err(2, "missing header line"))?;
    let (mut n, mut r, mut m, mut field) = (None, None, None, None);
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_err(hline, format!("expected key=value, found `{token}`")))?;
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| parse_err(hline, format!("`{key}` must be a non-negative integer, found `{value}`")))
        };
        match key {
            "n" => n = Some(int()?),
            "r" => r = Some(int()?),
            "m" => m = Some(int()?),
            "field" => {
                field = Some(
                    value
                        .parse::<Field>()
                        .map_err(|_| parse_err(hline, format!("unknown field `{value}`")))?,
                )
            }
            other => return Err(parse_err(hline, format!("unknown header key `{other}`"))),
        }
    }
    let missing = |k: &str| parse_err(hline, format!("header is missing `{k}`"));
    let n = n.ok_or_else(|| missing("n"))?;
    let r = r.ok_or_else(|| missing("r"))?;
    let m = m.ok_or_else(|| missing("m"))?;
    let field = field.ok_or_else(|| missing("field"))?;
    if n == 0 || r == 0 || m == 0 {
        return Err(parse_err(hline, "dimensions must be positive"));
    }
    let cols = m
        .checked_mul(r)
        .ok_or_else(|| parse_err(hline, "m·r overflows"))?;

    let mut data = Vec::with_capacity(n.saturating_mul(cols));
    let mut rows_read = 0;
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows_read == n {
            return Err(parse_err(ln, format!("more than n={n} data rows")));
        }
        let mut count = 0;
        for entry in line.split(',') {
            let (re, im) = entry
                .trim()
                .split_once(':')
                .ok_or_else(|| parse_err(ln, format!("entry `{entry}` is not `<re>:<im>`")))?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(ln, format!("`{s}` is not a finite number")))
            };
            data.push(Complex::new(num(re)?, num(im)?));
            count += 1;
        }
        if count != cols {
            return Err(parse_err(ln, format!("expected {cols} entries, found {count}")));
        }
        rows_read += 1;
    }
    if rows_read != n {
        return Err(parse_err(
            hline,
            format!("header declares n={n} rows, found {rows_read}"),
        ));
    }
    let matrix = CMatrix::new(n, cols, data)?;
    if field == Field::Real && !matrix.is_real() {
        return Err(parse_err(hline, "field=real but some entries have an imaginary part"));
    }
    BlockFrame::unchecked(matrix, r, field)
}

/// `i,j,value` rows for the upper triangle including the diagonal.
pub fn gram_map_csv(map: &GramMap<f64>) -> String {
    let mut out = String::from("i,j,norm\n");
    for i in 0..map.m {
        for j in i..map.m {
            let _ = writeln!(out, "{i},{j},{}", map.get(i, j));
        }
    }
    out
}

pub fn mu_curve_csv(rows: &[MuCurveRow]) -> String {
    let mut out = String::from("beta,mean_mu,max_mu,theory_mu\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.beta, r.mean_mu, r.max_mu, r.theory_mu);
    }
    out
}

pub fn ndp_csv(rows: &[NdpRow]) -> String {
    let mut out = String::from("label,k,dynamic_range,mean_ndp,stderr,trials\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.label),
            r.k,
            r.dynamic_range,
            r.mean_ndp,
            r.stderr,
            r.trials
        );
    }
    out
}

pub fn threshold_csv(rows: &[ThresholdSolution]) -> String {
    let mut out = String::from("beta,a_hat,residual\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:e}", r.beta, r.a_hat, r.residual);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BlockFrame<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = CMatrix::from_real(2, 3, &[1.0, h, 0.0, 0.0, h, -1.0]).unwrap();
        BlockFrame::new(a, 1, Field::Real).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = write_bfm(&sample());
        let back = read_bfm(&text).unwrap();
        assert_eq!(write_bfm(&back), text);
        assert_eq!(back.matrix().data(), sample().matrix().data());
    }

    #[test]
    fn header_layout() {
        let text = write_bfm(&sample());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("BFM 1"));
        assert_eq!(lines.next(), Some("n=2 r=1 m=3 field=real"));
        assert_eq!(lines.next(), Some("1:0,0.7071067811865476:0,0:0"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "BFM 1\nn=2 r=1 m=2 field=real\n1:0,0:0\n0:0,x:0\n";
        match read_bfm(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_bfm("BFX\n"), Err(Error::Parse { line: 1, .. })));
        let short = "BFM 1\nn=2 r=1 m=2 field=real\n1:0,0:0\n";
        assert!(matches!(read_bfm(short), Err(Error::Parse { line: 2, .. })));
        let wide = "BFM 1\nn=1 r=1 m=2 field=real\n1:0\n";
        assert!(matches!(read_bfm(wide), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn real_tag_with_imaginary_part_rejected() {
        let bad = "BFM 1\nn=2 r=1 m=2 field=real\n1:0,0:1\n0:0,0:0\n";
        assert!(read_bfm(bad).is_err());
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
