//! Matrix Market coordinate format.
//!
//! The writer always emits `%%MatrixMarket matrix coordinate complex general`
//! with 1-based `row col real imag` lines. Values are printed with Rust's
//! shortest round-trip formatting, so write-then-read is bit-identical. The
//! reader additionally accepts `real`/`integer` fields and the `symmetric`,
//! `skew-symmetric` and `hermitian` storage schemes, which it expands.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use thiserror::Error;

use super::ComplexSparseMatrix;

/// Default cap on declared dimensions, which size the row offset array.
pub const DEFAULT_MAX_DIM: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension {dim} exceeds the limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MatrixMarketError {
    MatrixMarketError::Parse { line, msg: msg.into() }
}

fn parse_header(line: &str) -> Result<(Field, Symmetry), MatrixMarketError> {
    let lower = line.trim().to_ascii_lowercase();
    let tokens: Vec<&str> = lower.split_whitespace().collect();
    if tokens.first() != Some(&"%%matrixmarket") {
        return Err(parse_err(1, "header must start with %%MatrixMarket"));
    }
    if tokens.len() != 5 {
        return Err(parse_err(1, "header must read: %%MatrixMarket matrix coordinate <field> <symmetry>"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(1, "object must be \"matrix\""));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, "only the coordinate format is supported"));
    }
    let field = match tokens[3] {
        "real" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field \"{other}\""))),
    };
    let symmetry = match tokens[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry \"{other}\""))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian storage requires the complex field"));
    }
    Ok((field, symmetry))
}

fn parse_index(tok: Option<&str>, line: usize, what: &str) -> Result<usize, MatrixMarketError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

fn parse_value(tok: Option<&str>, line: usize, what: &str) -> Result<f64, MatrixMarketError> {
    let v = tok
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {what}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what}")));
    }
    Ok(v)
}

/// Reads a coordinate matrix with the default dimension cap.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<ComplexSparseMatrix, MatrixMarketError> {
    read_matrix_market_with_limit(reader, DEFAULT_MAX_DIM)
}

pub fn read_matrix_market_with_limit<R: BufRead>(
    reader: R,
    max_dim: usize,
) -> Result<ComplexSparseMatrix, MatrixMarketError> {
    let mut lines = reader.lines().enumerate();
    let (field, symmetry) = match lines.next() {
        Some((_, line)) => parse_header(&line?)?,
        None => return Err(parse_err(1, "empty input")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut entries = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((n_rows, n_cols, nnz)) = size else {
            let r = parse_index(toks.next(), lineno, "row count")?;
            let c = parse_index(toks.next(), lineno, "column count")?;
            let z = parse_index(toks.next(), lineno, "entry count")?;
            if toks.next().is_some() {
                return Err(parse_err(lineno, "trailing tokens after size line"));
            }
            for dim in [r, c] {
                if dim > max_dim {
                    return Err(MatrixMarketError::TooLarge { dim, max: max_dim });
                }
            }
            if symmetry != Symmetry::General && r != c {
                return Err(parse_err(lineno, "symmetric storage requires a square matrix"));
            }
            size = Some((r, c, z));
            triplets.reserve(z.min(1 << 20));
            continue;
        };
        if entries == nnz {
            return Err(MatrixMarketError::EntryCount { expected: nnz, found: nnz + 1 });
        }
        let i = parse_index(toks.next(), lineno, "row index")?;
        let j = parse_index(toks.next(), lineno, "column index")?;
        if i == 0 || j == 0 || i > n_rows || j > n_cols {
            return Err(parse_err(lineno, format!("index ({i}, {j}) outside {n_rows} x {n_cols}")));
        }
        let re = parse_value(toks.next(), lineno, "real part")?;
        let im = match field {
            Field::Complex => parse_value(toks.next(), lineno, "imaginary part")?,
            Field::Real => 0.0,
        };
        if toks.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after entry"));
        }
        let (r, c, v) = (i - 1, j - 1, Complex64::new(re, im));
        triplets.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((c, r, v)),
                Symmetry::SkewSymmetric => triplets.push((c, r, -v)),
                Symmetry::Hermitian => triplets.push((c, r, v.conj())),
            }
        } else if symmetry == Symmetry::SkewSymmetric {
            return Err(parse_err(lineno, "skew-symmetric storage has no diagonal entries"));
        }
        entries += 1;
    }
    let Some((n_rows, n_cols, nnz)) = size else {
        return Err(parse_err(1, "missing size line"));
    };
    if entries != nnz {
        return Err(MatrixMarketError::EntryCount { expected: nnz, found: entries });
    }
    let m = ComplexSparseMatrix::from_triplets(n_rows, n_cols, &triplets).map_err(|e| parse_err(0, e.to_string()))?;
    if !m.values().iter().all(|v| v.is_finite()) {
        return Err(parse_err(0, "duplicate entries sum to a non-finite value"));
    }
    Ok(m)
}

/// Parses a matrix from an in-memory string.
pub fn parse_matrix_market(text: &str) -> Result<ComplexSparseMatrix, MatrixMarketError> {
    read_matrix_market(text.as_bytes())
}

pub fn write_matrix_market<W: Write>(
    mut out: W,
    a: &ComplexSparseMatrix,
    comments: &[&str],
) -> Result<(), MatrixMarketError> {
    writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
    for c in comments {
        for line in c.lines() {
            writeln!(out, "% {line}")?;
        }
    }
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for (r, c, v) in a.iter() {
        writeln!(out, "{} {} {} {}", r + 1, c + 1, v.re, v.im)?;
    }
    Ok(())
}

pub fn to_matrix_market_string(a: &ComplexSparseMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_market(&mut buf, a, &[]).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("writer emits ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "%%MatrixMarket matrix coordinate complex general
% comment
2 3 3
1 1 1.5 -2
2 3 0.25 0
1 3 -1e-3 7
";

    #[test]
    fn reads_complex_general() {
        let a = parse_matrix_market(EXAMPLE).unwrap();
        assert_eq!((a.n_rows(), a.n_cols(), a.nnz()), (2, 3, 3));
        assert_eq!(a.get(0, 0), Complex64::new(1.5, -2.0));
        assert_eq!(a.get(0, 2), Complex64::new(-1e-3, 7.0));
        assert_eq!(a.get(1, 2), Complex64::new(0.25, 0.0));
    }

    #[test]
    fn overflowing_duplicates_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1e308\n1 1 1e308\n";
        assert!(parse_matrix_market(text).is_err());
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let a = ComplexSparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 1, Complex64::new(0.1, 1.0 / 3.0)),
                (2, 0, Complex64::new(-7.123456789012345e-200, 2.5e300)),
                (1, 1, Complex64::new(f64::MIN_POSITIVE, -0.0)),
            ],
        )
        .unwrap();
        let text = to_matrix_market_string(&a);
        let b = parse_matrix_market(&text).unwrap();
        assert_eq!(a.row_offsets(), b.row_offsets());
        assert_eq!(a.col_indices(), b.col_indices());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn expands_hermitian_and_real() {
        let h = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 1\n";
        let a = parse_matrix_market(h).unwrap();
        assert_eq!(a.get(0, 1), Complex64::new(1.0, -1.0));
        assert_eq!(a.get(1, 0), Complex64::new(1.0, 1.0));
        let r = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 3\n";
        let a = parse_matrix_market(r).unwrap();
        assert_eq!(a.get(0, 1), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn rejects_malformed() {
        let cases = [
            "",
            "%%MatrixMarket matrix array complex general\n1 1\n1 0\n",
            "%%MatrixMarket matrix coordinate complex general\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n3 1 1 0\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 2\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n2 2 1 0\n",
            "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 nan 0\n",
            "%%MatrixMarket matrix coordinate real hermitian\n2 2 0\n",
        ];
        for case in cases {
            assert!(parse_matrix_market(case).is_err(), "accepted: {case:?}");
        }
    }

    #[test]
    fn dimension_cap() {
        let text = "%%MatrixMarket matrix coordinate complex general\n1000000 2 0\n";
        assert!(matches!(
            read_matrix_market_with_limit(text.as_bytes(), 1000),
            Err(MatrixMarketError::TooLarge { .. })
        ));
    }
}
