//! Matrix Market coordinate/array reader and writer.
//!
//! Real matrices are written as `coordinate real symmetric` (lower triangle
//! only) when symmetric and `coordinate real general` otherwise. Complex
//! vectors are written as `n x 1` `coordinate complex general` matrices.
//! Values use Rust's shortest round-trip float formatting, so a
//! write/read/write cycle is byte-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::complex::ComplexVector;
use crate::error::{Error, Result};
use crate::sparse::SparseReal;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

#[derive(Debug)]
struct Header {
    layout: Layout,
    field: Field,
    symmetry: Symmetry,
}

/// Entries as read from file, expanded for symmetry, 0-based.
struct Entries {
    n_rows: usize,
    n_cols: usize,
    field: Field,
    data: Vec<(usize, usize, f64, f64)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<Header> {
    let lower = line.to_ascii_lowercase();
    let toks: Vec<&str> = lower.split_whitespace().collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match toks[2] {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported layout '{other}'"))),
    };
    let field = match toks[3] {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match toks[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_err(1, "pattern field requires coordinate layout"));
    }
    Ok(Header {
        layout,
        field,
        symmetry,
    })
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what}")))
}

fn read_entries<R: BufRead>(reader: R) -> Result<Entries> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => parse_header(&l?)?,
        None => return Err(parse_err(1, "empty file")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut data = Vec::new();
    let mut array_pos = 0usize;
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut toks = t.split_whitespace();
        let Some((n_rows, n_cols, nnz)) = size else {
            let r: usize = num(toks.next(), lineno, "row count")?;
            let c: usize = num(toks.next(), lineno, "column count")?;
            let nnz = match header.layout {
                Layout::Coordinate => num(toks.next(), lineno, "entry count")?,
                Layout::Array => match header.symmetry {
                    Symmetry::General => r * c,
                    Symmetry::SkewSymmetric => r * (r.saturating_sub(1)) / 2,
                    _ => r * (r + 1) / 2,
                },
            };
            if header.symmetry != Symmetry::General && r != c {
                return Err(parse_err(
                    lineno,
                    "symmetric storage requires a square matrix",
                ));
            }
            size = Some((r, c, nnz));
            data.reserve(nnz);
            continue;
        };
        if array_pos >= nnz {
            return Err(parse_err(lineno, "more entries than declared"));
        }
        let (i, j) = match header.layout {
            Layout::Coordinate => {
                let i: usize = num(toks.next(), lineno, "row index")?;
                let j: usize = num(toks.next(), lineno, "column index")?;
                if i == 0 || j == 0 || i > n_rows || j > n_cols {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) out of range")));
                }
                (i - 1, j - 1)
            }
            Layout::Array => {
                // column-major; symmetric storage lists the lower triangle
                let (mut i, mut j) = (array_pos, 0usize);
                if header.symmetry == Symmetry::General {
                    j = array_pos / n_rows;
                    i = array_pos % n_rows;
                } else {
                    let skip = usize::from(header.symmetry == Symmetry::SkewSymmetric);
                    loop {
                        let col_len = n_rows - j - skip;
                        if i < col_len {
                            break;
                        }
                        i -= col_len;
                        j += 1;
                    }
                    i += j + skip;
                }
                (i, j)
            }
        };
        let (re, im) = match header.field {
            Field::Pattern => (1.0, 0.0),
            Field::Real | Field::Integer => (num(toks.next(), lineno, "value")?, 0.0),
            Field::Complex => (
                num(toks.next(), lineno, "real part")?,
                num(toks.next(), lineno, "imaginary part")?,
            ),
        };
        data.push((i, j, re, im));
        if i != j {
            match header.symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => data.push((j, i, re, im)),
                Symmetry::SkewSymmetric => data.push((j, i, -re, -im)),
                Symmetry::Hermitian => data.push((j, i, re, -im)),
            }
        }
        array_pos += 1;
    }
    let (n_rows, n_cols, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    if array_pos != nnz {
        return Err(parse_err(
            0,
            format!("declared {nnz} entries, found {array_pos}"),
        ));
    }
    Ok(Entries {
        n_rows,
        n_cols,
        field: header.field,
        data,
    })
}

/// Reads a real sparse matrix. Complex files are rejected.
pub fn read_sparse<R: BufRead>(reader: R) -> Result<SparseReal> {
    let e = read_entries(reader)?;
    if e.field == Field::Complex {
        return Err(parse_err(1, "expected a real matrix, found complex"));
    }
    let t: Vec<_> = e.data.iter().map(|&(i, j, v, _)| (i, j, v)).collect();
    SparseReal::from_triplets(e.n_rows, e.n_cols, &t)
}

/// Reads an `n x 1` real or complex matrix as a complex vector.
pub fn read_complex_vector<R: BufRead>(reader: R) -> Result<ComplexVector> {
    let e = read_entries(reader)?;
    if e.n_cols != 1 {
        return Err(parse_err(
            1,
            format!("expected one column, found {}", e.n_cols),
        ));
    }
    let mut v = ComplexVector::zeros(e.n_rows);
    for &(i, _, re, im) in &e.data {
        v.re[i] += re;
        v.im[i] += im;
    }
    Ok(v)
}

/// Writes a real sparse matrix, using symmetric storage when it applies.
pub fn write_sparse<W: Write>(mut w: W, a: &SparseReal) -> Result<()> {
    let symmetric = a.is_square() && a.is_symmetric(0.0);
    let entries: Vec<_> = if symmetric {
        // column-major lower triangle, the conventional order
        let mut lower: Vec<_> = a.triplets().filter(|&(i, j, _)| i >= j).collect();
        lower.sort_by_key(|&(i, j, _)| (j, i));
        lower
    } else {
        a.triplets().collect()
    };
    writeln!(
        w,
        "%%MatrixMarket matrix coordinate real {}",
        if symmetric { "symmetric" } else { "general" }
    )?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Writes a complex vector as an `n x 1` coordinate complex matrix.
pub fn write_complex_vector<W: Write>(mut w: W, x: &ComplexVector) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(w, "{} 1 {}", x.len(), x.len())?;
    for j in 0..x.len() {
        writeln!(w, "{} 1 {:e} {:e}", j + 1, x.re[j], x.im[j])?;
    }
    Ok(())
}

pub fn read_sparse_file(path: impl AsRef<Path>) -> Result<SparseReal> {
    read_sparse(BufReader::new(File::open(path)?))
}

pub fn read_complex_vector_file(path: impl AsRef<Path>) -> Result<ComplexVector> {
    read_complex_vector(BufReader::new(File::open(path)?))
}

pub fn write_sparse_file(path: impl AsRef<Path>, a: &SparseReal) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn write_complex_vector_file(path: impl AsRef<Path>, x: &ComplexVector) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex_vector(&mut w, x)?;
    w.flush()?;
    Ok(())
}
