//! Matrix Market reader and writer for [`SymMatrix`].
//!
//! Both the `array` and `coordinate` layouts are understood, with `real`,
//! `integer` or `pattern` fields. A `symmetric` header stores one triangle and
//! is mirrored on read; a `general` header stores every entry and the reader
//! rejects it unless the entries are symmetric.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SymMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SymMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (header_no, header) = match lines.next() {
        Some((k, line)) => (k, line?),
        None => return Err(parse_err(1, "empty input")),
    };
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(header_no, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match tokens[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(header_no, format!("unsupported layout '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(header_no, format!("unsupported field '{other}'"))),
    };
    if field == Field::Pattern && layout == Layout::Array {
        return Err(parse_err(header_no, "pattern field requires coordinate layout"));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(header_no, format!("unsupported symmetry '{other}'"))),
    };

    // Remaining non-comment, non-blank lines.
    let mut body = lines.filter_map(|(k, line)| match line {
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((k, t.to_string())))
            }
        }
        Err(e) => Some(Err(e)),
    });

    let (size_no, size_line) = body.next().ok_or_else(|| parse_err(header_no + 1, "missing size line"))??;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(size_no, format!("bad size '{t}'"))))
        .collect::<Result<_>>()?;
    let expected_sizes = if layout == Layout::Array { 2 } else { 3 };
    if sizes.len() != expected_sizes {
        return Err(parse_err(size_no, format!("size line needs {expected_sizes} integers")));
    }
    let (rows, cols) = (sizes[0], sizes[1]);
    if rows != cols {
        return Err(parse_err(size_no, format!("matrix must be square ({rows} x {cols})")));
    }
    let n = rows;
    if n == 0 {
        return Err(parse_err(size_no, "matrix dimension must be positive"));
    }
    let mut data = vec![0.0; n * n];

    let parse_value = |k: usize, t: &str| -> Result<f64> {
        let v = match field {
            Field::Integer => t.parse::<i64>().map(|v| v as f64).map_err(|_| ()),
            _ => t.parse::<f64>().map_err(|_| ()),
        }
        .map_err(|_| parse_err(k, format!("bad value '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(k, format!("non-finite value '{t}'")));
        }
        Ok(v)
    };

    match layout {
        Layout::Array => {
            // Column-major; symmetric files carry only the lower triangle.
            let mut slots = Vec::new();
            for j in 0..n {
                let start = if symmetric { j } else { 0 };
                for i in start..n {
                    slots.push((i, j));
                }
            }
            let mut filled = 0;
            for item in body.by_ref() {
                let (k, line) = item?;
                for t in line.split_whitespace() {
                    let &(i, j) = slots
                        .get(filled)
                        .ok_or_else(|| parse_err(k, "more entries than the size line declares"))?;
                    let v = parse_value(k, t)?;
                    data[i * n + j] = v;
                    if symmetric {
                        data[j * n + i] = v;
                    }
                    filled += 1;
                }
            }
            if filled != slots.len() {
                return Err(parse_err(size_no, format!("expected {} entries, found {filled}", slots.len())));
            }
        }
        Layout::Coordinate => {
            let nnz = sizes[2];
            let mut seen = 0;
            for item in body.by_ref() {
                let (k, line) = item?;
                let parts: Vec<&str> = line.split_whitespace().collect();
                let want = if field == Field::Pattern { 2 } else { 3 };
                if parts.len() != want {
                    return Err(parse_err(k, format!("expected {want} fields, found {}", parts.len())));
                }
                let idx = |t: &str| -> Result<usize> {
                    let v = t.parse::<usize>().map_err(|_| parse_err(k, format!("bad index '{t}'")))?;
                    if v == 0 || v > n {
                        return Err(parse_err(k, format!("index {v} out of range 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let (i, j) = (idx(parts[0])?, idx(parts[1])?);
                let v = if field == Field::Pattern { 1.0 } else { parse_value(k, parts[2])? };
                data[i * n + j] = v;
                if symmetric {
                    data[j * n + i] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(size_no, format!("expected {nnz} entries, found {seen}")));
            }
        }
    }

    SymMatrix::from_dense(n, data)
}

pub fn write_matrix_market_file(a: &SymMatrix, path: impl AsRef<Path>, layout: Layout) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(a, &mut w, layout)?;
    w.flush()?;
    Ok(())
}

/// Writes the lower triangle under a `symmetric` header. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_matrix_market<W: Write>(a: &SymMatrix, w: &mut W, layout: Layout) -> Result<()> {
    let n = a.n();
    match layout {
        Layout::Array => {
            writeln!(w, "%%MatrixMarket matrix array real symmetric")?;
            writeln!(w, "{n} {n}")?;
            for j in 0..n {
                for i in j..n {
                    writeln!(w, "{}", a.get(i, j))?;
                }
            }
        }
        Layout::Coordinate => {
            let nnz = (0..n).map(|j| (j..n).filter(|&i| a.get(i, j) != 0.0).count()).sum::<usize>();
            writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
            writeln!(w, "{n} {n} {nnz}")?;
            for j in 0..n {
                for i in j..n {
                    let v = a.get(i, j);
                    if v != 0.0 {
                        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(s: &str) -> Result<SymMatrix> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn reads_coordinate_symmetric() {
        let a = read(
            "%%MatrixMarket matrix coordinate real symmetric\n% a comment\n3 3 2\n2 1 1.0\n3 2 0.5\n",
        )
        .unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.get(2, 1), 0.5);
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn reads_pattern_as_adjacency() {
        let a = read("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n").unwrap();
        assert_eq!(a.row_sums(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn reads_array_symmetric_lower_triangle() {
        let a = read("%%MatrixMarket matrix array real symmetric\n2 2\n0\n1\n0\n").unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn general_header_is_validated() {
        let ok = read("%%MatrixMarket matrix array real general\n2 2\n0 2\n2 0\n").unwrap();
        assert_eq!(ok.get(1, 0), 2.0);
        let bad = read("%%MatrixMarket matrix array real general\n2 2\n0 2\n3 0\n");
        assert!(matches!(bad, Err(Error::NotSymmetric(0, 1))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read(""), Err(Error::Parse { .. })));
        assert!(matches!(read("hello\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1.0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read("%%MatrixMarket matrix array real symmetric\n2 3\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 abc\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 -1\n"),
            Err(Error::NegativeEntry(..))
        ));
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            n in 1usize..7,
            seed in proptest::collection::vec(0.0f64..10.0, 49),
            coordinate in any::<bool>(),
        ) {
            let a = SymMatrix::from_upper_fn(n, |i, j| {
                let v = seed[i * 7 + j];
                if v < 3.0 { 0.0 } else { v }
            }).unwrap();
            let layout = if coordinate { Layout::Coordinate } else { Layout::Array };
            let mut buf = Vec::new();
            write_matrix_market(&a, &mut buf, layout).unwrap();
            let back = read_matrix_market(buf.as_slice()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
