//! Matrix Market coordinate format (real, general), 1-based indices.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write<W: Write>(m: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn to_string(m: &SparseMatrix) -> String {
    let mut buf = Vec::new();
    write(m, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads a square real coordinate matrix.
pub fn read<R: BufRead>(input: R) -> Result<SparseMatrix> {
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = input.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input".into()))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported header: {header}")));
    }
    if fields[3] != "real" || fields[4] != "general" {
        return Err(parse_err(1, format!("only real general matrices are supported, got {} {}", fields[3], fields[4])));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                let nums: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse().map_err(|e| parse_err(lineno, format!("{e}"))))
                    .collect::<Result<_>>()?;
                if nums.len() != 3 || nums[0] != nums[1] {
                    return Err(parse_err(lineno, "expected `n n nnz` for a square matrix".into()));
                }
                size = Some((nums[0], nums[2]));
            }
            Some((n, _)) => {
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "expected `row col value`".into()));
                }
                let i: usize = parts[0].parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
                let j: usize = parts[1].parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
                let v: f64 = parts[2].parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) outside 1..={n}")));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {}", triplets.len())));
    }
    SparseMatrix::from_triplets(n, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TensorMesh;
    use crate::operator::assemble;

    #[test]
    fn roundtrip_is_bitwise() {
        let a = assemble(&TensorMesh::geometric(3, 1.17).unwrap());
        let text = to_string(a.matrix());
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n49 49 "));
        let b = read(text.as_bytes()).unwrap();
        assert_eq!(&b, a.matrix());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read("".as_bytes()).is_err());
        assert!(read("%%MatrixMarket matrix array real general\n".as_bytes()).is_err());
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read(short.as_bytes()).is_err());
    }
}
