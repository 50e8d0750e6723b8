//! MatrixMarket coordinate import/export, the debug path for dumping
//! assembled pencils and inspecting them with external tools.

use std::fmt::Write as _;
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

pub fn write_matrix_market<P: AsRef<Path>>(matrix: &CsrMatrix, path: P) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    let _ = writeln!(text, "%%MatrixMarket matrix coordinate real general");
    let _ = writeln!(text, "{} {} {}", matrix.n_rows, matrix.n_cols, matrix.nnz());
    for i in 0..matrix.n_rows {
        for p in matrix.row_offsets[i]..matrix.row_offsets[i + 1] {
            let _ = writeln!(
                text,
                "{} {} {:.17e}",
                i + 1,
                matrix.col_indices[p] + 1,
                matrix.values[p]
            );
        }
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_matrix_market<P: AsRef<Path>>(path: P) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(i, l)| *i == 1 || (!l.is_empty() && !l.starts_with('%')));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    if !header.starts_with("%%MatrixMarket matrix coordinate real") {
        return Err(parse_err(hline, format!("unsupported header '{header}'")));
    }
    let (sline, size) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing size line".into()))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(parse_err(sline, format!("bad size line '{size}'")));
    }
    let parse_usize = |s: &str, line: usize| -> Result<usize> {
        s.parse()
            .map_err(|_| parse_err(line, format!("cannot parse count '{s}'")))
    };
    let n_rows = parse_usize(dims[0], sline)?;
    let n_cols = parse_usize(dims[1], sline)?;
    let nnz = parse_usize(dims[2], sline)?;

    let mut triplets = Vec::with_capacity(nnz);
    for (line, entry) in lines {
        let f: Vec<&str> = entry.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line, format!("bad entry '{entry}'")));
        }
        let i = parse_usize(f[0], line)?;
        let j = parse_usize(f[1], line)?;
        let v: f64 = f[2]
            .parse()
            .map_err(|_| parse_err(line, format!("cannot parse value '{}'", f[2])))?;
        if i == 0 || i > n_rows || j == 0 || j > n_cols {
            return Err(parse_err(
                line,
                format!("entry ({i},{j}) outside {n_rows}x{n_cols}"),
            ));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != nnz {
        return Err(parse_err(
            text.lines().count(),
            format!("declared {nnz} entries, found {}", triplets.len()),
        ));
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_matrix() {
        let m = CsrMatrix::from_triplets(
            3,
            2,
            &[(0, 0, 1.5), (1, 1, -2.25e-3), (2, 0, 1.0 / 3.0)],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        write_matrix_market(&m, &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn bad_index_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 5.0\n",
        )
        .unwrap();
        match read_matrix_market(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io() {
        assert!(matches!(
            read_matrix_market("/no/such/file.mtx"),
            Err(Error::Io { .. })
        ));
    }
}
