//! Sparse and dense linear algebra for the assembled pencils: CSR storage,
//! Jacobi-preconditioned CG, a dense symmetric generalized eigensolver, and
//! sparse smallest-eigenpair computation by inverse iteration.

mod cg;
mod dense;
mod inverse_iteration;
mod matrix_market;

pub use cg::{cg_solve, cg_solve_from, CgStats};
pub use dense::{dense_gen_eig_sym, DenseMatrix};
pub use inverse_iteration::{smallest_eigenpairs, smallest_eigenpairs_detailed, EigenStats};
pub use matrix_market::{read_matrix_market, write_matrix_market};

use crate::error::{Error, Result};

/// Eigenpair of a generalized symmetric pencil (A, B), normalized vᵀBv = 1.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed in
    /// triplet order, so identical inputs give bit-identical matrices.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i},{j}) outside {n_rows}x{n_cols}"
                )));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut last = None;
        for &t in &order {
            let (i, j, v) = triplets[t];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                last = Some((i, j));
            }
            row_offsets[i + 1] = col_indices.len();
        }
        // offsets of empty rows trail the previous row
        for i in 0..n_rows {
            if row_offsets[i + 1] < row_offsets[i] {
                row_offsets[i + 1] = row_offsets[i];
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Stored value at (i, j), or 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let p = next[*c];
                col_indices[p] = i;
                values[p] = *v;
                next[*c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse matrix product self · other.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension {
                expected: self.n_cols,
                actual: other.n_rows,
            });
        }
        let mut row_offsets = vec![0usize; self.n_rows + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            let (cols_a, vals_a) = self.row(i);
            for (ka, va) in cols_a.iter().zip(vals_a) {
                let (cols_b, vals_b) = other.row(*ka);
                for (jb, vb) in cols_b.iter().zip(vals_b) {
                    if mark[*jb] != i {
                        mark[*jb] = i;
                        acc[*jb] = 0.0;
                        touched.push(*jb);
                    }
                    acc[*jb] += va * vb;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            touched.clear();
            row_offsets[i + 1] = col_indices.len();
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Submatrix on the given row/column index sets (order preserved).
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_pos = vec![usize::MAX; self.n_cols];
        for (p, &j) in cols.iter().enumerate() {
            col_pos[j] = p;
        }
        let mut row_offsets = vec![0usize; rows.len() + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for (ri, &i) in rows.iter().enumerate() {
            let (crow, vrow) = self.row(i);
            scratch.clear();
            for (c, v) in crow.iter().zip(vrow) {
                if col_pos[*c] != usize::MAX {
                    scratch.push((col_pos[*c], *v));
                }
            }
            scratch.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &scratch {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets[ri + 1] = col_indices.len();
        }
        CsrMatrix {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                d.set(i, *c, *v);
            }
        }
        d
    }

    /// Largest |a_ij - a_ji| over stored entries; 0 for exactly symmetric.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c, i)).abs());
            }
        }
        worst
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= alpha;
    }
}

/// (xᵀAx)/(xᵀBx); errors if the B-energy of x is not strictly positive.
pub fn rayleigh_quotient(a: &CsrMatrix, b: &CsrMatrix, x: &[f64]) -> Result<f64> {
    if a.n_rows != x.len() || b.n_rows != x.len() || a.n_cols != x.len() || b.n_cols != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: a.n_rows,
        });
    }
    let xbx = dot(x, &b.matvec(x));
    if !(xbx > 0.0) {
        return Err(Error::DegenerateVector);
    }
    Ok(dot(x, &a.matvec(x)) / xbx)
}

/// Normalizes x so xᵀBx = 1 and the entry of largest magnitude is positive.
pub fn b_normalize(b: &CsrMatrix, x: &mut [f64]) -> Result<()> {
    let xbx = dot(x, &b.matvec(x));
    if !(xbx > 0.0) {
        return Err(Error::DegenerateVector);
    }
    let mut s = 1.0 / xbx.sqrt();
    let mut peak = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[peak].abs() {
            peak = i;
        }
    }
    if x[peak] < 0.0 {
        s = -s;
    }
    scale(s, x);
    Ok(())
}
