//! Dense symmetric eigensolver used for the small augmented-space problems
//! and as the oracle for the sparse eigensolver.
//!
//! The generalized pencil (A, B) is reduced with a Cholesky factorization
//! B = LLᵀ to the standard problem C = L⁻¹AL⁻ᵀ, which is diagonalized by
//! cyclic Jacobi rotations; eigenvectors are mapped back through L⁻ᵀ and are
//! therefore B-orthonormal.

use super::EigenPair;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<f64>, // row-major
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_cols);
            m.data[i * n_cols..(i + 1) * n_cols].copy_from_slice(r);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] += v;
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| super::dot(self.row_slice(i), x))
            .collect()
    }

    /// Lower-triangular Cholesky factor of a symmetric positive definite
    /// matrix; fails on a nonpositive pivot.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        if self.n_rows != self.n_cols {
            return Err(Error::InvalidArgument(
                "cholesky of a non-square matrix".into(),
            ));
        }
        let n = self.n_rows;
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotSpd(format!(
                            "cholesky pivot {s} at row {i}"
                        )));
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(l)
    }

    /// Solves L y = b for lower-triangular L.
    pub fn forward_substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n_rows;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    /// Solves Lᵀ x = b for lower-triangular L.
    pub fn back_substitute_transposed(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n_rows;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.get(k, i) * x[k];
            }
            x[i] = s / self.get(i, i);
        }
        x
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Diagonalizes a symmetric matrix in place by cyclic Jacobi sweeps.
/// Returns (eigenvalues unsorted, accumulated rotation matrix V with
/// C = V diag V ᵀ).
fn jacobi_eigen(c: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = c.n_rows;
    let mut a = c.clone();
    let mut v = DenseMatrix::identity(n);
    if n <= 1 {
        return Ok(((0..n).map(|i| a.get(i, i)).collect(), v));
    }
    let fro = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * fro;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if (2.0 * off).sqrt() <= tol {
            let d = (0..n).map(|i| a.get(i, i)).collect();
            return Ok((d, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app) / apq;
                // tangent of the rotation angle, the root of smaller magnitude
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                // rows/columns p and q of A
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, cos * akp - sin * akq);
                    a.set(k, q, sin * akp + cos * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, cos * apk - sin * aqk);
                    a.set(q, k, sin * apk + cos * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, cos * vkp - sin * vkq);
                    v.set(k, q, sin * vkp + cos * vkq);
                }
            }
        }
    }
    Err(Error::IterationLimit {
        iterations: 60,
        residual: f64::NAN,
    })
}

/// Full ascending spectrum of the symmetric pencil (A, B) with B-orthonormal
/// eigenvectors. B must be SPD; symmetry of A is enforced by averaging.
pub fn dense_gen_eig_sym(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<EigenPair>> {
    if a.n_rows != a.n_cols || b.n_rows != b.n_cols || a.n_rows != b.n_rows {
        return Err(Error::Dimension {
            expected: a.n_rows,
            actual: b.n_rows,
        });
    }
    let n = a.n_rows;
    let l = b.cholesky()?;

    // C = L⁻¹ A L⁻ᵀ, built column by column and symmetrized
    let mut c = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| 0.5 * (a.get(i, j) + a.get(j, i))).collect();
        let y = l.forward_substitute(&col);
        for i in 0..n {
            c.set(i, j, y[i]);
        }
    }
    // right-multiply by L⁻ᵀ: solve L zᵀ = cᵀ row-wise
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| c.get(i, j)).collect();
        let z = l.forward_substitute(&row);
        for j in 0..n {
            c.set(i, j, z[j]);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (c.get(i, j) + c.get(j, i));
            c.set(i, j, s);
            c.set(j, i, s);
        }
    }

    let (d, v) = jacobi_eigen(&c)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| d[p].partial_cmp(&d[q]).unwrap());

    let mut pairs = Vec::with_capacity(n);
    for &p in &order {
        let w: Vec<f64> = (0..n).map(|k| v.get(k, p)).collect();
        let mut x = l.back_substitute_transposed(&w);
        // explicit B-normalization and sign convention
        let bx = b.matvec(&x);
        let xbx = super::dot(&x, &bx);
        if !(xbx > 0.0) {
            return Err(Error::NotSpd(format!("eigenvector with xᵀBx = {xbx}")));
        }
        let mut s = 1.0 / xbx.sqrt();
        let mut peak = 0usize;
        for (i, val) in x.iter().enumerate() {
            if val.abs() > x[peak].abs() {
                peak = i;
            }
        }
        if x[peak] < 0.0 {
            s = -s;
        }
        for xi in &mut x {
            *xi *= s;
        }
        pairs.push(EigenPair {
            value: d[p],
            vector: x,
        });
    }
    Ok(pairs)
}
