//! Smallest eigenpairs of a sparse SPD pencil (A, B) by blocked inverse
//! iteration with Rayleigh-Ritz extraction: each sweep applies one CG solve
//! A y = B x per block vector, B-orthonormalizes the block, and rotates it
//! into the Ritz basis of the projected pencil. Two guard vectors beyond the
//! requested count keep convergence governed by the spectral gap outside the
//! block, so clustered eigenvalues (symmetric-domain multiplicities) resolve
//! inside the small dense solve instead of stalling the iteration.
//! Deterministic by fixed-seed start vectors.

use super::{
    axpy, b_normalize, cg_solve_from, dense_gen_eig_sym, dot, norm2, CsrMatrix, DenseMatrix,
    EigenPair,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct EigenStats {
    pub outer_iterations: usize,
    pub cg_iterations: usize,
}

/// xorshift64* stream mapped to [-0.5, 0.5).
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        let bits = self.0.wrapping_mul(0x2545F4914F6CDD1D);
        (bits >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

const START_SEED: u64 = 0x9E3779B97F4A7C15;
const MAX_OUTER: usize = 500;

/// k smallest eigenpairs, ascending, B-orthonormal, each with vᵀBv = 1 and
/// the largest-magnitude entry positive.
pub fn smallest_eigenpairs(
    a: &CsrMatrix,
    b: &CsrMatrix,
    k: usize,
    tol: f64,
) -> Result<Vec<EigenPair>> {
    smallest_eigenpairs_detailed(a, b, k, tol).map(|(pairs, _)| pairs)
}

pub fn smallest_eigenpairs_detailed(
    a: &CsrMatrix,
    b: &CsrMatrix,
    k: usize,
    tol: f64,
) -> Result<(Vec<EigenPair>, EigenStats)> {
    let n = a.n_rows;
    if a.n_cols != n || b.n_rows != n || b.n_cols != n {
        return Err(Error::Dimension {
            expected: n,
            actual: b.n_rows,
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from a dimension-{n} pencil"
        )));
    }
    let p = (k + 2).min(n);
    let cg_tol = (0.1 * tol).clamp(1e-15, 1e-12);
    let cg_max = 10 * n;
    let mut stats = EigenStats::default();

    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut rng = XorShift(START_SEED ^ (j as u64).wrapping_mul(0xD1B54A32D192ED03) | 1);
            (0..n).map(|_| rng.next()).collect()
        })
        .collect();
    b_orthonormalize(b, &mut x)?;
    let mut theta: Vec<f64> = x
        .iter()
        .map(|xj| super::rayleigh_quotient(a, b, xj))
        .collect::<Result<_>>()?;
    let mut residuals = vec![f64::INFINITY; p];

    for _outer in 0..MAX_OUTER {
        stats.outer_iterations += 1;
        let mut y = Vec::with_capacity(p);
        for (xj, &th) in x.iter().zip(&theta) {
            // warm start: for a converged pair, y ≈ x / θ
            let x0: Vec<f64> = xj.iter().map(|v| v / th.max(f64::MIN_POSITIVE)).collect();
            let rhs = b.matvec(xj);
            let (yj, cg) = cg_solve_from(a, &rhs, &x0, cg_tol, cg_max)?;
            stats.cg_iterations += cg.iterations;
            y.push(yj);
        }
        b_orthonormalize(b, &mut y)?;

        // Rayleigh-Ritz on span(y)
        let ay: Vec<Vec<f64>> = y.iter().map(|yj| a.matvec(yj)).collect();
        let by: Vec<Vec<f64>> = y.iter().map(|yj| b.matvec(yj)).collect();
        let mut ha = DenseMatrix::zeros(p, p);
        let mut hb = DenseMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let va = dot(&y[i], &ay[j]);
                ha.set(i, j, va);
                ha.set(j, i, va);
                let vb = dot(&y[i], &by[j]);
                hb.set(i, j, vb);
                hb.set(j, i, vb);
            }
        }
        let ritz = dense_gen_eig_sym(&ha, &hb)?;

        let rotate = |cols: &[Vec<f64>], coeff: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (col, &c) in cols.iter().zip(coeff) {
                axpy(c, col, &mut out);
            }
            out
        };
        let mut settled = true;
        let mut next_x = Vec::with_capacity(p);
        for (j, pair) in ritz.iter().enumerate() {
            let xj = rotate(&y, &pair.vector);
            if j < k {
                let axj = rotate(&ay, &pair.vector);
                let bxj = rotate(&by, &pair.vector);
                let mut r2 = 0.0;
                for i in 0..n {
                    let r = axj[i] - pair.value * bxj[i];
                    r2 += r * r;
                }
                residuals[j] = r2.sqrt() / norm2(&axj).max(f64::MIN_POSITIVE);
                let value_settled = (pair.value - theta[j]).abs() <= tol * pair.value.abs();
                settled = settled && value_settled && residuals[j] <= tol;
            }
            theta[j] = pair.value;
            next_x.push(xj);
        }
        x = next_x;
        if settled {
            let mut pairs = Vec::with_capacity(k);
            for (xj, &th) in x.iter().zip(&theta).take(k) {
                let mut v = xj.clone();
                b_normalize(b, &mut v)?;
                pairs.push(EigenPair {
                    value: th,
                    vector: v,
                });
            }
            return Ok((pairs, stats));
        }
    }
    Err(Error::IterationLimit {
        iterations: MAX_OUTER,
        residual: residuals[..k].iter().cloned().fold(0.0, f64::max),
    })
}

/// Twice-through modified Gram-Schmidt in the B inner product.
fn b_orthonormalize(b: &CsrMatrix, xs: &mut [Vec<f64>]) -> Result<()> {
    let mut bxs: Vec<Vec<f64>> = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        for _ in 0..2 {
            for (i, bxi) in bxs.iter().enumerate() {
                let c = dot(bxi, &xs[j]);
                let (head, tail) = xs.split_at_mut(j);
                axpy(-c, &head[i], &mut tail[0]);
            }
        }
        b_normalize(b, &mut xs[j])?;
        bxs.push(b.matvec(&xs[j]));
    }
    Ok(())
}
