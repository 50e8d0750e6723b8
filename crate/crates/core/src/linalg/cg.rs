//! Conjugate gradients with Jacobi preconditioning for the Dirichlet-reduced
//! SPD systems arising from the source problems.

use super::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CgStats {
    pub iterations: usize,
    /// ‖b − Ax‖₂ / ‖b‖₂ at exit.
    pub final_residual: f64,
    /// √(rᵀM⁻¹r) per iteration, including the initial residual.
    pub preconditioned_norms: Vec<f64>,
}

/// Solves A x = rhs from the zero start vector.
pub fn cg_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    cg_solve_from(a, rhs, &vec![0.0; rhs.len()], tol, max_iter)
}

/// Solves A x = rhs starting from x0, stopping at ‖b − Ax‖₂ ≤ tol·‖b‖₂.
pub fn cg_solve_from(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    if a.n_rows != a.n_cols {
        return Err(Error::InvalidArgument(format!(
            "cg needs a square matrix, got {}x{}",
            a.n_rows, a.n_cols
        )));
    }
    if rhs.len() != a.n_rows || x0.len() != a.n_rows {
        return Err(Error::Dimension {
            expected: a.n_rows,
            actual: rhs.len(),
        });
    }
    let n = a.n_rows;
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            CgStats {
                iterations: 0,
                final_residual: 0.0,
                preconditioned_norms: vec![0.0],
            },
        ));
    }
    let inv_diag: Vec<f64> = {
        let d = a.diagonal();
        if let Some(bad) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NotSpd(format!(
                "nonpositive diagonal entry {} at row {bad}",
                d[bad]
            )));
        }
        d.iter().map(|v| 1.0 / v).collect()
    };

    let mut x = x0.to_vec();
    let mut r = rhs.to_vec();
    axpy(-1.0, &a.matvec(&x), &mut r);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut norms = vec![rz.max(0.0).sqrt()];
    let mut residual = norm2(&r) / rhs_norm;

    let mut iterations = 0;
    while residual > tol {
        if iterations >= max_iter {
            return Err(Error::IterationLimit {
                iterations,
                residual,
            });
        }
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd(format!(
                "direction with nonpositive energy pᵀAp = {pap}"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        iterations += 1;
        norms.push(rz.max(0.0).sqrt());
        residual = norm2(&r) / rhs_norm;
    }
    Ok((
        x,
        CgStats {
            iterations,
            final_residual: residual,
            preconditioned_norms: norms,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CsrMatrix {
        let trips: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        CsrMatrix::from_triplets(values.len(), values.len(), &trips).unwrap()
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::identity(4);
        let rhs = vec![1.0, -2.0, 3.0, 0.5];
        let (x, stats) = cg_solve(&a, &rhs, 1e-12, 40).unwrap();
        assert_eq!(stats.iterations, 1);
        for (xi, bi) in x.iter().zip(&rhs) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system_exact() {
        let a = diag(&[1.0, 2.0, 3.0]);
        let (x, _) = cg_solve(&a, &[1.0, 2.0, 3.0], 1e-14, 30).unwrap();
        for xi in &x {
            assert!((xi - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = diag(&[1.0, 2.0]);
        let (x, stats) = cg_solve(&a, &[0.0, 0.0], 1e-12, 5).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn iteration_limit_reports_residual() {
        // 1D Poisson chain, far too few iterations allowed
        let n = 64;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &trips).unwrap();
        match cg_solve(&a, &vec![1.0; n], 1e-14, 3) {
            Err(Error::IterationLimit { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn nonpositive_diagonal_rejected() {
        let a = diag(&[1.0, -1.0]);
        assert!(matches!(
            cg_solve(&a, &[1.0, 1.0], 1e-12, 10),
            Err(Error::NotSpd(_))
        ));
    }

    #[test]
    fn warm_start_at_solution_takes_no_iterations() {
        let a = diag(&[2.0, 5.0]);
        let (x, stats) = cg_solve_from(&a, &[2.0, 5.0], &[1.0, 1.0], 1e-12, 10).unwrap();
        assert_eq!(stats.iterations, 0);
        assert_eq!(x, vec![1.0, 1.0]);
    }
}
