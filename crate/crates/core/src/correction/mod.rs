//! The multi-level correction scheme. Starting from an eigenpair on the
//! coarsest space, each level solves one linear source problem on the next
//! finer space (the eigenvalue scales the mass term of the previous
//! eigenfunction) and then a small eigenproblem on the coarse space augmented
//! by the new function. The last level runs only the source solve and takes
//! the Rayleigh quotient, so the dominant cost per level is a single SPD
//! solve.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_mass, assemble_stiffness, energy_error, expand_free, l2_error,
    prolongation, CoefficientField, FeSpace,
};
use crate::linalg::{
    b_normalize, cg_solve_from, dense_gen_eig_sym, dot, norm2, rayleigh_quotient,
    smallest_eigenpairs_detailed, CgStats, CsrMatrix, DenseMatrix, EigenPair,
};
use crate::mesh::{refine_regular, unit_square_mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Way {
    /// Same polynomial order on a ladder of refined meshes, h_k = H^k.
    Multigrid,
    /// Fixed mesh with rising order P1 → P2 → P3.
    Multispace,
}

/// One space of the ladder with its Dirichlet-reduced pencil.
pub struct Level {
    pub space: FeSpace,
    pub a: CsrMatrix,
    pub b: CsrMatrix,
}

pub struct Hierarchy {
    pub way: Way,
    pub levels: Vec<Level>,
    /// Free-dof prolongation from level k to k+1.
    pub prolong_step: Vec<CsrMatrix>,
    /// Free-dof prolongation from level 0 directly into level k.
    pub prolong_from_coarse: Vec<CsrMatrix>,
    /// Relative eigensolver tolerance (value change and residual).
    pub eig_tol: f64,
    /// Relative CG tolerance for source solves.
    pub cg_tol: f64,
}

/// Pointwise exact solution, for error evaluation.
pub type ScalarField = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Pointwise exact gradient, for error evaluation.
pub type GradientField = Box<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// Analytic solution data used to fill error columns of the trace.
pub struct ReferenceSolution {
    pub lambda: f64,
    pub func: Option<ScalarField>,
    pub grad: Option<GradientField>,
}

#[derive(Clone, Debug)]
pub struct LevelRecord {
    /// 1-based level number.
    pub level: usize,
    /// Mesh subdivisions for the multigrid way, polynomial order for the
    /// multispace way.
    pub h_or_p: f64,
    pub lambda: f64,
    /// Free dofs of the level.
    pub dofs: usize,
    pub err_lambda: Option<f64>,
    pub err_energy: Option<f64>,
    pub err_l2: Option<f64>,
    pub cg_iterations: usize,
    pub eig_iterations: usize,
    pub wall_ms: f64,
    pub used_fallback: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CorrectionTrace {
    pub records: Vec<LevelRecord>,
}

pub struct CorrectionStep {
    pub pair: EigenPair,
    pub cg: CgStats,
    pub used_fallback: bool,
}

/// B-angle threshold below which the augmented direction counts as already
/// inside the coarse space.
const DEGENERATE_SIN: f64 = 1e-7;

impl Hierarchy {
    /// Ladder over the unit square: `m` subdivisions at the coarsest level,
    /// `n_levels` spaces. The multigrid way refines so h_k = (1/m)^k and
    /// needs a power-of-two m; the multispace way fixes the mesh and walks
    /// the orders 1, 2, 3, so it starts at order 1 and caps at three levels.
    pub fn build(
        way: Way,
        m: usize,
        n_levels: usize,
        order: usize,
        diff: &CoefficientField,
        rho: &CoefficientField,
    ) -> Result<Hierarchy> {
        if n_levels == 0 {
            return Err(Error::InvalidArgument("hierarchy needs at least one level".into()));
        }
        let mut spaces = Vec::with_capacity(n_levels);
        match way {
            Way::Multigrid => {
                if n_levels > 1 && (!m.is_power_of_two() || m < 2) {
                    return Err(Error::UnsupportedLadder(format!(
                        "multigrid spacing h_k = H^k needs H = 1/m with m a power of two \
                         (2, 4, 8, ...), got m = {m}"
                    )));
                }
                let per_step = (m as f64).log2() as usize;
                let mut mesh = unit_square_mesh(m)?;
                spaces.push(FeSpace::new(mesh.clone(), order)?);
                for _ in 1..n_levels {
                    for _ in 0..per_step {
                        mesh = refine_regular(&mesh);
                    }
                    spaces.push(FeSpace::new(mesh.clone(), order)?);
                }
            }
            Way::Multispace => {
                if order != 1 {
                    return Err(Error::UnsupportedLadder(format!(
                        "the multispace ladder is P1 → P2 → P3 and starts at order 1, got {order}"
                    )));
                }
                if n_levels > 3 {
                    return Err(Error::UnsupportedLadder(format!(
                        "the multispace ladder caps at cubic elements (3 levels), got {n_levels}"
                    )));
                }
                let mesh = unit_square_mesh(m)?;
                for p in 1..=n_levels {
                    spaces.push(FeSpace::new(mesh.clone(), p)?);
                }
            }
        }
        Self::from_spaces(way, spaces, diff, rho)
    }

    /// Degenerate ladder with every level equal to the same space; step
    /// prolongations are identities. Exercises the fixed-point behavior.
    pub fn identical(
        m: usize,
        order: usize,
        n_levels: usize,
        diff: &CoefficientField,
        rho: &CoefficientField,
    ) -> Result<Hierarchy> {
        if n_levels == 0 {
            return Err(Error::InvalidArgument("hierarchy needs at least one level".into()));
        }
        let mesh = unit_square_mesh(m)?;
        let spaces = (0..n_levels)
            .map(|_| FeSpace::new(mesh.clone(), order))
            .collect::<Result<Vec<_>>>()?;
        Self::from_spaces(Way::Multigrid, spaces, diff, rho)
    }

    fn from_spaces(
        way: Way,
        spaces: Vec<FeSpace>,
        diff: &CoefficientField,
        rho: &CoefficientField,
    ) -> Result<Hierarchy> {
        let mut levels = Vec::with_capacity(spaces.len());
        let mut prolong_step = Vec::new();
        let mut prolong_from_coarse = Vec::new();
        for (k, space) in spaces.iter().enumerate() {
            if k > 0 {
                let p = prolongation(&spaces[k - 1], space)?;
                prolong_step.push(p.restrict(&space.free_dofs, &spaces[k - 1].free_dofs));
                let p0 = prolongation(&spaces[0], space)?;
                prolong_from_coarse.push(p0.restrict(&space.free_dofs, &spaces[0].free_dofs));
            } else {
                prolong_from_coarse.push(CsrMatrix::identity(space.free_dofs.len()));
            }
        }
        for space in spaces {
            let a = apply_dirichlet(&assemble_stiffness(&space, diff)?, &space);
            let b = apply_dirichlet(&assemble_mass(&space, rho)?, &space);
            levels.push(Level { space, a, b });
        }
        Ok(Hierarchy {
            way,
            levels,
            prolong_step,
            prolong_from_coarse,
            eig_tol: 1e-10,
            cg_tol: 1e-12,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    fn level_label(&self, k: usize) -> f64 {
        match self.way {
            Way::Multigrid => {
                // h = 1/sqrt(n_triangles / 2)
                let nt = self.levels[k].space.mesh.n_triangles() as f64;
                1.0 / (nt / 2.0).sqrt()
            }
            Way::Multispace => self.levels[k].space.order as f64,
        }
    }

    /// i-th smallest eigenpair (1-based) of the coarsest reduced pencil.
    pub fn solve_coarse(&self, i: usize) -> Result<EigenPair> {
        self.solve_coarse_detailed(i).map(|(p, _)| p)
    }

    fn solve_coarse_detailed(&self, i: usize) -> Result<(EigenPair, crate::linalg::EigenStats)> {
        let level = &self.levels[0];
        if i == 0 || i > level.a.n_rows {
            return Err(Error::InvalidArgument(format!(
                "eigenpair index {i} out of range 1..={}",
                level.a.n_rows
            )));
        }
        let (pairs, stats) = smallest_eigenpairs_detailed(&level.a, &level.b, i, self.eig_tol)?;
        Ok((pairs.into_iter().nth(i - 1).unwrap(), stats))
    }

    /// Source solve into level k+1: A_{k+1} ũ = λ_k B_{k+1} P u_k, warm
    /// started from the prolonged eigenfunction.
    pub fn source_correction(&self, k: usize, pair: &EigenPair) -> Result<(Vec<f64>, CgStats)> {
        if k + 1 >= self.n_levels() {
            return Err(Error::InvalidArgument(format!(
                "no level above {k} in a {}-level hierarchy",
                self.n_levels()
            )));
        }
        let fine = &self.levels[k + 1];
        if pair.vector.len() != self.levels[k].a.n_rows {
            return Err(Error::Dimension {
                expected: self.levels[k].a.n_rows,
                actual: pair.vector.len(),
            });
        }
        let pu = self.prolong_step[k].matvec(&pair.vector);
        let mut rhs = fine.b.matvec(&pu);
        for v in &mut rhs {
            *v *= pair.value;
        }
        let max_iter = 10 * fine.a.n_rows;
        let (u, stats) = cg_solve_from(&fine.a, &rhs, &pu, self.cg_tol, max_iter)?;
        Ok((u, stats))
    }

    /// Eigensolve on span(V_H ∪ {ũ}) inside level `k`, returning the i-th
    /// smallest pair mapped back to the level-k free dofs.
    pub fn augmented_eigensolve(&self, k: usize, u_tilde: &[f64], i: usize) -> Result<EigenPair> {
        let fine = &self.levels[k];
        if u_tilde.len() != fine.a.n_rows {
            return Err(Error::Dimension {
                expected: fine.a.n_rows,
                actual: u_tilde.len(),
            });
        }
        if norm2(u_tilde) == 0.0 {
            return Err(Error::DegenerateVector);
        }
        let p = &self.prolong_from_coarse[k];
        let nh = p.n_cols;
        if i == 0 || i > nh + 1 {
            return Err(Error::InvalidArgument(format!(
                "eigenpair index {i} out of range 1..={}",
                nh + 1
            )));
        }

        let pt = p.transpose();
        let bordered = |m: &CsrMatrix| -> Result<DenseMatrix> {
            let ptm = pt.matmul(m)?;
            let block = ptm.matmul(p)?;
            let col = ptm.matvec(u_tilde);
            let corner = dot(u_tilde, &m.matvec(u_tilde));
            let mut d = DenseMatrix::zeros(nh + 1, nh + 1);
            for r in 0..nh {
                for (idx, c) in (block.row_offsets[r]..block.row_offsets[r + 1])
                    .map(|p| (block.col_indices[p], block.values[p]))
                {
                    d.set(r, idx, c);
                }
                d.set(r, nh, col[r]);
                d.set(nh, r, col[r]);
            }
            d.set(nh, nh, corner);
            Ok(d)
        };
        let aug_a = bordered(&fine.a)?;
        let aug_b = bordered(&fine.b)?;

        // reject an augmentation that adds no numerically independent
        // direction: the last Cholesky pivot of the bordered B is the B-norm
        // of the component of ũ orthogonal to the coarse space
        let l = aug_b
            .cholesky()
            .map_err(|_| Error::DegenerateAugmentation)?;
        let corner_norm = aug_b.get(nh, nh).sqrt();
        if l.get(nh, nh) <= DEGENERATE_SIN * corner_norm {
            return Err(Error::DegenerateAugmentation);
        }

        let pairs = dense_gen_eig_sym(&aug_a, &aug_b).map_err(|e| match e {
            Error::NotSpd(_) => Error::DegenerateAugmentation,
            other => other,
        })?;
        let chosen = &pairs[i - 1];
        let mut u = p.matvec(&chosen.vector[..nh]);
        crate::linalg::axpy(chosen.vector[nh], u_tilde, &mut u);
        b_normalize(&fine.b, &mut u)?;
        Ok(EigenPair {
            value: chosen.value,
            vector: u,
        })
    }

    /// Source solve then augmented eigensolve, producing the level-(k+1)
    /// approximation of the tracked eigenpair. A degenerate augmentation
    /// falls back to the prolonged input pair.
    pub fn one_correction_step(
        &self,
        k: usize,
        pair: &EigenPair,
        i: usize,
    ) -> Result<CorrectionStep> {
        let (u_tilde, cg) = self.source_correction(k, pair)?;
        match self.augmented_eigensolve(k + 1, &u_tilde, i) {
            Ok(pair) => Ok(CorrectionStep {
                pair,
                cg,
                used_fallback: false,
            }),
            Err(Error::DegenerateAugmentation) => {
                let fine = &self.levels[k + 1];
                let mut u = self.prolong_step[k].matvec(&pair.vector);
                let value = rayleigh_quotient(&fine.a, &fine.b, &u)?;
                b_normalize(&fine.b, &mut u)?;
                Ok(CorrectionStep {
                    pair: EigenPair { value, vector: u },
                    cg,
                    used_fallback: true,
                })
            }
            Err(other) => Err(other),
        }
    }

    /// Full scheme: coarse eigensolve, correction steps through the
    /// intermediate levels, and a final source solve closed by the Rayleigh
    /// quotient (no augmented solve on the last level).
    pub fn multi_level_solve(
        &self,
        i: usize,
        reference: Option<&ReferenceSolution>,
    ) -> Result<(EigenPair, CorrectionTrace)> {
        let n = self.n_levels();
        let mut trace = CorrectionTrace::default();

        let t0 = Instant::now();
        let (mut pair, stats) = self.solve_coarse_detailed(i)?;
        trace.records.push(self.record(
            0,
            &pair,
            reference,
            stats.cg_iterations,
            stats.outer_iterations,
            t0.elapsed().as_secs_f64() * 1e3,
            false,
        ));

        for k in 0..n.saturating_sub(2) {
            let t = Instant::now();
            let step = self.one_correction_step(k, &pair, i)?;
            pair = step.pair;
            trace.records.push(self.record(
                k + 1,
                &pair,
                reference,
                step.cg.iterations,
                0,
                t.elapsed().as_secs_f64() * 1e3,
                step.used_fallback,
            ));
        }

        if n >= 2 {
            let t = Instant::now();
            let (mut u, cg) = self.source_correction(n - 2, &pair)?;
            let last = &self.levels[n - 1];
            let value = rayleigh_quotient(&last.a, &last.b, &u)?;
            b_normalize(&last.b, &mut u)?;
            pair = EigenPair { value, vector: u };
            trace.records.push(self.record(
                n - 1,
                &pair,
                reference,
                cg.iterations,
                0,
                t.elapsed().as_secs_f64() * 1e3,
                false,
            ));
        }
        Ok((pair, trace))
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        k: usize,
        pair: &EigenPair,
        reference: Option<&ReferenceSolution>,
        cg_iterations: usize,
        eig_iterations: usize,
        wall_ms: f64,
        used_fallback: bool,
    ) -> LevelRecord {
        let level = &self.levels[k];
        let mut rec = LevelRecord {
            level: k + 1,
            h_or_p: self.level_label(k),
            lambda: pair.value,
            dofs: level.space.free_dofs.len(),
            err_lambda: None,
            err_energy: None,
            err_l2: None,
            cg_iterations,
            eig_iterations,
            wall_ms,
            used_fallback,
        };
        if let Some(r) = reference {
            rec.err_lambda = Some((pair.value - r.lambda).abs());
            let full = expand_free(&level.space, &pair.vector);
            if let Some(f) = &r.func {
                rec.err_l2 = Some(l2_error(&level.space, &full, f));
            }
            if let Some(g) = &r.grad {
                rec.err_energy = Some(energy_error(&level.space, &full, g));
            }
        }
        rec
    }
}

/// |LHS − RHS| of the expansion λ̂ − λ = a(u−ψ,u−ψ)/b(ψ,ψ) − λ·b(u−ψ,u−ψ)/b(ψ,ψ)
/// with λ̂ the Rayleigh quotient of ψ. Exact for a true eigenpair (λ, u), so
/// the result measures only floating-point and solver residual.
pub fn rayleigh_expansion_residual(
    lambda: f64,
    u: &[f64],
    psi: &[f64],
    a: &CsrMatrix,
    b: &CsrMatrix,
) -> Result<f64> {
    let lambda_hat = rayleigh_quotient(a, b, psi)?;
    let mut d = u.to_vec();
    for (di, pi) in d.iter_mut().zip(psi) {
        *di -= pi;
    }
    let bpsi = dot(psi, &b.matvec(psi));
    let ada = dot(&d, &a.matvec(&d));
    let bdb = dot(&d, &b.matvec(&d));
    let lhs = lambda_hat - lambda;
    let rhs = ada / bpsi - lambda * bdb / bpsi;
    Ok((lhs - rhs).abs())
}
