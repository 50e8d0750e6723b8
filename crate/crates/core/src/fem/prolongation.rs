//! Coefficient transfer between nested spaces. Spaces nest exactly, so the
//! prolongation is plain nodal interpolation: each fine Lagrange node
//! evaluates the coarse basis. Supported ladders are same-order spaces on
//! regularly refined meshes and higher-order spaces on the same mesh.

use super::basis::{local_dofs, reference_nodes, shape_values};
use super::space::FeSpace;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::refine_regular;

/// Entries smaller than this are exact zeros of the interpolation up to
/// evaluation noise and are dropped.
const DROP: f64 = 1e-13;

/// Matrix P with (P c)_fine = coefficients of the same function: rows are
/// fine dofs, columns coarse dofs.
pub fn prolongation(coarse: &FeSpace, fine: &FeSpace) -> Result<CsrMatrix> {
    if coarse.mesh == fine.mesh {
        if fine.order == coarse.order {
            return Ok(CsrMatrix::identity(coarse.n_dofs()));
        }
        if fine.order > coarse.order {
            return order_raise(coarse, fine);
        }
        return Err(Error::NestingViolation(format!(
            "target order {} below source order {}",
            fine.order, coarse.order
        )));
    }
    if fine.order != coarse.order {
        return Err(Error::NestingViolation(
            "combined mesh refinement and order change is not a nested ladder".into(),
        ));
    }
    let (nt_c, nt_f) = (coarse.mesh.n_triangles(), fine.mesh.n_triangles());
    if nt_f < nt_c || nt_f % nt_c != 0 {
        return Err(Error::NestingViolation(format!(
            "{nt_f} triangles is not a regular refinement of {nt_c}"
        )));
    }
    let mut steps = 0u32;
    let mut count = nt_c;
    while count < nt_f {
        count *= 4;
        steps += 1;
    }
    if count != nt_f {
        return Err(Error::NestingViolation(format!(
            "{nt_f} triangles is not a 4^k multiple of {nt_c}"
        )));
    }

    let mut current = coarse.mesh.clone();
    let mut p: Option<CsrMatrix> = None;
    let mut from = None::<FeSpace>;
    for step in 0..steps {
        let next_mesh = refine_regular(&current);
        let next = if step + 1 == steps {
            // the final space must be the caller's fine space, verified below
            None
        } else {
            Some(FeSpace::new(next_mesh.clone(), coarse.order)?)
        };
        let src = from.as_ref().unwrap_or(coarse);
        let step_p = match &next {
            Some(space) => one_refinement(src, space),
            None => {
                if next_mesh != fine.mesh {
                    return Err(Error::NestingViolation(
                        "fine mesh is not the regular refinement of the coarse mesh".into(),
                    ));
                }
                one_refinement(src, fine)
            }
        };
        p = Some(match p {
            None => step_p,
            Some(prev) => step_p.matmul(&prev)?,
        });
        current = next_mesh;
        from = next;
    }
    Ok(p.expect("at least one refinement step"))
}

fn rows_to_csr(n_rows: usize, n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> CsrMatrix {
    let mut row_offsets = vec![0usize; n_rows + 1];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    for (i, mut row) in rows.into_iter().enumerate() {
        row.sort_unstable_by_key(|e| e.0);
        for (c, v) in row {
            col_indices.push(c);
            values.push(v);
        }
        row_offsets[i + 1] = col_indices.len();
    }
    CsrMatrix {
        n_rows,
        n_cols,
        row_offsets,
        col_indices,
        values,
    }
}

/// Evaluates the source basis at every target node, one triangle at a time;
/// the first triangle that covers a node writes its row (all writers agree,
/// conformity makes the function single-valued).
fn order_raise(coarse: &FeSpace, fine: &FeSpace) -> Result<CsrMatrix> {
    let nodes = reference_nodes(fine.order);
    let nl_c = local_dofs(coarse.order);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fine.n_dofs()];
    let mut seen = vec![false; fine.n_dofs()];
    for t in 0..fine.mesh.n_triangles() {
        for (l, node) in nodes.iter().enumerate() {
            let fdof = fine.cell_dofs[t][l];
            if seen[fdof] {
                continue;
            }
            seen[fdof] = true;
            let n = shape_values(coarse.order, node[0], node[1]);
            for j in 0..nl_c {
                if n[j].abs() > DROP {
                    rows[fdof].push((coarse.cell_dofs[t][j], n[j]));
                }
            }
        }
    }
    Ok(rows_to_csr(fine.n_dofs(), coarse.n_dofs(), rows))
}

/// Reference coordinates within the parent of a point ξ in child `c`; exact
/// because the child corners are dyadic points of the parent.
fn child_to_parent(c: usize, xi: [f64; 2]) -> [f64; 2] {
    let (x, y) = (xi[0], xi[1]);
    match c {
        0 => [0.5 * x, 0.5 * y],
        1 => [0.5 + 0.5 * x, 0.5 * y],
        2 => [0.5 * x, 0.5 + 0.5 * y],
        3 => [0.5 - 0.5 * y, 0.5 * (x + y)],
        _ => unreachable!("four children per triangle"),
    }
}

/// Prolongation across exactly one regular refinement, same order.
fn one_refinement(coarse: &FeSpace, fine: &FeSpace) -> CsrMatrix {
    let order = coarse.order;
    let nodes = reference_nodes(order);
    let nl = local_dofs(order);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fine.n_dofs()];
    let mut seen = vec![false; fine.n_dofs()];
    for t in 0..coarse.mesh.n_triangles() {
        for c in 0..4 {
            let ft = 4 * t + c;
            for (l, node) in nodes.iter().enumerate() {
                let fdof = fine.cell_dofs[ft][l];
                if seen[fdof] {
                    continue;
                }
                seen[fdof] = true;
                let parent_xi = child_to_parent(c, *node);
                let n = shape_values(order, parent_xi[0], parent_xi[1]);
                for j in 0..nl {
                    if n[j].abs() > DROP {
                        rows[fdof].push((coarse.cell_dofs[t][j], n[j]));
                    }
                }
            }
        }
    }
    rows_to_csr(fine.n_dofs(), coarse.n_dofs(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::{assemble_stiffness, interpolate};
    use crate::fem::space::CoefficientField;
    use crate::mesh::unit_square_mesh;

    fn refined_space(m: usize, order: usize, times: usize) -> FeSpace {
        let mut mesh = unit_square_mesh(m).unwrap();
        for _ in 0..times {
            mesh = refine_regular(&mesh);
        }
        FeSpace::new(mesh, order).unwrap()
    }

    #[test]
    fn p1_single_refinement_rows() {
        let coarse = refined_space(2, 1, 0);
        let fine = refined_space(2, 1, 1);
        let p = prolongation(&coarse, &fine).unwrap();
        assert_eq!((p.n_rows, p.n_cols), (fine.n_dofs(), coarse.n_dofs()));
        // original vertices keep their value
        for v in 0..coarse.n_dofs() {
            for j in 0..coarse.n_dofs() {
                let want = if v == j { 1.0 } else { 0.0 };
                assert!((p.get(v, j) - want).abs() < 1e-14);
            }
        }
        // midpoint rows average the edge endpoints
        for r in coarse.n_dofs()..fine.n_dofs() {
            let entries: Vec<f64> = (0..coarse.n_dofs()).map(|j| p.get(r, j)).collect();
            let nonzero: Vec<f64> = entries.iter().copied().filter(|v| v.abs() > 0.0).collect();
            assert_eq!(nonzero.len(), 2, "row {r}");
            for v in nonzero {
                assert!((v - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constants_are_reproduced() {
        let cases = [
            (refined_space(2, 1, 0), refined_space(2, 1, 1)),
            (refined_space(2, 2, 0), refined_space(2, 2, 2)),
            (refined_space(3, 1, 0), refined_space(3, 2, 0)),
            (refined_space(2, 1, 0), refined_space(2, 3, 0)),
            (refined_space(2, 2, 0), refined_space(2, 3, 0)),
            (refined_space(2, 3, 0), refined_space(2, 3, 1)),
        ];
        for (coarse, fine) in &cases {
            let p = prolongation(coarse, fine).unwrap();
            let ones = vec![1.0; coarse.n_dofs()];
            for (i, v) in p.matvec(&ones).iter().enumerate() {
                assert!((v - 1.0).abs() < 1e-13, "row {i}: {v}");
            }
        }
    }

    #[test]
    fn interpolants_commute_for_in_space_functions() {
        // for f in the coarse space, prolonging the coarse interpolant must
        // equal interpolating f on the fine space
        let poly: [Box<dyn Fn(f64, f64) -> f64>; 3] = [
            Box::new(|x, y| 1.0 + 2.0 * x - y),
            Box::new(|x, y| x * x - y * y + x * y + 0.5),
            Box::new(|x, y| x.powi(3) - 2.0 * y.powi(3) + x * x * y),
        ];
        let cases = [
            (refined_space(2, 1, 0), refined_space(2, 1, 2), 0usize),
            (refined_space(2, 2, 0), refined_space(2, 2, 1), 1),
            (refined_space(3, 3, 0), refined_space(3, 3, 1), 2),
            (refined_space(3, 1, 0), refined_space(3, 2, 0), 0),
            (refined_space(3, 1, 0), refined_space(3, 3, 0), 0),
            (refined_space(3, 2, 0), refined_space(3, 3, 0), 1),
        ];
        for (coarse, fine, fi) in &cases {
            let f = &poly[*fi];
            let p = prolongation(coarse, fine).unwrap();
            let lifted = p.matvec(&interpolate(coarse, f));
            let direct = interpolate(fine, f);
            for (i, (a, b)) in lifted.iter().zip(&direct).enumerate() {
                assert!(
                    (a - b).abs() < 1e-12,
                    "orders {}→{}, dof {i}: {a} vs {b}",
                    coarse.order,
                    fine.order
                );
            }
        }
    }

    #[test]
    fn galerkin_identity_one_refinement_and_order_raise() {
        let unit = CoefficientField::constant(1.0);
        let cases = [
            (refined_space(4, 1, 0), refined_space(4, 1, 1)),
            (refined_space(4, 1, 0), refined_space(4, 2, 0)),
        ];
        for (coarse, fine) in &cases {
            let p = prolongation(coarse, fine).unwrap();
            let a_h = assemble_stiffness(coarse, &unit).unwrap();
            let a_f = assemble_stiffness(fine, &unit).unwrap();
            let ptap = p.transpose().matmul(&a_f).unwrap().matmul(&p).unwrap();
            for i in 0..a_h.n_rows {
                for j in 0..a_h.n_cols {
                    let d = (ptap.get(i, j) - a_h.get(i, j)).abs();
                    assert!(d <= 1e-11, "entry ({i},{j}) differs by {d}");
                }
            }
        }
    }

    #[test]
    fn coarse_boundary_functions_stay_on_fine_boundary() {
        // interior coarse basis functions must produce no fine boundary
        // coefficients, otherwise the reduced prolongation would lose mass
        let cases = [
            (refined_space(2, 1, 0), refined_space(2, 1, 1)),
            (refined_space(2, 2, 0), refined_space(2, 3, 0)),
        ];
        for (coarse, fine) in &cases {
            let p = prolongation(coarse, fine).unwrap();
            for (fdof, &masked) in fine.dirichlet_mask.iter().enumerate() {
                if !masked {
                    continue;
                }
                for &cdof in &coarse.free_dofs {
                    assert!(
                        p.get(fdof, cdof).abs() < 1e-13,
                        "interior coarse dof {cdof} leaks to boundary dof {fdof}"
                    );
                }
            }
        }
    }

    #[test]
    fn same_space_gives_identity() {
        let a = refined_space(2, 2, 0);
        let b = refined_space(2, 2, 0);
        let p = prolongation(&a, &b).unwrap();
        assert_eq!(p, CsrMatrix::identity(a.n_dofs()));
    }

    #[test]
    fn non_nested_inputs_rejected() {
        let a = refined_space(3, 1, 0);
        let b = refined_space(4, 1, 0);
        assert!(matches!(
            prolongation(&a, &b),
            Err(Error::NestingViolation(_))
        ));
        // order drop
        let c = refined_space(2, 2, 0);
        let d = refined_space(2, 1, 0);
        assert!(prolongation(&c, &d).is_err());
        // refinement combined with order change
        let e = refined_space(2, 1, 0);
        let f = refined_space(2, 2, 1);
        assert!(prolongation(&e, &f).is_err());
    }
}
