//! End-to-end accuracy of the correction scheme on the unit-square Laplace
//! eigenproblem, compared against direct solves on the finest space.

use std::f64::consts::PI;

use mlcfem_core::correction::{Hierarchy, ReferenceSolution, Way};
use mlcfem_core::fem::CoefficientField;
use mlcfem_core::linalg::smallest_eigenpairs;

fn laplace() -> (CoefficientField, CoefficientField) {
    (CoefficientField::constant(1.0), CoefficientField::constant(1.0))
}

fn lambda1() -> f64 {
    2.0 * PI * PI
}

fn reference() -> ReferenceSolution {
    ReferenceSolution {
        lambda: lambda1(),
        func: Some(Box::new(|x, y| 2.0 * (PI * x).sin() * (PI * y).sin())),
        grad: Some(Box::new(|x, y| {
            [
                2.0 * PI * (PI * x).cos() * (PI * y).sin(),
                2.0 * PI * (PI * x).sin() * (PI * y).cos(),
            ]
        })),
    }
}

/// λ error of the direct i=1 eigensolve on the finest level of `h`.
fn direct_error_on_finest(h: &Hierarchy) -> f64 {
    let last = h.levels.last().unwrap();
    let pairs = smallest_eigenpairs(&last.a, &last.b, 1, 1e-10).unwrap();
    (pairs[0].value - lambda1()).abs()
}

#[test]
fn two_grid_matches_direct_fine_accuracy() {
    let (d, r) = laplace();
    let h = Hierarchy::build(Way::Multigrid, 4, 2, 1, &d, &r).unwrap();
    let (pair, trace) = h.multi_level_solve(1, Some(&reference())).unwrap();
    let err = (pair.value - lambda1()).abs();
    let err_direct = direct_error_on_finest(&h);
    assert!(pair.value >= lambda1(), "upper bound violated: {}", pair.value);
    assert!(
        err <= 2.0 * err_direct,
        "two-grid error {err} vs direct {err_direct}"
    );
    // coarse H^2 error must shrink to roughly H^4 at the fine level
    let coarse_err = trace.records[0].err_lambda.unwrap();
    assert!(err < coarse_err / 8.0, "{err} vs coarse {coarse_err}");
}

#[test]
fn multispace_two_levels_match_direct_p2() {
    let (d, r) = laplace();
    let h = Hierarchy::build(Way::Multispace, 8, 2, 1, &d, &r).unwrap();
    let (pair, _) = h.multi_level_solve(1, None).unwrap();
    let err = (pair.value - lambda1()).abs();
    let err_direct = direct_error_on_finest(&h);
    assert!(pair.value >= lambda1());
    assert!(
        err <= 2.0 * err_direct,
        "multispace error {err} vs direct P2 {err_direct}"
    );
}

#[test]
fn three_levels_keep_improving() {
    let (d, r) = laplace();
    let h = Hierarchy::build(Way::Multigrid, 2, 3, 1, &d, &r).unwrap();
    let (_, trace) = h.multi_level_solve(1, Some(&reference())).unwrap();
    let errs: Vec<f64> = trace
        .records
        .iter()
        .map(|rec| rec.err_lambda.unwrap())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[1] < errs[0] / 2.0, "{errs:?}");
    assert!(errs[2] < errs[1] / 2.0, "{errs:?}");
    // energy error follows the mesh size of each level: h, h^2, h^3
    let en: Vec<f64> = trace
        .records
        .iter()
        .map(|rec| rec.err_energy.unwrap())
        .collect();
    assert!(en[1] < en[0] && en[2] < en[1], "{en:?}");
}
