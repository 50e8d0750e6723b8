//! Lagrange shape functions on the reference triangle (0,0),(1,0),(0,1).
//!
//! Barycentric coordinates: λ0 = 1-x-y, λ1 = x, λ2 = y. Local dof order is
//! vertices (0,1,2), then edge nodes per local edge e = (e, (e+1)%3) — for
//! cubics the node nearer vertex e first — then the interior node. This
//! matches the global numbering produced by `FeSpace`.

pub const MAX_LOCAL: usize = 10;

/// Local dofs for order p: 3, 6, 10.
pub fn local_dofs(order: usize) -> usize {
    match order {
        1 => 3,
        2 => 6,
        3 => 10,
        _ => unreachable!("order validated at space construction"),
    }
}

/// Reference coordinates of the local Lagrange nodes, in local dof order.
pub fn reference_nodes(order: usize) -> Vec<[f64; 2]> {
    let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut nodes = v.to_vec();
    match order {
        1 => {}
        2 => {
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                nodes.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
            }
        }
        3 => {
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                nodes.push([(2.0 * a[0] + b[0]) / 3.0, (2.0 * a[1] + b[1]) / 3.0]);
                nodes.push([(a[0] + 2.0 * b[0]) / 3.0, (a[1] + 2.0 * b[1]) / 3.0]);
            }
            nodes.push([1.0 / 3.0, 1.0 / 3.0]);
        }
        _ => unreachable!("order validated at space construction"),
    }
    nodes
}

/// Shape function values at a reference point. Entries past `local_dofs(order)`
/// are zero.
pub fn shape_values(order: usize, x: f64, y: f64) -> [f64; MAX_LOCAL] {
    let l = [1.0 - x - y, x, y];
    let mut n = [0.0; MAX_LOCAL];
    match order {
        1 => {
            n[..3].copy_from_slice(&l);
        }
        2 => {
            for i in 0..3 {
                n[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            for e in 0..3 {
                n[3 + e] = 4.0 * l[e] * l[(e + 1) % 3];
            }
        }
        3 => {
            for i in 0..3 {
                n[i] = 0.5 * l[i] * (3.0 * l[i] - 1.0) * (3.0 * l[i] - 2.0);
            }
            for e in 0..3 {
                let (li, lj) = (l[e], l[(e + 1) % 3]);
                n[3 + 2 * e] = 4.5 * li * lj * (3.0 * li - 1.0);
                n[3 + 2 * e + 1] = 4.5 * li * lj * (3.0 * lj - 1.0);
            }
            n[9] = 27.0 * l[0] * l[1] * l[2];
        }
        _ => unreachable!("order validated at space construction"),
    }
    n
}

/// Shape function gradients in reference coordinates at a reference point.
pub fn shape_gradients(order: usize, x: f64, y: f64) -> [[f64; 2]; MAX_LOCAL] {
    let l = [1.0 - x - y, x, y];
    // ∇λ in reference coordinates
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut g = [[0.0; 2]; MAX_LOCAL];
    match order {
        1 => {
            g[..3].copy_from_slice(&dl);
        }
        2 => {
            for i in 0..3 {
                let c = 4.0 * l[i] - 1.0;
                g[i] = [c * dl[i][0], c * dl[i][1]];
            }
            for e in 0..3 {
                let j = (e + 1) % 3;
                for d in 0..2 {
                    g[3 + e][d] = 4.0 * (l[j] * dl[e][d] + l[e] * dl[j][d]);
                }
            }
        }
        3 => {
            for i in 0..3 {
                // d/dλ of λ(3λ-1)(3λ-2)/2 = (27λ² - 18λ + 2)/2
                let c = 0.5 * (27.0 * l[i] * l[i] - 18.0 * l[i] + 2.0);
                g[i] = [c * dl[i][0], c * dl[i][1]];
            }
            for e in 0..3 {
                let j = (e + 1) % 3;
                let (li, lj) = (l[e], l[j]);
                for d in 0..2 {
                    g[3 + 2 * e][d] =
                        4.5 * (lj * (6.0 * li - 1.0) * dl[e][d] + li * (3.0 * li - 1.0) * dl[j][d]);
                    g[3 + 2 * e + 1][d] =
                        4.5 * (lj * (3.0 * lj - 1.0) * dl[e][d] + li * (6.0 * lj - 1.0) * dl[j][d]);
                }
            }
            for d in 0..2 {
                g[9][d] = 27.0
                    * (l[1] * l[2] * dl[0][d] + l[0] * l[2] * dl[1][d] + l[0] * l[1] * dl[2][d]);
            }
        }
        _ => unreachable!("order validated at space construction"),
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: [[f64; 2]; 6] = [
        [0.1, 0.2],
        [0.3, 0.3],
        [0.05, 0.9],
        [0.7, 0.1],
        [1.0 / 3.0, 1.0 / 3.0],
        [0.0, 0.45],
    ];

    #[test]
    fn kronecker_delta_at_reference_nodes() {
        for order in 1..=3 {
            let nodes = reference_nodes(order);
            assert_eq!(nodes.len(), local_dofs(order));
            for (j, node) in nodes.iter().enumerate() {
                let n = shape_values(order, node[0], node[1]);
                for i in 0..local_dofs(order) {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (n[i] - expect).abs() < 1e-13,
                        "order {order}, N_{i} at node {j}: {}",
                        n[i]
                    );
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        for order in 1..=3 {
            for p in SAMPLES {
                let n = shape_values(order, p[0], p[1]);
                let sum: f64 = n[..local_dofs(order)].iter().sum();
                assert!((sum - 1.0).abs() < 1e-14, "order {order} at {p:?}: {sum}");
                let g = shape_gradients(order, p[0], p[1]);
                for d in 0..2 {
                    let gsum: f64 = g[..local_dofs(order)].iter().map(|gi| gi[d]).sum();
                    assert!(gsum.abs() < 1e-13, "order {order} grad sum at {p:?}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for order in 1..=3 {
            for p in SAMPLES {
                let g = shape_gradients(order, p[0], p[1]);
                let px = (
                    shape_values(order, p[0] + h, p[1]),
                    shape_values(order, p[0] - h, p[1]),
                );
                let py = (
                    shape_values(order, p[0], p[1] + h),
                    shape_values(order, p[0], p[1] - h),
                );
                for i in 0..local_dofs(order) {
                    let fd = [(px.0[i] - px.1[i]) / (2.0 * h), (py.0[i] - py.1[i]) / (2.0 * h)];
                    for d in 0..2 {
                        assert!(
                            (g[i][d] - fd[d]).abs() < 1e-8,
                            "order {order}, dof {i}, dir {d}: {} vs {}",
                            g[i][d],
                            fd[d]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn linear_exactness_all_orders() {
        // every Lagrange space contains the linears; interpolation at the
        // reference nodes must reproduce f(x,y) = 2 + 3x - y pointwise
        let f = |x: f64, y: f64| 2.0 + 3.0 * x - y;
        for order in 1..=3 {
            let nodes = reference_nodes(order);
            for p in SAMPLES {
                let n = shape_values(order, p[0], p[1]);
                let interp: f64 = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, q)| f(q[0], q[1]) * n[i])
                    .sum();
                assert!((interp - f(p[0], p[1])).abs() < 1e-13);
            }
        }
    }
}
