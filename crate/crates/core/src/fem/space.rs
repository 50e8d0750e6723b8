//! Lagrange space construction: global dof numbering, Dirichlet masks, and
//! per-triangle geometry.
//!
//! Dof order is vertices, then edge nodes (one per edge for quadratics, two
//! per edge for cubics — the node nearer the lower-numbered endpoint first),
//! then one interior node per triangle for cubics. Numbering shared entities
//! once makes conformity structural rather than something to enforce.

use super::basis;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

pub struct FeSpace {
    pub mesh: TriMesh,
    pub order: usize,
    pub dof_coords: Vec<[f64; 2]>,
    pub cell_dofs: Vec<Vec<usize>>,
    pub dirichlet_mask: Vec<bool>,
    pub free_dofs: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: TriMesh, order: usize) -> Result<FeSpace> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "polynomial order {order} not supported (1, 2, or 3)"
            )));
        }
        mesh.validate()?;
        let table = mesh.edge_table();
        let nv = mesh.n_vertices();
        let ne = table.len();
        let nt = mesh.n_triangles();

        let mut dof_coords: Vec<[f64; 2]> = mesh.vertices.clone();
        match order {
            1 => {}
            2 => {
                for e in &table.edges {
                    let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
                    dof_coords.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                }
            }
            3 => {
                for e in &table.edges {
                    let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
                    dof_coords.push([(2.0 * a[0] + b[0]) / 3.0, (2.0 * a[1] + b[1]) / 3.0]);
                    dof_coords.push([(a[0] + 2.0 * b[0]) / 3.0, (a[1] + 2.0 * b[1]) / 3.0]);
                }
                for tri in &mesh.triangles {
                    let (a, b, c) = (
                        mesh.vertices[tri[0]],
                        mesh.vertices[tri[1]],
                        mesh.vertices[tri[2]],
                    );
                    dof_coords.push([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
                }
            }
            _ => unreachable!(),
        }

        let mut cell_dofs = Vec::with_capacity(nt);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut dofs: Vec<usize> = tri.to_vec();
            match order {
                1 => {}
                2 => {
                    for e in 0..3 {
                        dofs.push(nv + table.triangle_edges[t][e]);
                    }
                }
                3 => {
                    for e in 0..3 {
                        let idx = table.triangle_edges[t][e];
                        let (lo_first, lo_second) = (nv + 2 * idx, nv + 2 * idx + 1);
                        // local node order is "nearer tri[e] first"; stored
                        // order is "nearer the smaller vertex first"
                        if tri[e] < tri[(e + 1) % 3] {
                            dofs.push(lo_first);
                            dofs.push(lo_second);
                        } else {
                            dofs.push(lo_second);
                            dofs.push(lo_first);
                        }
                    }
                    dofs.push(nv + 2 * ne + t);
                }
                _ => unreachable!(),
            }
            cell_dofs.push(dofs);
        }

        let n_dofs = dof_coords.len();
        let mut dirichlet_mask = vec![false; n_dofs];
        let mut vertex_on_boundary = vec![false; nv];
        for e in &mesh.boundary_edges {
            vertex_on_boundary[e[0]] = true;
            vertex_on_boundary[e[1]] = true;
        }
        for (v, &on) in vertex_on_boundary.iter().enumerate() {
            dirichlet_mask[v] = on;
        }
        if order >= 2 {
            let per_edge = order - 1;
            for (e, &count) in table.adjacency.iter().enumerate() {
                if count == 1 {
                    for d in 0..per_edge {
                        dirichlet_mask[nv + per_edge * e + d] = true;
                    }
                }
            }
        }
        let free_dofs = dirichlet_mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(d, _)| d)
            .collect();

        Ok(FeSpace {
            mesh,
            order,
            dof_coords,
            cell_dofs,
            dirichlet_mask,
            free_dofs,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn local_dofs(&self) -> usize {
        basis::local_dofs(self.order)
    }

    pub(crate) fn geometry(&self, t: usize) -> TriGeometry {
        let tri = &self.mesh.triangles[t];
        let p0 = self.mesh.vertices[tri[0]];
        let p1 = self.mesh.vertices[tri[1]];
        let p2 = self.mesh.vertices[tri[2]];
        let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        TriGeometry { p0, j, det, inv_t }
    }
}

/// Affine map data of one triangle: x = p0 + J ξ.
pub(crate) struct TriGeometry {
    pub p0: [f64; 2],
    pub j: [[f64; 2]; 2],
    /// det J = twice the signed area, positive for CCW triangles.
    pub det: f64,
    /// (J⁻¹)ᵀ, pushes reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
}

impl TriGeometry {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.p0[0] + self.j[0][0] * xi[0] + self.j[0][1] * xi[1],
            self.p0[1] + self.j[1][0] * xi[0] + self.j[1][1] * xi[1],
        ]
    }

    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Scalar coefficient evaluable at quadrature points, with a polynomial
/// degree hint used to pick quadrature orders.
pub struct CoefficientField {
    f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    degree_hint: usize,
}

impl CoefficientField {
    pub fn new<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F, degree_hint: usize) -> Self {
        CoefficientField {
            f: Box::new(f),
            degree_hint,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c, 0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn degree_hint(&self) -> usize {
        self.degree_hint
    }
}
