//! Conforming triangulations of planar domains.
//!
//! Meshes are immutable after construction. Refinement produces a new mesh
//! whose triangles nest inside the input's (red refinement), which is what
//! makes the nested finite element spaces of the correction scheme exact.

mod io;

pub use io::{load_mesh, save_mesh};

use crate::error::{Error, Result};

/// Planar triangulation with boundary tags.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    /// Vertex coordinates in domain units.
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex index pairs (lo, hi) lying on the domain boundary,
    /// sorted lexicographically.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Refinement depth: 0 for a freshly generated or loaded mesh.
    pub generation: u32,
}

/// Unique undirected edges of a mesh, in lexicographic order on the
/// sorted endpoint pair. Edge numbering is deterministic, which keeps
/// refined meshes and prolongation matrices bit-reproducible.
#[derive(Debug, Clone)]
pub struct EdgeTable {
    /// Sorted unique (lo, hi) pairs.
    pub edges: Vec<[usize; 2]>,
    /// Per-triangle edge indices, local edge e = (v[e], v[(e+1)%3]).
    pub triangle_edges: Vec<[usize; 3]>,
    /// Number of adjacent triangles per edge (1 = boundary, 2 = interior).
    pub adjacency: Vec<u8>,
}

impl EdgeTable {
    pub fn build(triangles: &[[usize; 3]]) -> Self {
        let mut all: Vec<[usize; 2]> = Vec::with_capacity(triangles.len() * 3);
        for tri in triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                all.push([a.min(b), a.max(b)]);
            }
        }
        let mut edges = all.clone();
        edges.sort_unstable();
        edges.dedup();

        let index_of = |pair: &[usize; 2]| edges.binary_search(pair).expect("edge present");
        let mut adjacency = vec![0u8; edges.len()];
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let mut local = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let idx = index_of(&[a.min(b), a.max(b)]);
                local[e] = idx;
                adjacency[idx] = adjacency[idx].saturating_add(1);
            }
            triangle_edges.push(local);
        }
        EdgeTable {
            edges,
            triangle_edges,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges adjacent to exactly one triangle, already sorted.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.edges
            .iter()
            .zip(&self.adjacency)
            .filter(|(_, &count)| count == 1)
            .map(|(e, _)| *e)
            .collect()
    }
}

impl TriMesh {
    /// Assembles a mesh from raw connectivity; boundary edges are derived
    /// from the topology (edges adjacent to exactly one triangle).
    pub fn from_connectivity(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        generation: u32,
    ) -> Result<Self> {
        let table = EdgeTable::build(&triangles);
        let mesh = TriMesh {
            vertices,
            triangles,
            boundary_edges: table.boundary_edges(),
            generation,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_table(&self) -> EdgeTable {
        EdgeTable::build(&self.triangles)
    }

    /// Twice the signed area of triangle `t` (positive for counterclockwise).
    pub fn double_signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * self.double_signed_area(t)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Checks the structural invariants: indices in range, strictly positive
    /// signed areas, and interior/boundary edge adjacency counts of 2/1.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::InvalidArgument(format!(
                        "triangle {t} references vertex {v} but only {n} vertices exist"
                    )));
                }
            }
        }
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            for &v in edge {
                if v >= n {
                    return Err(Error::InvalidArgument(format!(
                        "boundary edge {e} references vertex {v} but only {n} vertices exist"
                    )));
                }
            }
        }
        for t in 0..self.n_triangles() {
            if self.double_signed_area(t) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} has non-positive signed area"
                )));
            }
        }
        let table = self.edge_table();
        for (edge, &count) in table.edges.iter().zip(&table.adjacency) {
            if count > 2 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) is shared by {} triangles",
                    edge[0], edge[1], count
                )));
            }
        }
        let derived = table.boundary_edges();
        if derived != self.boundary_edges {
            return Err(Error::InvalidArgument(
                "boundary edge list does not match mesh topology".into(),
            ));
        }
        Ok(())
    }
}

/// Structured triangulation of the unit square: (m+1)^2 vertices on a uniform
/// grid, each cell split along the same diagonal into two triangles. The mesh
/// size is sqrt(2)/m.
pub fn unit_square_mesh(m: usize) -> Result<TriMesh> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "subdivision count m must be at least 1".into(),
        ));
    }
    let n = m + 1;
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vertices.push([i as f64 / m as f64, j as f64 / m as f64]);
        }
    }
    let vid = |i: usize, j: usize| j * n + i;
    let mut triangles = Vec::with_capacity(2 * m * m);
    for j in 0..m {
        for i in 0..m {
            let (v00, v10) = (vid(i, j), vid(i + 1, j));
            let (v01, v11) = (vid(i, j + 1), vid(i + 1, j + 1));
            // split along the bottom-left to top-right diagonal
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::from_connectivity(vertices, triangles, 0)
}

/// Red refinement: every triangle is split into 4 congruent children via its
/// edge midpoints. The output vertex set is the input's vertices followed by
/// one midpoint per edge, in the edge table's lexicographic order.
pub fn refine_regular(mesh: &TriMesh) -> TriMesh {
    let table = mesh.edge_table();
    let n_old = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.reserve(table.len());
    for edge in &table.edges {
        let (pa, pb) = (mesh.vertices[edge[0]], mesh.vertices[edge[1]]);
        vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }

    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = *tri;
        let mab = n_old + table.triangle_edges[t][0];
        let mbc = n_old + table.triangle_edges[t][1];
        let mca = n_old + table.triangle_edges[t][2];
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }

    let child_table = EdgeTable::build(&triangles);
    TriMesh {
        vertices,
        triangles,
        boundary_edges: child_table.boundary_edges(),
        generation: mesh.generation + 1,
    }
}
