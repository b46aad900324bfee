//! Uniform refinement and the detail structure of edge-midpoint hat functions.

use super::refine::bisect_flagged;
use super::{barycentric_gradients, Edge, Triangulation};
use crate::sparse::CsrMatrix;

/// The association between interior edges of a mesh and the new interior
/// vertices of its uniform refinement.
#[derive(Debug, Clone)]
pub struct DetailStructure {
    coarse_id: u64,
    fine_id: u64,
    edges: Vec<Edge>,
    midpoint_vertex: Vec<usize>,
    midpoint_dof: Vec<usize>,
    unit_denominators: Vec<f64>,
    overlap: usize,
    prolongation: CsrMatrix,
}

impl DetailStructure {
    /// Interior edges of the coarse mesh, in edge-table order; position = detail index.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of detail functions.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Fine-mesh vertex at the midpoint of detail edge `j`.
    pub fn midpoint_vertex(&self, j: usize) -> usize {
        self.midpoint_vertex[j]
    }

    /// Fine-mesh degrees of freedom of all midpoints, in detail order.
    pub fn midpoint_dofs(&self) -> &[usize] {
        &self.midpoint_dof
    }

    /// ‖∇φ_E‖² for each detail hat.
    pub fn unit_denominators(&self) -> &[f64] {
        &self.unit_denominators
    }

    /// Maximum number of detail hats whose support meets the interior of a coarse element.
    pub fn overlap_constant(&self) -> usize {
        self.overlap
    }

    /// Nodal interpolation of coarse interior values onto fine interior vertices.
    pub fn prolongation(&self) -> &CsrMatrix {
        &self.prolongation
    }

    /// Identifier of the coarse mesh this structure belongs to.
    pub fn coarse_id(&self) -> u64 {
        self.coarse_id
    }

    /// Identifier of the uniform refinement.
    pub fn fine_id(&self) -> u64 {
        self.fine_id
    }
}

/// Bisects every edge of `t` (each element splits into four children).
pub fn uniform_refine(t: &Triangulation) -> (Triangulation, DetailStructure) {
    let flagged = vec![true; t.edges().len()];
    let (fine, midpoint) = bisect_flagged(t, &flagged).expect("uniform refinement of a valid mesh is valid");

    let mut edges = Vec::new();
    let mut midpoint_vertex = Vec::new();
    let mut midpoint_dof = Vec::new();
    let mut overlap = 0;
    for k in 0..t.n_elements() {
        let n = t.element_edges(k).iter().filter(|&&e| !t.is_boundary_edge(e)).count();
        overlap = overlap.max(n);
    }
    for (e, &edge) in t.edges().iter().enumerate() {
        if t.is_boundary_edge(e) {
            continue;
        }
        let m = midpoint[&edge];
        edges.push(edge);
        midpoint_vertex.push(m);
        midpoint_dof.push(fine.interior_dof(m).expect("midpoint of an interior edge is interior"));
    }

    let mut grad_sq = vec![0.0; fine.n_vertices()];
    for k in 0..fine.n_elements() {
        let g = barycentric_gradients(&fine.element_points(k));
        let area = fine.element_area(k);
        for (i, &v) in fine.elements()[k].iter().enumerate() {
            grad_sq[v] += area * (g[i][0] * g[i][0] + g[i][1] * g[i][1]);
        }
    }
    let unit_denominators = midpoint_vertex.iter().map(|&m| grad_sq[m]).collect();

    let mut triplets = Vec::new();
    for (fi, &v) in fine.interior_vertices().iter().enumerate() {
        if v < t.n_vertices() {
            let ci = t.interior_dof(v).expect("coarse vertex interior in the refinement is interior");
            triplets.push((fi, ci, 1.0));
        }
    }
    for (&(a, b), &m) in &midpoint {
        if let Some(fi) = fine.interior_dof(m) {
            for v in [a, b] {
                if let Some(ci) = t.interior_dof(v) {
                    triplets.push((fi, ci, 0.5));
                }
            }
        }
    }
    let prolongation = CsrMatrix::from_triplets(fine.n_interior(), t.n_interior(), &triplets);

    let d = DetailStructure {
        coarse_id: t.id(),
        fine_id: fine.id(),
        edges,
        midpoint_vertex,
        midpoint_dof,
        unit_denominators,
        overlap,
        prolongation,
    };
    (fine, d)
}
