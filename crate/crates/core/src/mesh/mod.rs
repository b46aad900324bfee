//! Conforming triangulations of polygonal domains, longest-edge bisection and
//! the detail structure of the uniform refinement.

mod detail;
mod io;
mod refine;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

pub use detail::{uniform_refine, DetailStructure};
pub use io::{read_mesh, write_mesh};
pub use refine::{refine, virtual_refined_set};

use crate::error::{Error, Result};
use crate::quadrature::triangle_area;

/// A point in the plane.
pub type Point = [f64; 2];

/// An edge identified by its sorted vertex pair.
pub type Edge = (usize, usize);

/// Sorted vertex pair.
pub fn edge_key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Conforming triangulation with derived edge and boundary tables.
///
/// Elements are stored counterclockwise. Boundary vertices and edges are derived
/// from the topology: an edge is on the boundary iff it has one incident element.
#[derive(Debug, Clone)]
pub struct Triangulation {
    id: u64,
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<Edge, usize>,
    edge_elements: Vec<[Option<usize>; 2]>,
    element_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    interior_dof: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
}

impl Triangulation {
    /// Builds a triangulation, orienting every element counterclockwise.
    pub fn new(vertices: Vec<Point>, elements: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut oriented = Vec::with_capacity(elements.len());
        for (k, el) in elements.iter().enumerate() {
            if el.iter().any(|&v| v >= nv) {
                return Err(Error::input(format!("element {k} references a missing vertex")));
            }
            let pts = [vertices[el[0]], vertices[el[1]], vertices[el[2]]];
            let area = triangle_area(&pts);
            let scale = edge_len2(pts[0], pts[1]).max(edge_len2(pts[1], pts[2])).max(edge_len2(pts[2], pts[0]));
            if !area.is_finite() || area.abs() <= 1e-14 * scale {
                return Err(Error::input(format!("element {k} is degenerate")));
            }
            oriented.push(if area > 0.0 { *el } else { [el[0], el[2], el[1]] });
        }

        let mut edges = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut edge_elements: Vec<[Option<usize>; 2]> = Vec::new();
        let mut element_edges = Vec::with_capacity(oriented.len());
        for (k, el) in oriented.iter().enumerate() {
            let mut ee = [0usize; 3];
            for i in 0..3 {
                let key = edge_key(el[i], el[(i + 1) % 3]);
                let idx = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_elements.push([None, None]);
                    edges.len() - 1
                });
                let slot = &mut edge_elements[idx];
                if slot[0].is_none() {
                    slot[0] = Some(k);
                } else if slot[1].is_none() {
                    slot[1] = Some(k);
                } else {
                    return Err(Error::input(format!("edge {key:?} has more than two elements")));
                }
                ee[i] = idx;
            }
            element_edges.push(ee);
        }

        let mut boundary_vertex = vec![false; nv];
        let mut used = vec![false; nv];
        for el in &oriented {
            for &v in el {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::input(format!("vertex {v} belongs to no element")));
        }
        for (e, adj) in edges.iter().zip(&edge_elements) {
            if adj[1].is_none() {
                boundary_vertex[e.0] = true;
                boundary_vertex[e.1] = true;
            }
        }
        let mut interior_dof = vec![None; nv];
        let mut interior_vertices = Vec::new();
        for v in 0..nv {
            if !boundary_vertex[v] {
                interior_dof[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }

        Ok(Triangulation {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            vertices,
            elements: oriented,
            edges,
            edge_lookup,
            edge_elements,
            element_edges,
            boundary_vertex,
            interior_dof,
            interior_vertices,
        })
    }

    /// Process-unique identifier, used to key caches.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Index of the edge with the given endpoints.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&edge_key(a, b)).copied()
    }

    /// Elements adjacent to edge `e` (the second is `None` on the boundary).
    pub fn edge_elements(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_elements[e]
    }

    /// Edges of element `k`; entry `i` joins local vertices `i` and `i+1`.
    pub fn element_edges(&self, k: usize) -> [usize; 3] {
        self.element_edges[k]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_elements[e][1].is_none()
    }

    /// Interior edges, in edge-table order.
    pub fn interior_edges(&self) -> Vec<Edge> {
        (0..self.edges.len()).filter(|&e| !self.is_boundary_edge(e)).map(|e| self.edges[e]).collect()
    }

    /// True if the vertex pair is an interior edge of this mesh.
    pub fn is_interior_edge(&self, edge: Edge) -> bool {
        self.edge_index(edge.0, edge.1).is_some_and(|e| !self.is_boundary_edge(e))
    }

    /// Interior vertices, in vertex order; position = degree-of-freedom index.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn n_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    /// Degree-of-freedom index of vertex `v`, `None` on the boundary.
    pub fn interior_dof(&self, v: usize) -> Option<usize> {
        self.interior_dof[v]
    }

    /// Corner coordinates of element `k`.
    pub fn element_points(&self, k: usize) -> [Point; 3] {
        let el = self.elements[k];
        [self.vertices[el[0]], self.vertices[el[1]], self.vertices[el[2]]]
    }

    /// Area of element `k`.
    pub fn element_area(&self, k: usize) -> f64 {
        triangle_area(&self.element_points(k))
    }

    /// Gradients of the three barycentric functions of element `k` (constant on the element).
    pub fn element_gradients(&self, k: usize) -> [[f64; 2]; 3] {
        barycentric_gradients(&self.element_points(k))
    }

    /// Centroid of element `k`.
    pub fn element_centroid(&self, k: usize) -> Point {
        let p = self.element_points(k);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    /// Length of edge `e`.
    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edges[e];
        edge_len2(self.vertices[a], self.vertices[b]).sqrt()
    }

    /// Total area.
    pub fn area(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.element_area(k)).sum()
    }

    /// Smallest interior angle over all elements, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut m = f64::INFINITY;
        for k in 0..self.n_elements() {
            let p = self.element_points(k);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt());
                m = m.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        m
    }

    /// Euler characteristic V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.edges.len() as i64 + self.n_elements() as i64
    }

    /// Checks that no vertex lies in the relative interior of an edge (no hanging nodes).
    ///
    /// Quadratic in size; intended for tests.
    pub fn is_conforming(&self) -> bool {
        for &(a, b) in &self.edges {
            let pa = self.vertices[a];
            let pb = self.vertices[b];
            let len2 = edge_len2(pa, pb);
            for (v, pv) in self.vertices.iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let w = [pv[0] - pa[0], pv[1] - pa[1]];
                let t = (d[0] * w[0] + d[1] * w[1]) / len2;
                let cross = d[0] * w[1] - d[1] * w[0];
                if t > 1e-12 && t < 1.0 - 1e-12 && cross.abs() <= 1e-12 * len2 {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn edge_len2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Gradients of the barycentric coordinates of a triangle.
pub fn barycentric_gradients(p: &[Point; 3]) -> [[f64; 2]; 3] {
    let two_area = 2.0 * triangle_area(p);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        g[i] = [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area];
    }
    g
}
