//! P1 stiffness matrices, load vectors and detail-space couplings.
//!
//! Homogeneous Dirichlet conditions are imposed by dropping boundary vertices:
//! all matrices and vectors are indexed by interior degrees of freedom.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{uniform_refine, DetailStructure, Point, Triangulation};
use crate::quadrature::{triangle_area, TriangleRule};
use crate::sparse::CsrMatrix;

/// Maximum sub-triangle diameter, relative to the support radius, used when
/// integrating fields with compact support.
const SUPPORT_RESOLUTION: f64 = 1.0 / 32.0;

/// A scalar field on the plane.
#[derive(Clone)]
pub enum Field {
    /// Constant value.
    Constant(f64),
    /// Smooth function; `support` optionally declares a ball outside which it vanishes,
    /// which triggers adaptive subdivision of the elements meeting the ball.
    Function {
        f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
        support: Option<(Point, f64)>,
    },
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::Function { support, .. } => write!(f, "Function {{ support: {support:?} }}"),
        }
    }
}

impl Field {
    /// Wraps a smooth function without declared support.
    pub fn function(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Field::Function { f: Arc::new(f), support: None }
    }

    /// Wraps a function that vanishes outside the ball `(center, radius)`.
    pub fn compact(f: impl Fn(Point) -> f64 + Send + Sync + 'static, center: Point, radius: f64) -> Self {
        Field::Function { f: Arc::new(f), support: Some((center, radius)) }
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            Field::Constant(c) => *c,
            Field::Function { f, .. } => f(x),
        }
    }

    /// The field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Field::Constant(c) => Field::Constant(c * s),
            Field::Function { f, support } => {
                let f = f.clone();
                Field::Function { f: Arc::new(move |x| s * f(x)), support: *support }
            }
        }
    }

    /// ∫_T field · w(λ) over the triangle `p`, where `w` receives barycentric coordinates.
    pub fn integrate<W: Fn([f64; 3]) -> f64>(&self, p: &[Point; 3], rule: TriangleRule, w: W) -> f64 {
        match self {
            Field::Constant(c) => {
                let area = triangle_area(p).abs();
                c * area * rule.points().iter().map(|(l, q)| q * w(*l)).sum::<f64>()
            }
            Field::Function { f, support: None } => integrate_sub(f.as_ref(), p, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], rule, &w),
            Field::Function { f, support: Some((c, r)) } => {
                let mut total = 0.0;
                let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
                subdivide(f.as_ref(), p, corners, *c, *r, rule, &w, &mut total);
                total
            }
        }
    }
}

fn bary_to_point(p: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

/// Integrates over the sub-triangle of `p` with barycentric corners `sub`.
fn integrate_sub<W: Fn([f64; 3]) -> f64>(
    f: &(dyn Fn(Point) -> f64 + Send + Sync),
    p: &[Point; 3],
    sub: [[f64; 3]; 3],
    rule: TriangleRule,
    w: &W,
) -> f64 {
    let sp = [bary_to_point(p, sub[0]), bary_to_point(p, sub[1]), bary_to_point(p, sub[2])];
    let area = triangle_area(&sp).abs();
    let mut s = 0.0;
    for (l, q) in rule.points() {
        let lam = [
            l[0] * sub[0][0] + l[1] * sub[1][0] + l[2] * sub[2][0],
            l[0] * sub[0][1] + l[1] * sub[1][1] + l[2] * sub[2][1],
            l[0] * sub[0][2] + l[1] * sub[1][2] + l[2] * sub[2][2],
        ];
        s += q * f(bary_to_point(p, lam)) * w(lam);
    }
    s * area
}

#[allow(clippy::too_many_arguments)]
fn subdivide<W: Fn([f64; 3]) -> f64>(
    f: &(dyn Fn(Point) -> f64 + Send + Sync),
    p: &[Point; 3],
    sub: [[f64; 3]; 3],
    center: Point,
    radius: f64,
    rule: TriangleRule,
    w: &W,
    total: &mut f64,
) {
    let sp = [bary_to_point(p, sub[0]), bary_to_point(p, sub[1]), bary_to_point(p, sub[2])];
    if !triangle_meets_ball(&sp, center, radius) {
        return;
    }
    let diam = (0..3)
        .map(|i| {
            let a = sp[i];
            let b = sp[(i + 1) % 3];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    if diam <= SUPPORT_RESOLUTION * radius {
        *total += integrate_sub(f, p, sub, rule, w);
        return;
    }
    let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
    let m01 = mid(sub[0], sub[1]);
    let m12 = mid(sub[1], sub[2]);
    let m20 = mid(sub[2], sub[0]);
    for child in [[sub[0], m01, m20], [m01, sub[1], m12], [m20, m12, sub[2]], [m01, m12, m20]] {
        subdivide(f, p, child, center, radius, rule, w, total);
    }
}

/// True if the closed triangle and the open ball intersect.
fn triangle_meets_ball(p: &[Point; 3], c: Point, r: f64) -> bool {
    if point_in_triangle(p, c, 0.0) {
        return true;
    }
    (0..3).any(|i| point_segment_distance(c, p[i], p[(i + 1) % 3]) < r)
}

fn point_segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    ((a[0] + t * d[0] - x[0]).powi(2) + (a[1] + t * d[1] - x[1]).powi(2)).sqrt()
}

/// Point-in-triangle test with absolute tolerance `tol` on the barycentric coordinates.
pub fn point_in_triangle(p: &[Point; 3], x: Point, tol: f64) -> bool {
    let area = triangle_area(p);
    let l0 = triangle_area(&[x, p[1], p[2]]) / area;
    let l1 = triangle_area(&[p[0], x, p[2]]) / area;
    let l2 = 1.0 - l0 - l1;
    l0 >= -tol && l1 >= -tol && l2 >= -tol
}

/// Affine expansion a(x, y) = a₀(x) + Σₘ yₘ aₘ(x) with bounds for each aₘ.
#[derive(Debug, Clone)]
pub struct CoefficientExpansion {
    mean: Field,
    mean_min: f64,
    mean_max: f64,
    terms: Vec<Field>,
    sup_norms: Vec<f64>,
}

impl CoefficientExpansion {
    /// Builds an expansion; `sup_norms[m]` must bound ‖aₘ‖∞.
    pub fn new(mean: Field, mean_min: f64, mean_max: f64, terms: Vec<Field>, sup_norms: Vec<f64>) -> Result<Self> {
        if terms.len() != sup_norms.len() {
            return Err(Error::input("one sup-norm bound is needed per expansion term"));
        }
        if !(mean_min > 0.0 && mean_min <= mean_max) {
            return Err(Error::input(format!("mean bounds [{mean_min}, {mean_max}] are not positive and ordered")));
        }
        let e = CoefficientExpansion { mean, mean_min, mean_max, terms, sup_norms };
        if e.tau() >= 1.0 {
            return Err(Error::input(format!("expansion is not uniformly elliptic: tau = {}", e.tau())));
        }
        Ok(e)
    }

    pub fn mean(&self) -> &Field {
        &self.mean
    }

    /// aₘ for zero-based `m`.
    pub fn term(&self, m: usize) -> &Field {
        &self.terms[m]
    }

    /// Truncation length M_max.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sup_norms(&self) -> &[f64] {
        &self.sup_norms
    }

    pub fn mean_min(&self) -> f64 {
        self.mean_min
    }

    pub fn mean_max(&self) -> f64 {
        self.mean_max
    }

    /// τ = Σ‖aₘ‖∞ / a₀^min over the retained terms.
    pub fn tau(&self) -> f64 {
        self.sup_norms.iter().sum::<f64>() / self.mean_min
    }

    /// λ = a₀^min / (a₀^max (1 + τ)).
    pub fn lambda(&self) -> f64 {
        self.mean_min / (self.mean_max * (1.0 + self.tau()))
    }

    /// Λ = a₀^max / (a₀^min (1 − τ)).
    pub fn big_lambda(&self) -> f64 {
        self.mean_max / (self.mean_min * (1.0 - self.tau()))
    }

    /// a(x, y); parameters beyond `y.len()` are taken as zero.
    pub fn eval(&self, x: Point, y: &[f64]) -> f64 {
        self.mean.eval(x) + y.iter().zip(&self.terms).map(|(ym, am)| ym * am.eval(x)).sum::<f64>()
    }
}

/// Piecewise-constant vector data on a triangular region.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRegion {
    pub triangle: [Point; 3],
    pub value: [f64; 2],
}

/// Linear functional v ↦ ∫ f₀ v − ∫ f·∇v.
#[derive(Debug, Clone)]
pub struct FunctionalSpec {
    pub scalar: Option<Field>,
    pub vector: Vec<VectorRegion>,
}

impl FunctionalSpec {
    /// The zero functional.
    pub fn zero() -> Self {
        FunctionalSpec { scalar: None, vector: Vec::new() }
    }

    /// Checks that every vector region is a union of elements of `t`.
    pub fn validate(&self, t: &Triangulation) -> Result<()> {
        for (i, region) in self.vector.iter().enumerate() {
            let target = triangle_area(&region.triangle).abs();
            let mut covered = 0.0;
            for k in 0..t.n_elements() {
                if point_in_triangle(&region.triangle, t.element_centroid(k), 0.0) {
                    let pts = t.element_points(k);
                    if pts.iter().any(|&x| !point_in_triangle(&region.triangle, x, 1e-10)) {
                        return Err(Error::input(format!("vector region {i} cuts element {k}")));
                    }
                    covered += t.element_area(k);
                }
            }
            if (covered - target).abs() > 1e-10 * target.max(1.0) {
                return Err(Error::input(format!(
                    "vector region {i} is not a union of mesh elements (area {target}, covered {covered})"
                )));
            }
        }
        Ok(())
    }
}

/// ∫ field ∇φᵢ·∇φⱼ over interior vertices i, j.
pub fn stiffness(t: &Triangulation, field: &Field, rule: TriangleRule) -> Result<CsrMatrix> {
    let n = t.n_interior();
    let mut trip = Vec::with_capacity(9 * t.n_elements());
    for k in 0..t.n_elements() {
        let el = t.elements()[k];
        let dofs = el.map(|v| t.interior_dof(v));
        if dofs.iter().all(Option::is_none) {
            continue;
        }
        let pts = t.element_points(k);
        let integral = field.integrate(&pts, rule, |_| 1.0);
        if !integral.is_finite() {
            return Err(Error::numeric(format!("non-finite field integral on element {k}")));
        }
        let g = t.element_gradients(k);
        for i in 0..3 {
            let Some(di) = dofs[i] else { continue };
            for j in 0..3 {
                let Some(dj) = dofs[j] else { continue };
                trip.push((di, dj, integral * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n, n, &trip))
}

/// Entries ∫ f₀ φᵢ − ∫ f·∇φᵢ over interior vertices.
pub fn load(t: &Triangulation, spec: &FunctionalSpec, rule: TriangleRule) -> Result<Vec<f64>> {
    let mut b = vec![0.0; t.n_interior()];
    for k in 0..t.n_elements() {
        let el = t.elements()[k];
        let dofs = el.map(|v| t.interior_dof(v));
        if dofs.iter().all(Option::is_none) {
            continue;
        }
        let pts = t.element_points(k);
        if let Some(f0) = &spec.scalar {
            for i in 0..3 {
                if let Some(di) = dofs[i] {
                    b[di] += f0.integrate(&pts, rule, |l| l[i]);
                }
            }
        }
        if !spec.vector.is_empty() {
            let c = t.element_centroid(k);
            let area = t.element_area(k);
            let g = t.element_gradients(k);
            for region in &spec.vector {
                if point_in_triangle(&region.triangle, c, 0.0) {
                    for i in 0..3 {
                        if let Some(di) = dofs[i] {
                            b[di] -= area * (region.value[0] * g[i][0] + region.value[1] * g[i][1]);
                        }
                    }
                }
            }
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite load vector"));
    }
    Ok(b)
}

/// Couplings ∫ field ∇φ_E·∇φᵢ between detail hats (rows) and coarse hats (columns),
/// computed from the stiffness matrix `fine_stiffness` of the uniform refinement.
pub fn detail_coupling(fine_stiffness: &CsrMatrix, d: &DetailStructure) -> CsrMatrix {
    fine_stiffness.select_rows(d.midpoint_dofs()).matmul(d.prolongation())
}

/// Diagonal ∫ field |∇φ_E|² of the detail hats.
pub fn detail_diagonal(fine_stiffness: &CsrMatrix, d: &DetailStructure) -> Vec<f64> {
    d.midpoint_dofs().iter().map(|&i| fine_stiffness.get(i, i)).collect()
}

/// Functional values F(φ_E) at the detail hats, from the load vector of the refinement.
pub fn detail_load(fine_load: &[f64], d: &DetailStructure) -> Vec<f64> {
    d.midpoint_dofs().iter().map(|&i| fine_load[i]).collect()
}

/// Stiffness matrices keyed by (mesh id, term), with term 0 the mean field and
/// term m + 1 the expansion coefficient aₘ, plus uniform refinements keyed by mesh id.
#[derive(Debug, Default)]
pub struct MatrixCache {
    entries: HashMap<(u64, usize), Arc<CsrMatrix>>,
    refinements: HashMap<u64, Arc<(Triangulation, DetailStructure)>>,
}

impl MatrixCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stiffness matrix of term `term` on mesh `t`, assembled on first use.
    pub fn get(
        &mut self,
        t: &Triangulation,
        coeff: &CoefficientExpansion,
        term: usize,
        rule: TriangleRule,
    ) -> Result<Arc<CsrMatrix>> {
        if let Some(m) = self.entries.get(&(t.id(), term)) {
            return Ok(m.clone());
        }
        if term > coeff.len() {
            return Err(Error::input(format!(
                "expansion term {term} requested but only {} are retained",
                coeff.len()
            )));
        }
        let field = if term == 0 { coeff.mean() } else { coeff.term(term - 1) };
        let m = Arc::new(stiffness(t, field, rule)?);
        self.entries.insert((t.id(), term), m.clone());
        Ok(m)
    }

    /// Uniform refinement of `t` with its detail structure, computed on first use.
    pub fn uniform_refinement(&mut self, t: &Triangulation) -> Arc<(Triangulation, DetailStructure)> {
        self.refinements.entry(t.id()).or_insert_with(|| Arc::new(uniform_refine(t))).clone()
    }

    /// Drops everything that belongs neither to a mesh in `keep` nor to its cached refinement.
    pub fn retain_meshes(&mut self, keep: &[u64]) {
        self.refinements.retain(|id, _| keep.contains(id));
        let fine: Vec<u64> = self.refinements.values().map(|r| r.0.id()).collect();
        self.entries.retain(|(id, _), _| keep.contains(id) || fine.contains(id));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
