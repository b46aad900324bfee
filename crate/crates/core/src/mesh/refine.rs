//! Longest-edge bisection with conforming closure.

use std::collections::HashMap;

use super::{edge_key, edge_len2, Edge, Triangulation};
use crate::error::{Error, Result};

/// Local index `i` of the longest edge of element `k` (edge joins local vertices `i`, `i+1`).
///
/// Lengths equal up to a relative 1e-12 are ties, broken by the smallest sorted vertex pair.
pub(crate) fn longest_local_edge(t: &Triangulation, k: usize) -> usize {
    let el = t.elements()[k];
    let v = t.vertices();
    let len = |i: usize| edge_len2(v[el[i]], v[el[(i + 1) % 3]]);
    let key = |i: usize| edge_key(el[i], el[(i + 1) % 3]);
    let mut best = 0;
    for i in 1..3 {
        let (li, lb) = (len(i), len(best));
        let tol = 1e-12 * li.max(lb);
        if li > lb + tol || ((li - lb).abs() <= tol && key(i) < key(best)) {
            best = i;
        }
    }
    best
}

/// Edge indices flagged by the closure of `marked` (every element containing a
/// flagged edge also flags its longest edge).
fn closure(t: &Triangulation, marked: &[Edge]) -> Result<Vec<bool>> {
    let mut flagged = vec![false; t.edges().len()];
    let mut stack = Vec::new();
    for &(a, b) in marked {
        let e = t
            .edge_index(a, b)
            .filter(|&e| !t.is_boundary_edge(e))
            .ok_or_else(|| Error::input(format!("edge ({a},{b}) is not an interior edge of the mesh")))?;
        if !flagged[e] {
            flagged[e] = true;
            stack.push(e);
        }
    }
    while let Some(e) = stack.pop() {
        for k in t.edge_elements(e).into_iter().flatten() {
            let le = t.element_edges(k)[longest_local_edge(t, k)];
            if !flagged[le] {
                flagged[le] = true;
                stack.push(le);
            }
        }
    }
    Ok(flagged)
}

/// Interior edges that would be bisected by `refine(t, marked)`, in edge-table order.
pub fn virtual_refined_set(t: &Triangulation, marked: &[Edge]) -> Result<Vec<Edge>> {
    let flagged = closure(t, marked)?;
    Ok((0..flagged.len()).filter(|&e| flagged[e] && !t.is_boundary_edge(e)).map(|e| t.edges()[e]).collect())
}

/// Coarsest conforming longest-edge-bisection refinement bisecting every edge of `marked`.
///
/// Returns the refined mesh and the bisected interior edges. Existing vertices keep
/// their indices; midpoints are appended in edge-table order.
pub fn refine(t: &Triangulation, marked: &[Edge]) -> Result<(Triangulation, Vec<Edge>)> {
    let flagged = closure(t, marked)?;
    let (fine, _) = bisect_flagged(t, &flagged)?;
    let bisected = (0..flagged.len()).filter(|&e| flagged[e] && !t.is_boundary_edge(e)).map(|e| t.edges()[e]).collect();
    Ok((fine, bisected))
}

/// Splits every element according to its flagged edges; `flagged` must be closed.
///
/// Returns the new mesh and the midpoint vertex of each flagged edge.
pub(crate) fn bisect_flagged(t: &Triangulation, flagged: &[bool]) -> Result<(Triangulation, HashMap<Edge, usize>)> {
    let mut vertices = t.vertices().to_vec();
    let mut midpoint = HashMap::new();
    for (e, &f) in flagged.iter().enumerate() {
        if f {
            let (a, b) = t.edges()[e];
            let pa = vertices[a];
            let pb = vertices[b];
            midpoint.insert((a, b), vertices.len());
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
    }
    if midpoint.is_empty() {
        return Ok((t.clone(), midpoint));
    }
    let mid = |a: usize, b: usize| midpoint.get(&edge_key(a, b)).copied();

    let mut elements = Vec::with_capacity(t.n_elements() * 2);
    for k in 0..t.n_elements() {
        let el = t.elements()[k];
        let ee = t.element_edges(k);
        if !ee.iter().any(|&e| flagged[e]) {
            elements.push(el);
            continue;
        }
        let i = longest_local_edge(t, k);
        let (p, q, r) = (el[i], el[(i + 1) % 3], el[(i + 2) % 3]);
        let m = mid(p, q).expect("closure flags the longest edge");
        match mid(r, p) {
            Some(m2) => {
                elements.push([p, m, m2]);
                elements.push([m, r, m2]);
            }
            None => elements.push([p, m, r]),
        }
        match mid(q, r) {
            Some(m3) => {
                elements.push([m, q, m3]);
                elements.push([m, m3, r]);
            }
            None => elements.push([m, q, r]),
        }
    }
    Ok((Triangulation::new(vertices, elements)?, midpoint))
}
