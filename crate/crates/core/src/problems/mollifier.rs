//! Smooth normalized bump used as a goal functional.

use std::f64::consts::PI;

use crate::assembly::{point_in_triangle, Field, FunctionalSpec};
use crate::error::{Error, Result};
use crate::mesh::{Point, Triangulation};
use crate::quadrature::composite_gauss_legendre;

/// ∫₀¹ t exp(-1/(1 − t²)) dt.
fn radial_integral() -> f64 {
    let (t, w) = composite_gauss_legendre(0.0, 1.0, 64, 20);
    t.iter().zip(&w).map(|(t, w)| w * t * (-1.0 / (1.0 - t * t)).exp()).sum()
}

/// Normalization C with ∫ C exp(-r²/(r² − |x − x₀|²)) dx = 1 over the ball of radius r.
pub fn mollifier_constant(r: f64) -> f64 {
    1.0 / (2.0 * PI * r * r * radial_integral())
}

/// g₀(x) = C exp(-r²/(r² − |x − x₀|²)) inside the ball, 0 outside.
pub fn mollifier(x0: Point, r: f64) -> Result<Field> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::input(format!("mollifier radius {r} must be positive")));
    }
    let c = mollifier_constant(r);
    let r2 = r * r;
    Ok(Field::compact(
        move |x| {
            let d2 = (x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2);
            if d2 < r2 {
                c * (-r2 / (r2 - d2)).exp()
            } else {
                0.0
            }
        },
        x0,
        r,
    ))
}

/// Goal v ↦ ∫ g₀ v; the closed ball B(x₀, r) must lie inside the domain of `t`.
pub fn mollifier_goal(t: &Triangulation, x0: Point, r: f64) -> Result<FunctionalSpec> {
    let g = mollifier(x0, r)?;
    if !(0..t.n_elements()).any(|k| point_in_triangle(&t.element_points(k), x0, 0.0)) {
        return Err(Error::input(format!("mollifier center {x0:?} is outside the domain")));
    }
    for (i, &(a, b)) in t.edges().iter().enumerate() {
        if !t.is_boundary_edge(i) {
            continue;
        }
        let (pa, pb) = (t.vertices()[a], t.vertices()[b]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let s = (((x0[0] - pa[0]) * d[0] + (x0[1] - pa[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
        let dist = ((pa[0] + s * d[0] - x0[0]).powi(2) + (pa[1] + s * d[1] - x0[1]).powi(2)).sqrt();
        if dist <= r {
            return Err(Error::input(format!("mollifier support of radius {r} touches the boundary")));
        }
    }
    Ok(FunctionalSpec { scalar: Some(g), vector: Vec::new() })
}
