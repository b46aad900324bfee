//! Gauss–Legendre rules on intervals and symmetric rules on triangles.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] with `n` points.
///
/// Nodes are found by Newton iteration on Pₙ from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on [a, b] with `panels` equal panels of `n` points each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * n);
    let mut ws = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            xs.push(lo + 0.5 * h * (xi + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

/// Symmetric quadrature rules on a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriangleRule {
    /// One point at the centroid, exact for degree 1.
    Centroid,
    /// Three interior points, exact for degree 2.
    ThreePoint,
    /// Seven points, exact for degree 5.
    #[default]
    SevenPoint,
}

impl TriangleRule {
    /// Barycentric points and weights; the weights sum to one (multiply by the area).
    pub fn points(self) -> Vec<([f64; 3], f64)> {
        match self {
            TriangleRule::Centroid => vec![([1.0 / 3.0; 3], 1.0)],
            TriangleRule::ThreePoint => {
                let a = 1.0 / 6.0;
                let b = 2.0 / 3.0;
                vec![([b, a, a], 1.0 / 3.0), ([a, b, a], 1.0 / 3.0), ([a, a, b], 1.0 / 3.0)]
            }
            TriangleRule::SevenPoint => {
                let s15 = 15f64.sqrt();
                let a1 = (6.0 - s15) / 21.0;
                let a2 = (6.0 + s15) / 21.0;
                let w1 = (155.0 - s15) / 1200.0;
                let w2 = (155.0 + s15) / 1200.0;
                let b1 = 1.0 - 2.0 * a1;
                let b2 = 1.0 - 2.0 * a2;
                vec![
                    ([1.0 / 3.0; 3], 0.225),
                    ([b1, a1, a1], w1),
                    ([a1, b1, a1], w1),
                    ([a1, a1, b1], w1),
                    ([b2, a2, a2], w2),
                    ([a2, b2, a2], w2),
                    ([a2, a2, b2], w2),
                ]
            }
        }
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(self) -> usize {
        match self {
            TriangleRule::Centroid => 1,
            TriangleRule::ThreePoint => 2,
            TriangleRule::SevenPoint => 5,
        }
    }
}

/// Integrates `f` over the triangle with corners `p` using `rule`.
pub fn integrate_triangle<F: Fn([f64; 2]) -> f64>(p: &[[f64; 2]; 3], rule: TriangleRule, f: F) -> f64 {
    let area = triangle_area(p).abs();
    rule.points()
        .iter()
        .map(|(l, w)| {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            w * f(x)
        })
        .sum::<f64>()
        * area
}

/// Signed area, positive for counterclockwise orientation.
pub fn triangle_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}
