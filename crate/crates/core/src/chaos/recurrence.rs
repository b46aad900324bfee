use super::Measure;
use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;

const POINTS_PER_PANEL: usize = 20;
const MAX_PANELS: usize = 1024;

/// Recurrence coefficients β₀..β_{n_max} of the orthonormal polynomials of a
/// symmetric measure: βₙ Pₙ₊₁(y) = y Pₙ(y) − βₙ₋₁ Pₙ₋₁(y), P₀ = 1, P₋₁ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    measure: Measure,
    beta: Vec<f64>,
}

impl RecurrenceTable {
    /// Computes β₀..β_{n_max} for `measure`.
    ///
    /// Uses the discretized Stieltjes procedure on a composite Gauss–Legendre rule,
    /// doubling the panel count until every coefficient changes by less than 1e-12.
    pub fn new(measure: Measure, n_max: usize) -> Result<Self> {
        let beta = match measure {
            Measure::Uniform => (0..=n_max).map(legendre_beta).collect(),
            Measure::TruncatedGaussian => converged_stieltjes(measure, n_max)?,
        };
        Ok(RecurrenceTable { measure, beta })
    }

    /// Same as [`RecurrenceTable::new`] but always runs the Stieltjes procedure.
    pub fn by_stieltjes(measure: Measure, n_max: usize) -> Result<Self> {
        Ok(RecurrenceTable { measure, beta: converged_stieltjes(measure, n_max)? })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Highest n with a stored βₙ.
    pub fn n_max(&self) -> usize {
        self.beta.len() - 1
    }

    /// βₙ for n ≥ 0.
    pub fn beta(&self, n: usize) -> f64 {
        self.beta[n]
    }

    /// Extends the table so that βₙ is available for all n ≤ `n_max`.
    pub fn ensure(&mut self, n_max: usize) -> Result<()> {
        if n_max > self.n_max() {
            *self = RecurrenceTable::new(self.measure, n_max.max(2 * self.n_max()))?;
        }
        Ok(())
    }

    /// Pₙ(y) by forward recurrence.
    pub fn eval(&self, n: usize, y: f64) -> Result<f64> {
        if n > self.n_max() + 1 {
            return Err(Error::input(format!("degree {n} exceeds table size {}", self.n_max() + 1)));
        }
        Ok(self.eval_all(n, y)[n])
    }

    /// P₀(y)..Pₙ(y); requires n ≤ n_max + 1.
    pub fn eval_all(&self, n: usize, y: f64) -> Vec<f64> {
        let mut p = Vec::with_capacity(n + 1);
        p.push(1.0);
        let mut prev = 0.0;
        for k in 0..n {
            let beta_prev = if k == 0 { 1.0 } else { self.beta[k - 1] };
            let next = (y * p[k] - beta_prev * prev) / self.beta[k];
            prev = p[k];
            p.push(next);
        }
        p
    }

    /// ∫ y P_a(y) P_b(y) dπ(y).
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        if b == a + 1 {
            self.beta[a]
        } else if a == b + 1 {
            self.beta[b]
        } else {
            0.0
        }
    }
}

/// Closed-form Legendre coefficient (n+1)/√((2n+1)(2n+3)).
pub fn legendre_beta(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0)).sqrt()
}

fn converged_stieltjes(measure: Measure, n_max: usize) -> Result<Vec<f64>> {
    let mut panels = 4;
    let mut last = stieltjes(measure, n_max, panels)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = stieltjes(measure, n_max, panels)?;
        let change = last.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change < 1e-12 {
            return Ok(next);
        }
        last = next;
    }
    Err(Error::numeric(format!(
        "Stieltjes procedure for {} did not stabilize with {MAX_PANELS} panels",
        measure.name()
    )))
}

fn stieltjes(measure: Measure, n_max: usize, panels: usize) -> Result<Vec<f64>> {
    let (x, mut w) = composite_gauss_legendre(-1.0, 1.0, panels, POINTS_PER_PANEL);
    for (wi, xi) in w.iter_mut().zip(&x) {
        *wi *= measure.density(*xi);
    }
    let mass: f64 = w.iter().sum();
    let mut p_prev = vec![0.0; x.len()];
    let mut p = vec![1.0 / mass.sqrt(); x.len()];
    let mut beta_prev = 1.0;
    let mut beta = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut q: Vec<f64> = (0..x.len()).map(|i| x[i] * p[i] - beta_prev * p_prev[i]).collect();
        let norm2: f64 = q.iter().zip(&w).map(|(qi, wi)| wi * qi * qi).sum();
        let b = norm2.sqrt();
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::numeric(format!("Stieltjes breakdown at n = {n} (beta = {b})")));
        }
        q.iter_mut().for_each(|v| *v /= b);
        beta.push(b);
        p_prev = std::mem::replace(&mut p, q);
        beta_prev = b;
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn gram(table: &RecurrenceTable, n: usize) -> Vec<Vec<f64>> {
        let (x, w) = composite_gauss_legendre(-1.0, 1.0, 16, 30);
        let mut g = vec![vec![0.0; n + 1]; n + 1];
        for (xi, wi) in x.iter().zip(&w) {
            let p = table.eval_all(n, *xi);
            let d = wi * table.measure().density(*xi);
            for i in 0..=n {
                for j in 0..=n {
                    g[i][j] += d * p[i] * p[j];
                }
            }
        }
        g
    }

    #[test]
    fn stieltjes_reproduces_legendre_coefficients() {
        let t = RecurrenceTable::by_stieltjes(Measure::Uniform, 12).unwrap();
        for n in 0..=12 {
            assert!((t.beta(n) - legendre_beta(n)).abs() < 1e-12, "n={n}");
        }
        assert!((legendre_beta(0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gram_matrices_are_identity() {
        for (m, tol) in [(Measure::Uniform, 1e-10), (Measure::TruncatedGaussian, 1e-8)] {
            let t = RecurrenceTable::new(m, 8).unwrap();
            let g = gram(&t, 6);
            for i in 0..=6 {
                for j in 0..=6 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i][j] - e).abs() < tol, "{m:?} ({i},{j}) = {}", g[i][j]);
                }
            }
        }
    }

    #[test]
    fn truncated_gaussian_beta0_is_standard_deviation() {
        let t = RecurrenceTable::new(Measure::TruncatedGaussian, 2).unwrap();
        // variance of N(0,1) truncated to [-1,1]: 1 − 2φ(1)/(2Φ(1)−1)
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let var = 1.0 - 2.0 * phi1 / super::super::measure::truncated_gaussian_mass();
        assert!((t.beta(0) - var.sqrt()).abs() < 1e-12, "{} vs {}", t.beta(0), var.sqrt());
    }

    #[test]
    fn evaluation_examples() {
        let t = RecurrenceTable::new(Measure::Uniform, 4).unwrap();
        assert_eq!(t.eval(0, 0.3).unwrap(), 1.0);
        assert!((t.eval(1, 1.0).unwrap() - 3f64.sqrt()).abs() < 1e-14);
        assert!(t.eval(9, 0.0).is_err());
    }

    #[test]
    fn coupling_matches_quadrature() {
        for m in [Measure::Uniform, Measure::TruncatedGaussian] {
            let t = RecurrenceTable::new(m, 6).unwrap();
            assert_eq!(t.coupling(0, 1), t.beta(0));
            assert_eq!(t.coupling(2, 2), 0.0);
            let (x, w) = gauss_legendre(40);
            for a in 0..5 {
                for b in 0..5 {
                    let q: f64 = x
                        .iter()
                        .zip(&w)
                        .map(|(xi, wi)| {
                            let p = t.eval_all(5, *xi);
                            wi * m.density(*xi) * xi * p[a] * p[b]
                        })
                        .sum();
                    assert!((q - t.coupling(a, b)).abs() < 1e-10, "{m:?} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn ensure_extends() {
        let mut t = RecurrenceTable::new(Measure::TruncatedGaussian, 1).unwrap();
        let b1 = t.beta(1);
        t.ensure(5).unwrap();
        assert!(t.n_max() >= 5);
        assert!((t.beta(1) - b1).abs() < 1e-13);
    }
}
