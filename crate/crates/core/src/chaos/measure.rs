use libm::erf;
use std::f64::consts::{PI, SQRT_2};

/// Symmetric probability measure on [-1, 1] for a single parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Uniform density 1/2 (Legendre polynomials).
    Uniform,
    /// Standard normal density truncated to [-1, 1] and renormalized (Rys polynomials).
    TruncatedGaussian,
}

impl Measure {
    /// Probability density at `y` (zero outside [-1, 1]).
    pub fn density(self, y: f64) -> f64 {
        if y.abs() > 1.0 {
            return 0.0;
        }
        match self {
            Measure::Uniform => 0.5,
            Measure::TruncatedGaussian => (-0.5 * y * y).exp() / ((2.0 * PI).sqrt() * truncated_gaussian_mass()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Uniform => "uniform",
            Measure::TruncatedGaussian => "truncated_gaussian",
        }
    }
}

/// 2Φ(1) − 1, the standard normal mass of [-1, 1].
pub fn truncated_gaussian_mass() -> f64 {
    erf(1.0 / SQRT_2)
}
