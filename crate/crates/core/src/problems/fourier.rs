//! Planar Fourier-mode expansions with algebraically decaying amplitudes.

use std::f64::consts::PI;

use crate::assembly::{CoefficientExpansion, Field};
use crate::error::{Error, Result};

/// Number of terms summed directly before the Euler–Maclaurin tail.
const ZETA_TERMS: u32 = 1000;

/// Riemann ζ(s) for real s > 1.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::input(format!("zeta({s}) requires s > 1")));
    }
    let n = ZETA_TERMS as f64;
    let head: f64 = (1..ZETA_TERMS).rev().map(|k| (k as f64).powf(-s)).sum();
    // Σ_{k ≥ N} k^{-s} ≈ N^{1-s}/(s-1) + N^{-s}/2 + s N^{-s-1}/12 - s(s+1)(s+2) N^{-s-3}/720
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    Ok(head + tail)
}

/// Frequencies (β₁(m), β₂(m)) of the m-th mode, m ≥ 1, enumerating total order k(m).
pub fn fourier_frequencies(m: usize) -> (usize, usize) {
    assert!(m >= 1, "modes are numbered from 1");
    let mut k = 0;
    while (k + 1) * (k + 2) / 2 <= m {
        k += 1;
    }
    let b1 = m - k * (k + 1) / 2;
    (b1, k - b1)
}

fn fourier_terms(amplitudes: &[f64]) -> Vec<Field> {
    amplitudes
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let (b1, b2) = fourier_frequencies(i + 1);
            let (w1, w2) = (2.0 * PI * b1 as f64, 2.0 * PI * b2 as f64);
            Field::function(move |x| amp * (w1 * x[0]).cos() * (w2 * x[1]).cos())
        })
        .collect()
}

/// a₀ ≡ 1, aₘ = A m^{-σ} cos(2πβ₁(m)x₁) cos(2πβ₂(m)x₂) for m = 1..=m_max.
pub fn eigel_expansion(amplitude: f64, sigma: f64, m_max: usize) -> Result<CoefficientExpansion> {
    let z = riemann_zeta(sigma)?;
    if !(amplitude > 0.0 && amplitude < 1.0 / z) {
        return Err(Error::input(format!("amplitude {amplitude} must lie in (0, 1/zeta({sigma}) = {})", 1.0 / z)));
    }
    let amps: Vec<f64> = (1..=m_max).map(|m| amplitude * (m as f64).powf(-sigma)).collect();
    CoefficientExpansion::new(Field::Constant(1.0), 1.0, 1.0, fourier_terms(&amps), amps)
}

/// a₀ ≡ c + ε with terms (c / (A ζ(σ))) A m^{-σ} cos(2πβ₁x₁) cos(2πβ₂x₂), so that
/// a(x, y) ∈ [ε, 2c + ε].
pub fn emn_expansion(c: f64, eps: f64, sigma: f64, amplitude: f64, m_max: usize) -> Result<CoefficientExpansion> {
    if !(c > 0.0 && eps > 0.0) {
        return Err(Error::input(format!("c = {c} and eps = {eps} must be positive")));
    }
    let z = riemann_zeta(sigma)?;
    if !(amplitude > 0.0 && amplitude < 1.0 / z) {
        return Err(Error::input(format!("amplitude {amplitude} must lie in (0, 1/zeta({sigma}) = {})", 1.0 / z)));
    }
    let alpha_min = amplitude * z;
    let amps: Vec<f64> = (1..=m_max).map(|m| c / alpha_min * amplitude * (m as f64).powf(-sigma)).collect();
    CoefficientExpansion::new(Field::Constant(c + eps), c + eps, c + eps, fourier_terms(&amps), amps)
}
