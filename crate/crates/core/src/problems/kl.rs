//! Karhunen–Loève expansion of a separable exponential covariance on (-1, 1)².

use std::f64::consts::{FRAC_PI_2, PI};

use crate::assembly::{CoefficientExpansion, Field};
use crate::chaos::{Measure, RecurrenceTable};
use crate::error::{Error, Result};

/// Half-width of the interval (-1, 1).
const HALF_WIDTH: f64 = 1.0;

/// Relative bracket width at which the root search stops.
const ROOT_TOL: f64 = 1e-15;

/// Eigenpair of ∫₋₁¹ exp(-|x − x'|/l) φ(x') dx' = λ φ(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode1d {
    /// Frequency ω of the eigenfunction.
    pub omega: f64,
    /// Even modes are cosines, odd modes sines.
    pub even: bool,
    pub eigenvalue: f64,
    /// L²(-1, 1) normalization factor.
    pub scale: f64,
}

impl Mode1d {
    pub fn eval(&self, x: f64) -> f64 {
        if self.even {
            self.scale * (self.omega * x).cos()
        } else {
            self.scale * (self.omega * x).sin()
        }
    }

    /// max |φ| over [-1, 1].
    pub fn sup_norm(&self) -> f64 {
        if self.even || self.omega * HALF_WIDTH >= FRAC_PI_2 {
            self.scale
        } else {
            self.scale * (self.omega * HALF_WIDTH).sin()
        }
    }
}

/// Bisection for a sign change of `f` on [lo, hi].
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * f(hi) > 0.0 {
        return None;
    }
    while hi - lo > ROOT_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The first `n` eigenpairs on (-1, 1) for correlation length `l`, by decreasing eigenvalue.
pub fn modes_1d(l: f64, n: usize) -> Result<Vec<Mode1d>> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::input(format!("correlation length {l} must be positive")));
    }
    let c = 1.0 / l;
    let a = HALF_WIDTH;
    let mut modes = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i / 2) as f64;
        let mode = if i % 2 == 0 {
            // c cos(ωa) − ω sin(ωa) = 0 on (kπ, kπ + π/2)/a
            let f = |w: f64| c * (w * a).cos() - w * (w * a).sin();
            let w = bisect(f, k * PI / a, (k * PI + FRAC_PI_2) / a)
                .ok_or_else(|| Error::numeric(format!("no bracketed root for even mode {i}")))?;
            let scale = 1.0 / (a + (2.0 * w * a).sin() / (2.0 * w)).sqrt();
            Mode1d { omega: w, even: true, eigenvalue: 2.0 * c / (w * w + c * c), scale }
        } else {
            // ω cos(ωa) + c sin(ωa) = 0 on ((k + 1/2)π, (k + 1)π)/a
            let f = |w: f64| w * (w * a).cos() + c * (w * a).sin();
            let w = bisect(f, (k * PI + FRAC_PI_2) / a, (k + 1.0) * PI / a)
                .ok_or_else(|| Error::numeric(format!("no bracketed root for odd mode {i}")))?;
            let scale = 1.0 / (a - (2.0 * w * a).sin() / (2.0 * w)).sqrt();
            Mode1d { omega: w, even: false, eigenvalue: 2.0 * c / (w * w + c * c), scale }
        };
        if !(mode.scale.is_finite() && mode.eigenvalue > 0.0) {
            return Err(Error::numeric(format!("degenerate eigenpair for mode {i}")));
        }
        modes.push(mode);
    }
    Ok(modes)
}

/// Index pairs (i, j) of 1D modes for the `n` largest products λᵢλⱼ.
///
/// Ties are broken by the pair itself.
pub fn tensor_order(lx: &[Mode1d], ly: &[Mode1d], n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize, f64)> = (0..lx.len())
        .flat_map(|i| (0..ly.len()).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, lx[i].eigenvalue * ly[j].eigenvalue))
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| (a.0, a.1).cmp(&(b.0, b.1))));
    pairs.into_iter().take(n).map(|(i, j, _)| (i, j)).collect()
}

/// a(x, y) = mean + c σ Σₘ yₘ √λₘ φₘ(x) on (-1, 1)², where c = 1/β₀ of `measure`
/// makes each c·yₘ unit-variance.
pub fn kl_expansion(sigma: f64, l1: f64, l2: f64, mean: f64, measure: Measure, m_max: usize) -> Result<CoefficientExpansion> {
    if !(sigma > 0.0 && mean > 0.0) {
        return Err(Error::input(format!("sigma = {sigma} and mean = {mean} must be positive")));
    }
    if m_max == 0 {
        return Err(Error::input("at least one expansion term is needed"));
    }
    let c_meas = 1.0 / RecurrenceTable::new(measure, 1)?.beta(0);
    let lx = modes_1d(l1, m_max)?;
    let ly = modes_1d(l2, m_max)?;
    let mut terms = Vec::with_capacity(m_max);
    let mut sups = Vec::with_capacity(m_max);
    for (i, j) in tensor_order(&lx, &ly, m_max) {
        let (mx, my) = (lx[i], ly[j]);
        let amp = c_meas * sigma * (mx.eigenvalue * my.eigenvalue).sqrt();
        terms.push(Field::function(move |x| amp * mx.eval(x[0]) * my.eval(x[1])));
        sups.push(amp * mx.sup_norm() * my.sup_norm());
    }
    CoefficientExpansion::new(Field::Constant(mean), mean, mean, terms, sups)
}
