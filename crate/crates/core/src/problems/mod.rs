//! Built-in model problems: domains, coefficients, measures and functionals.

mod fourier;
mod kl;
mod mollifier;

pub use fourier::{eigel_expansion, emn_expansion, fourier_frequencies, riemann_zeta};
pub use kl::{kl_expansion, modes_1d, tensor_order, Mode1d};
pub use mollifier::{mollifier, mollifier_constant, mollifier_goal};

use std::fmt;

use crate::adapt::MarkingParams;
use crate::assembly::{CoefficientExpansion, Field, FunctionalSpec, VectorRegion};
use crate::chaos::Measure;
use crate::error::{Error, Result};
use crate::mesh::{read_mesh, Point, Triangulation};

/// Number of expansion terms retained by the Fourier-mode coefficients.
pub const DEFAULT_TERMS: usize = 100;

/// Number of KL terms retained in the first experiment. The sup-norm sum of the
/// exponential-kernel modes grows without bound; 64 terms keep τ ≈ 0.89.
pub const KL_TERMS: usize = 64;

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 4] = ["experiment1", "experiment2_sigma2", "experiment2_sigma4", "experiment3"];

/// Computational domain of a built-in problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// (-1, 1)².
    Square,
    /// (-1, 1)² minus (-1, 0]².
    LShape,
    /// (-1, 1)² minus the thin wedge conv{(0, 0), (-1, δ), (-1, -δ)}, δ = 0.005.
    SlitDelta,
}

impl Domain {
    /// The embedded initial triangulation.
    pub fn initial_mesh(self) -> Result<Triangulation> {
        read_mesh(match self {
            Domain::Square => include_str!("../../assets/square.mesh"),
            Domain::LShape => include_str!("../../assets/lshape.mesh"),
            Domain::SlitDelta => include_str!("../../assets/slit.mesh"),
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
            Domain::SlitDelta => "slit_delta",
        })
    }
}

/// A complete parametric model problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub mesh: Triangulation,
    pub coefficient: CoefficientExpansion,
    pub measure: Measure,
    pub primal: FunctionalSpec,
    pub goal: FunctionalSpec,
    pub default_marking: MarkingParams,
}

impl ProblemSpec {
    /// Checks the functionals against the initial mesh.
    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient.tau() < 1.0) {
            return Err(Error::input(format!("{}: tau = {} is not below 1", self.name, self.coefficient.tau())));
        }
        self.primal.validate(&self.mesh)?;
        self.goal.validate(&self.mesh)
    }
}

/// Functional v ↦ -∫_T ∂v/∂x₁.
fn x1_derivative_functional(triangle: [Point; 3]) -> FunctionalSpec {
    FunctionalSpec { scalar: None, vector: vec![VectorRegion { triangle, value: [1.0, 0.0] }] }
}

/// Unit source f₀ ≡ 1.
fn unit_source() -> FunctionalSpec {
    FunctionalSpec { scalar: Some(Field::Constant(1.0)), vector: Vec::new() }
}

/// Square domain, exponential covariance KL field under the truncated Gaussian,
/// derivative functionals on opposite corner triangles.
pub fn experiment1() -> Result<ProblemSpec> {
    let spec = ProblemSpec {
        name: "experiment1".into(),
        domain: Domain::Square,
        mesh: Domain::Square.initial_mesh()?,
        coefficient: kl_expansion(0.15, 2.0, 2.0, 2.0, Measure::TruncatedGaussian, KL_TERMS)?,
        measure: Measure::TruncatedGaussian,
        primal: x1_derivative_functional([[-1.0, -1.0], [0.0, -1.0], [-1.0, 0.0]]),
        goal: x1_derivative_functional([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
        default_marking: MarkingParams { theta_x: 0.5, theta_p: 0.9, m_bar: 1, tol: 1e-4, max_iterations: 200 },
    };
    spec.validate()?;
    Ok(spec)
}

/// L-shaped domain, Fourier-mode coefficient with τ = 0.9 under the uniform
/// measure, unit source and a derivative goal near the lower right corner.
pub fn experiment2(sigma: f64) -> Result<ProblemSpec> {
    let amplitude = 0.9 / riemann_zeta(sigma)?;
    let spec = ProblemSpec {
        name: format!("experiment2_sigma{sigma}"),
        domain: Domain::LShape,
        mesh: Domain::LShape.initial_mesh()?,
        coefficient: eigel_expansion(amplitude, sigma, DEFAULT_TERMS)?,
        measure: Measure::Uniform,
        primal: unit_source(),
        goal: x1_derivative_functional([[0.5, -1.0], [1.0, -1.0], [1.0, -0.5]]),
        default_marking: MarkingParams { theta_x: 0.3, theta_p: 0.8, m_bar: 1, tol: 1e-4, max_iterations: 200 },
    };
    spec.validate()?;
    Ok(spec)
}

/// Slit domain, near-degenerate Fourier-mode coefficient, unit source and a
/// mollifier goal of radius `radius` centered at (0.4, -0.5).
pub fn experiment3(radius: f64) -> Result<ProblemSpec> {
    let mesh = Domain::SlitDelta.initial_mesh()?;
    let goal = mollifier_goal(&mesh, [0.4, -0.5], radius)?;
    let spec = ProblemSpec {
        name: "experiment3".into(),
        domain: Domain::SlitDelta,
        coefficient: emn_expansion(0.1, 0.005, 2.0, 0.6, DEFAULT_TERMS)?,
        measure: Measure::Uniform,
        primal: unit_source(),
        goal,
        mesh,
        default_marking: MarkingParams { theta_x: 0.3, theta_p: 0.8, m_bar: 1, tol: 5e-3, max_iterations: 200 },
    };
    spec.validate()?;
    Ok(spec)
}

/// Looks up a built-in problem by one of [`PROBLEM_NAMES`].
pub fn by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "experiment1" => experiment1(),
        "experiment2_sigma2" => experiment2(2.0),
        "experiment2_sigma4" => experiment2(4.0),
        "experiment3" => experiment3(0.15),
        _ => Err(Error::input(format!("unknown problem '{name}'; expected one of {}", PROBLEM_NAMES.join(", ")))),
    }
}
