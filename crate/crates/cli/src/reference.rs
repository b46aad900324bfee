//! The `reference` command: overkill reference goal value and effectivity indices.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sgfem::adapt::SolverOptions;
use sgfem::assembly::{load, MatrixCache};
use sgfem::chaos::{detail_index_set, MultiIndex, MultiIndexSet, RecurrenceTable};
use sgfem::mesh::{read_mesh, uniform_refine, Triangulation};
use sgfem::problems::ProblemSpec;
use sgfem::solver::{solve, GalerkinOperator};
use sgfem::sparse::{dot, Cholesky};

use crate::config::{ReferenceConfig, RunConfig};
use crate::error::{io_err, CliError, Result};
use crate::run::{sig9, Summary, CONFIG_FILE, CONVERGENCE_FILE, MESH_FILE};

pub const REFERENCE_FILE: &str = "reference.json";
pub const EFFECTIVITY_FILE: &str = "effectivity.csv";
pub const EFFECTIVITY_HEADER: &str = "iter,dofs,product,goal_value,goal_error,effectivity";

/// Relative CG tolerance of the reference solve.
const REFERENCE_SOLVER_TOL: f64 = 1e-12;

/// Goal value of the overkill reference and the size of its discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub goal_value: f64,
    pub extra_refinements: usize,
    pub n_elements: usize,
    pub card_index_set: usize,
    pub dofs: usize,
    pub cg_iterations: usize,
    pub seconds: f64,
}

/// G(u_ref) with u_ref the P1 Galerkin solution on `extra_refinements` uniform
/// refinements of `mesh` over `index_set`, enlarged by its detail set if requested.
pub fn reference_goal(
    problem: &ProblemSpec,
    mesh: &Triangulation,
    index_set: &MultiIndexSet,
    m_bar: usize,
    cfg: &ReferenceConfig,
) -> Result<ReferenceSolution> {
    let start = Instant::now();
    let mut fine = mesh.clone();
    for _ in 0..cfg.extra_refinements {
        fine = uniform_refine(&fine).0;
    }
    let indices = if cfg.include_detail_set {
        index_set.union(detail_index_set(index_set, m_bar))
    } else {
        index_set.clone()
    };
    let dofs = fine.n_interior() * indices.len();
    if dofs > cfg.max_dofs {
        return Err(CliError::ReferenceTooLarge { dofs, cap: cfg.max_dofs });
    }

    let rule = SolverOptions::default().rule;
    let rec = RecurrenceTable::new(problem.measure, indices.max_degree_overall() as usize + 2)?;
    let mut cache = MatrixCache::new();
    let k0 = cache.get(&fine, &problem.coefficient, 0, rule)?;
    let terms: Vec<Arc<_>> = (1..=indices.max_active())
        .map(|m| cache.get(&fine, &problem.coefficient, m, rule))
        .collect::<sgfem::error::Result<_>>()?;
    let op = GalerkinOperator::new(indices.clone(), k0.clone(), terms, &rec)?;
    let factor = Cholesky::factor(&k0)?;
    let f = load(&fine, &problem.primal, rule)?;
    let g = load(&fine, &problem.goal, rule)?;
    let (u, stats) = solve(&op, &op.rhs(&f)?, &factor, REFERENCE_SOLVER_TOL, SolverOptions::default().max_iterations)?;
    let zero = indices.position(&MultiIndex::zero()).expect("zero index present");
    Ok(ReferenceSolution {
        goal_value: dot(&g, u.block(zero)),
        extra_refinements: cfg.extra_refinements,
        n_elements: fine.n_elements(),
        card_index_set: indices.len(),
        dofs,
        cg_iterations: stats.iterations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Θ_ℓ = μ_ℓζ_ℓ / |G_ref − G_ℓ|; infinite when the two goal values coincide.
pub fn effectivity(product: f64, goal_value: f64, reference: f64) -> f64 {
    product / (reference - goal_value).abs()
}

/// One row of `effectivity.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivityRow {
    pub iter: usize,
    pub dofs: usize,
    pub product: f64,
    pub goal_value: f64,
    pub goal_error: f64,
    pub effectivity: f64,
}

#[derive(Debug, Deserialize)]
struct ConvergenceRow {
    iter: usize,
    dofs: usize,
    product: f64,
    goal_value: f64,
}

/// (iter, dofs, product, goal_value) for every row of a convergence CSV.
pub fn read_convergence(path: &Path) -> Result<Vec<(usize, usize, f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Artifact { path: path.into(), msg: e.to_string() })?;
    reader
        .deserialize::<ConvergenceRow>()
        .map(|r| {
            r.map(|r| (r.iter, r.dofs, r.product, r.goal_value))
                .map_err(|e| CliError::Artifact { path: path.into(), msg: e.to_string() })
        })
        .collect()
}

pub fn effectivity_rows(history: &[(usize, usize, f64, f64)], reference: f64) -> Vec<EffectivityRow> {
    history
        .iter()
        .map(|&(iter, dofs, product, goal_value)| EffectivityRow {
            iter,
            dofs,
            product,
            goal_value,
            goal_error: (reference - goal_value).abs(),
            effectivity: effectivity(product, goal_value, reference),
        })
        .collect()
}

pub fn effectivity_csv(rows: &[EffectivityRow]) -> String {
    let mut s = format!("{EFFECTIVITY_HEADER}\n");
    for r in rows {
        s += &format!(
            "{},{},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            r.iter, r.dofs, r.product, r.goal_value, r.goal_error, r.effectivity
        );
    }
    s
}

/// Computes the reference for the run in `dir` and writes `reference.json` and
/// `effectivity.csv` next to its other artifacts.
pub fn reference_run(dir: &Path, overrides: Option<&ReferenceConfig>) -> Result<(ReferenceSolution, Vec<EffectivityRow>)> {
    let config = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let summary = Summary::read(dir)?;
    if summary.status == "failed" {
        return Err(CliError::Artifact { path: dir.join(crate::run::SUMMARY_FILE), msg: "the run did not complete".into() });
    }
    let mesh_path = dir.join(MESH_FILE);
    let mesh = read_mesh(&fs::read_to_string(&mesh_path).map_err(io_err(&mesh_path))?)?;
    let index_set = MultiIndexSet::from_indices(
        summary.index_set.iter().map(|s| MultiIndex::parse(s)).collect::<sgfem::error::Result<Vec<_>>>()?,
    );
    let problem = config.problem_spec()?;
    let cfg = overrides.unwrap_or(&config.reference);
    cfg.validate()?;
    let mut reference = reference_goal(&problem, &mesh, &index_set, summary.marking.m_bar, cfg)?;
    reference.goal_value = sig9(reference.goal_value);
    reference.seconds = sig9(reference.seconds);
    let rows = effectivity_rows(&read_convergence(&dir.join(CONVERGENCE_FILE))?, reference.goal_value);

    let path = dir.join(REFERENCE_FILE);
    fs::write(&path, serde_json::to_string_pretty(&reference).expect("serializable") + "\n").map_err(io_err(&path))?;
    let path = dir.join(EFFECTIVITY_FILE);
    fs::write(&path, effectivity_csv(&rows)).map_err(io_err(&path))?;
    Ok((reference, rows))
}
