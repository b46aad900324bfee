//! Marking strategies and the goal-oriented adaptive loop.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{detail_load, load, MatrixCache};
use crate::chaos::{MultiIndex, MultiIndexSet, RecurrenceTable};
use crate::error::{Error, Result};
use crate::estimator::{EstimatorInputs, IndicatorBundle, TwoLevelEstimator};
use crate::mesh::{refine, virtual_refined_set, Edge, Triangulation};
use crate::problems::ProblemSpec;
use crate::quadrature::TriangleRule;
use crate::solver::{solve, BlockVector, GalerkinOperator, GalerkinSolution, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use crate::sparse::{dot, Cholesky};

/// Parameters of the adaptive algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkingParams {
    /// Dörfler parameter for edges, in (0, 1].
    pub theta_x: f64,
    /// Dörfler parameter for indices, in (0, 1].
    pub theta_p: f64,
    /// Number of inactive parameters considered by the detail index set.
    pub m_bar: usize,
    /// Stopping tolerance on the product of primal and dual estimates.
    pub tol: f64,
    /// Iteration cap.
    pub max_iterations: usize,
}

impl MarkingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta_x", self.theta_x), ("theta_p", self.theta_p)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::input(format!("{name} = {v} is outside (0, 1]")));
            }
        }
        if self.m_bar < 1 {
            return Err(Error::input("m_bar must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::input(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// Linear solver and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub rule: TriangleRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOLERANCE, max_iterations: DEFAULT_MAX_ITERATIONS, rule: TriangleRule::SevenPoint }
    }
}

/// Minimal set of keys whose squared indicators reach θ times the squared total.
///
/// Keys are ranked by decreasing indicator, ties by increasing key. Zero
/// indicators are never marked.
pub fn doerfler<K: Ord + Clone>(indicators: &[(K, f64)], theta: f64) -> Vec<K> {
    let mut sorted: Vec<&(K, f64)> = indicators.iter().filter(|(_, v)| *v > 0.0).collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let total: f64 = sorted.iter().map(|(_, v)| v * v).sum();
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for (k, v) in sorted {
        if acc >= theta * total {
            break;
        }
        acc += v * v;
        marked.push(k.clone());
    }
    assert!(theta * total <= acc, "Dörfler criterion violated: {acc} < {theta} * {total}");
    marked
}

/// Combined marking: the smaller of the two sets (the primal one on ties), extended
/// by the same number of keys from the other set with the largest indicators of
/// that set. The result is sorted.
pub fn combine<K: Ord + Clone + Hash>(mu: &[K], mz: &[K], ind_u: &[(K, f64)], ind_z: &[(K, f64)]) -> Vec<K> {
    let (star, other, other_ind) = if mz.len() < mu.len() { (mz, mu, ind_u) } else { (mu, mz, ind_z) };
    let lookup: HashMap<&K, f64> = other_ind.iter().map(|(k, v)| (k, *v)).collect();
    let mut ranked: Vec<&K> = other.iter().collect();
    ranked.sort_by(|a, b| {
        let va = lookup.get(a).copied().unwrap_or(0.0);
        let vb = lookup.get(b).copied().unwrap_or(0.0);
        vb.total_cmp(&va).then_with(|| a.cmp(b))
    });
    let mut out: Vec<K> = star.to_vec();
    out.extend(ranked.into_iter().take(star.len()).cloned());
    out.sort();
    out.dedup();
    out
}

/// Error-reduction estimates (ρ_X, ρ_P).
///
/// ρ_X² = μ² Σ_{E∈R} ζ(E)² + ζ² Σ_{E∈R} μ(E)², and ρ_P likewise over the marked indices.
pub fn reduction_estimates(
    mu: f64,
    zeta: f64,
    primal: &IndicatorBundle,
    dual: &IndicatorBundle,
    refined_edges: &[Edge],
    marked_indices: &[MultiIndex],
) -> (f64, f64) {
    let sum_over = |ind: &[(Edge, f64)], keys: &[Edge]| -> f64 {
        let map: HashMap<Edge, f64> = ind.iter().copied().collect();
        keys.iter().map(|k| map.get(k).copied().unwrap_or(0.0).powi(2)).sum()
    };
    let sum_idx = |ind: &[(MultiIndex, f64)], keys: &[MultiIndex]| -> f64 {
        let map: HashMap<&MultiIndex, f64> = ind.iter().map(|(k, v)| (k, *v)).collect();
        keys.iter().map(|k| map.get(k).copied().unwrap_or(0.0).powi(2)).sum()
    };
    let rho_x = (mu * mu * sum_over(&dual.spatial, refined_edges) + zeta * zeta * sum_over(&primal.spatial, refined_edges)).sqrt();
    let rho_p = (mu * mu * sum_idx(&dual.parametric, marked_indices) + zeta * zeta * sum_idx(&primal.parametric, marked_indices)).sqrt();
    (rho_x, rho_p)
}

/// What the loop did after estimating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Spatial,
    Parametric,
    /// Tolerance reached (or iteration cap hit) at this iteration.
    Stop,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Spatial => "spatial",
            Decision::Parametric => "parametric",
            Decision::Stop => "stop",
        })
    }
}

/// Sizes of the marked sets of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MarkingCounts {
    pub primal: usize,
    pub dual: usize,
    pub combined: usize,
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// #interior vertices × #P.
    pub dofs: usize,
    pub mu: f64,
    pub zeta: f64,
    pub n_elements: usize,
    pub card_p: usize,
    /// Number of active parameters.
    pub active_m: usize,
    pub decision: Decision,
    /// G(u) = g(u₀).
    pub goal_value: f64,
    /// Wall-clock time since the loop started.
    pub seconds: f64,
    pub rho_x: f64,
    pub rho_p: f64,
    pub spatial_marking: MarkingCounts,
    pub parametric_marking: MarkingCounts,
    pub cg_iterations: (usize, usize),
}

impl IterationRecord {
    pub fn product(&self) -> f64 {
        self.mu * self.zeta
    }
}

/// Header of the convergence CSV.
pub const CONVERGENCE_HEADER: &str = "iter,dofs,mu,zeta,product,n_elements,card_P,active_M,decision,goal_value,seconds";

impl IterationRecord {
    /// One CSV row matching [`CONVERGENCE_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.8e},{:.8e},{:.8e},{},{},{},{},{:.8e},{:.3}",
            self.iter,
            self.dofs,
            self.mu,
            self.zeta,
            self.product(),
            self.n_elements,
            self.card_p,
            self.active_m,
            self.decision,
            self.goal_value,
            self.seconds
        )
    }
}

/// A parametric enrichment event.
#[derive(Debug, Clone, PartialEq)]
pub struct Enrichment {
    pub iter: usize,
    pub added: Vec<MultiIndex>,
    /// Display width M_P + M̄ of the index set before enrichment.
    pub width: usize,
}

impl Enrichment {
    /// Log line, e.g. "iter 4: (0 1) (2 0)".
    pub fn log_line(&self) -> String {
        let parts: Vec<String> = self.added.iter().map(|m| m.format_padded(self.width)).collect();
        format!("iter {}: {}", self.iter, parts.join(" "))
    }
}

/// How the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

/// State after the last iteration.
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub records: Vec<IterationRecord>,
    pub enrichments: Vec<Enrichment>,
    pub status: Status,
    pub mesh: Triangulation,
    pub index_set: MultiIndexSet,
    pub primal: GalerkinSolution,
    pub dual: GalerkinSolution,
    pub primal_indicators: IndicatorBundle,
    pub dual_indicators: IndicatorBundle,
}

impl AdaptiveResult {
    /// Σ_ℓ N_ℓ.
    pub fn total_dofs(&self) -> usize {
        self.records.iter().map(|r| r.dofs).sum()
    }
}

/// Everything computed on one (mesh, index set) pair.
pub struct Snapshot {
    pub primal: GalerkinSolution,
    pub dual: GalerkinSolution,
    pub primal_indicators: IndicatorBundle,
    pub dual_indicators: IndicatorBundle,
    pub goal_value: f64,
    pub cg_iterations: (usize, usize),
}

/// Solves the primal and dual problems on (T, P) and evaluates both estimates.
pub fn solve_and_estimate(
    problem: &ProblemSpec,
    mesh: &Triangulation,
    index_set: &MultiIndexSet,
    m_bar: usize,
    rec: &mut RecurrenceTable,
    cache: &mut MatrixCache,
    opts: &SolverOptions,
) -> Result<Snapshot> {
    let m_p = index_set.max_active();
    let m_range = m_p + m_bar;
    if m_range > problem.coefficient.len() {
        return Err(Error::input(format!(
            "expansion truncated at {} terms but {m_range} are needed",
            problem.coefficient.len()
        )));
    }
    rec.ensure(index_set.max_degree_overall() as usize + 2)?;
    let coeff = &problem.coefficient;
    let k0 = cache.get(mesh, coeff, 0, opts.rule)?;
    let coarse_terms: Vec<_> = (1..=m_range).map(|m| cache.get(mesh, coeff, m, opts.rule)).collect::<Result<_>>()?;
    let op = GalerkinOperator::new(index_set.clone(), k0.clone(), coarse_terms[..m_p].to_vec(), rec)?;
    let factor = Cholesky::factor(&k0)?;

    let f = load(mesh, &problem.primal, opts.rule)?;
    let g = load(mesh, &problem.goal, opts.rule)?;
    let (u, su) = solve(&op, &op.rhs(&f)?, &factor, opts.tol, opts.max_iterations)?;
    let (z, sz) = solve(&op, &op.rhs(&g)?, &factor, opts.tol, opts.max_iterations)?;

    let refinement = cache.uniform_refinement(mesh);
    let (fine, detail) = (&refinement.0, &refinement.1);
    let fine_k0 = cache.get(fine, coeff, 0, opts.rule)?;
    let fine_terms: Vec<Arc<_>> = (1..=m_p).map(|m| cache.get(fine, coeff, m, opts.rule)).collect::<Result<_>>()?;
    let fine_f = load(fine, &problem.primal, opts.rule)?;
    let fine_g = load(fine, &problem.goal, opts.rule)?;
    let est = TwoLevelEstimator::new(
        &op,
        EstimatorInputs {
            detail,
            fine_k0: &fine_k0,
            fine_terms: &fine_terms,
            coarse_terms: &coarse_terms,
            k0_factor: &factor,
            rec,
            m_bar,
        },
    )?;
    let primal_indicators = est.estimate(&u, &detail_load(&fine_f, detail))?;
    let dual_indicators = est.estimate(&z, &detail_load(&fine_g, detail))?;
    cache.retain_meshes(&[mesh.id()]);

    let zero = index_set.position(&MultiIndex::zero()).expect("zero index present");
    let goal_value = dot(&g, u.block(zero));
    let wrap = |c: BlockVector| GalerkinSolution { index_set: index_set.clone(), mesh_id: mesh.id(), coefficients: c };
    Ok(Snapshot {
        primal: wrap(u),
        dual: wrap(z),
        primal_indicators,
        dual_indicators,
        goal_value,
        cg_iterations: (su.iterations, sz.iterations),
    })
}

/// Runs the adaptive loop from the initial mesh and P₀ = {0, ε₁}.
pub fn run(problem: &ProblemSpec, params: &MarkingParams, opts: &SolverOptions) -> Result<AdaptiveResult> {
    run_with_observer(problem, params, opts, |_, _| {})
}

/// [`run`], calling `observer` after every iteration with its record and any enrichment.
pub fn run_with_observer(
    problem: &ProblemSpec,
    params: &MarkingParams,
    opts: &SolverOptions,
    mut observer: impl FnMut(&IterationRecord, Option<&Enrichment>),
) -> Result<AdaptiveResult> {
    params.validate()?;
    problem.primal.validate(&problem.mesh)?;
    problem.goal.validate(&problem.mesh)?;
    let start = Instant::now();
    let mut rec = RecurrenceTable::new(problem.measure, 4)?;
    let mut cache = MatrixCache::new();
    let mut mesh = problem.mesh.clone();
    let mut index_set = MultiIndexSet::from_indices([MultiIndex::unit(0)]);
    let mut records = Vec::new();
    let mut enrichments = Vec::new();

    for iter in 0.. {
        let snap = solve_and_estimate(problem, &mesh, &index_set, params.m_bar, &mut rec, &mut cache, opts)
            .map_err(|e| e.at_iteration(iter))?;
        let mu = snap.primal_indicators.total;
        let zeta = snap.dual_indicators.total;
        let mut record = IterationRecord {
            iter,
            dofs: mesh.n_interior() * index_set.len(),
            mu,
            zeta,
            n_elements: mesh.n_elements(),
            card_p: index_set.len(),
            active_m: index_set.active_parameters().len(),
            decision: Decision::Stop,
            goal_value: snap.goal_value,
            seconds: 0.0,
            rho_x: 0.0,
            rho_p: 0.0,
            spatial_marking: MarkingCounts::default(),
            parametric_marking: MarkingCounts::default(),
            cg_iterations: snap.cg_iterations,
        };

        let converged = mu * zeta <= params.tol;
        if converged || iter + 1 >= params.max_iterations {
            record.seconds = start.elapsed().as_secs_f64();
            observer(&record, None);
            records.push(record);
            return Ok(AdaptiveResult {
                records,
                enrichments,
                status: if converged { Status::Converged } else { Status::MaxIterations },
                mesh,
                index_set,
                primal: snap.primal,
                dual: snap.dual,
                primal_indicators: snap.primal_indicators,
                dual_indicators: snap.dual_indicators,
            });
        }

        let (pu, pz) = (&snap.primal_indicators, &snap.dual_indicators);
        let mx_u = doerfler(&pu.spatial, params.theta_x);
        let mx_z = doerfler(&pz.spatial, params.theta_x);
        let mx = combine(&mx_u, &mx_z, &pu.spatial, &pz.spatial);
        let mp_u = doerfler(&pu.parametric, params.theta_p);
        let mp_z = doerfler(&pz.parametric, params.theta_p);
        let mp = combine(&mp_u, &mp_z, &pu.parametric, &pz.parametric);
        record.spatial_marking = MarkingCounts { primal: mx_u.len(), dual: mx_z.len(), combined: mx.len() };
        record.parametric_marking = MarkingCounts { primal: mp_u.len(), dual: mp_z.len(), combined: mp.len() };

        let refined = virtual_refined_set(&mesh, &mx).map_err(|e| e.at_iteration(iter))?;
        let (rho_x, rho_p) = reduction_estimates(mu, zeta, pu, pz, &refined, &mp);
        record.rho_x = rho_x;
        record.rho_p = rho_p;
        if rho_x == 0.0 && rho_p == 0.0 {
            return Err(Error::Stagnation { iteration: iter });
        }

        let mut enrichment = None;
        if rho_x >= rho_p {
            record.decision = Decision::Spatial;
            mesh = refine(&mesh, &mx).map_err(|e| e.at_iteration(iter))?.0;
        } else {
            record.decision = Decision::Parametric;
            let width = index_set.max_active() + params.m_bar;
            index_set = index_set.union(mp.iter().cloned());
            enrichment = Some(Enrichment { iter, added: mp, width });
        }
        record.seconds = start.elapsed().as_secs_f64();
        observer(&record, enrichment.as_ref());
        records.push(record);
        enrichments.extend(enrichment);
    }
    unreachable!("the loop returns from inside")
}
