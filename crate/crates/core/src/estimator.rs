//! Two-level a posteriori error estimate.
//!
//! Spatial indicators are residuals against the detail hats of the uniform
//! refinement, scaled by the detail stiffness diagonal. Parametric indicators are
//! mean-field energy norms of decoupled error problems on X ⊗ span{P_ν}, ν ∈ Q.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::detail_coupling;
use crate::chaos::{detail_index_set, MultiIndex, RecurrenceTable};
use crate::error::{Error, Result};
use crate::mesh::{DetailStructure, Edge};
use crate::solver::{couplings_between, BlockVector, Coupling, GalerkinOperator};
use crate::sparse::{dot, Cholesky, CsrMatrix};

/// Local contributions of the two-level estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorBundle {
    /// μ(E) for every interior edge, in detail order.
    pub spatial: Vec<(Edge, f64)>,
    /// μ(ν) for every ν in the detail index set, in graded order.
    pub parametric: Vec<(MultiIndex, f64)>,
    /// √(Σ μ(E)² + Σ μ(ν)²).
    pub total: f64,
}

impl IndicatorBundle {
    fn from_parts(spatial: Vec<(Edge, f64)>, parametric: Vec<(MultiIndex, f64)>) -> Self {
        let total = (sum_sq(spatial.iter().map(|x| x.1)) + sum_sq(parametric.iter().map(|x| x.1))).sqrt();
        IndicatorBundle { spatial, parametric, total }
    }

    /// Σ μ(E)².
    pub fn spatial_sq(&self) -> f64 {
        sum_sq(self.spatial.iter().map(|x| x.1))
    }

    /// Σ μ(ν)².
    pub fn parametric_sq(&self) -> f64 {
        sum_sq(self.parametric.iter().map(|x| x.1))
    }

    /// CSV with header "edge_v0,edge_v1,indicator".
    pub fn spatial_csv(&self) -> String {
        let mut s = String::from("edge_v0,edge_v1,indicator\n");
        for ((a, b), v) in &self.spatial {
            let _ = writeln!(s, "{a},{b},{v:.8e}");
        }
        s
    }

    /// CSV with header "index,indicator".
    pub fn parametric_csv(&self) -> String {
        let mut s = String::from("index,indicator\n");
        for (nu, v) in &self.parametric {
            let _ = writeln!(s, "\"{nu}\",{v:.8e}");
        }
        s
    }
}

fn sum_sq(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|v| v * v).sum()
}

/// Matrices needed by the estimator on one mesh and index set.
pub struct EstimatorInputs<'a> {
    pub detail: &'a DetailStructure,
    /// Mean-field stiffness on the uniform refinement.
    pub fine_k0: &'a CsrMatrix,
    /// Stiffness of aₘ on the uniform refinement, at least M_P of them.
    pub fine_terms: &'a [Arc<CsrMatrix>],
    /// Stiffness of aₘ on the coarse mesh, at least M_P + M̄ of them.
    pub coarse_terms: &'a [Arc<CsrMatrix>],
    /// Cholesky factor of the coarse mean-field stiffness.
    pub k0_factor: &'a Cholesky,
    pub rec: &'a RecurrenceTable,
    pub m_bar: usize,
}

/// Precomputed detail couplings and detail index set for one (mesh, index set) pair.
pub struct TwoLevelEstimator<'a> {
    op: &'a GalerkinOperator,
    detail: &'a DetailStructure,
    detail_k0: CsrMatrix,
    detail_terms: Vec<CsrMatrix>,
    denominators: Vec<f64>,
    q: Vec<MultiIndex>,
    q_couplings: Vec<Coupling>,
    coarse_terms: Vec<Arc<CsrMatrix>>,
    k0_factor: &'a Cholesky,
}

impl<'a> TwoLevelEstimator<'a> {
    pub fn new(op: &'a GalerkinOperator, inputs: EstimatorInputs<'a>) -> Result<Self> {
        let p = op.index_set();
        let m_p = p.max_active();
        let m_range = m_p + inputs.m_bar;
        if inputs.m_bar == 0 {
            return Err(Error::input("the detail index set needs M_bar >= 1"));
        }
        if inputs.fine_terms.len() < m_p {
            return Err(Error::input(format!("{m_p} fine expansion matrices needed")));
        }
        if inputs.coarse_terms.len() < m_range {
            return Err(Error::input(format!("{m_range} coarse expansion matrices needed")));
        }
        if (p.max_degree_overall() as usize) + 1 > inputs.rec.n_max() {
            return Err(Error::input("recurrence table too short for the detail index set"));
        }
        let d = inputs.detail;
        let detail_k0 = detail_coupling(inputs.fine_k0, d);
        let detail_terms = inputs.fine_terms[..m_p].iter().map(|k| detail_coupling(k, d)).collect();
        let denominators: Vec<f64> = d.midpoint_dofs().iter().map(|&i| inputs.fine_k0.get(i, i)).collect();
        if let Some(j) = denominators.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::numeric(format!("detail denominator of edge {:?} is not positive", d.edges()[j])));
        }
        let q = detail_index_set(p, inputs.m_bar);
        let q_couplings = couplings_between(&q, p, m_range, inputs.rec);
        Ok(TwoLevelEstimator {
            op,
            detail: d,
            detail_k0,
            detail_terms,
            denominators,
            q,
            q_couplings,
            coarse_terms: inputs.coarse_terms[..m_range].to_vec(),
            k0_factor: inputs.k0_factor,
        })
    }

    /// The detail index set Q.
    pub fn detail_index_set(&self) -> &[MultiIndex] {
        &self.q
    }

    /// Detail denominators ‖a₀^{1/2}∇φ_E‖².
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// Residual F(φ_E P_ν) − B(u, φ_E P_ν) for every ν ∈ P (blocks) and detail edge E.
    ///
    /// `detail_load[j]` is the functional applied to the detail hat of edge j.
    pub fn spatial_residual(&self, u: &BlockVector, detail_load: &[f64]) -> Result<BlockVector> {
        let p = self.op.index_set();
        let n = self.detail.len();
        if detail_load.len() != n {
            return Err(Error::input("detail load length differs from the number of interior edges"));
        }
        if u.n_blocks() != p.len() || u.block_len() != self.op.block_len() {
            return Err(Error::input("solution layout does not match the operator"));
        }
        let mut r = BlockVector::zeros(p.len(), n);
        let zero = p.position(&MultiIndex::zero()).expect("zero index present");
        r.block_mut(zero).copy_from_slice(detail_load);
        for i in 0..p.len() {
            self.detail_k0.matvec_add(-1.0, u.block(i), r.block_mut(i));
        }
        for c in self.op.couplings() {
            self.detail_terms[c.term].matvec_add(-c.coef, u.block(c.col), r.block_mut(c.row));
        }
        Ok(r)
    }

    /// μ(E) for every interior edge.
    pub fn spatial_indicators(&self, u: &BlockVector, detail_load: &[f64]) -> Result<Vec<(Edge, f64)>> {
        let r = self.spatial_residual(u, detail_load)?;
        Ok((0..self.detail.len())
            .map(|j| {
                let s: f64 = (0..r.n_blocks()).map(|i| r.block(i)[j].powi(2)).sum();
                (self.detail.edges()[j], (s / self.denominators[j]).sqrt())
            })
            .collect())
    }

    /// Error functions e_ν solving K₀ e_ν = r_ν for every ν ∈ Q, in the order of Q.
    pub fn parametric_errors(&self, u: &BlockVector) -> Result<Vec<Vec<f64>>> {
        let n = self.op.block_len();
        let mut rhs = vec![vec![0.0; n]; self.q.len()];
        for c in &self.q_couplings {
            self.coarse_terms[c.term].matvec_add(-c.coef, u.block(c.col), &mut rhs[c.row]);
        }
        for (i, r) in rhs.iter_mut().enumerate() {
            if r.iter().any(|v| v != &0.0) {
                self.k0_factor.solve_in_place(r);
                if r.iter().any(|v| !v.is_finite()) {
                    return Err(Error::numeric(format!("parametric error solve failed for {}", self.q[i])));
                }
            }
        }
        Ok(rhs)
    }

    /// μ(ν) = ‖e_ν‖₀ for every ν ∈ Q.
    pub fn parametric_indicators(&self, u: &BlockVector) -> Result<Vec<(MultiIndex, f64)>> {
        let errors = self.parametric_errors(u)?;
        Ok(self
            .q
            .iter()
            .zip(errors)
            .map(|(nu, e)| (nu.clone(), dot(&e, &self.op.k0().matvec(&e)).max(0.0).sqrt()))
            .collect())
    }

    /// Both indicator families and the global estimate.
    pub fn estimate(&self, u: &BlockVector, detail_load: &[f64]) -> Result<IndicatorBundle> {
        let spatial = self.spatial_indicators(u, detail_load)?;
        let parametric = self.parametric_indicators(u)?;
        Ok(IndicatorBundle::from_parts(spatial, parametric))
    }
}
