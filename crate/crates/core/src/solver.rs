//! Tensor-product Galerkin operator and its preconditioned CG solver.
//!
//! The system is never formed: (Ax)_ν = K₀x_ν + Σₘ Σ_{μ=ν±εₘ} cₘ(ν,μ) Kₘx_μ,
//! with cₘ(ν,μ) = ∫ yₘ P_{νₘ} P_{μₘ} dπ from the three-term recurrence.

use std::sync::Arc;

use crate::chaos::{MultiIndex, MultiIndexSet, RecurrenceTable};
use crate::error::{Error, Result};
use crate::sparse::{dot, Cholesky, CsrMatrix};

/// Default relative tolerance on the preconditioned residual.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default iteration cap of the conjugate gradient method.
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

/// Coefficient vectors of all parametric modes, stored contiguously block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    block_len: usize,
    data: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(n_blocks: usize, block_len: usize) -> Self {
        BlockVector { block_len, data: vec![0.0; n_blocks * block_len] }
    }

    /// Wraps contiguous data; its length must be a multiple of `block_len`.
    pub fn from_vec(block_len: usize, data: Vec<f64>) -> Result<Self> {
        if block_len == 0 && !data.is_empty() || block_len > 0 && !data.len().is_multiple_of(block_len) {
            return Err(Error::input("block vector length is not a multiple of the block length"));
        }
        Ok(BlockVector { block_len, data })
    }

    pub fn n_blocks(&self) -> usize {
        self.data.len().checked_div(self.block_len).unwrap_or(0)
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.block_len..(i + 1) * self.block_len]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.block_len..(i + 1) * self.block_len]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, other: &BlockVector) -> f64 {
        dot(&self.data, &other.data)
    }

    /// self += alpha · other.
    pub fn axpy(&mut self, alpha: f64, other: &BlockVector) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// One off-diagonal block of the Galerkin operator: row ν += coef · Kₘ x_μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub row: usize,
    pub col: usize,
    pub term: usize,
    pub coef: f64,
}

/// The stochastic Galerkin operator on span{φᵢ P_ν : ν ∈ P}.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    index_set: MultiIndexSet,
    k0: Arc<CsrMatrix>,
    terms: Vec<Arc<CsrMatrix>>,
    couplings: Vec<Coupling>,
}

impl GalerkinOperator {
    /// Builds the operator; `terms[m]` is the stiffness matrix of aₘ (zero-based) and
    /// at least M_P of them must be supplied. `rec` must cover every degree in P plus one.
    pub fn new(
        index_set: MultiIndexSet,
        k0: Arc<CsrMatrix>,
        terms: Vec<Arc<CsrMatrix>>,
        rec: &RecurrenceTable,
    ) -> Result<Self> {
        let m_p = index_set.max_active();
        if terms.len() < m_p {
            return Err(Error::input(format!("{m_p} expansion matrices needed, {} supplied", terms.len())));
        }
        if index_set.max_degree_overall() as usize > rec.n_max() {
            return Err(Error::input("recurrence table too short for the index set"));
        }
        let n = k0.n_rows();
        if terms.iter().any(|k| k.n_rows() != n || k.n_cols() != n) || k0.n_cols() != n {
            return Err(Error::input("spatial matrices have inconsistent sizes"));
        }
        let couplings = couplings_between(index_set.as_slice(), &index_set, m_p, rec);
        Ok(GalerkinOperator { index_set, k0, terms, couplings })
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn k0(&self) -> &CsrMatrix {
        &self.k0
    }

    /// Stiffness matrix of aₘ (zero-based).
    pub fn term(&self, m: usize) -> &CsrMatrix {
        &self.terms[m]
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    /// Spatial dimension (interior vertices).
    pub fn block_len(&self) -> usize {
        self.k0.n_rows()
    }

    /// Total number of unknowns.
    pub fn dim(&self) -> usize {
        self.block_len() * self.index_set.len()
    }

    /// y = A x.
    pub fn apply(&self, x: &BlockVector) -> Result<BlockVector> {
        self.check_layout(x)?;
        let mut y = BlockVector::zeros(self.index_set.len(), self.block_len());
        for i in 0..self.index_set.len() {
            self.k0.matvec_add(1.0, x.block(i), y.block_mut(i));
        }
        for c in &self.couplings {
            self.terms[c.term].matvec_add(c.coef, x.block(c.col), y.block_mut(c.row));
        }
        Ok(y)
    }

    /// √(xᵀAx).
    pub fn energy_norm(&self, x: &BlockVector) -> Result<f64> {
        Ok(x.dot(&self.apply(x)?).max(0.0).sqrt())
    }

    /// √(Σ_ν x_νᵀK₀x_ν), the norm induced by the mean field.
    pub fn mean_energy_norm(&self, x: &BlockVector) -> Result<f64> {
        self.check_layout(x)?;
        Ok(mean_energy_norm(&self.k0, x))
    }

    /// Right-hand side of a parameter-independent functional: `load` in the zero block.
    pub fn rhs(&self, load: &[f64]) -> Result<BlockVector> {
        if load.len() != self.block_len() {
            return Err(Error::input("load vector length differs from the spatial dimension"));
        }
        let mut b = BlockVector::zeros(self.index_set.len(), self.block_len());
        let zero = self.index_set.position(&MultiIndex::zero()).expect("zero index present");
        b.block_mut(zero).copy_from_slice(load);
        Ok(b)
    }

    fn check_layout(&self, x: &BlockVector) -> Result<()> {
        if x.n_blocks() != self.index_set.len() || x.block_len() != self.block_len() {
            return Err(Error::input(format!(
                "block layout {}x{} does not match operator {}x{}",
                x.n_blocks(),
                x.block_len(),
                self.index_set.len(),
                self.block_len()
            )));
        }
        Ok(())
    }
}

/// √(Σ_ν x_νᵀK₀x_ν).
pub fn mean_energy_norm(k0: &CsrMatrix, x: &BlockVector) -> f64 {
    (0..x.n_blocks()).map(|i| dot(x.block(i), &k0.matvec(x.block(i)))).sum::<f64>().max(0.0).sqrt()
}

/// Couplings from block `col` of `cols` into block `row` of `rows` through
/// zero-based parameters m < `m_range`.
pub fn couplings_between(rows: &[MultiIndex], cols: &MultiIndexSet, m_range: usize, rec: &RecurrenceTable) -> Vec<Coupling> {
    let mut out = Vec::new();
    for (row, nu) in rows.iter().enumerate() {
        for m in 0..m_range {
            for delta in [1, -1] {
                let Some(mu) = nu.shifted(m, delta) else { continue };
                let Some(col) = cols.position(&mu) else { continue };
                let coef = rec.coupling(nu.get(m) as usize, mu.get(m) as usize);
                if coef != 0.0 {
                    out.push(Coupling { row, col, term: m, coef });
                }
            }
        }
    }
    out
}

/// Convergence history of a CG solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Relative preconditioned residual √(rᵀz / r₀ᵀz₀) after each iteration.
    pub history: Vec<f64>,
}

/// A Galerkin approximation Σ_ν u_ν P_ν on a fixed mesh.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    pub index_set: MultiIndexSet,
    pub mesh_id: u64,
    pub coefficients: BlockVector,
}

impl GalerkinSolution {
    /// Nodal vector u_ν, if ν ∈ P.
    pub fn mode(&self, nu: &MultiIndex) -> Option<&[f64]> {
        self.index_set.position(nu).map(|i| self.coefficients.block(i))
    }

    /// The mean u₀.
    pub fn mean(&self) -> &[f64] {
        self.mode(&MultiIndex::zero()).expect("zero index present")
    }
}

/// Solves A x = b by CG preconditioned with K₀⁻¹ on every block.
///
/// Stops when the relative preconditioned residual is at most `tol`.
pub fn solve(
    op: &GalerkinOperator,
    b: &BlockVector,
    precond: &Cholesky,
    tol: f64,
    max_iterations: usize,
) -> Result<(BlockVector, SolveStats)> {
    op.check_layout(b)?;
    if !b.is_finite() {
        return Err(Error::numeric("non-finite right-hand side"));
    }
    if precond.dim() != op.block_len() {
        return Err(Error::input("preconditioner size differs from the spatial dimension"));
    }
    let apply_precond = |r: &BlockVector| {
        let mut z = r.clone();
        for i in 0..z.n_blocks() {
            precond.solve_in_place(z.block_mut(i));
        }
        z
    };

    let mut x = BlockVector::zeros(b.n_blocks(), b.block_len());
    let mut r = b.clone();
    let mut z = apply_precond(&r);
    let mut rz = r.dot(&z);
    let rz0 = rz;
    let mut history = Vec::new();
    if rz0 <= 0.0 {
        return Ok((x, SolveStats { iterations: 0, history }));
    }
    let mut p = z.clone();
    for it in 1..=max_iterations {
        let ap = op.apply(&p)?;
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::numeric(format!("CG breakdown: pᵀAp = {pap} at iteration {it}")));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        z = apply_precond(&r);
        let rz_new = r.dot(&z);
        let rel = (rz_new.max(0.0) / rz0).sqrt();
        history.push(rel);
        if rel <= tol {
            return Ok((x, SolveStats { iterations: it, history }));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        let mut next = z.clone();
        next.axpy(beta, &p);
        p = next;
    }
    let last_residual = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NotConverged { iterations: max_iterations, last_residual, history })
}
