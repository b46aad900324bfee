//! Dense reference computations for small instances.
//!
//! Everything here is assembled as full matrices and solved with dense Cholesky
//! factorizations, independently of the sparse operator, the CG solver and the
//! estimator. Orthonormal polynomials come from Gram–Schmidt on monomials.

#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use sgfem::adapt::{run, MarkingParams, SolverOptions};
use sgfem::assembly::{detail_load, load, stiffness};
use sgfem::chaos::{Measure, MultiIndex, MultiIndexSet, RecurrenceTable};
use sgfem::estimator::{EstimatorInputs, TwoLevelEstimator};
use sgfem::mesh::{uniform_refine, Triangulation};
use sgfem::problems::ProblemSpec;
use sgfem::quadrature::{composite_gauss_legendre, TriangleRule};
use sgfem::solver::{solve, GalerkinOperator};
use sgfem::sparse::{Cholesky, CsrMatrix};

pub fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.n_rows(), a.n_cols());
    for r in 0..a.n_rows() {
        for (c, v) in a.row(r) {
            d[(r, c)] += v;
        }
    }
    d
}

pub fn sparse(a: &DMatrix<f64>) -> CsrMatrix {
    let mut trip = Vec::new();
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            if a[(r, c)] != 0.0 {
                trip.push((r, c, a[(r, c)]));
            }
        }
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &trip)
}

pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().cholesky().expect("symmetric positive definite").solve(b)
}

/// Orthonormal polynomials of a measure, tabulated on a quadrature grid.
pub struct PolyOracle {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl PolyOracle {
    /// Degrees 0..=n_max by modified Gram–Schmidt of 1, y, y², … in L²_π.
    pub fn new(measure: Measure, n_max: usize) -> Self {
        let (nodes, w) = composite_gauss_legendre(-1.0, 1.0, 32, 20);
        let weights: Vec<f64> = nodes.iter().zip(&w).map(|(y, w)| w * measure.density(*y)).collect();
        let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&weights).map(|((x, y), w)| x * y * w).sum::<f64>();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for k in 0..=n_max {
            let mut v: Vec<f64> = nodes.iter().map(|y| y.powi(k as i32)).collect();
            for _ in 0..2 {
                for q in &values {
                    let c = ip(&v, q);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let n = ip(&v, &v).sqrt();
            v.iter_mut().for_each(|a| *a /= n);
            values.push(v);
        }
        PolyOracle { nodes, weights, values }
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// Quadrature nodes and density-weighted weights of the tabulation grid.
    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// p_n at grid node i.
    pub fn at(&self, n: usize, i: usize) -> f64 {
        self.values[n][i]
    }

    /// ∫ f(y) p_a(y) p_b(y) dπ(y).
    pub fn moment(&self, a: usize, b: usize, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.nodes.len()).map(|i| self.weights[i] * f(self.nodes[i]) * self.values[a][i] * self.values[b][i]).sum()
    }

    /// ∫ y p_a p_b dπ.
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        self.moment(a, b, |y| y)
    }

    /// Three-term coefficients βₙ = ∫ y pₙ pₙ₊₁ dπ.
    pub fn betas(&self) -> Vec<f64> {
        (0..self.n_max()).map(|n| self.coupling(n, n + 1)).collect()
    }
}

/// ∫ y_m P_ν P_μ dπ for multi-indices, zero-based parameter m.
fn multi_coupling(nu: &MultiIndex, mu: &MultiIndex, m: usize, poly: &PolyOracle) -> f64 {
    let len = nu.degrees().len().max(mu.degrees().len()).max(m + 1);
    if (0..len).any(|k| k != m && nu.get(k) != mu.get(k)) {
        return 0.0;
    }
    poly.coupling(nu.get(m) as usize, mu.get(m) as usize)
}

/// Galerkin matrix of B over span{φ T_i P_{ν_i}}: block (i, j) is
/// T_iᵀ (δ_ij K₀ + Σₘ ∫ yₘ P_{ν_i} P_{ν_j} dπ Kₘ) T_j, with `k[0] = K₀` and `k[m] = Kₘ`.
pub fn block_matrix(indices: &[MultiIndex], bases: &[&DMatrix<f64>], k: &[DMatrix<f64>], poly: &PolyOracle) -> DMatrix<f64> {
    let offsets: Vec<usize> = bases
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.ncols();
            Some(o)
        })
        .collect();
    let dim = bases.iter().map(|b| b.ncols()).sum();
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..indices.len() {
        for j in 0..indices.len() {
            let mut s = DMatrix::zeros(k[0].nrows(), k[0].ncols());
            if i == j {
                s += &k[0];
            }
            for m in 1..k.len() {
                let c = multi_coupling(&indices[i], &indices[j], m - 1, poly);
                if c != 0.0 {
                    s += c * &k[m];
                }
            }
            let blk = bases[i].transpose() * s * bases[j];
            a.view_mut((offsets[i], offsets[j]), (blk.nrows(), blk.ncols())).copy_from(&blk);
        }
    }
    a
}

/// Kronecker-sum matrix Σ G_m ⊗ K_m with identity spatial bases.
pub fn kronecker_matrix(indices: &[MultiIndex], k: &[DMatrix<f64>], poly: &PolyOracle) -> DMatrix<f64> {
    let id = DMatrix::identity(k[0].nrows(), k[0].nrows());
    let bases: Vec<&DMatrix<f64>> = indices.iter().map(|_| &id).collect();
    block_matrix(indices, &bases, k, poly)
}

/// Quantities compared against the dense reference on one (mesh, index set) pair.
#[derive(Debug, Clone)]
pub struct TwoLevelReport {
    pub coarse_dofs: usize,
    pub enhanced_dofs: usize,
    /// μ from the sparse estimator.
    pub mu: f64,
    /// ‖û − u‖_B with û solved densely on the enhanced space.
    pub error_b: f64,
    /// λ / K.
    pub lambda_over_k: f64,
    /// ‖ê‖₀² and ‖e_X̂P‖₀² + Σ‖e_ν‖₀², each solve dense.
    pub decomposition: (f64, f64),
    /// ‖u_ref − u‖²_B and ‖u_ref − û‖²_B + ‖û − u‖²_B.
    pub pythagoras: (f64, f64),
    /// max |dense Kronecker − apply(e_j)|.
    pub kronecker_diff: f64,
    /// max relative difference of μ(ν) against dense ‖e_ν‖₀.
    pub parametric_diff: f64,
    /// max difference of the spatial residual against the dense residual.
    pub spatial_residual_diff: f64,
}

impl TwoLevelReport {
    /// (λ/K) μ² ≤ ‖û − u‖²_B up to rounding.
    pub fn lower_bound_holds(&self) -> bool {
        self.lambda_over_k * self.mu * self.mu <= self.error_b * self.error_b * (1.0 + 1e-12)
    }

    pub fn ratio(&self) -> f64 {
        self.error_b / self.mu
    }

    pub fn decomposition_error(&self) -> f64 {
        (self.decomposition.0 - self.decomposition.1).abs() / self.decomposition.0.abs().max(f64::MIN_POSITIVE)
    }

    pub fn pythagoras_error(&self) -> f64 {
        (self.pythagoras.0 - self.pythagoras.1).abs() / self.pythagoras.0.abs().max(f64::MIN_POSITIVE)
    }
}

fn b_norm_sq(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

/// Runs the sparse pipeline and the dense reference on (mesh, P) for the primal problem.
///
/// Coarse matrices are Galerkin restrictions PᵀK̂P of the fine ones, so that the
/// coarse space is an exact subspace of the enhanced space.
pub fn two_level_report(problem: &ProblemSpec, mesh: &Triangulation, p: &MultiIndexSet, m_bar: usize) -> TwoLevelReport {
    let rule = TriangleRule::SevenPoint;
    let m_p = p.max_active();
    let m_range = m_p + m_bar;
    let (fine, detail) = uniform_refine(mesh);
    let pr = dense(detail.prolongation());
    let coeff = &problem.coefficient;
    let mut fine_k = vec![dense(&stiffness(&fine, coeff.mean(), rule).unwrap())];
    for m in 0..m_range {
        fine_k.push(dense(&stiffness(&fine, coeff.term(m), rule).unwrap()));
    }
    let coarse_k: Vec<DMatrix<f64>> = fine_k.iter().map(|k| pr.transpose() * k * &pr).collect();
    let fine_f = load(&fine, &problem.primal, rule).unwrap();
    let coarse_f: Vec<f64> = (pr.transpose() * DVector::from_column_slice(&fine_f)).iter().copied().collect();

    // sparse pipeline
    let max_deg = p.max_degree_overall() as usize + 2;
    let rec = RecurrenceTable::new(problem.measure, max_deg).unwrap();
    let k0 = Arc::new(sparse(&coarse_k[0]));
    let coarse_terms: Vec<Arc<CsrMatrix>> = coarse_k[1..].iter().map(|k| Arc::new(sparse(k))).collect();
    let op = GalerkinOperator::new(p.clone(), k0.clone(), coarse_terms[..m_p].to_vec(), &rec).unwrap();
    let factor = Cholesky::factor(&k0).unwrap();
    let (u, _) = solve(&op, &op.rhs(&coarse_f).unwrap(), &factor, 1e-14, 10_000).unwrap();
    let fine_k0 = sparse(&fine_k[0]);
    let fine_terms: Vec<Arc<CsrMatrix>> = fine_k[1..=m_p].iter().map(|k| Arc::new(sparse(k))).collect();
    let est = TwoLevelEstimator::new(
        &op,
        EstimatorInputs {
            detail: &detail,
            fine_k0: &fine_k0,
            fine_terms: &fine_terms,
            coarse_terms: &coarse_terms,
            k0_factor: &factor,
            rec: &rec,
            m_bar,
        },
    )
    .unwrap();
    let dl = detail_load(&fine_f, &detail);
    let bundle = est.estimate(&u, &dl).unwrap();
    let spatial_residual = est.spatial_residual(&u, &dl).unwrap();

    // dense reference
    let q: Vec<MultiIndex> = est.detail_index_set().to_vec();
    let pl: Vec<MultiIndex> = p.iter().cloned().collect();
    let poly = PolyOracle::new(problem.measure, max_deg + 1);
    let (nf, nc) = (pr.nrows(), pr.ncols());
    let id_f = DMatrix::<f64>::identity(nf, nf);

    // Kronecker check on the coarse system
    let kron = kronecker_matrix(&pl, &coarse_k[..=m_p], &poly);
    let mut kronecker_diff: f64 = 0.0;
    for j in 0..op.dim() {
        let mut e = sgfem::solver::BlockVector::zeros(pl.len(), nc);
        e.as_mut_slice()[j] = 1.0;
        let col = op.apply(&e).unwrap();
        for i in 0..op.dim() {
            kronecker_diff = kronecker_diff.max((col.as_slice()[i] - kron[(i, j)]).abs());
        }
    }

    // enhanced space V̂ = X̂ ⊗ P ⊕ X ⊗ Q
    let mut enh_idx = pl.clone();
    enh_idx.extend(q.iter().cloned());
    // P blocks use the fine basis, Q blocks the coarse one embedded by prolongation
    let enh_bases: Vec<&DMatrix<f64>> = (0..enh_idx.len()).map(|i| if i < pl.len() { &id_f } else { &pr }).collect();
    let a_hat = block_matrix(&enh_idx, &enh_bases, &fine_k, &poly);
    let zero_pos = pl.iter().position(|nu| nu.is_zero()).unwrap();
    let mut b_hat = DVector::zeros(a_hat.nrows());
    b_hat.rows_mut(zero_pos * nf, nf).copy_from_slice(&fine_f);
    let u_hat = dense_solve(&a_hat, &b_hat);
    let mut u_emb = DVector::zeros(a_hat.nrows());
    for i in 0..pl.len() {
        let ui = &pr * DVector::from_column_slice(u.block(i));
        u_emb.rows_mut(i * nf, nf).copy_from(&ui);
    }
    let diff = &u_hat - &u_emb;
    let error_b = b_norm_sq(&a_hat, &diff).sqrt();

    // decomposition of the mean-form error
    let b0_hat = block_matrix(&enh_idx, &enh_bases, &fine_k[..1], &poly);
    let r_hat = &b_hat - &a_hat * &u_emb;
    let e_hat = dense_solve(&b0_hat, &r_hat);
    let full = e_hat.dot(&(&b0_hat * &e_hat));
    let np = pl.len() * nf;
    let b0_p = block_matrix(&pl, &vec![&id_f; pl.len()], &fine_k[..1], &poly);
    let e_xp = dense_solve(&b0_p, &r_hat.rows(0, np).into_owned());
    let mut parts = e_xp.dot(&(&b0_p * &e_xp));
    let mut parametric_diff: f64 = 0.0;
    for (k, (nu, mu_nu)) in bundle.parametric.iter().enumerate() {
        assert_eq!(nu, &q[k]);
        let rk = r_hat.rows(np + k * nc, nc).into_owned();
        let ek = dense_solve(&coarse_k[0], &rk);
        let nk = ek.dot(&(&coarse_k[0] * &ek));
        parts += nk;
        let rel = (mu_nu * mu_nu - nk).abs() / nk.max(1e-300);
        parametric_diff = parametric_diff.max(if nk == 0.0 { mu_nu.abs() } else { rel });
    }

    // spatial residual at the detail rows of the P blocks
    let mut spatial_residual_diff: f64 = 0.0;
    for i in 0..pl.len() {
        for (j, &dof) in detail.midpoint_dofs().iter().enumerate() {
            spatial_residual_diff = spatial_residual_diff.max((spatial_residual.block(i)[j] - r_hat[i * nf + dof]).abs());
        }
    }

    // Pythagoras in X̂ ⊗ (P ∪ Q)
    let ref_bases: Vec<&DMatrix<f64>> = enh_idx.iter().map(|_| &id_f).collect();
    let a_ref = block_matrix(&enh_idx, &ref_bases, &fine_k, &poly);
    let mut b_ref = DVector::zeros(a_ref.nrows());
    b_ref.rows_mut(zero_pos * nf, nf).copy_from_slice(&fine_f);
    let u_ref = dense_solve(&a_ref, &b_ref);
    let lift = |x: &DVector<f64>| {
        let mut y = DVector::zeros(a_ref.nrows());
        y.rows_mut(0, np).copy_from(&x.rows(0, np));
        for k in 0..q.len() {
            let v = &pr * x.rows(np + k * nc, nc);
            y.rows_mut(np + k * nf, nf).copy_from(&v);
        }
        y
    };
    let (u_hat_ref, u_ref_emb) = (lift(&u_hat), lift(&u_emb));
    let lhs = b_norm_sq(&a_ref, &(&u_ref - &u_ref_emb));
    let rhs = b_norm_sq(&a_ref, &(&u_ref - &u_hat_ref)) + b_norm_sq(&a_ref, &(&u_hat_ref - &u_ref_emb));

    TwoLevelReport {
        coarse_dofs: op.dim(),
        enhanced_dofs: a_hat.nrows(),
        mu: bundle.total,
        error_b,
        lambda_over_k: coeff.lambda() / detail.overlap_constant() as f64,
        decomposition: (full, parts),
        pythagoras: (lhs, rhs),
        kronecker_diff,
        parametric_diff,
        spatial_residual_diff,
    }
}

/// (mesh, P) after each of the first `steps` iterations of the adaptive loop.
pub fn adaptive_states(problem: &ProblemSpec, params: &MarkingParams, steps: usize) -> Vec<(Triangulation, MultiIndexSet)> {
    (1..=steps)
        .map(|k| {
            let mut p = *params;
            p.max_iterations = k;
            p.tol = 1e-300;
            let r = run(problem, &p, &SolverOptions::default()).unwrap();
            (r.mesh, r.index_set)
        })
        .collect()
}
