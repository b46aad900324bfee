mod oracle;

use oracle::{adaptive_states, two_level_report, TwoLevelReport};
use sgfem::chaos::{MultiIndex, MultiIndexSet};
use sgfem::mesh::uniform_refine;
use sgfem::problems::{experiment1, experiment2, experiment3, ProblemSpec};

const STEPS: usize = 5;

fn reports(problem: &ProblemSpec) -> Vec<TwoLevelReport> {
    adaptive_states(problem, &problem.default_marking, STEPS)
        .iter()
        .map(|(mesh, p)| two_level_report(problem, mesh, p, problem.default_marking.m_bar))
        .collect()
}

fn check_all(problem: &ProblemSpec) {
    for (k, r) in reports(problem).iter().enumerate() {
        assert!(r.coarse_dofs <= 300, "step {k}: {} coarse dofs", r.coarse_dofs);
        assert!(r.kronecker_diff <= 1e-12, "step {k}: {r:?}");
        assert!(r.lower_bound_holds(), "step {k}: {r:?}");
        assert!((0.2..=5.0).contains(&r.ratio()), "step {k}: ratio {}", r.ratio());
        assert!(r.decomposition_error() <= 1e-10, "step {k}: {r:?}");
        assert!(r.pythagoras_error() <= 1e-9, "step {k}: {r:?}");
        assert!(r.parametric_diff <= 1e-10, "step {k}: {r:?}");
        assert!(r.spatial_residual_diff <= 1e-12, "step {k}: {r:?}");
    }
}

#[test]
fn experiment1_matches_dense_reference() {
    check_all(&experiment1().unwrap());
}

#[test]
fn experiment2_matches_dense_reference() {
    check_all(&experiment2(2.0).unwrap());
}

#[test]
fn experiment3_matches_dense_reference() {
    check_all(&experiment3(0.15).unwrap());
}

#[test]
fn richer_index_set_on_refined_mesh() {
    let problem = experiment2(2.0).unwrap();
    let (mesh, _) = uniform_refine(&problem.mesh);
    let p = MultiIndexSet::from_indices(
        ["(1)", "(0 1)", "(2)", "(1 1)", "(0 0 1)"].iter().map(|s| MultiIndex::parse(s).unwrap()),
    );
    let r = two_level_report(&problem, &mesh, &p, 2);
    assert!(r.coarse_dofs <= 300);
    assert!(r.kronecker_diff <= 1e-12, "{r:?}");
    assert!(r.lower_bound_holds(), "{r:?}");
    assert!(r.decomposition_error() <= 1e-10);
    assert!(r.pythagoras_error() <= 1e-9);
    assert!(r.parametric_diff <= 1e-10);
}
