mod oracle;

use oracle::PolyOracle;
use proptest::prelude::*;
use sgfem::chaos::{legendre_beta, Measure, RecurrenceTable};
use sgfem::quadrature::composite_gauss_legendre;

const N: usize = 12;

/// max |∫ P_a P_b dπ − δ_ab| for a, b ≤ n_max, by quadrature on [-1, 1].
fn gram_error(rec: &RecurrenceTable, n_max: usize) -> f64 {
    let (y, w) = composite_gauss_legendre(-1.0, 1.0, 64, 20);
    let values: Vec<Vec<f64>> = y.iter().map(|&y| rec.eval_all(n_max, y)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..=n_max {
        for b in 0..=n_max {
            let g: f64 = (0..y.len()).map(|i| w[i] * rec.measure().density(y[i]) * values[i][a] * values[i][b]).sum();
            worst = worst.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

#[test]
fn legendre_polynomials_are_orthonormal() {
    let rec = RecurrenceTable::new(Measure::Uniform, N).unwrap();
    assert!(gram_error(&rec, N) <= 1e-10);
}

#[test]
fn truncated_gaussian_polynomials_are_orthonormal() {
    let rec = RecurrenceTable::new(Measure::TruncatedGaussian, N).unwrap();
    assert!(gram_error(&rec, N) <= 1e-8);
}

#[test]
fn legendre_coefficients_match_closed_form() {
    let rec = RecurrenceTable::by_stieltjes(Measure::Uniform, N).unwrap();
    for n in 0..=N {
        let exact = (n as f64 + 1.0) / ((2.0 * n as f64 + 1.0) * (2.0 * n as f64 + 3.0)).sqrt();
        assert!((rec.beta(n) - exact).abs() <= 1e-12, "n = {n}");
        assert!((legendre_beta(n) - exact).abs() <= 1e-15);
    }
}

#[test]
fn truncated_gaussian_first_coefficient() {
    let rec = RecurrenceTable::new(Measure::TruncatedGaussian, 1).unwrap();
    assert!((1.0 / rec.beta(0) - 1.8534).abs() <= 1e-3, "{}", 1.0 / rec.beta(0));
}

#[test]
fn coefficients_match_gram_schmidt() {
    for measure in [Measure::Uniform, Measure::TruncatedGaussian] {
        let rec = RecurrenceTable::new(measure, 8).unwrap();
        let oracle = PolyOracle::new(measure, 9);
        for (n, b) in oracle.betas().iter().enumerate() {
            assert!((rec.beta(n) - b).abs() <= 1e-10, "{measure:?} n = {n}: {} vs {b}", rec.beta(n));
        }
    }
}

#[test]
fn extending_the_table_keeps_existing_coefficients() {
    let short = RecurrenceTable::new(Measure::TruncatedGaussian, 4).unwrap();
    let mut long = short.clone();
    long.ensure(10).unwrap();
    assert!(long.n_max() >= 10);
    for n in 0..=4 {
        assert!((short.beta(n) - long.beta(n)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coupling_is_symmetric_and_tridiagonal(a in 0usize..10, b in 0usize..10, gauss in any::<bool>()) {
        let measure = if gauss { Measure::TruncatedGaussian } else { Measure::Uniform };
        let rec = RecurrenceTable::new(measure, 10).unwrap();
        prop_assert_eq!(rec.coupling(a, b), rec.coupling(b, a));
        if a.abs_diff(b) == 1 {
            prop_assert_eq!(rec.coupling(a, b), rec.beta(a.min(b)));
        } else {
            prop_assert_eq!(rec.coupling(a, b), 0.0);
        }
    }

    #[test]
    fn eval_agrees_with_eval_all(n in 0usize..10, y in -1.0f64..1.0) {
        let rec = RecurrenceTable::new(Measure::TruncatedGaussian, 10).unwrap();
        let all = rec.eval_all(n, y);
        prop_assert_eq!(all.len(), n + 1);
        prop_assert!((all[n] - rec.eval(n, y).unwrap()).abs() <= 1e-13 * all[n].abs().max(1.0));
    }
}
