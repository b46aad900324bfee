//! Orthonormal polynomials of symmetric measures on [-1, 1], multi-indices and
//! index sets.

mod measure;
mod multi_index;
mod recurrence;

pub use measure::{truncated_gaussian_mass, Measure};
pub use multi_index::{detail_index_set, MultiIndex, MultiIndexSet};
pub use recurrence::{legendre_beta, RecurrenceTable};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn index_set() -> impl Strategy<Value = MultiIndexSet> {
        prop::collection::vec(prop::collection::vec(0u32..3, 0..4), 0..6)
            .prop_map(|v| MultiIndexSet::from_indices(v.into_iter().map(MultiIndex::new)))
    }

    proptest! {
        #[test]
        fn detail_set_is_disjoint_and_nonzero(p in index_set(), m_bar in 1usize..3) {
            let q = detail_index_set(&p, m_bar);
            for mu in &q {
                prop_assert!(!mu.is_zero());
                prop_assert!(!p.contains(mu));
            }
        }

        #[test]
        fn adding_detail_index_grows_active_count_by_at_most_m_bar(p in index_set(), m_bar in 1usize..3) {
            let q = detail_index_set(&p, m_bar);
            for mu in q {
                let grown = p.union([mu]);
                prop_assert!(grown.max_active() <= p.max_active() + m_bar);
            }
        }

        #[test]
        fn diagonal_coupling_vanishes(n in 0usize..8) {
            for m in [Measure::Uniform, Measure::TruncatedGaussian] {
                let t = RecurrenceTable::new(m, 9).unwrap();
                prop_assert_eq!(t.coupling(n, n), 0.0);
                prop_assert_eq!(t.coupling(n, n + 1), t.coupling(n + 1, n));
                prop_assert!(t.beta(n) > 0.0);
            }
        }
    }
}
