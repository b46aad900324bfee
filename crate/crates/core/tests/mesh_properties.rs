use proptest::prelude::*;
use sgfem::assembly::point_in_triangle;
use sgfem::mesh::{refine, uniform_refine, virtual_refined_set, Point, Triangulation};
use sgfem::problems::Domain;

/// Value at `x` of the nodal hat of vertex `v` of `t`.
fn hat_value(t: &Triangulation, v: usize, x: Point) -> f64 {
    for k in 0..t.n_elements() {
        let p = t.element_points(k);
        if point_in_triangle(&p, x, 1e-12) {
            let el = t.elements()[k];
            let Some(i) = el.iter().position(|&w| w == v) else { return 0.0 };
            let area = |a: Point, b: Point, c: Point| (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let mut q = p;
            q[i] = x;
            return area(q[0], q[1], q[2]) / area(p[0], p[1], p[2]);
        }
    }
    panic!("point {x:?} outside the mesh");
}

fn find_vertex(t: &Triangulation, x: Point) -> Option<usize> {
    t.vertices().iter().position(|y| (y[0] - x[0]).abs() < 1e-14 && (y[1] - x[1]).abs() < 1e-14)
}

fn marked_subset(t: &Triangulation, mask: &[bool]) -> Vec<(usize, usize)> {
    t.interior_edges().into_iter().zip(mask.iter().cycle()).filter(|(_, m)| **m).map(|(e, _)| e).collect()
}

fn domains() -> impl Strategy<Value = Domain> {
    prop_oneof![Just(Domain::Square), Just(Domain::LShape), Just(Domain::SlitDelta)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn refinement_is_conforming_and_idempotent(domain in domains(), masks in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..40), 1..5)) {
        let mut t = domain.initial_mesh().unwrap();
        let area = t.area();
        for mask in &masks {
            let marked = marked_subset(&t, mask);
            let predicted = virtual_refined_set(&t, &marked).unwrap();
            let (fine, bisected) = refine(&t, &marked).unwrap();
            prop_assert_eq!(&predicted, &bisected);
            for e in &marked {
                prop_assert!(bisected.contains(e));
            }
            prop_assert!(fine.is_conforming());
            prop_assert!((fine.area() - area).abs() < 1e-12);
            prop_assert_eq!(fine.euler_characteristic(), t.euler_characteristic());
            prop_assert!(fine.n_vertices() >= t.n_vertices() + bisected.len());
            let (again, none) = refine(&fine, &[]).unwrap();
            prop_assert!(none.is_empty());
            prop_assert_eq!(again.vertices(), fine.vertices());
            prop_assert_eq!(again.elements(), fine.elements());
            t = fine;
        }
    }

    #[test]
    fn bisected_edge_hats_are_nested_in_the_uniform_refinement(domain in domains(), mask in prop::collection::vec(any::<bool>(), 1..40)) {
        let t = domain.initial_mesh().unwrap();
        let marked = marked_subset(&t, &mask);
        let (tilde, r) = refine(&t, &marked).unwrap();
        let (hat, _) = uniform_refine(&t);
        for (a, b) in r {
            let (pa, pb) = (t.vertices()[a], t.vertices()[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let vt = find_vertex(&tilde, mid).expect("midpoint is a vertex of the refined mesh");
            let vh = find_vertex(&hat, mid).expect("midpoint is a vertex of the uniform refinement");
            // The refined-mesh hat is piecewise linear on the uniform refinement:
            // interpolating it at fine vertices reproduces it at fine centroids.
            for k in 0..hat.n_elements() {
                let p = hat.element_points(k);
                let c = hat.element_centroid(k);
                let interp: f64 = p.iter().map(|&x| hat_value(&tilde, vt, x)).sum::<f64>() / 3.0;
                prop_assert!((interp - hat_value(&tilde, vt, c)).abs() < 1e-12);
            }
            prop_assert_eq!(hat_value(&hat, vh, mid), 1.0);
        }
    }
}

#[test]
fn minimum_angle_stays_bounded_under_repeated_local_refinement() {
    for domain in [Domain::Square, Domain::LShape, Domain::SlitDelta] {
        let mut t = domain.initial_mesh().unwrap();
        let initial = t.min_angle();
        for round in 0..12 {
            // refine towards the re-entrant corner or slit tip at the origin
            let edges = t.interior_edges();
            let dist = |e: &(usize, usize)| {
                let (a, b) = (t.vertices()[e.0], t.vertices()[e.1]);
                (0.5 * (a[0] + b[0])).hypot(0.5 * (a[1] + b[1]))
            };
            let dmin = edges.iter().map(dist).fold(f64::INFINITY, f64::min);
            let marked: Vec<_> = edges.iter().copied().filter(|e| dist(e) <= dmin * 1.5 + 1e-12).collect();
            t = refine(&t, &marked).unwrap().0;
            assert!(t.is_conforming());
            assert!(t.min_angle() >= initial / 4.0, "{domain} round {round}: {} vs {initial}", t.min_angle());
        }
    }
}
