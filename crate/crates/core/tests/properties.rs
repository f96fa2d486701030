use proptest::prelude::*;
use rand::Rng;

use reeb_edit::circlefn::TrigPoly;
use reeb_edit::distance::{edit_distance, DistanceOptions};
use reeb_edit::edits::find_deletable_pairs;
use reeb_edit::homotopy::stability_radius;
use reeb_edit::pseudodist::{pseudo_lower, pseudo_upper};
use reeb_edit::random::{random_graph, random_op, random_simple_morse, random_trig, rng};
use reeb_edit::{CircleFunction, LabelledReebGraph, Tolerances};

fn graph(seed: u64, n: usize) -> LabelledReebGraph {
    random_graph(&mut rng(seed), n)
}

fn even(lo: usize, hi: usize) -> impl Strategy<Value = usize> {
    (lo / 2..=hi / 2).prop_map(|k| 2 * k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realize_round_trips(seed in any::<u64>(), n in even(2, 12)) {
        let g = graph(seed, n);
        let back = LabelledReebGraph::extract(&g.realize(), &Tolerances::default()).unwrap();
        prop_assert!(g.is_isomorphic(&back, 0.0));
    }

    #[test]
    fn graphs_with_four_or_more_vertices_have_deletable_pairs(seed in any::<u64>(), n in even(4, 16)) {
        prop_assert!(!find_deletable_pairs(&graph(seed, n)).is_empty());
    }

    #[test]
    fn inverse_has_equal_cost(seed in any::<u64>(), n in even(2, 10)) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let op = random_op(&mut r, &g);
        let (h, c) = op.apply_with_cost(&g).unwrap();
        let (back, c_inv) = op.invert(&g).unwrap().apply_with_cost(&h).unwrap();
        prop_assert_eq!(c, c_inv);
        prop_assert!(back.is_isomorphic(&g, 0.0));
    }

    #[test]
    fn operations_compose_to_valid_graphs(seed in any::<u64>(), n in even(2, 8), steps in 1usize..20) {
        let mut r = rng(seed);
        let mut g = random_graph(&mut r, n);
        for _ in 0..steps {
            let op = random_op(&mut r, &g);
            g = op.apply(&g).unwrap();
            prop_assert!(LabelledReebGraph::new(g.vertices().to_vec()).is_ok());
        }
    }

    #[test]
    fn isomorphism_ignores_rotation_and_reflection(seed in any::<u64>(), n in even(2, 12), k in 0usize..12) {
        let g = graph(seed, n);
        let h = g.rotated(k % n).reversed();
        prop_assert!(g.is_isomorphic(&h, 0.0));
        prop_assert!(h.is_isomorphic(&g, 0.0));
        prop_assert_eq!(g.canonical_labels(), h.canonical_labels());
    }

    #[test]
    fn trig_derivatives_match_finite_differences(seed in any::<u64>(), degree in 1usize..6, theta in 0.0..std::f64::consts::TAU) {
        let f = random_trig(&mut rng(seed), degree, 1.0);
        let CircleFunction::Trig(p) = &f else { unreachable!() };
        let p: &TrigPoly = p;
        let h = 1e-5;
        for k in 0..3 {
            let fd = (p.derivative(theta + h, k) - p.derivative(theta - h, k)) / (2.0 * h);
            let exact = p.derivative(theta, k + 1);
            prop_assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "order {}: {} vs {}", k + 1, fd, exact);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distance_sandwich_replay_and_symmetry(seed in any::<u64>(), n1 in even(2, 6), n2 in even(2, 6)) {
        let mut r = rng(seed);
        let (a, b) = (random_graph(&mut r, n1), random_graph(&mut r, n2));
        let opts = DistanceOptions::default();
        let ab = edit_distance(&a, &b, &opts).unwrap();
        let ba = edit_distance(&b, &a, &opts).unwrap();
        prop_assert!(ab.lower <= ab.upper + 1e-9, "{:?}", ab);
        let (end, cost) = ab.witness.apply(&a).unwrap();
        prop_assert!(end.is_isomorphic(&b, 1e-9));
        // the script realizes the plan up to its slack η
        prop_assert!((cost - ab.upper - ab.eta).abs() < 1e-9 && ab.eta < 1e-3, "{} {:?}", cost, ab);
        prop_assert!((ab.lower - ba.lower).abs() < 1e-12);
        prop_assert!((ab.upper - ba.upper).abs() < 1e-9, "{} vs {}", ab.upper, ba.upper);
    }

    #[test]
    fn distance_vanishes_on_isomorphic_graphs(seed in any::<u64>(), n in even(2, 10), k in 0usize..10) {
        let g = graph(seed, n);
        let est = edit_distance(&g, &g.rotated(k % n).reversed(), &DistanceOptions::default()).unwrap();
        prop_assert_eq!(est.upper, 0.0);
    }

    #[test]
    fn distance_is_positive_on_relabelled_graphs(seed in any::<u64>(), n in even(2, 8), bump in 0.01f64..0.2) {
        let g = graph(seed, n);
        let mut labels = g.labels();
        // raising the global maximum keeps validity and changes the graph
        let top = (0..n).max_by(|&i, &j| labels[i].total_cmp(&labels[j])).unwrap();
        labels[top] += bump;
        let h = LabelledReebGraph::from_labels(&labels).unwrap();
        let est = edit_distance(&g, &h, &DistanceOptions::default()).unwrap();
        prop_assert!(est.lower > 0.0 && est.upper >= est.lower);
    }

    #[test]
    fn pseudo_bounds_are_ordered_and_symmetric(s1 in 0u64..10_000, s2 in 0u64..10_000, d1 in 1usize..4, d2 in 1usize..4) {
        let tol = Tolerances::default();
        let f = random_simple_morse(s1, d1, 1.0).unwrap();
        let g = random_simple_morse(s2, d2, 1.0).unwrap();
        let lo = pseudo_lower(&f, &g, &tol);
        prop_assert!((lo - pseudo_lower(&g, &f, &tol)).abs() < 1e-12);
        let up = pseudo_upper(&f, &g, 1024, &tol).unwrap().cost;
        let up_rev = pseudo_upper(&g, &f, 1024, &tol).unwrap().cost;
        prop_assert!(lo <= up + 1e-9, "{} > {}", lo, up);
        prop_assert!((up - up_rev).abs() < 1e-9);
    }

    #[test]
    fn small_perturbations_keep_the_graph(seed in any::<u64>(), degree in 1usize..4, frac in 0.0f64..0.5) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let f = random_simple_morse(r.gen(), degree, 1.0).unwrap();
        let radius = stability_radius(&f, &tol).unwrap();
        let p = random_trig(&mut r, degree, 1.0);
        let delta = frac * radius;
        let size = p.cr_norm(2, &tol).unwrap();
        // C² small: no critical point is born or lost, values move by ≤ δ
        let g = f.linear_combination(&p.scaled(delta * 1e-3 / size), 0.5).unwrap().scaled(2.0);
        let (gf, gg) = (
            LabelledReebGraph::extract(&f, &tol).unwrap(),
            LabelledReebGraph::extract(&g, &tol).unwrap(),
        );
        prop_assert!(gf.is_isomorphic(&gg, delta * 1e-3 + 1e-9));
    }
}
