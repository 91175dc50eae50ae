use avgmix::analysis::functionals::{distance_power, entropy_unchecked};
use avgmix::graph::{load_edge_list, make_graph, Graph, GraphSpec};
use avgmix::process::StateVector;
use avgmix::spectral::expected_state;
use avgmix::split::{apply_edge, q_value};
use proptest::prelude::*;

fn small_spec() -> impl Strategy<Value = GraphSpec> {
    prop_oneof![
        (2usize..12).prop_map(GraphSpec::Complete),
        (2usize..20).prop_map(GraphSpec::Path),
        (3usize..20).prop_map(GraphSpec::Cycle),
        (2usize..20).prop_map(GraphSpec::Star),
        (2usize..8).prop_map(GraphSpec::Dumbbell),
        (2usize..6).prop_map(|l| GraphSpec::BinaryTree((1 << l) - 1)),
        (1usize..6, 1usize..6).prop_map(|(a, b)| GraphSpec::Bipartite(a, b)),
        (0u64..50).prop_map(|seed| GraphSpec::Regular { n: 10, d: 3, seed }),
    ]
}

/// Random connected graph: a random spanning tree plus extra edges.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..16)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            let extra = prop::collection::vec((0..n, 0..n), 0..2 * n);
            (Just(n), parents, extra)
        })
        .prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> =
                parents.into_iter().enumerate().map(|(i, p)| (p, i + 1)).collect();
            for (a, b) in extra {
                let e = (a.min(b), a.max(b));
                if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
                    edges.push((a, b));
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
}

fn state_for(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, n)
}

fn spec_and_walk() -> impl Strategy<Value = (Graph, Vec<f64>, Vec<usize>)> {
    small_spec().prop_flat_map(|spec| {
        let g = make_graph(&spec).unwrap();
        let n = g.n();
        let m = g.edge_count();
        (Just(g), state_for(n), prop::collection::vec(0..m, 1..200))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn averaging_conserves_mass_and_contracts((g, v, walk) in spec_and_walk()) {
        let mut s = StateVector::new(v).unwrap();
        let mean = s.mean();
        let total = s.total();
        let scale: f64 = s.values().iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let mut l1 = distance_power(s.values(), mean, 1.0);
        let mut l2 = distance_power(s.values(), mean, 2.0);
        for e in walk {
            let (i, j) = g.edges()[e];
            s.average(i, j);
            let next_l1 = distance_power(s.values(), mean, 1.0);
            let next_l2 = distance_power(s.values(), mean, 2.0);
            prop_assert!(next_l1 <= l1 + 1e-12 * scale);
            prop_assert!(next_l2 <= l2 + 1e-12 * scale * scale);
            l1 = next_l1;
            l2 = next_l2;
        }
        prop_assert!((s.total() - total).abs() <= 1e-12 * scale);
    }

    #[test]
    fn averaging_keeps_probability_vectors((g, v, walk) in spec_and_walk()) {
        let w: Vec<f64> = v.iter().map(|x| x.abs() + 1e-3).collect();
        let z: f64 = w.iter().sum();
        let mut s = StateVector::new(w.iter().map(|x| x / z).collect()).unwrap();
        let h0 = entropy_unchecked(s.values());
        for e in walk {
            let (i, j) = g.edges()[e];
            s.average(i, j);
            prop_assert!(s.values().iter().all(|&x| x >= 0.0));
        }
        // Averaging is a doubly stochastic map, so entropy cannot drop.
        prop_assert!(entropy_unchecked(s.values()) >= h0 - 1e-12);
        prop_assert!((s.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn edge_list_round_trip(g in connected_graph()) {
        let loaded = load_edge_list(&g.render_edge_list()).unwrap();
        prop_assert_eq!(loaded, g);
    }

    #[test]
    fn graph_spec_display_round_trip(spec in small_spec()) {
        let parsed: GraphSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(parsed, spec);
    }

    #[test]
    fn expected_state_conserves_sum((g, v, _walk) in spec_and_walk(), t in 0u64..400) {
        let total: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let e = expected_state(&g, &v, t);
        prop_assert!((e.iter().sum::<f64>() - total).abs() <= 1e-9 * scale);
    }

    #[test]
    fn split_edge_preserves_order_and_mass(
        raw in prop::collection::vec(0f64..1.0, 3..24),
        pick in any::<prop::sample::Index>(),
    ) {
        let mut v = raw;
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = v.len();
        let edge = pick.index(n);
        let before_mass: f64 = v.iter().sum();
        let before_q = q_value(&v);
        let second = apply_edge(&mut v, edge);
        let mut after_mass: f64 = v.iter().sum();
        let mut after_q = q_value(&v);
        prop_assert!(v.windows(2).all(|w| w[0] >= w[1]));
        if let Some(w) = second {
            prop_assert!(edge == n - 1);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
            prop_assert!(w.windows(2).all(|p| p[0] >= p[1]));
            after_mass += w.iter().sum::<f64>();
            after_q += q_value(&w);
        }
        prop_assert!((after_mass - before_mass).abs() <= 1e-12 * n as f64);
        prop_assert!(after_q <= before_q + 1e-12 * (n * n) as f64);
    }
}
