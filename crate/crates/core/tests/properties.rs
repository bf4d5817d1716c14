use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qgdet::edgelist;
use qgdet::graph::{circulant_graph, complete_graph, gcd, make_metric, Graph, MetricGraph};
use qgdet::perturbation::{
    compressed_q_eigenvalues, eigenspaces, perturbed_spectrum_first_order, q_matrix, EdgePerturbation,
};
use qgdet::spectral::{analyze, r_matrix, spectral_determinant, symmetric_eigen, EIGEN_TOL};
use qgdet::trees::{enumerate_spanning_trees, kirchhoff_count, tree_estimate};
use qgdet::verify::random_connected_graph;

fn graph_from_seed(seed: u64) -> Graph {
    random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), 8, 16)
}

fn with_lengths(g: &Graph, raw: &[f64]) -> MetricGraph {
    let lengths = (0..g.num_edges()).map(|i| raw[i % raw.len()]).collect();
    MetricGraph::with_lengths(g.clone(), lengths).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_l_is_invariant_under_relabeling(
        seed in any::<u64>(),
        raw in prop::collection::vec(0.2f64..3.0, 1..16),
        shuffle in any::<u64>(),
    ) {
        let g = graph_from_seed(seed);
        let mut perm: Vec<usize> = (0..g.num_vertices()).collect();
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut ChaCha8Rng::seed_from_u64(shuffle));
        let h = g.relabel(&perm).unwrap();
        let a = spectral_determinant(&with_lengths(&g, &raw)).unwrap();
        let b = spectral_determinant(&with_lengths(&h, &raw)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn first_order_shifts_sum_to_trace(
        seed in any::<u64>(),
        edge in any::<prop::sample::Index>(),
        eps in -0.05f64..0.05,
        ell in 0.3f64..3.0,
    ) {
        // trace(Q) = 2, so the shifts add up to -2 eps / ell^2
        let g = graph_from_seed(seed);
        let e = edge.index(g.num_edges());
        let mg = make_metric(&g, ell, None).unwrap();
        let base: f64 = analyze(&mg).unwrap().spectrum.eigenvalues.iter().sum();
        let res = perturbed_spectrum_first_order(&mg, &EdgePerturbation::new(e, eps, ell).unwrap()).unwrap();
        let shifted: f64 = res.first_order_eigenvalues.iter().sum();
        let want = -2.0 * eps / (ell * ell);
        prop_assert!((shifted - base - want).abs() <= 1e-9, "{} vs {want}", shifted - base);
    }

    #[test]
    fn compressed_response_is_basis_independent(
        n in 4usize..9,
        edge in any::<prop::sample::Index>(),
        seed in any::<u64>(),
    ) {
        let g = complete_graph(n).unwrap();
        let mg = make_metric(&g, 1.0, None).unwrap();
        let s = symmetric_eigen(&r_matrix(&mg).unwrap(), EIGEN_TOL).unwrap();
        let block = eigenspaces(&s).unwrap().into_iter().max_by_key(|r| r.len()).unwrap();
        let basis = s.eigenvectors.columns(block.start, block.len()).into_owned();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = block.len();
        let m = DMatrix::from_fn(k, k, |_, _| rand::Rng::gen_range(&mut rng, -1.0..1.0));
        let rotation = m.qr().q();
        let q = q_matrix(&g, g.edge(edge.index(g.num_edges())).unwrap()).unwrap();
        let a = compressed_q_eigenvalues(&basis, &q).unwrap();
        let b = compressed_q_eigenvalues(&(&basis * rotation), &q).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn kirchhoff_matches_enumeration(seed in any::<u64>()) {
        let g = graph_from_seed(seed);
        prop_assert_eq!(kirchhoff_count(&g).count, enumerate_spanning_trees(&g).unwrap());
    }

    #[test]
    fn tree_estimate_is_homogeneous(
        seed in any::<u64>(),
        edge in any::<prop::sample::Index>(),
        eps in 0.0f64..1.0,
        scale in 0.1f64..10.0,
    ) {
        let g = graph_from_seed(seed);
        let e = edge.index(g.num_edges());
        let t = tree_estimate(&make_metric(&g, 1.0, Some((e, eps))).unwrap()).unwrap();
        let ts = tree_estimate(&make_metric(&g, scale, Some((e, eps * scale))).unwrap()).unwrap();
        prop_assert!((t - ts).abs() <= 1e-12 * t, "{t} vs {ts}");
    }

    #[test]
    fn edge_list_round_trips(seed in any::<u64>(), raw in prop::collection::vec(1e-3f64..1e3, 1..16)) {
        let mg = with_lengths(&graph_from_seed(seed), &raw);
        let back = edgelist::parse(&edgelist::render(&mg)).unwrap();
        prop_assert_eq!(back.graph().edges(), mg.graph().edges());
        prop_assert_eq!(back.lengths(), mg.lengths());
    }
}

#[test]
fn circulant_connectivity_follows_gcd() {
    for n in 3..=30usize {
        let half = n.div_ceil(2);
        for a1 in 1..half {
            for a2 in a1..half {
                let jumps: Vec<usize> = if a2 == a1 { vec![a1] } else { vec![a1, a2] };
                let connected = jumps.iter().fold(n, |g, &a| gcd(g, a)) == 1;
                match circulant_graph(n, &jumps) {
                    Ok(g) => assert!(connected && g.is_connected(), "C{n}{jumps:?}"),
                    Err(e) => assert!(!connected && e.exit_code() == 3, "C{n}{jumps:?}: {e}"),
                }
            }
        }
    }
}
