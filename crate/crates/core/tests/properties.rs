use proptest::prelude::*;

use pca_core::experiment::split_snippets;
use pca_core::graph::{build_random, build_smallworld, build_torus};
use pca_core::markov::build_kernel;
use pca_core::mean_field::p_grid;
use pca_core::{Graph, LatticeDim, MapSpec, MeanFieldMap};

fn check_graph(g: &Graph) -> Result<(), TestCaseError> {
    for x in 0..g.n() {
        for &y in g.neighbors(x) {
            prop_assert_ne!(x, y as usize);
            prop_assert!(g.has_edge(y as usize, x));
        }
    }
    let back = Graph::from_edge_list(&g.to_edge_list()).unwrap();
    prop_assert_eq!(back.to_edge_list(), g.to_edge_list());
    prop_assert_eq!(back.edges(), g.edges());
    Ok(())
}

fn any_spec() -> impl Strategy<Value = MapSpec> {
    prop_oneof![
        (1u32..40).prop_map(|gamma| MapSpec::Grid { gamma }),
        (5u32..60, 0.1..0.95f64).prop_map(|(n, p_e)| MapSpec::RgFull { n, p_e }),
        (10u32..200, 0.2..0.95f64).prop_map(|(n, p_e)| MapSpec::RgNu { n, p_e }),
        (10u32..200, 0.2..0.95f64).prop_map(|(n, p_e)| MapSpec::GridPe { n, p_e }),
        (10u32..80, 0.05..0.95f64).prop_map(|(n, p_w)| MapSpec::SwComposite { n, gamma: 4, p_w }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_are_simple_and_round_trip(n in 2usize..60, p_edge in 0.0..1.0f64, seed: u64) {
        check_graph(&build_random(n, p_edge, seed).unwrap())?;
    }

    #[test]
    fn smallworlds_are_simple_and_keep_the_ring(n in 6usize..60, p_wire in 0.01..0.99f64, seed: u64) {
        let g = build_smallworld(n, 4, p_wire, seed).unwrap();
        check_graph(&g)?;
        for x in 0..n {
            prop_assert!(g.has_edge(x, (x + 1) % n) && g.has_edge(x, (x + 2) % n));
        }
    }

    #[test]
    fn tori_are_regular(side in 3usize..12, gamma in prop::sample::select(vec![4usize, 8])) {
        let g = build_torus(side, gamma, LatticeDim::Square).unwrap();
        check_graph(&g)?;
        prop_assert!(g.degrees().iter().all(|&d| d == gamma));
    }

    #[test]
    fn same_seed_gives_the_same_graph(n in 2usize..40, p_edge in 0.0..1.0f64, seed: u64) {
        prop_assert_eq!(build_random(n, p_edge, seed).unwrap(), build_random(n, p_edge, seed).unwrap());
    }

    #[test]
    fn maps_stay_in_the_unit_interval(spec in any_spec(), p in 0.0..=0.5f64, rho in 0.0..=1.0f64) {
        let map = MeanFieldMap::new(spec, p);
        prop_assume!(map.is_ok());
        let m = map.unwrap().eval(rho);
        prop_assert!((0.0..=1.0).contains(&m), "{}", m);
    }

    #[test]
    fn odd_neighbourhoods_are_symmetric(g in 0u32..20, p in 0.0..=0.5f64, rho in 0.0..=1.0f64) {
        let gamma = 2 * g + 1;
        prop_assert!((p_grid(gamma, p, 1.0 - rho) - (1.0 - p_grid(gamma, p, rho))).abs() < 1e-14);
    }

    #[test]
    fn snippet_means_average_back_to_the_series(values in prop::collection::vec(0.0..=1.0f64, 1..200), delta in 0.05..1.0f64) {
        let parts = split_snippets(&values, delta).unwrap();
        prop_assert_eq!(parts.first().unwrap().start, 0);
        prop_assert_eq!(parts.last().unwrap().end, values.len());
        for w in parts.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
            prop_assert!((values[w[1].start] - values[w[1].start - 1]).abs() > delta);
        }
        let weighted: f64 = parts.iter().map(|s| s.mean * s.len() as f64).sum();
        let total: f64 = values.iter().sum();
        prop_assert!((weighted - total).abs() < 1e-9);
    }

    #[test]
    fn kernels_are_stochastic(n in 1usize..80, gamma in 1u32..12, p in 0.0..=0.5f64) {
        let k = build_kernel(n, &MeanFieldMap::new(MapSpec::Grid { gamma }, p).unwrap()).unwrap();
        for i in 0..=n {
            let row = k.row(i);
            prop_assert!(row.iter().all(|&x| x >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
