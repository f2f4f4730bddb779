mod common;

use fluidc::graph::{load_edge_list, write_edge_list};
use fluidc::{connected_components, Graph};
use proptest::prelude::*;

fn edge_lists() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..100).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..300)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loaded_graphs_are_simple_and_symmetric((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        for v in 0..n {
            let nb = g.neighbors(v);
            prop_assert!(!nb.contains(&v));
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            for &w in nb {
                prop_assert!(g.neighbors(w).contains(&v));
            }
        }
        for &(u, v) in &edges {
            prop_assert_eq!(g.has_edge(u, v), u != v);
        }
        let distinct: std::collections::HashSet<(usize, usize)> = edges
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        prop_assert_eq!(g.edge_count(), distinct.len());
    }

    #[test]
    fn edge_list_round_trip((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, edges).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = load_edge_list(buf.as_slice()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn components_match_union_find((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, edges).unwrap();
        let labeling = connected_components(&g);
        prop_assert_eq!(labeling.component_count(), common::component_count_union_find(&g));
        let roots = common::union_find_roots(&g);
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(
                    labeling.component_of[u] == labeling.component_of[v],
                    roots[u] == roots[v]
                );
            }
        }
        let total: usize = labeling.component_sizes.iter().sum();
        prop_assert_eq!(total, n);
    }
}
