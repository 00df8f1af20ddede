use gac_core::canon::{canonical_form, canonical_labeling, find_isomorphism};
use gac_core::{Graph, Mult};
use proptest::prelude::*;

fn graph_strategy(max_n: usize, with_inf: bool) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(move |n| {
        let entry = if with_inf {
            prop_oneof![8 => (0u64..3).prop_map(Mult::Fin), 1 => Just(Mult::Inf)].boxed()
        } else {
            (0u64..3).prop_map(Mult::Fin).boxed()
        };
        prop::collection::vec(prop::collection::vec(entry, n), n).prop_map(|rows| Graph::from_mult_matrix(&rows))
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn permuted_graphs_share_a_canonical_form((g, order) in graph_strategy(6, true).prop_flat_map(|g| {
        let n = g.len();
        (Just(g), permutation(n))
    })) {
        let h = g.permuted(&order).relabeled(|l| format!("x{l}")).unwrap();
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
        let map = find_isomorphism(&g, &h).expect("isomorphic");
        for i in 0..g.len() {
            for j in 0..g.len() {
                prop_assert_eq!(g.get(i, j), h.get(map[i], map[j]));
            }
        }
    }

    #[test]
    fn canonical_forms_decide_isomorphism(g in graph_strategy(4, false), h in graph_strategy(4, false)) {
        prop_assert_eq!(canonical_form(&g) == canonical_form(&h), find_isomorphism(&g, &h).is_some());
    }

    #[test]
    fn canonical_labeling_realizes_the_form(g in graph_strategy(5, true)) {
        let (form, order) = canonical_labeling(&g);
        let back = form.to_graph();
        let permuted = g.permuted(&order);
        for i in 0..g.len() {
            for j in 0..g.len() {
                prop_assert_eq!(permuted.get(i, j), back.get(i, j));
            }
        }
    }

    #[test]
    fn text_and_json_round_trip(g in graph_strategy(6, true)) {
        prop_assert_eq!(Graph::parse(&g.to_text()).unwrap(), g.clone());
        prop_assert_eq!(Graph::parse(&g.to_json()).unwrap(), g);
    }
}
