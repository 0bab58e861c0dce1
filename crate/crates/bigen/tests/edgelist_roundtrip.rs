use std::collections::BTreeSet;

use bigen::edgelist::{load_edge_list, save_edge_list, Delimiter, EdgeListFormat};
use bigen_core::{generator, GeneratorParams};
use proptest::prelude::*;

fn line_set(text: &str) -> BTreeSet<String> {
    text.lines().map(str::to_owned).collect()
}

fn label() -> impl Strategy<Value = String> {
    "[a-z0-9_]{1,6}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn save_of_load_is_deduplicated_input(pairs in prop::collection::vec((label(), label()), 0..80)) {
        let text: String = pairs.iter().map(|(u, i)| format!("{u}\t{i}\n")).collect();
        let fmt = EdgeListFormat::default();
        let loaded = load_edge_list(text.as_bytes(), &fmt).unwrap();
        let distinct = line_set(&text);
        prop_assert_eq!(loaded.duplicates, pairs.len() - distinct.len());
        prop_assert_eq!(loaded.graph.edge_count(), distinct.len());

        let mut out = Vec::new();
        save_edge_list(&loaded.graph, Some((&loaded.users, &loaded.items)), &mut out, &fmt).unwrap();
        let out = String::from_utf8(out).unwrap();
        prop_assert_eq!(out.lines().count(), loaded.graph.edge_count());
        prop_assert_eq!(line_set(&out), distinct);
    }

    #[test]
    fn load_of_save_is_identity(m in 1usize..20, t in 0u64..200, seed in any::<u64>(), comma in any::<bool>()) {
        let params = GeneratorParams { m, iterations: t, u: 3, v: 2, ..Default::default() };
        let g = generator::run(params, seed).unwrap().into_graph();
        let fmt = EdgeListFormat::with_delimiter(if comma { Delimiter::Comma } else { Delimiter::Tab });
        let mut out = Vec::new();
        save_edge_list(&g, None, &mut out, &fmt).unwrap();
        let back = load_edge_list(out.as_slice(), &fmt).unwrap();
        prop_assert_eq!(back.duplicates, 0);
        // relabel through the recorded token of each dense index
        let mut edges: Vec<(usize, usize)> = back
            .graph
            .edges()
            .into_iter()
            .map(|(u, i)| (back.users.name(u).parse().unwrap(), back.items.name(i).parse().unwrap()))
            .collect();
        edges.sort();
        // isolated nodes do not appear in an edge list
        prop_assert_eq!(edges, g.edges());
    }
}

#[test]
fn exports_are_byte_identical() {
    let params = GeneratorParams { m: 10, iterations: 500, b: 0.4, ..Default::default() };
    let fmt = EdgeListFormat::default();
    let a = bigen::edgelist::edge_list_bytes(&generator::run(params, 3).unwrap().into_graph(), &fmt).unwrap();
    let b = bigen::edgelist::edge_list_bytes(&generator::run(params, 3).unwrap().into_graph(), &fmt).unwrap();
    assert_eq!(a, b);
}
