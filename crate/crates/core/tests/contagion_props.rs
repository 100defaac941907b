mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::ids;
use glens_core::contagion::{contagion_set, enumerate_paths, ContagionError, PathCaps, PropagationView};
use glens_core::{EnterpriseId, Exec, ViewMode};
use proptest::prelude::*;

fn id(s: &str) -> EnterpriseId {
    EnterpriseId::new(s)
}

#[test]
fn worked_example_contagion_set() {
    let snap = common::worked_example_snapshot();
    let set = contagion_set(&snap, &id("A")).unwrap();
    assert_eq!(set, ids(&["B", "C", "D", "E"]));
    assert!(ids(&["F", "G", "H"]).is_disjoint(&set));
}

#[test]
fn worked_example_paths_and_occurrences() {
    let r = enumerate_paths(&common::worked_example_snapshot(), &id("A"), PathCaps::default()).unwrap();
    let paths: Vec<Vec<&str>> = r.paths.iter().map(|p| p.iter().map(|x| x.as_str()).collect()).collect();
    assert_eq!(paths, vec![vec!["A", "B", "C", "E"], vec!["A", "B", "D", "E"]]);
    assert!(!r.truncated);
    assert_eq!(r.occurrences[&id("B")], 2);
    assert_eq!(r.occurrences[&id("C")], 1);
    assert_eq!(r.importance[&id("E")], 1.0);
    assert_eq!(r.importance[&id("D")], 0.5);
}

#[test]
fn cut_then_revert_restores_everything() {
    let mut view = PropagationView::new(&common::worked_example_snapshot());
    let before = view.enumerate_paths(&id("A"), PathCaps::default()).unwrap();
    view.apply_cut(&id("C"), &id("B")).unwrap();
    let cut = view.enumerate_paths(&id("A"), PathCaps::default()).unwrap();
    assert_eq!(cut.paths.len(), 1);
    assert_eq!(view.contagion_set(&id("A")).unwrap(), ids(&["B", "D", "E"]));
    view.apply_cut(&id("B"), &id("A")).unwrap();
    assert!(view.contagion_set(&id("A")).unwrap().is_empty());
    view.revert_cut(&id("B"), &id("A")).unwrap();
    view.revert_cut(&id("C"), &id("B")).unwrap();
    assert_eq!(view.enumerate_paths(&id("A"), PathCaps::default()).unwrap().fingerprint(), before.fingerprint());
    assert_eq!(view.apply_cut(&id("A"), &id("E")), Err(ContagionError::UnknownEdge("A".into(), "E".into())));
    assert!(matches!(view.contagion_set(&id("Z")), Err(ContagionError::UnknownNode(_))));
}

#[test]
fn length_cap_marks_truncation() {
    let caps = PathCaps { max_len: 2, max_paths: 100 };
    let r = enumerate_paths(&common::worked_example_snapshot(), &id("A"), caps).unwrap();
    assert!(r.truncated);
    assert!(r.paths.iter().all(|p| p.len() <= 3));
    let r = enumerate_paths(&common::worked_example_snapshot(), &id("A"), PathCaps { max_len: 8, max_paths: 1 }).unwrap();
    assert!(r.truncated);
    assert_eq!(r.paths.len(), 1);
}

fn random_view(n: usize, edges: &[(usize, usize)]) -> PropagationView {
    PropagationView::from_graph(Arc::new(glens_core::SimpleGraph::from_index_edges(n, edges, ViewMode::Directed)))
}

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3usize..9).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 0..20)))
        .prop_map(|(n, e)| (n, e.into_iter().filter(|(u, v)| u != v).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn contagion_set_is_reverse_reachability((n, edges) in edge_list(), seed in 0usize..9) {
        let seed = seed % n;
        let view = random_view(n, &edges);
        let a = common::adjacency(n, &edges);
        let got: BTreeSet<usize> = view.contagion_set(view.graph().id(seed)).unwrap().iter().map(|x| view.graph().index_of(x).unwrap()).collect();
        prop_assert_eq!(got, common::reverse_reach(&a, seed));
    }

    #[test]
    fn paths_are_simple_maximal_and_cover_the_contagion_set((n, edges) in edge_list(), seed in 0usize..9) {
        let seed = seed % n;
        let view = random_view(n, &edges);
        let g = view.graph();
        let r = view.enumerate_paths(g.id(seed), PathCaps::default()).unwrap();
        prop_assert!(!r.truncated);
        let mut covered = BTreeSet::new();
        for p in &r.paths {
            let idx: Vec<usize> = p.iter().map(|x| g.index_of(x).unwrap()).collect();
            prop_assert_eq!(idx[0], seed);
            let distinct: BTreeSet<usize> = idx.iter().copied().collect();
            prop_assert_eq!(distinct.len(), idx.len());
            for w in idx.windows(2) {
                prop_assert!(g.has_edge(w[1], w[0]), "step must go from borrower to its guarantor");
            }
            let last = *idx.last().unwrap();
            prop_assert!(g.predecessors(last).iter().all(|&(v, _)| distinct.contains(&v)));
            covered.extend(idx.into_iter().skip(1));
        }
        let set: BTreeSet<usize> = view.contagion_set(g.id(seed)).unwrap().iter().map(|x| g.index_of(x).unwrap()).collect();
        prop_assert_eq!(covered, set);
    }

    #[test]
    fn cutting_an_edge_never_raises_raw_occurrences((n, edges) in edge_list(), pick in any::<prop::sample::Index>()) {
        prop_assume!(!edges.is_empty());
        let mut view = random_view(n, &edges);
        let before = view.importance(PathCaps::default(), Exec::Sequential);
        let (u, v) = edges[pick.index(edges.len())];
        let (gu, gv) = (view.graph().id(u).clone(), view.graph().id(v).clone());
        view.apply_cut(&gu, &gv).unwrap();
        let after = view.importance(PathCaps::default(), Exec::Parallel);
        for seed in 0..n {
            let s = view.graph().id(seed).clone();
            let mut base = random_view(n, &edges);
            let b = base.enumerate_paths(&s, PathCaps::default()).unwrap();
            base.apply_cut(&gu, &gv).unwrap();
            let a = base.enumerate_paths(&s, PathCaps::default()).unwrap();
            for (node, &count) in &a.occurrences {
                prop_assert!(count <= b.occurrences.get(node).copied().unwrap_or(0));
            }
        }
        for (node, &count) in &after.occurrences {
            prop_assert!(count <= before.occurrences.get(node).copied().unwrap_or(0));
        }
        view.revert_cut(&gu, &gv).unwrap();
        prop_assert_eq!(view.importance(PathCaps::default(), Exec::Parallel), before);
    }
}
