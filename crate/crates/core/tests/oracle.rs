use octodecomp::factor::partitions;
use octodecomp::graph::FamilyDescriptor as F;
use octodecomp::oracle::{cover, enumerate_feasible, repair_candidates, search, search_graph, CoverOutcome, PartSpec, SearchBudget, SearchOutcome};
use octodecomp::{build_family, verify, Catalog, Error, MultiGraph, VertexId, Walk, WalkKind};
use proptest::prelude::*;

fn v(g: u32, i: u32) -> VertexId {
    VertexId::new(g, i)
}

#[test]
fn single_part_targets() {
    let budget = SearchBudget::default();
    match search(&F::Cycle(8), 1, 0, 1, &budget).unwrap() {
        SearchOutcome::Found(cert) => assert!(verify(&cert).valid),
        other => panic!("{other:?}"),
    }
    // a path of length 8 needs nine vertices
    assert_eq!(search(&F::Cycle(8), 1, 1, 0, &budget).unwrap(), SearchOutcome::ExhaustedNone);
    assert!(matches!(search(&F::PathLen(8), 1, 1, 0, &budget).unwrap(), SearchOutcome::Found(_)));
}

#[test]
fn enumeration_matches_the_catalog_on_small_blocks() {
    let cat = Catalog::builtin();
    for id in ["c4xk3", "k46", "k3xp4"] {
        let block = cat.get(id).unwrap();
        let (found, complete) = enumerate_feasible(block.target(), &SearchBudget::default()).unwrap();
        assert!(complete, "{id}");
        assert_eq!(found, block.feasible(), "{id}");
    }
}

#[test]
fn k4_times_k4_needs_eight_paths() {
    // 16 vertices of odd degree force at least 8 paths among the 9 parts
    let g = build_family(&F::tensor(F::Complete(4), F::Complete(4))).unwrap();
    let budget = SearchBudget { max_edges: 72, ..SearchBudget::default() };
    assert_eq!(search_graph(&g, 7, 2, &budget).unwrap(), CoverOutcome::ExhaustedNone);
}

#[test]
fn budget_and_request_errors() {
    let g = build_family(&F::CompleteBipartite(4, 6)).unwrap();
    let tiny = SearchBudget { node_limit: 3, ..SearchBudget::default() };
    assert_eq!(search_graph(&g, 0, 3, &tiny).unwrap(), CoverOutcome::BudgetExceeded);
    assert!(matches!(search_graph(&g, 0, 2, &SearchBudget::default()), Err(Error::InvalidRequest(_))));
    let big = build_family(&F::Complete(12)).unwrap();
    let specs = [PartSpec { kind: WalkKind::Cycle, len: 11, count: 6 }];
    assert!(matches!(cover(&big, &specs, &SearchBudget::default()), Err(Error::InvalidRequest(_))));
    let odd = build_family(&F::Complete(3)).unwrap();
    assert!(enumerate_feasible(&odd, &SearchBudget::default()).is_err());
}

#[test]
fn cover_with_other_lengths() {
    let g = build_family(&F::Complete(7)).unwrap();
    let specs = [PartSpec { kind: WalkKind::Cycle, len: 3, count: 7 }];
    match cover(&g, &specs, &SearchBudget::default()).unwrap() {
        CoverOutcome::Found(walks) => assert!(partitions(&g, &walks)),
        other => panic!("{other:?}"),
    }
    let specs = [PartSpec { kind: WalkKind::Cycle, len: 3, count: 2 }];
    let k5 = build_family(&F::Complete(5)).unwrap();
    assert!(cover(&k5, &specs, &SearchBudget::default()).is_err());
}

#[test]
fn repair_candidates_stay_close_and_inside_the_graph() {
    let g = build_family(&F::CompleteBipartite(4, 6)).unwrap();
    let walk = Walk::cycle(vec![v(0, 0), v(1, 0), v(0, 1), v(1, 1), v(0, 2), v(1, 2), v(0, 3), v(1, 3)]);
    let candidates = repair_candidates(&g, &walk, 1);
    assert!(!candidates.is_empty());
    for c in &candidates {
        assert_eq!(c.kind, walk.kind);
        let moved = c.vertices.iter().zip(&walk.vertices).filter(|(a, b)| a != b).count();
        assert!(moved <= 1);
        assert!(c.edges().iter().all(|&(a, b)| g.multiplicity(a, b) > 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn found_covers_verify(extra in 0usize..6, seed in 1u64..1000) {
        // a cycle plus chords on 10 vertices, trimmed to 16 edges
        let mut g = MultiGraph::new((0..10).map(|i| v(0, i)));
        let mut edges: Vec<(u32, u32)> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        edges.extend([(0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (0, 2)].iter().copied().cycle().skip(extra).take(6));
        for &(a, b) in &edges {
            if g.multiplicity(v(0, a), v(0, b)) == 0 {
                g.add_edge(v(0, a), v(0, b), 1).unwrap();
            }
        }
        let total = g.edge_count();
        prop_assume!(total.is_multiple_of(8));
        let budget = SearchBudget { seed, ..SearchBudget::default() };
        for p in 0..=total / 8 {
            if let CoverOutcome::Found(walks) = search_graph(&g, p, total / 8 - p, &budget).unwrap() {
                prop_assert!(partitions(&g, &walks));
                prop_assert_eq!(walks.iter().filter(|w| w.kind == WalkKind::Path).count(), p);
            }
        }
    }
}
