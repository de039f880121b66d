use std::collections::BTreeMap;

use octodecomp::graph::{apply_permutation, build_family, edge_key, parse_vertices, Embedded, FamilyDescriptor as F, Permutation};
use octodecomp::{Error, MultiGraph, VertexId, Walk};
use proptest::prelude::*;

fn v(g: u32, i: u32) -> VertexId {
    VertexId::new(g, i)
}

fn binom2(n: u64) -> u64 {
    n * (n - 1) / 2
}

/// Edge count straight from the definitions: a pair of product vertices is
/// adjacent when each coordinate pair is adjacent (tensor) or when the first
/// coordinates are adjacent (wreath over an edgeless second factor).
fn brute_product_edges(m: u32, n: u32, wreath: bool) -> u64 {
    let mut count = 0;
    for a in 0..m {
        for b in 0..n {
            for c in 0..m {
                for d in 0..n {
                    if (a, b) >= (c, d) {
                        continue;
                    }
                    let adjacent = if wreath { a != c } else { a != c && b != d };
                    count += adjacent as u64;
                }
            }
        }
    }
    count
}

#[test]
fn vertex_labels_round_trip() {
    for (text, id) in [("a0", v(0, 0)), ("c12", v(2, 12)), ("f3", v(5, 3))] {
        assert_eq!(text.parse::<VertexId>().unwrap(), id);
        assert_eq!(id.to_string(), text);
    }
    let far = v(40, 2);
    assert_eq!(far.to_string().parse::<VertexId>().unwrap(), far);
    assert!("".parse::<VertexId>().is_err());
    assert!("a".parse::<VertexId>().is_err());
    assert_eq!(parse_vertices("a0 b1  c2").unwrap(), vec![v(0, 0), v(1, 1), v(2, 2)]);
}

#[test]
fn family_edge_counts() {
    assert_eq!(build_family(&F::Complete(9)).unwrap().edge_count(), 36);
    assert_eq!(build_family(&F::CompleteBipartite(4, 6)).unwrap().edge_count(), 24);
    assert_eq!(build_family(&F::CompleteMinusF1(10)).unwrap().edge_count(), 40);
    assert_eq!(build_family(&F::Cycle(8)).unwrap().edge_count(), 8);
    assert_eq!(build_family(&F::PathLen(2)).unwrap().edge_count(), 2);
    assert_eq!(build_family(&F::Empty(5)).unwrap().edge_count(), 0);
    let scaled = build_family(&F::scaled(F::Complete(3), 4)).unwrap();
    assert_eq!(scaled.edge_count(), 12);
    assert!(!scaled.is_simple());
}

#[test]
fn invalid_descriptors_are_rejected() {
    assert!(matches!(build_family(&F::Cycle(2)), Err(Error::InvalidDescriptor(_))));
    assert!(matches!(build_family(&F::CompleteMinusF1(7)), Err(Error::InvalidDescriptor(_))));
    let bad_map = F::UnionOf(vec![Embedded { desc: F::Complete(3), map: Some(vec![v(0, 0)]) }]);
    assert!(build_family(&bad_map).is_err());
    let mut g = MultiGraph::new([v(0, 0), v(0, 1)]);
    assert!(g.add_edge(v(0, 0), v(0, 0), 1).is_err());
    assert!(g.add_edge(v(0, 0), v(0, 7), 1).is_err());
}

#[test]
fn tensor_and_wreath_match_definitions() {
    for m in 2..=6 {
        for n in 2..=6 {
            let t = build_family(&F::tensor(F::Complete(m), F::Complete(n))).unwrap();
            assert_eq!(t.edge_count() as u64, brute_product_edges(m, n, false), "K{m} x K{n}");
            assert_eq!(t.edge_count() as u64, (m * n) as u64 * ((m - 1) * (n - 1)) as u64 / 2);
            let w = build_family(&F::wreath(F::Complete(m), F::Empty(n))).unwrap();
            assert_eq!(w.edge_count() as u64, brute_product_edges(m, n, true), "K{m} o K{n}-bar");
            assert_eq!(w.edge_count() as u64, binom2(m as u64) * (n * n) as u64);
        }
    }
}

#[test]
fn small_isomorphisms_hold_on_degrees() {
    // K5 o K2-bar is K10 minus a perfect matching: 8-regular on 10 vertices
    let w = build_family(&F::wreath(F::Complete(5), F::Empty(2))).unwrap();
    assert_eq!(w.vertex_count(), 10);
    assert!(w.degrees().values().all(|&d| d == 8));
    // K2 x K_n is K_{n,n} minus a perfect matching
    let t = build_family(&F::tensor(F::Complete(2), F::Complete(9))).unwrap();
    assert!(t.degrees().values().all(|&d| d == 8));
    assert_eq!(t.edge_count(), 72);
}

#[test]
fn union_of_places_components() {
    let desc = F::UnionOf(vec![
        Embedded { desc: F::Cycle(4), map: Some(vec![v(0, 0), v(0, 1), v(0, 2), v(0, 3)]) },
        Embedded { desc: F::Cycle(4), map: Some(vec![v(0, 0), v(0, 2), v(0, 1), v(0, 3)]) },
    ]);
    let g = build_family(&desc).unwrap();
    assert_eq!(g.vertex_count(), 4);
    assert_eq!(g.edge_count(), 8);
    assert_eq!(g.multiplicity(v(0, 0), v(0, 1)), 1);
    assert_eq!(g.multiplicity(v(0, 0), v(0, 3)), 2);
}

#[test]
fn permutation_images_and_automorphisms() {
    let g = build_family(&F::Cycle(5)).unwrap();
    let domain = g.vertices().to_vec();
    let rho = Permutation::parse("(a0 a1 a2 a3 a4)", domain.clone()).unwrap();
    assert_eq!(rho.order(), 5);
    assert_eq!(rho.image(v(0, 4), 1).unwrap(), v(0, 0));
    assert_eq!(rho.image(v(0, 1), 7).unwrap(), v(0, 3));
    assert!(rho.is_automorphism(&g));
    let swap = Permutation::parse("(a0 a1)", domain.clone()).unwrap();
    assert!(!swap.is_automorphism(&g));
    assert!(matches!(Permutation::parse("(a0 b1)", domain), Err(Error::PermutationDomain(_))));

    let walk = Walk::path(vec![v(0, 0), v(0, 1), v(0, 2)]);
    let moved = apply_permutation(&rho, &walk, 2).unwrap();
    assert_eq!(moved.vertices, vec![v(0, 2), v(0, 3), v(0, 4)]);
}

#[test]
fn edge_keys_are_unordered() {
    assert_eq!(edge_key(v(1, 0), v(0, 3)), edge_key(v(0, 3), v(1, 0)));
}

fn small_descriptor() -> impl Strategy<Value = F> {
    let leaf = prop_oneof![
        (2u32..7).prop_map(F::Complete),
        (1u32..5, 1u32..5).prop_map(|(a, b)| F::CompleteBipartite(a, b)),
        (3u32..9).prop_map(F::Cycle),
        (1u32..6).prop_map(F::PathLen),
        (1u32..4).prop_map(|k| F::CompleteMinusF1(2 * k)),
    ];
    (leaf.clone(), leaf, 0u8..3, 1u32..4).prop_map(|(a, b, how, lambda)| {
        let base = match how {
            0 => a,
            1 => F::tensor(a, b),
            _ => match b {
                F::Complete(n) => F::wreath(a, F::Empty(n)),
                other => F::wreath(a, other),
            },
        };
        F::scaled(base, lambda)
    })
}

proptest! {
    #[test]
    fn handshake_holds(desc in small_descriptor()) {
        let g = build_family(&desc).unwrap();
        let degree_sum: usize = g.degrees().values().sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn scaling_multiplies_edges(desc in small_descriptor(), lambda in 1u32..5) {
        let g = build_family(&desc).unwrap();
        prop_assert_eq!(g.scaled(lambda).edge_count(), lambda as usize * g.edge_count());
    }

    #[test]
    fn descriptors_serialize_round_trip(desc in small_descriptor()) {
        let text = serde_json::to_string(&desc).unwrap();
        let back: F = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, desc);
    }

    #[test]
    fn embedding_preserves_edges(n in 3u32..7, shift in 0u32..20) {
        let g = build_family(&F::Complete(n)).unwrap();
        let map: BTreeMap<VertexId, VertexId> =
            g.vertices().iter().map(|&x| (x, VertexId::new(3, x.index + shift))).collect();
        let h = octodecomp::graph::embed(&g, &map).unwrap();
        prop_assert_eq!(h.edge_count(), g.edge_count());
        prop_assert!(h.vertices().iter().all(|x| x.group == 3));
    }
}
