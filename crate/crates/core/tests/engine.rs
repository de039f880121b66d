use std::collections::BTreeMap;

use octodecomp::certify::parity_stats;
use octodecomp::engine::{
    allocate, build, check_feasible, execute, format_ranges, layerings, plan, reachable_p, Constructible, Family, Instance, Leaf,
    LeafSource, Plan, PlanNode, Request,
};
use octodecomp::graph::FamilyDescriptor as F;
use octodecomp::{build_family, certify, verify, Catalog, Error, VertexId};
use proptest::prelude::*;

fn tensor(m: u32, n: u32, lambda: u32) -> Instance {
    Instance::new(Family::Tensor, m, n, lambda)
}

fn wreath(m: u32, n: u32, lambda: u32) -> Instance {
    Instance::new(Family::Wreath, m, n, lambda)
}

fn leaf_names(p: &Plan) -> Vec<String> {
    p.leaves().iter().map(|l| l.name()).collect()
}

/// A plan made of copies of one block placed on disjoint host vertices.
fn disjoint_plan(ids: &[&str]) -> Plan {
    let cat = Catalog::builtin();
    let mut children = Vec::new();
    for (k, id) in ids.iter().enumerate() {
        let map: BTreeMap<VertexId, VertexId> = cat
            .get(id)
            .unwrap()
            .target()
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, VertexId::new(k as u32, i as u32)))
            .collect();
        children.push(PlanNode::Leaf(Leaf::block(id, map)));
    }
    Plan { instance: tensor(4, 4, 1), root: PlanNode::sum("test", children), trace: Vec::new() }
}

#[test]
fn plan_examples() {
    let cat = Catalog::builtin();
    assert_eq!(leaf_names(&plan(&tensor(4, 4, 1), cat).unwrap()), vec!["k4xk4"]);
    assert_eq!(leaf_names(&plan(&tensor(5, 4, 1), cat).unwrap()), vec!["p2xk5"; 3]);
    assert_eq!(leaf_names(&plan(&wreath(5, 2, 1), cat).unwrap()), vec!["k10_f1"]);
    let p = plan(&tensor(8, 5, 1), cat).unwrap();
    assert!(p.trace[0].contains("subcase 1.2"), "{:?}", p.trace);
}

#[test]
fn plans_partition_their_targets() {
    let cat = Catalog::builtin();
    for inst in [tensor(6, 8, 1), tensor(4, 6, 2), tensor(6, 6, 4), wreath(9, 2, 1), wreath(12, 6, 1), wreath(10, 4, 2), wreath(9, 3, 2)] {
        let p = plan(&inst, cat).unwrap();
        p.check_partition(cat).unwrap_or_else(|e| panic!("{inst}: {e}"));
        assert_eq!(p.total_parts(cat).unwrap() as u64, inst.edge_count() / 8);
    }
}

#[test]
fn allocation_examples() {
    let cat = Catalog::builtin();
    let two = disjoint_plan(&["k88", "k88"]);
    assert_eq!(allocate(&two, cat, 16, 0).unwrap().per_leaf, vec![(8, 0), (8, 0)]);
    assert!(matches!(allocate(&two, cat, 1, 15), Err(Error::NoAllocation { p: 1, q: 15 })));
    assert!(matches!(allocate(&two, cat, 3, 3), Err(Error::InvalidRequest(_))));

    let mixed = disjoint_plan(&["k10_f1", "k88"]);
    let alloc = allocate(&mixed, cat, 3, 10).unwrap();
    assert_eq!(alloc.per_leaf.iter().map(|x| x.0).sum::<usize>(), 3);
    assert_eq!(alloc.per_leaf.iter().map(|x| x.1).sum::<usize>(), 10);
    assert!(cat.get("k10_f1").unwrap().is_feasible(alloc.per_leaf[0].0, alloc.per_leaf[0].1));
    assert!(cat.get("k88").unwrap().is_feasible(alloc.per_leaf[1].0, alloc.per_leaf[1].1));
}

#[test]
fn feasibility_examples() {
    let cat = Catalog::builtin();
    let r = check_feasible(&tensor(4, 4, 1), cat);
    assert_eq!((r.edges, r.necessary_ok, r.parity_floor), (72, true, 8));
    let r = check_feasible(&tensor(3, 3, 1), cat);
    assert_eq!((r.edges, r.necessary_ok), (18, false));
    assert!(matches!(r.constructible, Constructible::Infeasible { .. }));
    let r = check_feasible(&wreath(5, 2, 1), cat);
    assert_eq!((r.edges, r.necessary_ok, r.parity_floor), (40, true, 0));
    assert_eq!(r.parity_excluded, vec![1]);
    let r = check_feasible(&wreath(16, 3, 1), cat);
    assert!(r.necessary_ok);
    assert!(matches!(r.constructible, Constructible::UnsupportedCase { .. }));
    let r = check_feasible(&wreath(4, 2, 1), cat);
    assert!(!r.necessary_ok);
}

#[test]
fn builds_verify_and_respect_requests() {
    let cat = Catalog::builtin();
    let cases = [(tensor(4, 4, 1), 9, 0), (tensor(4, 4, 1), 8, 1), (wreath(17, 3, 1), 20, 133), (wreath(8, 2, 2), 0, 28), (tensor(3, 3, 4), 4, 5)];
    for (instance, p, q) in cases {
        let cert = build(&Request { instance, p, q }, cat).unwrap_or_else(|e| panic!("{instance}: {e}"));
        assert!(verify(&cert).valid);
        assert_eq!((cert.p, cert.q), (p, q));
    }
}

#[test]
fn requests_below_the_parity_floor_fail() {
    let cat = Catalog::builtin();
    let r = build(&Request { instance: tensor(4, 4, 1), p: 7, q: 2 }, cat);
    assert!(matches!(r, Err(Error::NoAllocation { .. })));
    let r = build(&Request { instance: wreath(5, 2, 1), p: 1, q: 4 }, cat);
    assert!(matches!(r, Err(Error::NoAllocation { .. })));
    let r = build(&Request { instance: tensor(2, 8, 1), p: 7, q: 0 }, cat);
    assert!(matches!(r, Err(Error::Infeasible(_))));
}

#[test]
fn gaps_are_reported_as_unsupported() {
    let cat = Catalog::builtin();
    assert!(matches!(plan(&wreath(16, 3, 1), cat), Err(Error::UnsupportedCase(_))));
    assert!(matches!(plan(&wreath(5, 3, 4), cat), Err(Error::UnsupportedCase(_))));
    assert!(matches!(plan(&tensor(3, 3, 1), cat), Err(Error::Infeasible(_))));
    assert!(matches!(plan(&tensor(1, 3, 1), cat), Err(Error::InvalidRequest(_))));
}

#[test]
fn other_multiplicities_use_layers() {
    let cat = Catalog::builtin();
    for inst in [tensor(4, 5, 3), wreath(8, 2, 3), tensor(3, 3, 8)] {
        let p = plan(&inst, cat).unwrap_or_else(|e| panic!("{inst}: {e}"));
        assert!(p.trace[0].contains("layers"), "{:?}", p.trace);
        p.check_partition(cat).unwrap();
        let parts = (inst.edge_count() / 8) as usize;
        let cert = build(&Request { instance: inst, p: 0, q: parts }, cat).unwrap();
        assert!(verify(&cert).valid);
    }
    assert_eq!(layerings(1), vec![vec![1]]);
    assert!(layerings(6).iter().all(|l| l.iter().sum::<u32>() == 6));
}

#[test]
fn tensor_order_is_normalized() {
    let cat = Catalog::builtin();
    let a = build(&Request { instance: tensor(5, 4, 1), p: 5, q: 10 }, cat).unwrap();
    let b = build(&Request { instance: tensor(4, 5, 1), p: 5, q: 10 }, cat).unwrap();
    assert_eq!(a.target, b.target);
    assert_eq!(a.target, F::tensor(F::Complete(4), F::Complete(5)));
}

#[test]
fn builds_are_byte_identical() {
    let cat = Catalog::builtin();
    let req = Request { instance: wreath(9, 2, 1), p: 7, q: 11 };
    let a = certify::serialize(&build(&req, cat).unwrap());
    let b = certify::serialize(&build(&req, cat).unwrap());
    assert_eq!(a, b);
}

#[test]
fn fixed_leaves_execute() {
    let cat = Catalog::builtin();
    let p = plan(&wreath(3, 4, 1), cat).unwrap();
    assert!(p.leaves().iter().any(|l| matches!(l.source, LeafSource::Fixed(_))));
    let values = reachable_p(&p, cat).unwrap();
    for &pv in &values {
        let alloc = allocate(&p, cat, pv, 6 - pv).unwrap();
        assert!(verify(&execute(&p, &alloc, cat).unwrap()).valid);
    }
}

#[test]
fn range_formatting() {
    assert_eq!(format_ranges(&[0, 2, 3, 4, 7]), "0, 2..4, 7");
    assert_eq!(format_ranges(&[]), "");
}

fn grid_instance() -> impl Strategy<Value = Instance> {
    prop_oneof![
        (2u32..8, 2u32..8, prop::sample::select(vec![1u32, 2, 4])).prop_map(|(m, n, l)| tensor(m, n, l)),
        (2u32..10, 2u32..5, prop::sample::select(vec![1u32, 2, 4])).prop_map(|(m, n, l)| wreath(m, n, l)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_certificates_respect_the_parity_floor(inst in grid_instance(), pick in any::<prop::sample::Index>()) {
        let cat = Catalog::builtin();
        let Ok(p) = plan(&inst, cat) else { return Ok(()) };
        let values = reachable_p(&p, cat).unwrap();
        let parts = (inst.edge_count() / 8) as usize;
        let (_, floor) = parity_stats(&build_family(&inst.target()).unwrap().scaled(inst.lambda));
        let want = pick.index(parts + 1);
        let result = build(&Request { instance: inst, p: want, q: parts - want }, cat);
        match result {
            Ok(cert) => {
                prop_assert!(verify(&cert).valid);
                prop_assert!(cert.p >= floor);
                prop_assert!(values.contains(&want));
                if floor == 0 {
                    prop_assert_ne!(cert.p, 1);
                }
            }
            Err(Error::NoAllocation { .. }) => prop_assert!(!values.contains(&want)),
            Err(e) => prop_assert!(false, "{}: {}", inst, e),
        }
    }
}
