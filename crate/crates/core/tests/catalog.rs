use std::collections::BTreeSet;

use octodecomp::catalog::BLOCK_DATA_ENV;
use octodecomp::certify::parity_stats;
use octodecomp::{verify, Catalog, Error};

fn data() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/blocks.json")).unwrap()
}

fn all_but_p1(parts: usize) -> BTreeSet<(usize, usize)> {
    (0..=parts).filter(|&p| p != 1).map(|p| (p, parts - p)).collect()
}

fn from_p(low: usize, parts: usize) -> BTreeSet<(usize, usize)> {
    (low..=parts).map(|p| (p, parts - p)).collect()
}

#[test]
fn builtin_catalog_has_all_blocks() {
    let cat = Catalog::builtin();
    assert_eq!(cat.list_blocks().len(), 24);
    for b in cat.blocks() {
        assert_eq!(b.edge_count(), 8 * b.part_count(), "{}", b.id);
        assert!(b.part_count() <= 64);
    }
}

#[test]
fn printed_feasible_sets() {
    let cat = Catalog::builtin();
    let expect = |id: &str, set: BTreeSet<(usize, usize)>| {
        assert_eq!(cat.block_feasible(id).unwrap(), set, "{id}");
    };
    expect("p2_wr_k4", [(0, 4), (2, 2), (3, 1), (4, 0)].into_iter().collect());
    expect("k88", all_but_p1(8));
    expect("p2xk5", all_but_p1(5));
    expect("p2xk8", from_p(8, 14));
    expect("c4xk6", all_but_p1(15));
    expect("k2xk9", all_but_p1(9));
    expect("k3xk3_l4", all_but_p1(9));
    expect("k66_l2", all_but_p1(9));
    expect("k10_f1", all_but_p1(5));
    expect("k4_10", all_but_p1(5));
    expect("k46", all_but_p1(3));
    expect("c4xk3", all_but_p1(3));
    expect("k3xp4", all_but_p1(3));
    expect("k16_f1", all_but_p1(14));
    expect("k12_f1_l2", all_but_p1(15));
    expect("c8_wr_k2", all_but_p1(4));
    expect("k16_full", from_p(8, 15));
    expect("k4xk4", from_p(8, 9));
}

#[test]
fn every_block_builds_every_feasible_pair() {
    let cat = Catalog::builtin();
    let mut total = 0;
    for id in cat.list_blocks() {
        let check = cat.check_block(id).unwrap();
        assert!(check.failures.is_empty(), "{id}: {:?}", check.failures);
        total += check.certificates;
    }
    assert!(total >= 150, "{total} certificates");
}

#[test]
fn least_path_count_is_the_parity_floor() {
    let cat = Catalog::builtin();
    for b in cat.blocks() {
        let (_, floor) = parity_stats(b.target());
        assert_eq!(b.feasible_p().into_iter().min(), Some(floor), "{}", b.id);
        if floor == 0 {
            assert!(!b.is_feasible(1, b.part_count() - 1), "{} cannot have a single path", b.id);
        }
    }
}

#[test]
fn infeasible_pairs_are_refused() {
    let cat = Catalog::builtin();
    match cat.block_build("k88", 1, 7) {
        Err(Error::InfeasibleForBlock { block, p, q, feasible }) => {
            assert_eq!((block.as_str(), p, q), ("k88", 1, 7));
            assert!(feasible.contains(&(0, 8)));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(cat.block_build("nope", 0, 1), Err(Error::UnknownBlock(_))));
}

#[test]
fn builds_are_deterministic() {
    let cat = Catalog::builtin();
    let a = cat.block_build("c4xk6", 7, 8).unwrap();
    let b = cat.block_build("c4xk6", 7, 8).unwrap();
    assert_eq!(a, b);
    assert!(verify(&a).valid);
}

#[test]
fn reloading_the_data_gives_the_same_catalog() {
    let cat = Catalog::load(&data()).unwrap();
    let ids: Vec<&str> = cat.list_blocks();
    assert_eq!(ids, Catalog::builtin().list_blocks());
    for id in ids {
        assert_eq!(cat.block_feasible(id).unwrap(), Catalog::builtin().block_feasible(id).unwrap());
    }
}

#[test]
fn corrupted_data_is_rejected() {
    let text = data();
    // a rotation that is not an automorphism
    let bad_rotation = text.replacen("(a0 a1 a2 a3)(b0 b1 b2 b3)(c0 c1 c2 c3)(d0 d1 d2 d3)", "(a0 a1)", 1);
    assert!(matches!(Catalog::load(&bad_rotation), Err(Error::Catalog { .. })));
    // a seed edited so that the expansion no longer partitions the block
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let seed = &mut json["blocks"][2]["seeds"][0]["walk"];
    let walk = seed.as_str().unwrap().to_string();
    let mut labels: Vec<&str> = walk.split_whitespace().collect();
    labels.swap(0, 1);
    *seed = serde_json::Value::String(labels.join(" "));
    assert!(Catalog::load(&json.to_string()).is_err());
    // duplicate ids
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = json["blocks"][0].clone();
    json["blocks"].as_array_mut().unwrap().push(first);
    assert!(matches!(Catalog::load(&json.to_string()), Err(Error::Catalog { .. })));
    // syntax errors carry a position
    assert!(matches!(Catalog::load("{\"format\": 1, \"blocks\": [}"), Err(Error::Parse { .. })));
}

#[test]
fn environment_override_is_read() {
    // only checks the variable name and the fallback; the CLI tests exercise a real override
    assert_eq!(BLOCK_DATA_ENV, "OCTODECOMP_BLOCK_DATA");
    if std::env::var_os(BLOCK_DATA_ENV).is_none() {
        assert_eq!(Catalog::from_env().unwrap().list_blocks().len(), 24);
    }
}
