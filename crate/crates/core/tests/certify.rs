use octodecomp::certify::{deserialize, parity_stats, serialize, Location};
use octodecomp::graph::FamilyDescriptor as F;
use octodecomp::{build_family, verify, Catalog, Certificate, Error, VertexId, Walk, WalkKind};
use proptest::prelude::*;

fn v(g: u32, i: u32) -> VertexId {
    VertexId::new(g, i)
}

fn c8_cert() -> Certificate {
    Certificate::new(F::Cycle(8), 1, vec![Walk::cycle((0..8).map(|i| v(0, i)).collect())])
}

fn localized(cert: &Certificate) -> bool {
    let report = verify(cert);
    !report.valid && report.violations.iter().any(|x| !matches!(x.location, Location::Certificate))
}

#[test]
fn trivial_certificates_verify() {
    assert!(verify(&c8_cert()).valid);
    let p8 = Certificate::new(F::PathLen(8), 1, vec![Walk::path((0..9).map(|i| v(0, i)).collect())]);
    assert!(verify(&p8).valid);
    assert_eq!((p8.p, p8.q), (1, 0));
}

#[test]
fn shape_defects_are_reported_per_part() {
    let short = Certificate::new(F::Cycle(8), 1, vec![Walk::cycle((0..7).map(|i| v(0, i)).collect())]);
    let report = verify(&short);
    assert!(!report.valid);
    assert!(report.violations.iter().any(|x| x.location == Location::Part(0)));

    let mut repeat = c8_cert();
    repeat.parts[0].vertices[3] = v(0, 0);
    assert!(localized(&repeat));
}

#[test]
fn swapped_vertex_breaks_the_cover() {
    let cert = Catalog::builtin().block_build("k10_f1", 5, 0).unwrap();
    assert!(verify(&cert).valid);
    let mut bad = cert.clone();
    let w = &mut bad.parts[2].vertices;
    w[4] = if w[4] == v(0, 0) { v(1, 1) } else { v(0, 0) };
    let report = verify(&bad);
    assert!(!report.valid);
    assert!(report.violations.iter().any(|x| !matches!(x.location, Location::Certificate)));
}

#[test]
fn deletion_duplication_and_kind_flip_are_rejected() {
    let cert = Catalog::builtin().block_build("k88", 4, 4).unwrap();
    let mut deleted = cert.clone();
    deleted.parts.remove(0);
    assert!(localized(&deleted));

    let mut duplicated = cert.clone();
    duplicated.parts.push(duplicated.parts[1].clone());
    assert!(localized(&duplicated));

    let mut flipped = cert.clone();
    let i = flipped.parts.iter().position(|w| w.kind == WalkKind::Cycle).unwrap();
    flipped.parts[i].kind = WalkKind::Path;
    assert!(localized(&flipped));
}

#[test]
fn count_mismatch_is_a_certificate_violation() {
    let mut cert = c8_cert();
    cert.p = 1;
    let report = verify(&cert);
    assert!(report.violations.iter().any(|x| x.location == Location::Certificate));
}

#[test]
fn serialization_round_trips_and_is_canonical() {
    let cert = Catalog::builtin().block_build("p2xk5", 2, 3).unwrap();
    let bytes = serialize(&cert);
    assert!(bytes.ends_with(b"\n"));
    let back = deserialize(&bytes).unwrap();
    assert_eq!(back, cert);
    assert_eq!(serialize(&back), bytes);
    let text = String::from_utf8(bytes).unwrap();
    let keys = ["\"format\"", "\"lambda\"", "\"p\"", "\"parts\"", "\"q\"", "\"target\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "top-level keys are sorted");
}

#[test]
fn malformed_input_reports_a_position() {
    match deserialize(b"{\n  \"format\": 1,\n  oops }") {
        Err(Error::Parse { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    let wrong_version = c8_cert().to_json().replace("\"format\":1", "\"format\":2");
    assert!(matches!(deserialize(wrong_version.as_bytes()), Err(Error::Parse { .. })));
    let extra = c8_cert().to_json().replace("{\"format\"", "{\"extra\":0,\"format\"");
    assert!(deserialize(extra.as_bytes()).is_err());
}

#[test]
fn parity_floor_is_half_the_odd_vertices() {
    let g = build_family(&F::tensor(F::Complete(4), F::Complete(4))).unwrap();
    assert_eq!(parity_stats(&g), (16, 8));
    let g = build_family(&F::Complete(9)).unwrap();
    assert_eq!(parity_stats(&g), (0, 0));
    let g = build_family(&F::CompleteBipartite(3, 4)).unwrap();
    assert_eq!(parity_stats(&g), (4, 2));
}

#[test]
fn parts_are_normalized() {
    let a = Walk::cycle(vec![v(0, 3), v(0, 1), v(0, 2), v(0, 0), v(0, 4), v(0, 5), v(0, 6), v(0, 7)]);
    let b = a.map_vertices(|x| x);
    assert_eq!(a.normalized(), b.normalized());
    let rotated = Walk::cycle(a.vertices.iter().cycle().skip(3).take(8).copied().collect());
    assert_eq!(rotated.normalized(), a.normalized());
    let reversed = Walk::path((0..9).rev().map(|i| v(0, i)).collect());
    assert_eq!(reversed.normalized(), Walk::path((0..9).map(|i| v(0, i)).collect()).normalized());
}

fn block_certificates() -> Vec<Certificate> {
    let cat = Catalog::builtin();
    let mut out = Vec::new();
    for id in ["k88", "p2xk5", "k10_f1", "c4xk3", "k66_l2", "p2_wr_k4"] {
        for (p, q) in cat.block_feasible(id).unwrap() {
            out.push(cat.block_build(id, p, q).unwrap());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn single_mutations_are_always_rejected(pick in any::<prop::sample::Index>(), part in any::<prop::sample::Index>(),
                                             pos in any::<prop::sample::Index>(), other in any::<prop::sample::Index>(),
                                             op in 0u8..4) {
        let certs = block_certificates();
        let cert = pick.get(&certs).clone();
        prop_assert!(verify(&cert).valid);
        let mut bad = cert.clone();
        let i = part.index(bad.parts.len());
        match op {
            0 => {
                let vertices = build_family(&bad.target).unwrap().vertices().to_vec();
                let j = pos.index(bad.parts[i].vertices.len());
                let current = bad.parts[i].vertices[j];
                let choices: Vec<VertexId> = vertices.into_iter().filter(|&x| x != current).collect();
                bad.parts[i].vertices[j] = *other.get(&choices);
            }
            1 => { bad.parts.remove(i); }
            2 => { let w = bad.parts[i].clone(); bad.parts.push(w); }
            _ => {
                bad.parts[i].kind = match bad.parts[i].kind {
                    WalkKind::Path => WalkKind::Cycle,
                    WalkKind::Cycle => WalkKind::Path,
                };
            }
        }
        prop_assert!(localized(&bad));
    }

    #[test]
    fn round_trip_is_identity(pick in any::<prop::sample::Index>()) {
        let certs = block_certificates();
        let cert = pick.get(&certs);
        let bytes = serialize(cert);
        prop_assert_eq!(&deserialize(&bytes).unwrap(), cert);
    }
}
