//! Wreath products `K_m o complement(K_n) (lambda)`.
//!
//! Host vertex `(g, c)` is copy `c` of vertex `g` of `K_m`. Even `n` is
//! handled by building `K_m o complement(K_2)` and lifting it over the
//! `n / 2` layers of copies; odd `n` goes through 8-cycle decompositions of
//! `K_m(lambda)`, each cycle expanded to `C_8 o complement(K_n)`.

use std::collections::BTreeMap;

use super::{plan_layered, Embedding, Instance, Leaf, LeafSource, Plan, PlanNode};
use crate::catalog::Catalog;
use crate::certify::Walk;
use crate::error::{Error, Result};
use crate::factor::{c8_decompose_bipartite, c8_decompose_complete, complete_into_groups, p2_decompose, Scheme, Shape};
use crate::graph::{MultiGraph, VertexId};

fn host(g: usize, copy: usize) -> VertexId {
    VertexId::new(g as u32, copy as u32)
}

fn leaf(id: &str, pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> PlanNode {
    PlanNode::Leaf(Leaf::block(id, pairs.into_iter().collect()))
}

fn unsupported(instance: &Instance, why: &str) -> Error {
    Error::UnsupportedCase(format!("{instance}: {why}"))
}

fn complete_graph(m: usize) -> MultiGraph {
    let mut g = MultiGraph::new((0..m).map(|i| VertexId::new(0, i as u32)));
    for i in 0..m {
        for j in i + 1..m {
            g.add_edge(VertexId::new(0, i as u32), VertexId::new(0, j as u32), 1).unwrap();
        }
    }
    g
}

/// `P_2 o complement(K_4)` on the path `x - y - z` of `K_m`, copies `0..4`.
fn p2_wr_k4(path: [usize; 3], copies: [usize; 4]) -> PlanNode {
    let mut map = Vec::new();
    for (k, &g) in path.iter().enumerate() {
        for (i, &c) in copies.iter().enumerate() {
            map.push((VertexId::new(k as u32, i as u32), host(g, c)));
        }
    }
    leaf("p2_wr_k4", map)
}

/// Splits `K_{n,n}` between vertex classes `g` and `h` (copies `0..n`, `n`
/// divisible by 4 and at least 8) into `k88` and `strip_k4_12` blocks.
fn bipartite_classes(g: usize, h: usize, n: usize) -> Vec<PlanNode> {
    let mut runs = vec![8usize; n / 8];
    if n % 8 == 4 {
        runs.pop();
        runs.push(12);
    }
    let mut out = Vec::new();
    let mut x0 = 0;
    for &xa in &runs {
        let mut y0 = 0;
        for &yb in &runs {
            match (xa, yb) {
                (8, 8) => out.push(leaf(
                    "k88",
                    (0..8).map(|i| (VertexId::new(0, i as u32), host(g, x0 + i)))
                        .chain((0..8).map(|j| (VertexId::new(1, j as u32), host(h, y0 + j)))),
                )),
                (_, 12) => {
                    for t in 0..xa / 4 {
                        out.push(leaf(
                            "strip_k4_12",
                            (0..4).map(|i| (VertexId::new(0, i as u32), host(g, x0 + 4 * t + i)))
                                .chain((0..12).map(|j| (VertexId::new(1, j as u32), host(h, y0 + j)))),
                        ));
                    }
                }
                (12, 8) => {
                    for t in 0..2 {
                        out.push(leaf(
                            "strip_k4_12",
                            (0..4).map(|i| (VertexId::new(0, i as u32), host(h, y0 + 4 * t + i)))
                                .chain((0..12).map(|j| (VertexId::new(1, j as u32), host(g, x0 + j)))),
                        ));
                    }
                }
                _ => unreachable!("runs have length 8 or 12"),
            }
            y0 += yb;
        }
        x0 += xa;
    }
    out
}

/// Case `n = 0 (mod 4)`, multiplicity one.
fn plan_n_mult4(instance: &Instance, m: usize, n: usize) -> Result<(String, Vec<PlanNode>)> {
    let mut out = Vec::new();
    if n == 4 {
        let copies = [0, 1, 2, 3];
        let pairs = m * (m - 1) / 2;
        if pairs.is_multiple_of(2) {
            for w in p2_decompose(&complete_graph(m))? {
                let v: Vec<usize> = w.vertices.iter().map(|x| x.index as usize).collect();
                out.push(p2_wr_k4([v[0], v[1], v[2]], copies));
            }
            return Ok(("subcase 1.1: K_m into P2, each P2 o K4-bar a p2_wr_k4".into(), out));
        }
        if m >= 5 {
            // star at 0 with leaves 1, 2, 3 as one K4,12
            out.push(leaf(
                "strip_k4_12",
                (0..4).map(|i| (VertexId::new(0, i), host(0, i as usize))).chain(
                    (0..3).flat_map(|t| (0..4).map(move |i| (VertexId::new(1, (4 * t + i) as u32), host(t + 1, i)))),
                ),
            ));
            let mut rest = complete_graph(m);
            let mut reduced = MultiGraph::new(rest.vertices().iter().copied());
            for (u, v, mult) in rest.edges() {
                let star = u.index == 0 && (1..=3).contains(&v.index);
                if !star {
                    reduced.add_edge(u, v, mult)?;
                }
            }
            rest = reduced;
            for w in p2_decompose(&rest)? {
                let v: Vec<usize> = w.vertices.iter().map(|x| x.index as usize).collect();
                out.push(p2_wr_k4([v[0], v[1], v[2]], copies));
            }
            return Ok(("subcase 1.1: a K4,12 star plus P2 o K4-bar pieces".into(), out));
        }
        if m == 3 {
            out.push(p2_wr_k4([0, 1, 2], copies));
            let cycles = c8_decompose_bipartite(4, 4, 1)?;
            let map: BTreeMap<VertexId, VertexId> = (0..4)
                .map(|i| (VertexId::new(0, i), host(0, i as usize)))
                .chain((0..4).map(|j| (VertexId::new(1, j), host(2, j as usize))))
                .collect();
            out.push(PlanNode::Leaf(Leaf { source: LeafSource::Fixed(cycles), embed: Embedding::Direct(map) }));
            return Ok(("subcase 1.1: P2 o K4-bar plus two 8-cycles on the remaining K4,4".into(), out));
        }
        return Err(unsupported(instance, "no construction for this order"));
    }
    for g in 0..m {
        for h in g + 1..m {
            out.extend(bipartite_classes(g, h, n));
        }
    }
    Ok(("subcase 1.1: each K_{n,n} into K8,8 and K4,12 pieces".into(), out))
}

/// Leaves of `K_m o complement(K_2)` (multiplicity one) for `m = 0 (mod 4)`.
fn base_mod4(instance: &Instance, m: usize) -> Result<Vec<PlanNode>> {
    if m < 8 {
        return Err(unsupported(instance, "K_4 o K_2-bar has no decomposition into the available blocks"));
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut start = 0;
    if m % 8 == 4 {
        clusters.push((0..4).collect());
        start = 4;
    }
    while start < m {
        clusters.push((start..start + 8).collect());
        start += 8;
    }
    let side = |c: &[usize]| -> Vec<VertexId> { c.iter().flat_map(|&g| [host(g, 0), host(g, 1)]).collect() };
    let halves = |c: &[usize]| -> Vec<Vec<VertexId>> {
        if c.len() == 4 {
            vec![side(c)]
        } else {
            vec![side(&c[..4]), side(&c[4..])]
        }
    };
    let k88 = |x: &[VertexId], y: &[VertexId]| {
        leaf(
            "k88",
            x.iter().enumerate().map(|(i, &v)| (VertexId::new(0, i as u32), v))
                .chain(y.iter().enumerate().map(|(j, &v)| (VertexId::new(1, j as u32), v))),
        )
    };
    let mut out = Vec::new();
    let mut merged = None;
    for c in &clusters {
        if c.len() == 8 {
            out.push(leaf(
                "k16_f1",
                c.iter().enumerate().flat_map(|(i, &g)| {
                    [(VertexId::new(0, i as u32), host(g, 0)), (VertexId::new(1, i as u32), host(g, 1))]
                }),
            ));
        }
    }
    if clusters[0].len() == 4 {
        let small = &clusters[0];
        let first = &clusters[1];
        let half = side(&first[..4]);
        let mut map = Vec::new();
        for (j, &g) in small.iter().enumerate() {
            map.push((VertexId::new(0, j as u32), host(g, 0)));
            map.push((VertexId::new(0, (j + 4) as u32), host(g, 1)));
        }
        for (j, &v) in half.iter().enumerate() {
            map.push((VertexId::new(1, j as u32), v));
        }
        out.push(leaf("k8f1_plus_k88", map));
        merged = Some((0usize, 1usize, 0usize));
    }
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            for (ha, x) in halves(&clusters[a]).iter().enumerate() {
                for (hb, y) in halves(&clusters[b]).iter().enumerate() {
                    if merged == Some((a, b, hb)) && ha == 0 {
                        continue;
                    }
                    out.push(k88(x, y));
                }
            }
        }
    }
    Ok(out)
}

/// Leaves of `K_m o complement(K_2)` (multiplicity one) for `m = 1 (mod 4)`.
fn base_mod4_plus1(instance: &Instance, m: usize) -> Result<Vec<PlanNode>> {
    let pieces = complete_into_groups(m as u32, 1, Scheme::Mod4Plus1)?;
    let mut out = Vec::new();
    for piece in pieces {
        match piece.shape {
            Shape::Complete(5) => out.push(leaf(
                "k10_f1",
                piece.vertices.iter().enumerate().flat_map(|(i, &g)| {
                    [(VertexId::new(0, i as u32), host(g, 0)), (VertexId::new(1, i as u32), host(g, 1))]
                }),
            )),
            Shape::Bipartite(4, 4) => {
                let (u, w) = piece.vertices.split_at(4);
                for r in 0..2 {
                    out.push(leaf(
                        "p2_wr_k4",
                        (0..4).flat_map(|i| {
                            [
                                (VertexId::new(0, i as u32), host(u[i], 0)),
                                (VertexId::new(1, i as u32), host(w[i], r)),
                                (VertexId::new(2, i as u32), host(u[i], 1)),
                            ]
                        }),
                    ));
                }
            }
            other => return Err(unsupported(instance, &format!("unexpected grouping piece {other}"))),
        }
    }
    Ok(out)
}

/// Sides of the cluster tiles used for `K_{2a, 2b}(2)`.
fn side_runs(s: usize) -> Option<Vec<usize>> {
    match s {
        10 => Some(vec![4, 6]),
        12 => Some(vec![6, 6]),
        16 => Some(vec![4, 6, 6]),
        18 => Some(vec![6, 6, 6]),
        _ => None,
    }
}

fn runs_against_four(s: usize) -> Option<Vec<usize>> {
    match s {
        10 => Some(vec![10]),
        12 => Some(vec![6, 6]),
        16 => Some(vec![6, 10]),
        18 => Some(vec![6, 6, 6]),
        _ => None,
    }
}

fn bipartite_leaf(id: &str, x: &[VertexId], y: &[VertexId]) -> PlanNode {
    leaf(
        id,
        x.iter().enumerate().map(|(i, &v)| (VertexId::new(0, i as u32), v))
            .chain(y.iter().enumerate().map(|(j, &v)| (VertexId::new(1, j as u32), v))),
    )
}

/// `K_{|x|, |y|}(2)` between two cluster sides.
fn connector_l2(x: &[VertexId], y: &[VertexId]) -> Option<Vec<PlanNode>> {
    let mut out = Vec::new();
    if x.len().is_multiple_of(8) && y.len().is_multiple_of(8) {
        for a in x.chunks(8) {
            for b in y.chunks(8) {
                out.push(bipartite_leaf("k88", a, b));
                out.push(bipartite_leaf("k88", a, b));
            }
        }
        return Some(out);
    }
    let mut x0 = 0;
    for xa in side_runs(x.len())? {
        let row = &x[x0..x0 + xa];
        let runs = if xa == 6 { side_runs(y.len())? } else { runs_against_four(y.len())? };
        let mut y0 = 0;
        for yb in runs {
            let col = &y[y0..y0 + yb];
            match (xa, yb) {
                (6, 6) => out.push(bipartite_leaf("k66_l2", row, col)),
                (4, 6) => out.extend([bipartite_leaf("k46", row, col), bipartite_leaf("k46", row, col)]),
                (6, 4) => out.extend([bipartite_leaf("k46", col, row), bipartite_leaf("k46", col, row)]),
                (4, 10) => out.extend([bipartite_leaf("k4_10", row, col), bipartite_leaf("k4_10", row, col)]),
                _ => return None,
            }
            y0 += yb;
        }
        x0 += xa;
    }
    Some(out)
}

/// The composition covering `K_9 o complement(K_2)` once.
fn k18_composition(c: &[usize]) -> Vec<PlanNode> {
    let mut a = [host(0, 0); 8];
    let mut b = vec![host(0, 0); 10];
    for i in 0..4 {
        a[i] = host(c[i], 0);
        a[i + 4] = host(c[i], 1);
    }
    for i in 0..5 {
        b[i] = host(c[4 + i], 0);
        b[i + 5] = host(c[4 + i], 1);
    }
    let mut out = Vec::new();
    out.push(leaf(
        "k18_f1",
        (0..8).map(|i| (VertexId::new(0, i as u32), a[i])).chain((0..4).map(|j| (VertexId::new(1, j as u32), b[j]))),
    ));
    out.push(leaf(
        "k10_f1",
        (0..5).flat_map(|i| [(VertexId::new(0, i as u32), b[i]), (VertexId::new(1, i as u32), b[i + 5])]),
    ));
    out.push(bipartite_leaf("k46", &a[..4], &b[4..]));
    out.push(bipartite_leaf("k4_10", &a[4..], &b));
    out
}

/// Leaves of `K_m o complement(K_2)(2)`.
fn base_l2(instance: &Instance, m: usize) -> Result<Vec<PlanNode>> {
    let r = m % 8;
    let head: &[usize] = match r {
        0 => &[],
        1 => &[9],
        2 => &[5, 5],
        3 => &[5, 6],
        4 => &[6, 6],
        5 => &[5],
        6 => &[6],
        _ => &[5, 5, 5],
    };
    let head_total: usize = head.iter().sum();
    if head_total > m {
        return Err(unsupported(instance, "order too small for the cluster layout"));
    }
    let mut sizes = head.to_vec();
    sizes.extend(std::iter::repeat_n(8, (m - head_total) / 8));
    let mut clusters = Vec::new();
    let mut start = 0;
    for s in sizes {
        clusters.push((start..start + s).collect::<Vec<usize>>());
        start += s;
    }
    let f1_leaf = |id: &str, c: &[usize]| {
        leaf(
            id,
            c.iter().enumerate().flat_map(|(i, &g)| {
                [(VertexId::new(0, i as u32), host(g, 0)), (VertexId::new(1, i as u32), host(g, 1))]
            }),
        )
    };
    let mut out = Vec::new();
    for c in &clusters {
        match c.len() {
            5 => out.extend([f1_leaf("k10_f1", c), f1_leaf("k10_f1", c)]),
            6 => out.push(f1_leaf("k12_f1_l2", c)),
            8 => out.extend([f1_leaf("k16_f1", c), f1_leaf("k16_f1", c)]),
            9 => {
                out.extend(k18_composition(c));
                out.extend(k18_composition(c));
            }
            _ => unreachable!(),
        }
    }
    let side = |c: &[usize]| -> Vec<VertexId> { c.iter().flat_map(|&g| [host(g, 0), host(g, 1)]).collect() };
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            let (x, y) = (side(&clusters[a]), side(&clusters[b]));
            let tiles = connector_l2(&x, &y)
                .ok_or_else(|| unsupported(instance, &format!("no tiling of K{},{}(2)", x.len(), y.len())))?;
            out.extend(tiles);
        }
    }
    Ok(out)
}

/// Lifts leaves of `K_m o complement(K_2)` to `K_m o complement(K_n)`,
/// `n = 2t`: one relabelled copy per layer of copies and a doubled copy per
/// pair of layers.
fn lift(base: &[PlanNode], n: usize) -> Vec<PlanNode> {
    let t = n / 2;
    let layer = |s: usize| move |v: VertexId| VertexId::new(v.group, 2 * s as u32 + v.index);
    let mut out = Vec::new();
    for s in 0..t {
        let f = layer(s);
        let leaves = base.iter().map(|node| match node {
            PlanNode::Leaf(l) => PlanNode::Leaf(l.relabel(&f)),
            other => other.clone(),
        });
        out.push(PlanNode::sum(format!("layer {s}"), leaves.collect()));
    }
    for s in 0..t {
        for s2 in s + 1..t {
            let (f0, f1) = (layer(s), layer(s2));
            let mut leaves = Vec::new();
            for node in base {
                if let PlanNode::Leaf(Leaf { source, embed: Embedding::Direct(map) }) = node {
                    leaves.push(PlanNode::Leaf(Leaf {
                        source: source.clone(),
                        embed: Embedding::Doubled {
                            map0: map.iter().map(|(&k, &v)| (k, f0(v))).collect(),
                            map1: map.iter().map(|(&k, &v)| (k, f1(v))).collect(),
                        },
                    }));
                }
            }
            out.push(PlanNode::sum(format!("layers {s} and {s2}"), leaves));
        }
    }
    out
}

/// `C_8 o complement(K_n)` on the cycle `c` of `K_m`, `n` odd and at least 3.
fn c8_wreath(instance: &Instance, c: &[usize], n: usize) -> Result<Vec<PlanNode>> {
    if n < 3 {
        return Err(unsupported(instance, "odd n below 3"));
    }
    let mut out = Vec::new();
    out.push(leaf(
        "c8_wr_k3",
        (0..3).flat_map(|g| (0..8).map(move |i| (VertexId::new(g as u32, i as u32), host(c[i], g)))),
    ));
    let mut h = MultiGraph::new((0..n).map(|i| VertexId::new(0, i as u32)));
    let mut matched = vec![None; n];
    for j in 0..(n - 3) / 2 {
        let (x, y) = (3 + 2 * j, 4 + 2 * j);
        matched[x] = Some(y);
        matched[y] = Some(x);
        out.push(leaf(
            "c8_wr_k2",
            [x, y].into_iter().enumerate()
                .flat_map(|(g, copy)| (0..8).map(move |i| (VertexId::new(g as u32, i as u32), host(c[i], copy)))),
        ));
    }
    for a in 0..n {
        for b in a + 1..n {
            if (a < 3 && b < 3) || matched[a] == Some(b) {
                continue;
            }
            h.add_edge(VertexId::new(0, a as u32), VertexId::new(0, b as u32), 1)?;
        }
    }
    if h.edge_count() > 0 {
        for w in p2_decompose(&h)? {
            let p: Vec<usize> = w.vertices.iter().map(|x| x.index as usize).collect();
            out.push(leaf(
                "p2_x_c8",
                (0..3).flat_map(|k| {
                    let p = p.clone();
                    (0..8).map(move |i| (VertexId::new(3 + k as u32, i as u32), host(c[i], p[k])))
                }),
            ));
        }
    }
    Ok(out)
}

fn via_cycles(instance: &Instance, m: usize, n: usize, lambda: u32, label: &str) -> Result<(String, Vec<PlanNode>)> {
    let cycles: Vec<Walk> = c8_decompose_complete(m as u32, lambda)?;
    let mut out = Vec::new();
    for (k, w) in cycles.iter().enumerate() {
        let c: Vec<usize> = w.vertices.iter().map(|v| v.index as usize).collect();
        out.push(PlanNode::sum(format!("cycle {k}"), c8_wreath(instance, &c, n)?));
    }
    Ok((format!("{label}: {} 8-cycles of K{m}({lambda}), each expanded over the copies", cycles.len()), out))
}

fn plan_direct(instance: &Instance, _catalog: &Catalog) -> Result<Plan> {
    let (m, n, lambda) = (instance.m as usize, instance.n as usize, instance.lambda);
    let (label, children) = match lambda {
        1 => {
            if n % 4 == 0 {
                plan_n_mult4(instance, m, n)?
            } else if n % 2 == 0 {
                let (label, base) = match m % 4 {
                    0 => ("subcase 1.2: clusters of 8 on K_m o K2-bar, lifted", base_mod4(instance, m)?),
                    1 => ("subcase 1.3: K_m by mod4-plus1 on K_m o K2-bar, lifted", base_mod4_plus1(instance, m)?),
                    _ => return Err(unsupported(instance, "C(m, 2) is odd")),
                };
                (label.to_string(), lift(&base, n))
            } else if m % 16 == 1 {
                via_cycles(instance, m, n, 1, "subcase 1.4")?
            } else {
                return Err(unsupported(instance, "odd n with m = 0 (mod 16) has no construction"));
            }
        }
        2 => {
            if n % 2 == 1 {
                if m % 8 == 0 || m % 8 == 1 {
                    via_cycles(instance, m, n, 2, "subcase 2.1")?
                } else {
                    return Err(unsupported(instance, "odd n needs m = 0, 1 (mod 8)"));
                }
            } else {
                let base = base_l2(instance, m)?;
                ("subcase 2.2: clusters on K_m o K2-bar (2), lifted".to_string(), lift(&base, n))
            }
        }
        4 => {
            if n % 2 == 1 && m >= 8 && (m % 4 == 0 || m % 4 == 1) {
                via_cycles(instance, m, n, 4, "case 3")?
            } else {
                return Err(unsupported(instance, "no direct construction at multiplicity 4"));
            }
        }
        _ => return Err(unsupported(instance, "no direct construction for this multiplicity")),
    };
    Ok(Plan {
        instance: *instance,
        root: PlanNode::sum(format!("K{m} o K{n}-bar ({lambda})"), children),
        trace: vec![label],
    })
}

pub fn plan(instance: &Instance, catalog: &Catalog) -> Result<Plan> {
    match plan_direct(instance, catalog) {
        Ok(p) => Ok(p),
        Err(Error::UnsupportedCase(direct)) => plan_layered(instance, catalog, plan_direct).map_err(|e| match e {
            Error::UnsupportedCase(m) => Error::UnsupportedCase(format!("{direct}; {m}")),
            other => other,
        }),
        Err(other) => Err(other),
    }
}
