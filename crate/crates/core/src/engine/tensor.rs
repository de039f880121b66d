//! Tensor products `K_m x K_n (lambda)`.
//!
//! Both factors are first split by residue-class groupings (one grouping per
//! case of the case table). Every product of two pieces is then reduced to
//! catalog blocks by a memoised search over piece shapes, which tries direct
//! blocks, the bipartite rewrites, further splits of either factor and
//! multiplicity splits, keeping the reduction with the smallest total parity
//! floor (then the fewest leaves).

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::{plan_layered, Instance, Leaf, Plan, PlanNode};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::factor::{complete_into_groups, decompose_small_with, p2_decompose, FactorPiece, Scheme, Shape, SmallPart};
use crate::graph::{MultiGraph, VertexId};

/// Blocks that are a tensor product of two factor shapes, with their
/// multiplicity. Block vertex `(g, i)` is vertex `g` of the first factor and
/// vertex `i` of the second.
const DIRECT: &[(Shape, Shape, u32, &str)] = &[
    (Shape::Complete(4), Shape::Complete(4), 1, "k4xk4"),
    (Shape::Path(2), Shape::Complete(5), 1, "p2xk5"),
    (Shape::Complete(3), Shape::Path(4), 1, "k3xp4"),
    (Shape::Path(2), Shape::Complete(8), 1, "p2xk8"),
    (Shape::Cycle(4), Shape::Complete(4), 1, "c4xk4"),
    (Shape::Complete(2), Shape::Complete(9), 1, "k2xk9"),
    (Shape::Cycle(4), Shape::Complete(6), 1, "c4xk6"),
    (Shape::Cycle(4), Shape::Complete(3), 1, "c4xk3"),
    (Shape::Complete(3), Shape::Complete(3), 4, "k3xk3_l4"),
];

/// Complete bipartite blocks used for `K_{a,b} x K_2`, which is two
/// disjoint copies of `K_{a,b}`.
const BIPARTITE: &[(u32, u32, u32, &str)] = &[
    (8, 8, 1, "k88"),
    (4, 6, 1, "k46"),
    (4, 10, 1, "k4_10"),
    (4, 12, 1, "strip_k4_12"),
    (6, 6, 2, "k66_l2"),
];

/// Largest piece (in edges times multiplicity) handed to the short part search.
const SMALL_COVER_LIMIT: usize = 72;
const SMALL_COVER_NODES: u64 = 2_000_000;

#[derive(Clone, Debug)]
struct TLeaf {
    block: &'static str,
    /// Block vertex, position in the first shape, position in the second.
    map: Vec<(VertexId, usize, usize)>,
}

#[derive(Clone, Debug)]
struct Reduction {
    floor: usize,
    leaves: Vec<TLeaf>,
    how: String,
}

impl Reduction {
    fn cost(&self) -> (usize, usize) {
        (self.floor, self.leaves.len())
    }

    fn swapped(&self) -> Reduction {
        Reduction {
            floor: self.floor,
            leaves: self
                .leaves
                .iter()
                .map(|l| TLeaf { block: l.block, map: l.map.iter().map(|&(v, a, b)| (v, b, a)).collect() })
                .collect(),
            how: self.how.clone(),
        }
    }
}

#[derive(Clone, Debug)]
struct Split {
    label: String,
    mu: u32,
    pieces: Vec<FactorPiece>,
}

struct Planner<'a> {
    catalog: &'a Catalog,
    memo: HashMap<(Shape, Shape, u32), Option<Rc<Reduction>>>,
    splits: HashMap<(Shape, u32), Rc<Vec<Split>>>,
}

fn shape_graph(shape: Shape, mu: u32) -> MultiGraph {
    let mut g = MultiGraph::new((0..shape.vertex_count() as u32).map(|i| VertexId::new(0, i)));
    for (a, b) in shape.edges() {
        g.add_edge(VertexId::new(0, a as u32), VertexId::new(0, b as u32), mu).unwrap();
    }
    g
}

fn pieces_from_walks(walks: &[crate::certify::Walk], shape: Shape) -> Vec<FactorPiece> {
    walks
        .iter()
        .map(|w| FactorPiece { shape, vertices: w.vertices.iter().map(|v| v.index as usize).collect() })
        .collect()
}

fn piece(shape: Shape, vertices: Vec<usize>) -> FactorPiece {
    let (shape, vertices) = shape.canonical(vertices).expect("split pieces have edges");
    FactorPiece { shape, vertices }
}

impl<'a> Planner<'a> {
    fn new(catalog: &'a Catalog) -> Self {
        Planner { catalog, memo: HashMap::new(), splits: HashMap::new() }
    }

    fn floor_of(&self, block: &str) -> usize {
        self.catalog
            .get(block)
            .ok()
            .and_then(|b| b.feasible_p().into_iter().min())
            .unwrap_or(usize::MAX / 4)
    }

    fn leaf(&self, block: &'static str, map: Vec<(VertexId, usize, usize)>) -> TLeaf {
        TLeaf { block, map }
    }

    fn block_vertices(&self, block: &str) -> Vec<VertexId> {
        self.catalog.get(block).map(|b| b.target().vertices().to_vec()).unwrap_or_default()
    }

    fn best(&mut self, x: Shape, y: Shape, lambda: u32) -> Option<Rc<Reduction>> {
        if x > y {
            return self.best(y, x, lambda).map(|r| Rc::new(r.swapped()));
        }
        if let Some(r) = self.memo.get(&(x, y, lambda)) {
            return r.clone();
        }
        // guards against re-entry while this key is being computed
        self.memo.insert((x, y, lambda), None);
        let r = self.compute(x, y, lambda).map(Rc::new);
        self.memo.insert((x, y, lambda), r.clone());
        r
    }

    fn compute(&mut self, x: Shape, y: Shape, lambda: u32) -> Option<Reduction> {
        let mut candidates: Vec<Reduction> = Vec::new();

        for &(a, b, l, id) in DIRECT {
            if l != lambda {
                continue;
            }
            let verts = self.block_vertices(id);
            if (x, y) == (a, b) {
                let map = verts.iter().map(|&v| (v, v.group as usize, v.index as usize)).collect();
                candidates.push(Reduction { floor: self.floor_of(id), leaves: vec![self.leaf(id, map)], how: format!("block {id}") });
            } else if (x, y) == (b, a) {
                let map = verts.iter().map(|&v| (v, v.index as usize, v.group as usize)).collect();
                candidates.push(Reduction { floor: self.floor_of(id), leaves: vec![self.leaf(id, map)], how: format!("block {id}") });
            }
        }

        // K_{4,4} x P_2 is two copies of P_2 o complement(K_4)
        if lambda == 1 && x == Shape::Bipartite(4, 4) && y == Shape::Path(2) {
            let id = "p2_wr_k4";
            let mut leaves = Vec::new();
            for (outer, inner) in [(4usize, 0usize), (0, 4)] {
                let mut map = Vec::new();
                for i in 0..4u32 {
                    let i_ = i as usize;
                    map.push((VertexId::new(0, i), outer + i_, 0));
                    map.push((VertexId::new(1, i), inner + i_, 1));
                    map.push((VertexId::new(2, i), outer + i_, 2));
                }
                leaves.push(self.leaf(id, map));
            }
            candidates.push(Reduction { floor: 2 * self.floor_of(id), leaves, how: "K4,4 x P2 as 2 p2_wr_k4".into() });
        }

        // K_{a,b} x K_2 is two copies of K_{a,b}
        if let (Shape::Complete(2), Shape::Bipartite(a, b)) = (x, y) {
            for &(ba, bb, l, id) in BIPARTITE {
                if (a, b, lambda) != (ba, bb, l) {
                    continue;
                }
                let mut leaves = Vec::new();
                for (z0, z1) in [(0usize, 1usize), (1, 0)] {
                    let mut map = Vec::new();
                    for i in 0..a {
                        map.push((VertexId::new(0, i), z0, i as usize));
                    }
                    for j in 0..b {
                        map.push((VertexId::new(1, j), z1, (a + j) as usize));
                    }
                    leaves.push(self.leaf(id, map));
                }
                candidates.push(Reduction { floor: 2 * self.floor_of(id), leaves, how: format!("K{a},{b} x K2 as 2 {id}") });
            }
        }

        for side in 0..2 {
            let shape = if side == 0 { x } else { y };
            let splits = self.splits_of(shape, lambda);
            'split: for split in splits.iter() {
                let mut floor = 0;
                let mut leaves = Vec::new();
                for p in &split.pieces {
                    let sub = if side == 0 {
                        self.best(p.shape, y, lambda / split.mu)
                    } else {
                        self.best(x, p.shape, lambda / split.mu)
                    };
                    let Some(sub) = sub else { continue 'split };
                    floor += sub.floor;
                    for l in &sub.leaves {
                        let map = l
                            .map
                            .iter()
                            .map(|&(v, a, b)| if side == 0 { (v, p.vertices[a], b) } else { (v, a, p.vertices[b]) })
                            .collect();
                        leaves.push(TLeaf { block: l.block, map });
                    }
                }
                let which = if side == 0 { x } else { y };
                candidates.push(Reduction { floor, leaves, how: format!("split {which} {}", split.label) });
            }
        }

        for d in (1..lambda).rev().filter(|d| lambda.is_multiple_of(*d)) {
            if let Some(sub) = self.best(x, y, d) {
                let k = (lambda / d) as usize;
                let leaves = (0..k).flat_map(|_| sub.leaves.iter().cloned()).collect();
                candidates.push(Reduction { floor: k * sub.floor, leaves, how: format!("{k} copies at multiplicity {d}") });
            }
        }

        let mut best: Option<Reduction> = None;
        for c in candidates {
            if best.as_ref().is_none_or(|b| c.cost() < b.cost()) {
                best = Some(c);
            }
        }
        best
    }

    fn splits_of(&mut self, shape: Shape, lambda: u32) -> Rc<Vec<Split>> {
        if let Some(s) = self.splits.get(&(shape, lambda)) {
            return s.clone();
        }
        let mut out = Vec::new();
        let groups = |scheme: Scheme, n: u32| -> Option<Split> {
            complete_into_groups(n, 1, scheme)
                .ok()
                .filter(|p| p.len() > 1)
                .map(|pieces| Split { label: format!("by {scheme}"), mu: 1, pieces })
        };
        match shape {
            Shape::Complete(n) => {
                for scheme in [
                    Scheme::Mod8Groups,
                    Scheme::Mod8Plus1,
                    Scheme::Mod4Groups,
                    Scheme::Mod4Plus1,
                    Scheme::Mod4Rem2,
                    Scheme::Mod4Rem2Lambda2,
                    Scheme::OddTriples,
                ] {
                    if let Some(s) = groups(scheme, n) {
                        out.push(s);
                    }
                }
                if n == 6 {
                    out.push(Split {
                        label: "as K4-e + K4 + C4".into(),
                        mu: 1,
                        pieces: vec![
                            piece(Shape::CompleteMinusEdge(4), vec![0, 1, 4, 5]),
                            piece(Shape::Complete(4), vec![0, 1, 2, 3]),
                            piece(Shape::Cycle(4), vec![4, 2, 5, 3]),
                        ],
                    });
                }
            }
            Shape::CompleteMinusEdge(4) => out.push(Split {
                label: "as K3 + P2".into(),
                mu: 1,
                pieces: vec![piece(Shape::Complete(3), vec![0, 2, 3]), piece(Shape::Path(2), vec![2, 1, 3])],
            }),
            Shape::CompleteMinusEdge(6) => out.push(Split {
                label: "as 2 K4-e + C4".into(),
                mu: 1,
                pieces: vec![
                    piece(Shape::CompleteMinusEdge(4), vec![0, 1, 2, 3]),
                    piece(Shape::CompleteMinusEdge(4), vec![0, 1, 4, 5]),
                    piece(Shape::Cycle(4), vec![2, 4, 3, 5]),
                ],
            }),
            Shape::Bipartite(a, b) if a % 4 == 0 && b % 4 == 0 && (a, b) != (4, 4) => {
                let mut pieces = Vec::new();
                for i in 0..(a / 4) as usize {
                    for j in 0..(b / 4) as usize {
                        let mut v: Vec<usize> = (4 * i..4 * i + 4).collect();
                        v.extend((a as usize + 4 * j..a as usize + 4 * j + 4).collect::<Vec<_>>());
                        pieces.push(piece(Shape::Bipartite(4, 4), v));
                    }
                }
                out.push(Split { label: "into K4,4 tiles".into(), mu: 1, pieces });
            }
            _ => {}
        }

        let edges = shape.edge_count();
        if shape != Shape::Path(2) && edges.is_multiple_of(2) {
            if let Ok(walks) = p2_decompose(&shape_graph(shape, 1)) {
                out.push(Split { label: "into P2".into(), mu: 1, pieces: pieces_from_walks(&walks, Shape::Path(2)) });
            }
        }
        for mu in (1..=lambda).filter(|d| lambda.is_multiple_of(*d)) {
            let total = edges * mu as usize;
            if total > SMALL_COVER_LIMIT || !total.is_multiple_of(4) || total == 4 {
                continue;
            }
            for (part, pshape) in [(SmallPart::P4, Shape::Path(4)), (SmallPart::C4, Shape::Cycle(4))] {
                if part == SmallPart::C4 && shape.degrees().iter().any(|d| (d * mu as usize) % 2 == 1) {
                    continue;
                }
                if let Ok(walks) = decompose_small_with(&shape_graph(shape, mu), part, SMALL_COVER_NODES) {
                    out.push(Split {
                        label: format!("into {pshape} at multiplicity {mu}"),
                        mu,
                        pieces: pieces_from_walks(&walks, pshape),
                    });
                }
            }
        }
        if shape != Shape::Complete(2) {
            let pieces = shape.edges().into_iter().map(|(a, b)| piece(Shape::Complete(2), vec![a, b])).collect();
            out.push(Split { label: "into edges".into(), mu: 1, pieces });
        }
        let rc = Rc::new(out);
        self.splits.insert((shape, lambda), rc.clone());
        rc
    }
}

type Scheme2 = (Scheme, Scheme);

/// One row of the case table: conditions on the two orders and the grouping
/// used for each factor.
struct Subcase {
    label: &'static str,
    applies: fn(u32, u32) -> bool,
    schemes: Scheme2,
}

fn subcases(case: u32) -> Vec<Subcase> {
    use Scheme::*;
    match case {
        1 => vec![
            Subcase { label: "1.1", applies: |n, m| n % 4 == 0 && m % 4 == 0, schemes: (Mod4Groups, Mod4Groups) },
            Subcase { label: "1.2", applies: |n, m| n % 4 == 0 && m % 4 == 1, schemes: (Mod4Groups, Mod4Plus1) },
            Subcase { label: "1.3", applies: |n, m| n % 4 == 1 && m % 4 == 1, schemes: (Mod4Plus1, Mod4Plus1) },
            Subcase { label: "1.4.1", applies: |n, m| n % 8 == 0 && m % 4 == 0, schemes: (Mod8Groups, Mod4Groups) },
            Subcase { label: "1.4.2", applies: |n, m| n % 8 == 0 && m % 4 == 2, schemes: (Mod8Groups, Mod4Rem2) },
            Subcase {
                label: "1.5.1",
                applies: |n, m| n % 8 == 0 && (m % 6 == 1 || m % 6 == 3),
                schemes: (Mod8Groups, OddTriples),
            },
            Subcase { label: "1.5.2", applies: |n, m| n % 8 == 0 && m % 6 == 5, schemes: (Mod8Groups, OddTriples) },
            Subcase { label: "1.6", applies: |n, _| n % 8 == 1, schemes: (Mod8Plus1, Edges) },
        ],
        2 => vec![
            Subcase { label: "2.1", applies: |n, m| n % 4 == 0 && m % 4 == 2, schemes: (Mod4Groups, Mod4Rem2Lambda2) },
            Subcase { label: "2.2", applies: |n, m| n % 4 == 1 && m % 4 == 2, schemes: (Mod4Plus1, Mod4Rem2Lambda2) },
            Subcase { label: "2.3", applies: |n, m| n % 4 == 0 && m % 2 == 1, schemes: (Mod4Groups, OddTriples) },
            Subcase { label: "2.4", applies: |n, m| n % 4 == 1 && m % 2 == 1, schemes: (Mod4Plus1, OddTriples) },
        ],
        _ => {
            vec![
                Subcase { label: "3.1.1", applies: |n, m| n % 2 == 1 && m % 4 == 0, schemes: (OddTriples, Mod4Groups) },
                Subcase {
                    label: "3.1.2",
                    applies: |n, m| n % 2 == 1 && m % 4 == 2,
                    schemes: (OddTriples, Mod4Rem2Lambda2),
                },
                Subcase { label: "3.2.1", applies: |n, m| n % 4 == 0 && m % 4 == 0, schemes: (Mod4Groups, Mod4Groups) },
                Subcase {
                    label: "3.2.2",
                    applies: |n, m| n % 4 == 2 && m % 4 == 0,
                    schemes: (Mod4Rem2Lambda2, Mod4Groups),
                },
                Subcase {
                    label: "3.2.3",
                    applies: |n, m| n % 4 == 2 && m % 4 == 2,
                    schemes: (Mod4Rem2Lambda2, Mod4Rem2Lambda2),
                },
                Subcase { label: "3.3", applies: |n, m| n % 2 == 1 && m % 2 == 1, schemes: (OddTriples, OddTriples) },
            ]
        }
    }
}

/// Groupings of a factor that are allowed to stand in for a scheme when the
/// factor is too small for it (a single piece is the factor itself).
fn grouping(n: u32, scheme: Scheme) -> Result<Vec<FactorPiece>> {
    let single = |s: Scheme| -> bool {
        match s {
            Scheme::Mod4Groups => n == 4,
            Scheme::Mod4Plus1 => n == 5,
            Scheme::Mod8Groups => n == 8,
            Scheme::Mod8Plus1 => n == 9,
            Scheme::Mod4Rem2 | Scheme::Mod4Rem2Lambda2 => n == 6,
            _ => false,
        }
    };
    if single(scheme) || (scheme == Scheme::OddTriples && n == 3) {
        return Ok(vec![FactorPiece { shape: Shape::Complete(n), vertices: (0..n as usize).collect() }]);
    }
    if scheme == Scheme::Edges && n == 2 {
        return Ok(vec![FactorPiece { shape: Shape::Complete(2), vertices: vec![0, 1] }]);
    }
    complete_into_groups(n, 1, scheme)
}

struct Candidate {
    label: String,
    pairs: Vec<(FactorPiece, FactorPiece, Rc<Reduction>)>,
    cost: (usize, usize),
}

fn evaluate(planner: &mut Planner, small_pieces: &[FactorPiece], big_pieces: &[FactorPiece], lambda: u32) -> Option<(Vec<(FactorPiece, FactorPiece, Rc<Reduction>)>, (usize, usize))> {
    let mut pairs = Vec::new();
    let (mut floor, mut leaves) = (0, 0);
    for a in small_pieces {
        for b in big_pieces {
            let r = planner.best(a.shape, b.shape, lambda)?;
            floor += r.floor;
            leaves += r.leaves.len();
            pairs.push((a.clone(), b.clone(), r));
        }
    }
    Some((pairs, (floor, leaves)))
}

/// Plans with the case table for `lambda` in `{1, 2, 4}`, without layering.
fn plan_direct(instance: &Instance, catalog: &Catalog) -> Result<Plan> {
    let lambda = instance.lambda;
    let own = match lambda {
        1 => 1,
        2 => 2,
        4 => 3,
        _ => return Err(Error::UnsupportedCase(format!("{instance}: no direct case for lambda = {lambda}"))),
    };
    let (small, big) = (instance.m.min(instance.n), instance.m.max(instance.n));
    let mut planner = Planner::new(catalog);
    let mut order = vec![own];
    order.extend([1, 2, 3].into_iter().filter(|&c| c != own));
    let mut best: Option<Candidate> = None;
    for case in order {
        for sub in subcases(case) {
            let assignments: &[(u32, u32)] = if small == big { &[(big, small)] } else { &[(big, small), (small, big)] };
            for &(n, m) in assignments {
                if !(sub.applies)(n, m) {
                    continue;
                }
                let (Ok(pn), Ok(pm)) = (grouping(n, sub.schemes.0), grouping(m, sub.schemes.1)) else {
                    continue;
                };
                let (small_pieces, big_pieces) = if n == big && m == small { (pm, pn) } else { (pn, pm) };
                let Some((pairs, cost)) = evaluate(&mut planner, &small_pieces, &big_pieces, lambda) else {
                    continue;
                };
                let label = format!(
                    "case {case}, subcase {}: K{n} by {}, K{m} by {}{}",
                    sub.label,
                    sub.schemes.0,
                    sub.schemes.1,
                    if case == own { String::new() } else { format!(" (evaluated at lambda {lambda})") }
                );
                if best.as_ref().is_none_or(|b| cost < b.cost) {
                    best = Some(Candidate { label, pairs, cost });
                }
            }
        }
    }
    let Some(chosen) = best else {
        return Err(Error::UnsupportedCase(format!("{instance}: no subcase reduces to catalog blocks")));
    };

    let mut trace = vec![chosen.label.clone()];
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    let mut children = Vec::new();
    for (a, b, r) in &chosen.pairs {
        let key = format!("{} x {}", a.shape, b.shape);
        seen.entry(key.clone()).or_insert_with(|| r.how.clone());
        let leaves = r
            .leaves
            .iter()
            .map(|l| {
                let map = l
                    .map
                    .iter()
                    .map(|&(v, ia, ib)| (v, VertexId::new(a.vertices[ia] as u32, b.vertices[ib] as u32)))
                    .collect();
                PlanNode::Leaf(Leaf::block(l.block, map))
            })
            .collect();
        children.push(PlanNode::sum(key, leaves));
    }
    for (k, how) in seen {
        trace.push(format!("{k}: {how}"));
    }
    Ok(Plan {
        instance: *instance,
        root: PlanNode::sum(format!("K{small} x K{big} ({lambda}), subcase {}", chosen.label), children),
        trace,
    })
}

pub fn plan(instance: &Instance, catalog: &Catalog) -> Result<Plan> {
    let parts = instance.edge_count() / 8;
    if instance.degree() % 2 == 1 && instance.vertex_count() / 2 > parts {
        return Err(Error::Infeasible(format!(
            "{instance}: at least {} paths are needed but there are only {parts} parts",
            instance.vertex_count() / 2
        )));
    }
    match plan_direct(instance, catalog) {
        Ok(p) => Ok(p),
        Err(direct_err) => plan_layered(instance, catalog, plan_direct).map_err(|e| match e {
            Error::UnsupportedCase(m) => Error::UnsupportedCase(format!("{m}; direct: {direct_err}")),
            other => other,
        }),
    }
}
