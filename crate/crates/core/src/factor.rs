//! Small classical decompositions: residue-class groupings of `K_n`, Steiner
//! triple systems, length-2 path decompositions, short path and cycle covers,
//! and 8-cycle decompositions of complete and complete bipartite multigraphs.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::Catalog;
use crate::certify::{Walk, WalkKind};
use crate::error::{Error, Result};
use crate::graph::{build_family, edge_key, FamilyDescriptor, MultiGraph, VertexId};
use crate::oracle::{cover, CoverOutcome, PartSpec, SearchBudget};

/// Largest graph handed to the exact cover search by this module.
pub const COVER_EDGE_LIMIT: usize = 72;

/// The subgraph shapes used when splitting a factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    Complete(u32),
    /// Sides `X` then `Y`; vertex lists store `X` first.
    Bipartite(u32, u32),
    /// Path with this many edges, vertices in path order.
    Path(u32),
    /// Cycle of this length, vertices in cyclic order.
    Cycle(u32),
    /// `K_n` minus one edge; vertex lists store the two ends of the missing edge first.
    CompleteMinusEdge(u32),
}

impl Shape {
    pub fn vertex_count(&self) -> usize {
        match *self {
            Shape::Complete(n) | Shape::Cycle(n) | Shape::CompleteMinusEdge(n) => n as usize,
            Shape::Bipartite(a, b) => (a + b) as usize,
            Shape::Path(l) => l as usize + 1,
        }
    }

    /// Edges as pairs of positions in the vertex list.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            Shape::Complete(n) => {
                let n = n as usize;
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
            }
            Shape::CompleteMinusEdge(n) => {
                let n = n as usize;
                (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&e| e != (0, 1))
                    .collect()
            }
            Shape::Bipartite(a, b) => {
                let (a, b) = (a as usize, b as usize);
                (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect()
            }
            Shape::Path(l) => (0..l as usize).map(|i| (i, i + 1)).collect(),
            Shape::Cycle(l) => {
                let l = l as usize;
                (0..l).map(|i| (i, (i + 1) % l)).collect()
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count()];
        for (u, v) in self.edges() {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// A shape of the same graph in canonical form, with a reordering of the
    /// given vertex list. `None` when the shape has no edges.
    pub fn canonical(self, verts: Vec<usize>) -> Option<(Shape, Vec<usize>)> {
        let v = &verts;
        Some(match self {
            Shape::Complete(n) | Shape::CompleteMinusEdge(n) | Shape::Cycle(n) | Shape::Path(n)
                if n == 0 || (n == 1 && !matches!(self, Shape::Path(_))) =>
            {
                return None
            }
            Shape::Complete(2) | Shape::Path(1) => (Shape::Complete(2), verts),
            Shape::Cycle(3) => (Shape::Complete(3), verts),
            Shape::CompleteMinusEdge(2) => return None,
            Shape::CompleteMinusEdge(3) => (Shape::Path(2), vec![v[0], v[2], v[1]]),
            Shape::Bipartite(a, b) if a == 0 || b == 0 => return None,
            Shape::Bipartite(a, b) if a > b => {
                let (x, y) = v.split_at(a as usize);
                return Shape::Bipartite(b, a).canonical(y.iter().chain(x).copied().collect());
            }
            Shape::Bipartite(1, 1) => (Shape::Complete(2), verts),
            Shape::Bipartite(1, 2) => (Shape::Path(2), vec![v[1], v[0], v[2]]),
            Shape::Bipartite(2, 2) => (Shape::Cycle(4), vec![v[0], v[2], v[1], v[3]]),
            other => (other, verts),
        })
    }

    /// The family this shape stands for, with the same vertex order as the
    /// canonical graph of the returned descriptor (where one exists).
    pub fn descriptor(&self) -> FamilyDescriptor {
        use FamilyDescriptor as F;
        match *self {
            Shape::Complete(n) => F::Complete(n),
            Shape::Bipartite(a, b) => F::CompleteBipartite(a, b),
            Shape::Path(l) => F::PathLen(l),
            Shape::Cycle(l) => F::Cycle(l),
            Shape::CompleteMinusEdge(n) => {
                let rest: Vec<VertexId> = (2..n).map(|i| VertexId::new(0, i)).collect();
                let mut bip = vec![VertexId::new(0, 0), VertexId::new(0, 1)];
                bip.extend(rest.iter().copied());
                F::UnionOf(vec![
                    crate::graph::Embedded { desc: F::Complete(n - 2), map: Some(rest) },
                    crate::graph::Embedded { desc: F::CompleteBipartite(2, n - 2), map: Some(bip) },
                ])
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Complete(n) => write!(f, "K{n}"),
            Shape::Bipartite(a, b) => write!(f, "K{a},{b}"),
            Shape::Path(l) => write!(f, "P{l}"),
            Shape::Cycle(l) => write!(f, "C{l}"),
            Shape::CompleteMinusEdge(n) => write!(f, "K{n}-e"),
        }
    }
}

/// One piece of a grouping: a shape placed on host vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorPiece {
    pub shape: Shape,
    pub vertices: Vec<usize>,
}

impl FactorPiece {
    fn new(shape: Shape, vertices: Vec<usize>) -> Option<Self> {
        shape.canonical(vertices).map(|(shape, vertices)| FactorPiece { shape, vertices })
    }

    pub fn descriptor(&self) -> FamilyDescriptor {
        self.shape.descriptor()
    }

    /// Host edges covered by this piece, as index pairs.
    pub fn host_edges(&self) -> Vec<(usize, usize)> {
        self.shape
            .edges()
            .into_iter()
            .map(|(a, b)| {
                let (x, y) = (self.vertices[a], self.vertices[b]);
                (x.min(y), x.max(y))
            })
            .collect()
    }

    /// The piece as a graph on plain host labels `(0, i)`.
    pub fn host_graph(&self, lambda: u32) -> MultiGraph {
        let mut g = MultiGraph::new(self.vertices.iter().map(|&i| VertexId::new(0, i as u32)));
        for (a, b) in self.host_edges() {
            g.add_edge(VertexId::new(0, a as u32), VertexId::new(0, b as u32), lambda)
                .expect("piece edges join distinct piece vertices");
        }
        g
    }
}

/// Residue-class groupings of `K_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `K_4` on each block of four, `K_{4,4}` between blocks.
    Mod4Groups,
    /// `K_5` on an apex plus each block of four, `K_{4,4}` between blocks.
    Mod4Plus1,
    /// `K_8` on each block of eight, `K_{8,8}` between blocks.
    Mod8Groups,
    /// `K_9` on an apex plus each block of eight, `K_{8,8}` between blocks.
    Mod8Plus1,
    /// `K_6` head, `K_6 - e` on the two rails plus each block, `K_{4,4}` elsewhere.
    Mod4Rem2,
    /// `K_6` head, `K_4` per block, `K_{2,4}` from the rails, `K_{4,4}` elsewhere.
    Mod4Rem2Lambda2,
    /// Triangles of a Steiner triple system, or a `K_5` plus triangles.
    OddTriples,
    /// Every edge on its own.
    Edges,
    /// The whole graph as one piece.
    Whole,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Mod4Groups => "mod4-groups",
            Scheme::Mod4Plus1 => "mod4-plus1",
            Scheme::Mod8Groups => "mod8-groups",
            Scheme::Mod8Plus1 => "mod8-plus1",
            Scheme::Mod4Rem2 => "mod4-rem2",
            Scheme::Mod4Rem2Lambda2 => "mod4-rem2-l2",
            Scheme::OddTriples => "odd-triples",
            Scheme::Edges => "edges",
            Scheme::Whole => "whole",
        }
    }

    pub fn applies(&self, n: u32) -> bool {
        match self {
            Scheme::Mod4Groups => n >= 4 && n.is_multiple_of(4),
            Scheme::Mod4Plus1 => n >= 5 && n % 4 == 1,
            Scheme::Mod8Groups => n >= 8 && n.is_multiple_of(8),
            Scheme::Mod8Plus1 => n >= 9 && n % 8 == 1,
            Scheme::Mod4Rem2 | Scheme::Mod4Rem2Lambda2 => n >= 6 && n % 4 == 2,
            Scheme::OddTriples => n >= 3 && n % 2 == 1,
            Scheme::Edges | Scheme::Whole => n >= 2,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn blocks_of(start: usize, size: usize, count: usize) -> Vec<Vec<usize>> {
    (0..count).map(|k| (start + k * size..start + (k + 1) * size).collect()).collect()
}

fn join(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn bip(a: &[usize], b: &[usize]) -> FactorPiece {
    FactorPiece::new(Shape::Bipartite(a.len() as u32, b.len() as u32), join(a, b)).unwrap()
}

fn whole(shape: Shape, verts: Vec<usize>) -> FactorPiece {
    FactorPiece::new(shape, verts).unwrap()
}

/// Splits `K_n` on vertices `0..n` by a residue-class scheme. The pieces
/// partition the edges; multiplicity is not part of the pieces.
pub fn complete_into_groups(n: u32, lambda: u32, scheme: Scheme) -> Result<Vec<FactorPiece>> {
    if !scheme.applies(n) || lambda == 0 {
        return Err(Error::SchemeMismatch { scheme: scheme.name().into(), n });
    }
    let nu = n as usize;
    let pairs_between = |groups: &[Vec<usize>], out: &mut Vec<FactorPiece>| {
        for j in 0..groups.len() {
            for k in j + 1..groups.len() {
                out.push(bip(&groups[j], &groups[k]));
            }
        }
    };
    let mut out = Vec::new();
    match scheme {
        Scheme::Mod4Groups | Scheme::Mod8Groups => {
            let size = if scheme == Scheme::Mod4Groups { 4 } else { 8 };
            let groups = blocks_of(0, size, nu / size);
            for g in &groups {
                out.push(whole(Shape::Complete(size as u32), g.clone()));
            }
            pairs_between(&groups, &mut out);
        }
        Scheme::Mod4Plus1 | Scheme::Mod8Plus1 => {
            let size = if scheme == Scheme::Mod4Plus1 { 4 } else { 8 };
            let groups = blocks_of(1, size, (nu - 1) / size);
            for g in &groups {
                out.push(whole(Shape::Complete(size as u32 + 1), join(&[0], g)));
            }
            pairs_between(&groups, &mut out);
        }
        Scheme::Mod4Rem2 => {
            let groups = blocks_of(6, 4, (nu - 6) / 4);
            out.push(whole(Shape::Complete(6), (0..6).collect()));
            let rails: Vec<usize> = (2..6).collect();
            for g in &groups {
                out.push(whole(Shape::CompleteMinusEdge(6), join(&[0, 1], g)));
            }
            for g in &groups {
                out.push(bip(&rails, g));
            }
            pairs_between(&groups, &mut out);
        }
        Scheme::Mod4Rem2Lambda2 => {
            let groups = blocks_of(6, 4, (nu - 6) / 4);
            out.push(whole(Shape::Complete(6), (0..6).collect()));
            let rails: Vec<usize> = (2..6).collect();
            for g in &groups {
                out.push(whole(Shape::Complete(4), g.clone()));
            }
            for g in &groups {
                out.push(bip(&[0, 1], g));
            }
            for g in &groups {
                out.push(bip(&rails, g));
            }
            pairs_between(&groups, &mut out);
        }
        Scheme::OddTriples => {
            let (triples, head) = triple_system(n)?;
            if let Some(k5) = head {
                out.push(whole(Shape::Complete(5), k5));
            }
            for t in triples {
                out.push(whole(Shape::Complete(3), t.to_vec()));
            }
        }
        Scheme::Edges => {
            for i in 0..nu {
                for j in i + 1..nu {
                    out.push(whole(Shape::Complete(2), vec![i, j]));
                }
            }
        }
        Scheme::Whole => out.push(whole(Shape::Complete(n), (0..nu).collect())),
    }
    Ok(out)
}

/// Triangles covering `K_n` for odd `n`. For `n = 1, 3 (mod 6)` this is a
/// Steiner triple system (Bose or Skolem); for `n = 5 (mod 6)` the vertices
/// `0..5` are left to a `K_5`, returned separately.
pub fn triple_system(n: u32) -> Result<(Vec<[usize; 3]>, Option<Vec<usize>>)> {
    match n % 6 {
        3 => Ok((bose(n as usize), None)),
        1 => Ok((skolem(n as usize), None)),
        5 => Ok((triangles_around_k5(n as usize)?, Some((0..5).collect()))),
        _ => Err(Error::SchemeMismatch { scheme: Scheme::OddTriples.name().into(), n }),
    }
}

fn bose(n: usize) -> Vec<[usize; 3]> {
    let m = n / 3;
    let half = m.div_ceil(2);
    let op = |x: usize, y: usize| (x + y) * half % m;
    let id = |x: usize, i: usize| x + (i % 3) * m;
    let mut out = Vec::new();
    for x in 0..m {
        out.push([id(x, 0), id(x, 1), id(x, 2)]);
    }
    for x in 0..m {
        for y in x + 1..m {
            for i in 0..3 {
                out.push([id(x, i), id(y, i), id(op(x, y), i + 1)]);
            }
        }
    }
    out
}

fn skolem(n: usize) -> Vec<[usize; 3]> {
    if n == 1 {
        return Vec::new();
    }
    let t = (n - 1) / 6;
    let m = 2 * t;
    let f = |s: usize| if s.is_multiple_of(2) { s / 2 } else { (s - 1) / 2 + t };
    let op = |x: usize, y: usize| f((x + y) % m);
    let inf = n - 1;
    let id = |x: usize, i: usize| x + (i % 3) * m;
    let mut out = Vec::new();
    for x in 0..t {
        out.push([id(x, 0), id(x, 1), id(x, 2)]);
        for i in 0..3 {
            out.push([inf, id(x + t, i), id(x, i + 1)]);
        }
    }
    for x in 0..m {
        for y in x + 1..m {
            for i in 0..3 {
                out.push([id(x, i), id(y, i), id(op(x, y), i + 1)]);
            }
        }
    }
    out
}

/// Triangle decomposition of `K_n - K_5` (the `K_5` on `0..5`) by hill climbing.
fn triangles_around_k5(n: usize) -> Result<Vec<[usize; 3]>> {
    if n == 5 {
        return Ok(Vec::new());
    }
    let in_head = |v: usize| v < 5;
    let is_edge = |a: usize, b: usize| a != b && !(in_head(a) && in_head(b));
    let target = (n * (n - 1) / 2 - 10) / 3;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    // owner[a][b] = index of the triangle covering edge ab
    let mut owner = vec![vec![usize::MAX; n]; n];
    let mut triangles: Vec<Option<[usize; 3]>> = Vec::new();
    let mut live = 0;
    for _ in 0..50_000_000u64 {
        if live == target {
            break;
        }
        let x = rng.gen_range(0..n);
        let free: Vec<usize> = (0..n).filter(|&y| is_edge(x, y) && owner[x][y] == usize::MAX).collect();
        if free.len() < 2 {
            continue;
        }
        let y = free[rng.gen_range(0..free.len())];
        let z = free[rng.gen_range(0..free.len())];
        if y == z || !is_edge(y, z) {
            continue;
        }
        let old = owner[y][z];
        if old != usize::MAX {
            let t = triangles[old].take().unwrap();
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                owner[a][b] = usize::MAX;
                owner[b][a] = usize::MAX;
            }
            live -= 1;
        }
        let idx = triangles.len();
        triangles.push(Some([x, y, z]));
        for (a, b) in [(x, y), (y, z), (x, z)] {
            owner[a][b] = idx;
            owner[b][a] = idx;
        }
        live += 1;
    }
    if live != target {
        return Err(Error::UnsupportedInstance(format!("no triangle cover of K{n} - K5 found")));
    }
    let mut out: Vec<[usize; 3]> = triangles
        .into_iter()
        .flatten()
        .map(|mut t| {
            t.sort();
            t
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Decomposes `g` into paths of length 2.
///
/// Simple graphs use a spanning forest: each vertex, processed children
/// first, pairs up its pending edges and hands an odd one off along its tree
/// edge. Multigraphs fall back to the exact cover search.
pub fn p2_decompose(g: &MultiGraph) -> Result<Vec<Walk>> {
    if g.edge_count() % 2 == 1 {
        return Err(Error::Infeasible(format!("{} edges cannot be split into pairs", g.edge_count())));
    }
    if !g.is_simple() {
        return search_decompose(g, WalkKind::Path, 2, 20_000_000);
    }
    let verts = g.vertices();
    let n = verts.len();
    let mut adj = vec![Vec::new(); n];
    for (u, v, _) in g.edges() {
        let (a, b) = (g.rank(u).unwrap(), g.rank(v).unwrap());
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut comp_edges = Vec::new();
    for root in 0..n {
        if seen[root] || adj[root].is_empty() {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
        let deg_sum: usize = members.iter().map(|&v| adj[v].len()).sum();
        comp_edges.push(deg_sum / 2);
        // reverse discovery order has every child before its parent
        order.extend(members.into_iter().rev());
    }
    if let Some(&odd) = comp_edges.iter().find(|&&e| e % 2 == 1) {
        return Err(Error::Infeasible(format!("a component has {odd} edges, an odd number")));
    }
    let pos: Vec<usize> = {
        let mut p = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    // each non-tree edge waits at its endpoint processed first
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &w in &adj[v] {
            let tree = parent[w] == v || parent[v] == w;
            if v < w && !tree {
                let at = if pos[v] < pos[w] { v } else { w };
                pending[at].push(if at == v { w } else { v });
            }
        }
    }
    let mut out = Vec::new();
    for &v in &order {
        let mut ends = std::mem::take(&mut pending[v]);
        if parent[v] != usize::MAX {
            if ends.len() % 2 == 1 {
                ends.push(parent[v]);
            } else {
                pending[parent[v]].push(v);
            }
        }
        for pair in ends.chunks(2) {
            out.push(Walk::path(vec![verts[pair[0]], verts[v], verts[pair[1]]]));
        }
    }
    Ok(out)
}

fn search_decompose(g: &MultiGraph, kind: WalkKind, len: usize, node_limit: u64) -> Result<Vec<Walk>> {
    let edges = g.edge_count();
    if edges > COVER_EDGE_LIMIT {
        return Err(Error::UnsupportedInstance(format!("{edges} edges exceed the search limit {COVER_EDGE_LIMIT}")));
    }
    if !edges.is_multiple_of(len) {
        return Err(Error::Infeasible(format!("{len} does not divide {edges}")));
    }
    let spec = [PartSpec { kind, len, count: edges / len }];
    let budget = SearchBudget { max_edges: COVER_EDGE_LIMIT, node_limit, ..SearchBudget::default() };
    match cover(g, &spec, &budget)? {
        CoverOutcome::Found(walks) => Ok(walks),
        CoverOutcome::ExhaustedNone => Err(Error::Infeasible(format!("no {kind} decomposition with parts of length {len}"))),
        CoverOutcome::BudgetExceeded => Err(Error::UnsupportedInstance("search budget exceeded".into())),
    }
}

/// Which short part `small_path_cycle_decompose` produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmallPart {
    P4,
    C4,
}

/// Decomposes a small target into `P_4`s or `C_4`s by exact search.
pub fn small_path_cycle_decompose(target: &FamilyDescriptor, part: SmallPart) -> Result<Vec<Walk>> {
    decompose_small(&build_family(target)?, part)
}

/// Same as [`small_path_cycle_decompose`] for an already built graph.
pub fn decompose_small(g: &MultiGraph, part: SmallPart) -> Result<Vec<Walk>> {
    decompose_small_with(g, part, 20_000_000)
}

/// [`decompose_small`] with an explicit search node budget.
pub fn decompose_small_with(g: &MultiGraph, part: SmallPart, node_limit: u64) -> Result<Vec<Walk>> {
    let edges = g.edge_count();
    if edges > COVER_EDGE_LIMIT {
        return Err(Error::UnsupportedInstance(format!("{edges} edges exceed {COVER_EDGE_LIMIT}")));
    }
    if !edges.is_multiple_of(4) {
        return Err(Error::UnsupportedInstance(format!("4 does not divide {edges}")));
    }
    if part == SmallPart::C4 && g.degrees().values().any(|d| d % 2 == 1) {
        return Err(Error::UnsupportedInstance("odd degrees rule out a C4 decomposition".into()));
    }
    let kind = if part == SmallPart::P4 { WalkKind::Path } else { WalkKind::Cycle };
    search_decompose(g, kind, 4, node_limit).map_err(|e| match e {
        Error::Infeasible(m) => Error::UnsupportedInstance(m),
        other => other,
    })
}

fn plain(i: usize) -> VertexId {
    VertexId::new(0, i as u32)
}

/// Decomposes `K_n(lambda)` into 8-cycles on labels `(0, i)`.
///
/// Base cycles are found by a difference search over `Z_n` (odd `n`) or
/// `Z_{n-1}` plus a fixed point (even `n`) and developed cyclically.
pub fn c8_decompose_complete(n: u32, lambda: u32) -> Result<Vec<Walk>> {
    if n < 8 {
        return Err(Error::Infeasible(format!("n = {n} is below 8")));
    }
    if lambda == 0 || (lambda * (n - 1)) % 2 == 1 {
        return Err(Error::Infeasible(format!("lambda (n - 1) = {} is odd", lambda * (n - 1))));
    }
    let total = lambda as u64 * n as u64 * (n as u64 - 1) / 2;
    if !total.is_multiple_of(8) {
        return Err(Error::Infeasible(format!("8 does not divide lambda C(n, 2) = {total}")));
    }
    let found = if n % 2 == 1 {
        rotational_cycles(n as usize, lambda as usize, false)
    } else {
        rotational_cycles(n as usize - 1, lambda as usize, true)
    };
    if let Some(walks) = found {
        return Ok(walks);
    }
    let g = build_family(&FamilyDescriptor::Complete(n))?.scaled(lambda);
    search_decompose(&g, WalkKind::Cycle, 8, 20_000_000)
}

/// Develops base cycles over `Z_z` (plus an extra point `z` when `infinity`).
fn rotational_cycles(z: usize, lambda: usize, infinity: bool) -> Option<Vec<Walk>> {
    let base_count = if infinity { lambda * (z + 1) / 16 } else { lambda * (z - 1) / 16 };
    let through_inf = if infinity { lambda / 2 } else { 0 };
    if base_count < through_inf {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(z as u64 * 31 + lambda as u64);
    let mut found = None;
    for attempt in 0..BASE_RESTARTS {
        let mut order: Vec<usize> = (1..=z / 2).rev().collect();
        if attempt > 0 {
            order.shuffle(&mut rng);
        }
        let mut search = BaseSearch {
            z,
            avail: vec![lambda; z / 2 + 1],
            order,
            bases: Vec::new(),
            base_count,
            through_inf,
            nodes: 0,
            limit: if attempt == 0 { 2_000_000 } else { 200_000 },
        };
        search.avail[0] = 0;
        if search.next_cycle() {
            found = Some(search.bases);
            break;
        }
    }
    let bases = found?;
    let mut out = Vec::new();
    for (b, base) in bases.iter().enumerate() {
        for s in 0..z {
            let mut vs: Vec<VertexId> = base.iter().map(|&x| plain((x + s) % z)).collect();
            if b < through_inf {
                vs.insert(0, plain(z));
            }
            out.push(Walk::cycle(vs));
        }
    }
    Some(out)
}

const BASE_RESTARTS: usize = 200;

/// Backtracking over base cycles whose differences use every difference of
/// `Z_z` exactly `lambda` times.
struct BaseSearch {
    z: usize,
    avail: Vec<usize>,
    /// Order in which differences are tried.
    order: Vec<usize>,
    bases: Vec<Vec<usize>>,
    base_count: usize,
    through_inf: usize,
    nodes: u64,
    limit: u64,
}

impl BaseSearch {
    fn diff(&self, a: usize, b: usize) -> usize {
        let d = (b + self.z - a) % self.z;
        d.min(self.z - d)
    }

    fn next_cycle(&mut self) -> bool {
        if self.bases.len() == self.base_count {
            return self.avail.iter().all(|&a| a == 0);
        }
        let mut cur = vec![0];
        self.extend(&mut cur)
    }

    fn extend(&mut self, cur: &mut Vec<usize>) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        let through_inf = self.bases.len() < self.through_inf;
        let need = if through_inf { 7 } else { 8 };
        let last = *cur.last().unwrap();
        if cur.len() == need {
            let closing = if through_inf { None } else { Some(self.diff(last, cur[0])) };
            if let Some(d) = closing {
                if self.avail[d] == 0 {
                    return false;
                }
                self.avail[d] -= 1;
            }
            self.bases.push(cur.clone());
            if self.next_cycle() {
                return true;
            }
            self.bases.pop();
            if let Some(d) = closing {
                self.avail[d] += 1;
            }
            return false;
        }
        for idx in 0..self.order.len() {
            let d = self.order[idx];
            if self.avail[d] == 0 {
                continue;
            }
            let steps = if 2 * d == self.z || cur.len() == 1 { 1 } else { 2 };
            for k in 0..steps {
                let next = if k == 0 { (last + d) % self.z } else { (last + self.z - d) % self.z };
                if cur.contains(&next) {
                    continue;
                }
                self.avail[d] -= 1;
                // the closing edge of a plain cycle must still be available
                let closes = through_inf || cur.len() + 1 < need || self.avail[self.diff(next, cur[0])] > 0;
                if closes {
                    cur.push(next);
                    if self.extend(cur) {
                        return true;
                    }
                    cur.pop();
                }
                self.avail[d] += 1;
                if self.nodes > self.limit {
                    return false;
                }
            }
        }
        false
    }
}

fn bip_label(side: u32, i: usize) -> VertexId {
    VertexId::new(side, i as u32)
}

/// Decomposes `K_{a,b}(lambda)` (sides labelled by groups 0 and 1) into 8-cycles.
///
/// The sides are cut into runs of 4 and 6 and each tile is filled from a
/// fixed pattern: the two strip cycles for `K_{4,4}`, the `k46` block for
/// `K_{4,6}`, and the `k66_l2` block for `K_{6,6}(2)`.
pub fn c8_decompose_bipartite(a: u32, b: u32, lambda: u32) -> Result<Vec<Walk>> {
    if a < 4 || b < 4 {
        return Err(Error::Infeasible(format!("sides {a} and {b} must both be at least 4")));
    }
    if lambda == 0 || (lambda * a) % 2 == 1 || (lambda * b) % 2 == 1 {
        return Err(Error::Infeasible("some vertex has odd degree".into()));
    }
    if !(lambda as u64 * a as u64 * b as u64).is_multiple_of(8) {
        return Err(Error::Infeasible(format!("8 does not divide lambda a b = {}", lambda * a * b)));
    }
    let split = |s: u32| -> Option<Vec<usize>> {
        if s % 2 == 1 {
            return None;
        }
        let mut parts = vec![4usize; (s / 4) as usize];
        if s % 4 == 2 {
            parts.pop();
            parts.push(6);
        }
        Some(parts)
    };
    let (Some(sa), Some(sb)) = (split(a), split(b)) else {
        let g = build_family(&FamilyDescriptor::CompleteBipartite(a, b))?.scaled(lambda);
        return search_decompose(&g, WalkKind::Cycle, 8, 20_000_000);
    };
    let mut out = Vec::new();
    let mut x0 = 0;
    for &xa in &sa {
        let mut y0 = 0;
        for &yb in &sb {
            let tile = bipartite_tile(xa, yb, lambda)?;
            for w in tile {
                out.push(w.map_vertices(|v| {
                    if v.group == 0 {
                        bip_label(0, x0 + v.index as usize)
                    } else {
                        bip_label(1, y0 + v.index as usize)
                    }
                }));
            }
            y0 += yb;
        }
        x0 += xa;
    }
    Ok(out)
}

fn bipartite_tile(a: usize, b: usize, lambda: u32) -> Result<Vec<Walk>> {
    let catalog = Catalog::builtin();
    let cycles_of = |id: &str| -> Result<Vec<Walk>> {
        let block = catalog.get(id)?;
        block.walks(0, block.part_count())
    };
    let transpose = |w: Walk| w.map_vertices(|v| VertexId::new(1 - v.group, v.index));
    let once: Vec<Walk> = match (a, b) {
        (4, 4) => {
            let c1 = [(0, 0), (1, 0), (0, 3), (1, 3), (0, 2), (1, 2), (0, 1), (1, 1)];
            let c2 = [(0, 0), (1, 2), (0, 3), (1, 1), (0, 2), (1, 0), (0, 1), (1, 3)];
            [c1, c2]
                .iter()
                .map(|c| Walk::cycle(c.iter().map(|&(s, i)| bip_label(s, i)).collect()))
                .collect()
        }
        (4, 6) => cycles_of("k46")?,
        (6, 4) => cycles_of("k46")?.into_iter().map(transpose).collect(),
        (6, 6) => {
            if lambda % 2 == 1 {
                return Err(Error::Infeasible("K6,6 needs an even multiplicity".into()));
            }
            let pair = cycles_of("k66_l2")?;
            let mut out = Vec::new();
            for _ in 0..lambda / 2 {
                out.extend(pair.iter().cloned());
            }
            return Ok(out);
        }
        _ => unreachable!("tiles have sides 4 or 6"),
    };
    let mut out = Vec::new();
    for _ in 0..lambda {
        out.extend(once.iter().cloned());
    }
    Ok(out)
}

/// Checks that `walks` exactly partition `g` (used by tests and callers that
/// assemble pieces).
pub fn partitions(g: &MultiGraph, walks: &[Walk]) -> bool {
    let mut cover: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
    for w in walks {
        let mut vs = w.vertices.clone();
        vs.sort();
        vs.dedup();
        if vs.len() != w.vertices.len() {
            return false;
        }
        for (u, v) in w.edges() {
            *cover.entry(edge_key(u, v)).or_insert(0) += 1;
        }
    }
    cover.len() == g.edge_map().len() && cover.iter().all(|(k, &c)| g.edge_map().get(k) == Some(&c))
}
