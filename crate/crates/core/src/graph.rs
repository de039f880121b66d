//! Graph families, products and relabelling over `(group, index)` vertex labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certify::Walk;
use crate::error::{Error, Result};

/// Largest parameter accepted by [`build_family`].
pub const MAX_PARAM: u32 = 10_000;
const MAX_VERTICES: usize = 1_000_000;

/// A vertex label. Plain families use group 0; products use the rank of the
/// first-factor vertex as the group and the rank of the second-factor vertex
/// as the index. Groups print as letters, so `(2, 5)` is `c5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub group: u32,
    pub index: u32,
}

impl VertexId {
    pub const fn new(group: u32, index: u32) -> Self {
        VertexId { group, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.group < 26 {
            write!(f, "{}{}", (b'a' + self.group as u8) as char, self.index)
        } else {
            write!(f, "[{},{}]", self.group, self.index)
        }
    }
}

impl FromStr for VertexId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(format!("bad vertex label `{s}`"));
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (g, i) = inner.split_once(',').ok_or_else(bad)?;
            let group = g.trim().parse().map_err(|_| bad())?;
            let index = i.trim().parse().map_err(|_| bad())?;
            return Ok(VertexId::new(group, index));
        }
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(bad)?;
        if !letter.is_ascii_lowercase() {
            return Err(bad());
        }
        let index: u32 = chars.as_str().parse().map_err(|_| bad())?;
        Ok(VertexId::new(letter as u32 - 'a' as u32, index))
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.group, self.index).serialize(s)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (group, index) = <(u32, u32)>::deserialize(d)?;
        Ok(VertexId { group, index })
    }
}

/// Parses a whitespace separated list of labels such as `a0 b3 c1`.
pub fn parse_vertices(text: &str) -> Result<Vec<VertexId>> {
    text.split_whitespace().map(str::parse).collect()
}

/// Orders an unordered pair.
pub fn edge_key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A loopless multigraph with an explicit, sorted vertex set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: Vec<VertexId>,
    edges: BTreeMap<(VertexId, VertexId), u32>,
}

impl MultiGraph {
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let set: BTreeSet<VertexId> = vertices.into_iter().collect();
        MultiGraph {
            vertices: set.into_iter().collect(),
            edges: BTreeMap::new(),
        }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, mult: u32) -> Result<()> {
        if u == v {
            return Err(Error::InvalidDescriptor(format!("loop at {u}")));
        }
        if !self.contains(u) || !self.contains(v) {
            return Err(Error::InvalidDescriptor(format!("edge {u}-{v} leaves the vertex set")));
        }
        if mult > 0 {
            *self.edges.entry(edge_key(u, v)).or_insert(0) += mult;
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.rank(v).is_some()
    }

    /// Position of `v` in the sorted vertex list.
    pub fn rank(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn edge_map(&self) -> &BTreeMap<(VertexId, VertexId), u32> {
        &self.edges
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.edges.iter().map(|(&(u, v), &m)| (u, v, m))
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.edges.get(&edge_key(u, v)).copied().unwrap_or(0)
    }

    /// Total edge multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges.values().map(|&m| m as usize).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.edges.values().all(|&m| m == 1)
    }

    pub fn degrees(&self) -> BTreeMap<VertexId, usize> {
        let mut deg: BTreeMap<VertexId, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for (u, v, m) in self.edges() {
            *deg.get_mut(&u).unwrap() += m as usize;
            *deg.get_mut(&v).unwrap() += m as usize;
        }
        deg
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges()
            .filter(|&(a, b, _)| a == v || b == v)
            .map(|(_, _, m)| m as usize)
            .sum()
    }

    /// Every multiplicity multiplied by `lambda`.
    pub fn scaled(&self, lambda: u32) -> MultiGraph {
        MultiGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .filter(|_| lambda > 0)
                .map(|(&k, &m)| (k, m * lambda))
                .collect(),
        }
    }

    /// Adds the vertices and edge multiplicities of `other`.
    pub fn absorb(&mut self, other: &MultiGraph) {
        let set: BTreeSet<VertexId> = self.vertices.iter().chain(other.vertices.iter()).copied().collect();
        self.vertices = set.into_iter().collect();
        for (&k, &m) in &other.edges {
            *self.edges.entry(k).or_insert(0) += m;
        }
    }
}

/// One member of a [`FamilyDescriptor::UnionOf`]: a family plus the images of
/// its canonical vertices (in sorted order). No map means the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Embedded {
    pub desc: FamilyDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyDescriptor {
    Complete(u32),
    CompleteBipartite(u32, u32),
    /// Complete graph on an even number of vertices minus the matching
    /// `{2j, 2j+1}`.
    CompleteMinusF1(u32),
    Cycle(u32),
    /// Path with `len` edges and `len + 1` vertices.
    PathLen(u32),
    Empty(u32),
    Tensor(Box<FamilyDescriptor>, Box<FamilyDescriptor>),
    Wreath(Box<FamilyDescriptor>, Box<FamilyDescriptor>),
    Scaled(Box<FamilyDescriptor>, u32),
    UnionOf(Vec<Embedded>),
}

impl FamilyDescriptor {
    pub fn tensor(a: FamilyDescriptor, b: FamilyDescriptor) -> Self {
        FamilyDescriptor::Tensor(Box::new(a), Box::new(b))
    }

    pub fn wreath(a: FamilyDescriptor, b: FamilyDescriptor) -> Self {
        FamilyDescriptor::Wreath(Box::new(a), Box::new(b))
    }

    /// `f(lambda)`, collapsing nested scalings and dropping a factor of 1.
    pub fn scaled(f: FamilyDescriptor, lambda: u32) -> Self {
        match f {
            FamilyDescriptor::Scaled(inner, a) => FamilyDescriptor::scaled(*inner, a * lambda),
            other if lambda == 1 => other,
            other => FamilyDescriptor::Scaled(Box::new(other), lambda),
        }
    }

    /// Rewrites every nested scaling into its canonical form.
    pub fn normalized(&self) -> Self {
        use FamilyDescriptor::*;
        match self {
            Tensor(a, b) => FamilyDescriptor::tensor(a.normalized(), b.normalized()),
            Wreath(a, b) => FamilyDescriptor::wreath(a.normalized(), b.normalized()),
            Scaled(f, l) => FamilyDescriptor::scaled(f.normalized(), *l),
            UnionOf(members) => UnionOf(
                members
                    .iter()
                    .map(|m| Embedded { desc: m.desc.normalized(), map: m.map.clone() })
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FamilyDescriptor::*;
        match self {
            Complete(n) => write!(f, "K{n}"),
            CompleteBipartite(a, b) => write!(f, "K{a},{b}"),
            CompleteMinusF1(n) => write!(f, "K{n}-F1"),
            Cycle(n) => write!(f, "C{n}"),
            PathLen(n) => write!(f, "P{n}"),
            Empty(n) => write!(f, "E{n}"),
            Tensor(a, b) => write!(f, "({a} x {b})"),
            Wreath(a, b) => write!(f, "({a} o {b})"),
            Scaled(a, l) => write!(f, "{a}({l})"),
            UnionOf(ms) => {
                let parts: Vec<String> = ms.iter().map(|m| m.desc.to_string()).collect();
                write!(f, "union[{}]", parts.join(", "))
            }
        }
    }
}

fn check_param(n: u32, what: &str) -> Result<()> {
    if n > MAX_PARAM {
        return Err(Error::InvalidDescriptor(format!("{what} = {n} exceeds {MAX_PARAM}")));
    }
    Ok(())
}

fn plain(n: u32) -> MultiGraph {
    MultiGraph::new((0..n).map(|i| VertexId::new(0, i)))
}

/// Builds the canonical labelled graph of a descriptor.
pub fn build_family(desc: &FamilyDescriptor) -> Result<MultiGraph> {
    use FamilyDescriptor::*;
    let v = |i: u32| VertexId::new(0, i);
    match desc {
        Complete(n) => {
            check_param(*n, "complete")?;
            let mut g = plain(*n);
            for i in 0..*n {
                for j in i + 1..*n {
                    g.add_edge(v(i), v(j), 1)?;
                }
            }
            Ok(g)
        }
        CompleteBipartite(a, b) => {
            check_param(*a, "bipartite side")?;
            check_param(*b, "bipartite side")?;
            let mut g = MultiGraph::new(
                (0..*a).map(|i| VertexId::new(0, i)).chain((0..*b).map(|j| VertexId::new(1, j))),
            );
            for i in 0..*a {
                for j in 0..*b {
                    g.add_edge(VertexId::new(0, i), VertexId::new(1, j), 1)?;
                }
            }
            Ok(g)
        }
        CompleteMinusF1(n) => {
            check_param(*n, "complete minus F1")?;
            if n % 2 == 1 {
                return Err(Error::InvalidDescriptor(format!(
                    "complete_minus_f1 needs an even vertex count, got {n}"
                )));
            }
            let mut g = plain(*n);
            for i in 0..*n {
                for j in i + 1..*n {
                    if !(i % 2 == 0 && j == i + 1) {
                        g.add_edge(v(i), v(j), 1)?;
                    }
                }
            }
            Ok(g)
        }
        Cycle(n) => {
            check_param(*n, "cycle")?;
            if *n < 3 {
                return Err(Error::InvalidDescriptor(format!("cycle length {n} is below 3")));
            }
            let mut g = plain(*n);
            for i in 0..*n {
                g.add_edge(v(i), v((i + 1) % n), 1)?;
            }
            Ok(g)
        }
        PathLen(n) => {
            check_param(*n, "path length")?;
            let mut g = plain(n + 1);
            for i in 0..*n {
                g.add_edge(v(i), v(i + 1), 1)?;
            }
            Ok(g)
        }
        Empty(n) => {
            check_param(*n, "empty")?;
            Ok(plain(*n))
        }
        Tensor(a, b) => tensor(&build_family(a)?, &build_family(b)?),
        Wreath(a, b) => wreath(&build_family(a)?, &build_family(b)?),
        Scaled(f, lambda) => {
            check_param(*lambda, "lambda")?;
            Ok(build_family(f)?.scaled(*lambda))
        }
        UnionOf(members) => {
            let mut g = MultiGraph::default();
            for m in members {
                let base = build_family(&m.desc)?;
                let part = match &m.map {
                    None => base,
                    Some(images) => {
                        if images.len() != base.vertex_count() {
                            return Err(Error::InvalidDescriptor(format!(
                                "union member {} has {} vertices but its map has {}",
                                m.desc,
                                base.vertex_count(),
                                images.len()
                            )));
                        }
                        let map = base.vertices().iter().copied().zip(images.iter().copied()).collect();
                        embed(&base, &map)?
                    }
                };
                g.absorb(&part);
            }
            Ok(g)
        }
    }
}

fn product_vertices(g: &MultiGraph, h: &MultiGraph) -> Result<MultiGraph> {
    if g.vertex_count() == 0 || h.vertex_count() == 0 {
        return Err(Error::InvalidDescriptor("product with an empty vertex set".into()));
    }
    if g.vertex_count() * h.vertex_count() > MAX_VERTICES {
        return Err(Error::InvalidDescriptor("product too large".into()));
    }
    Ok(MultiGraph::new((0..g.vertex_count() as u32).flat_map(|i| {
        (0..h.vertex_count() as u32).map(move |j| VertexId::new(i, j))
    })))
}

/// Tensor product. Each pair of factor edges contributes both pairings, so a
/// product of simple graphs has `2 |E(g)| |E(h)|` edges.
pub fn tensor(g: &MultiGraph, h: &MultiGraph) -> Result<MultiGraph> {
    let mut out = product_vertices(g, h)?;
    let rg = |v: VertexId| g.rank(v).unwrap() as u32;
    let rh = |v: VertexId| h.rank(v).unwrap() as u32;
    for (u1, u2, m1) in g.edges() {
        for (v1, v2, m2) in h.edges() {
            let (a, b, c, d) = (rg(u1), rg(u2), rh(v1), rh(v2));
            out.add_edge(VertexId::new(a, c), VertexId::new(b, d), m1 * m2)?;
            out.add_edge(VertexId::new(a, d), VertexId::new(b, c), m1 * m2)?;
        }
    }
    Ok(out)
}

/// Wreath (lexicographic) product: groups joined completely along edges of
/// `g`, with a copy of `h` inside every group.
pub fn wreath(g: &MultiGraph, h: &MultiGraph) -> Result<MultiGraph> {
    let mut out = product_vertices(g, h)?;
    let n = h.vertex_count() as u32;
    for (u1, u2, m) in g.edges() {
        let (a, b) = (g.rank(u1).unwrap() as u32, g.rank(u2).unwrap() as u32);
        for j in 0..n {
            for k in 0..n {
                out.add_edge(VertexId::new(a, j), VertexId::new(b, k), m)?;
            }
        }
    }
    for i in 0..g.vertex_count() as u32 {
        for (v1, v2, m) in h.edges() {
            let (c, d) = (h.rank(v1).unwrap() as u32, h.rank(v2).unwrap() as u32);
            out.add_edge(VertexId::new(i, c), VertexId::new(i, d), m)?;
        }
    }
    Ok(out)
}

/// Relabels `g` through an injective map defined on all of its vertices.
pub fn embed(g: &MultiGraph, map: &BTreeMap<VertexId, VertexId>) -> Result<MultiGraph> {
    let mut images = BTreeSet::new();
    for &v in g.vertices() {
        let w = map
            .get(&v)
            .ok_or_else(|| Error::Embedding(format!("vertex {v} has no image")))?;
        if !images.insert(*w) {
            return Err(Error::Embedding(format!("two vertices map to {w}")));
        }
    }
    let mut out = MultiGraph::new(images);
    for (u, v, m) in g.edges() {
        out.add_edge(map[&u], map[&v], m)?;
    }
    Ok(out)
}

/// A permutation of a graph's vertices stored as disjoint cycles; vertices
/// not on any cycle are fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    cycles: Vec<Vec<VertexId>>,
    position: BTreeMap<VertexId, (usize, usize)>,
    domain: BTreeSet<VertexId>,
}

impl Permutation {
    pub fn identity(domain: impl IntoIterator<Item = VertexId>) -> Self {
        Permutation {
            cycles: Vec::new(),
            position: BTreeMap::new(),
            domain: domain.into_iter().collect(),
        }
    }

    pub fn from_cycles(cycles: Vec<Vec<VertexId>>, domain: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let domain: BTreeSet<VertexId> = domain.into_iter().collect();
        let mut position = BTreeMap::new();
        for (ci, cycle) in cycles.iter().enumerate() {
            for (pi, &v) in cycle.iter().enumerate() {
                if !domain.contains(&v) {
                    return Err(Error::PermutationDomain(v));
                }
                if position.insert(v, (ci, pi)).is_some() {
                    return Err(Error::InvalidDescriptor(format!("{v} appears twice in the permutation")));
                }
            }
        }
        Ok(Permutation { cycles, position, domain })
    }

    /// Parses cycle notation such as `(a0 a1 a2)(b0 b1 b2)`.
    pub fn parse(text: &str, domain: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| Error::InvalidDescriptor(format!("bad cycle notation `{text}`")))?;
            cycles.push(parse_vertices(body.0)?);
            rest = body.1.trim_start();
        }
        Permutation::from_cycles(cycles, domain)
    }

    pub fn cycles(&self) -> &[Vec<VertexId>] {
        &self.cycles
    }

    pub fn domain(&self) -> &BTreeSet<VertexId> {
        &self.domain
    }

    /// Image of `v` under the `exponent`-th power.
    pub fn image(&self, v: VertexId, exponent: u32) -> Result<VertexId> {
        if !self.domain.contains(&v) {
            return Err(Error::PermutationDomain(v));
        }
        Ok(match self.position.get(&v) {
            None => v,
            Some(&(c, p)) => {
                let cycle = &self.cycles[c];
                cycle[(p + exponent as usize) % cycle.len()]
            }
        })
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles.iter().fold(1, |acc, c| acc / gcd(acc, c.len()) * c.len())
    }

    /// True when the edge multiset of `g` is mapped onto itself.
    pub fn is_automorphism(&self, g: &MultiGraph) -> bool {
        g.edges().all(|(u, v, m)| match (self.image(u, 1), self.image(v, 1)) {
            (Ok(a), Ok(b)) => g.multiplicity(a, b) == m,
            _ => false,
        })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            let names: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            write!(f, "({})", names.join(" "))?;
        }
        Ok(())
    }
}

/// Vertex-wise image of a walk under `rho^exponent`.
pub fn apply_permutation(rho: &Permutation, walk: &Walk, exponent: u32) -> Result<Walk> {
    let vertices = walk
        .vertices
        .iter()
        .map(|&v| rho.image(v, exponent))
        .collect::<Result<Vec<_>>>()?;
    Ok(Walk { kind: walk.kind, vertices })
}
