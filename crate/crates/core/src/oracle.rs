//! Exact backtracking search for decompositions of small multigraphs into
//! paths and cycles of a fixed length.
//!
//! The search always branches on the least uncovered edge and enumerates
//! every part through it, so a search that finishes within budget without a
//! solution proves that none exists.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certify::{Certificate, Walk, WalkKind};
use crate::error::{Error, Result};
use crate::graph::{build_family, FamilyDescriptor, MultiGraph, VertexId};
use crate::PART_LEN;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_edges: usize,
    pub time_limit: Option<Duration>,
    pub node_limit: u64,
    /// Zero keeps the natural neighbour order; other values shuffle it.
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_edges: 48, time_limit: None, node_limit: 200_000_000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Certificate),
    ExhaustedNone,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverOutcome {
    Found(Vec<Walk>),
    ExhaustedNone,
    BudgetExceeded,
}

/// `count` parts of the given kind, each with `len` edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartSpec {
    pub kind: WalkKind,
    pub len: usize,
    pub count: usize,
}

#[derive(PartialEq, Eq)]
enum Status {
    Found,
    Dead,
    Budget,
}

struct Cover<'a> {
    n: usize,
    rem: Vec<u32>,
    deg: Vec<u32>,
    nbrs: Vec<Vec<usize>>,
    specs: &'a [PartSpec],
    left: Vec<usize>,
    edges_left: usize,
    len: usize,
    parts: Vec<(WalkKind, Vec<usize>)>,
    nodes: u64,
    budget: &'a SearchBudget,
    started: Instant,
}

impl Cover<'_> {
    fn take(&mut self, a: usize, b: usize) {
        self.rem[a * self.n + b] -= 1;
        self.rem[b * self.n + a] -= 1;
        self.deg[a] -= 1;
        self.deg[b] -= 1;
        self.edges_left -= 1;
    }

    fn give(&mut self, a: usize, b: usize) {
        self.rem[a * self.n + b] += 1;
        self.rem[b * self.n + a] += 1;
        self.deg[a] += 1;
        self.deg[b] += 1;
        self.edges_left += 1;
    }

    fn has(&self, a: usize, b: usize) -> bool {
        self.rem[a * self.n + b] > 0
    }

    fn out_of_budget(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.node_limit {
            return true;
        }
        if self.nodes.is_multiple_of(4096) {
            if let Some(limit) = self.budget.time_limit {
                return self.started.elapsed() > limit;
            }
        }
        false
    }

    fn paths_left(&self) -> usize {
        self.specs
            .iter()
            .zip(&self.left)
            .filter(|(s, _)| s.kind == WalkKind::Path)
            .map(|(_, &c)| c)
            .sum()
    }

    fn hopeless(&self) -> bool {
        let odd = self.deg.iter().filter(|&&d| d % 2 == 1).count();
        let paths = self.paths_left();
        if odd > 2 * paths || (paths == 0 && odd > 0) || (paths == 1 && odd != 2) {
            return true;
        }
        // every component must hold a whole number of parts
        let mut comp = vec![usize::MAX; self.n];
        for s in 0..self.n {
            if comp[s] != usize::MAX || self.deg[s] == 0 {
                continue;
            }
            comp[s] = s;
            let mut stack = vec![s];
            let mut degree_sum = 0;
            while let Some(v) = stack.pop() {
                degree_sum += self.deg[v] as usize;
                for &w in &self.nbrs[v] {
                    if comp[w] == usize::MAX && self.has(v, w) {
                        comp[w] = s;
                        stack.push(w);
                    }
                }
            }
            if (degree_sum / 2) % self.len != 0 {
                return true;
            }
        }
        false
    }

    fn solve(&mut self) -> Status {
        if self.edges_left == 0 {
            return Status::Found;
        }
        if self.out_of_budget() {
            return Status::Budget;
        }
        if self.hopeless() {
            return Status::Dead;
        }
        let u = (0..self.n).find(|&v| self.deg[v] > 0).unwrap();
        let v = (u + 1..self.n).find(|&w| self.has(u, w)).unwrap();
        let mut tried: Vec<(WalkKind, usize)> = Vec::new();
        for i in 0..self.specs.len() {
            let spec = self.specs[i];
            if self.left[i] == 0 || tried.contains(&(spec.kind, spec.len)) {
                continue;
            }
            tried.push((spec.kind, spec.len));
            self.left[i] -= 1;
            self.take(u, v);
            let status = match spec.kind {
                WalkKind::Cycle => {
                    let mut right = vec![u, v];
                    self.grow(spec, &mut right, &mut Vec::new(), spec.len - 2, 0)
                }
                WalkKind::Path => {
                    let mut status = Status::Dead;
                    for k in 0..spec.len {
                        let mut right = vec![u, v];
                        status = self.grow(spec, &mut right, &mut Vec::new(), spec.len - 1 - k, k);
                        if status != Status::Dead {
                            break;
                        }
                    }
                    status
                }
            };
            self.give(u, v);
            self.left[i] += 1;
            if status != Status::Dead {
                return status;
            }
        }
        Status::Dead
    }

    /// Extends `right` (which starts with the branching edge) by `r` more
    /// vertices and `left` (stored outward from the first vertex) by `l`.
    fn grow(&mut self, spec: PartSpec, right: &mut Vec<usize>, left: &mut Vec<usize>, r: usize, l: usize) -> Status {
        if r == 0 && l == 0 {
            let first = right[0];
            let last = *right.last().unwrap();
            let closing = spec.kind == WalkKind::Cycle;
            if closing {
                if !self.has(last, first) {
                    return Status::Dead;
                }
                self.take(last, first);
            }
            let walk: Vec<usize> = left.iter().rev().chain(right.iter()).copied().collect();
            self.parts.push((spec.kind, walk));
            let status = self.solve();
            if status != Status::Found {
                self.parts.pop();
            }
            if closing {
                self.give(last, first);
            }
            return status;
        }
        if self.out_of_budget() {
            return Status::Budget;
        }
        let (from, grow_right) = if r > 0 {
            (*right.last().unwrap(), true)
        } else {
            (*left.last().unwrap_or(&right[0]), false)
        };
        for k in 0..self.nbrs[from].len() {
            let w = self.nbrs[from][k];
            if !self.has(from, w) || right.contains(&w) || left.contains(&w) {
                continue;
            }
            self.take(from, w);
            let status = if grow_right {
                right.push(w);
                let s = self.grow(spec, right, left, r - 1, l);
                right.pop();
                s
            } else {
                left.push(w);
                let s = self.grow(spec, right, left, r, l - 1);
                left.pop();
                s
            };
            self.give(from, w);
            if status != Status::Dead {
                return status;
            }
        }
        Status::Dead
    }
}

/// Searches for an exact decomposition of `g` into the given parts. All
/// parts must have the same length.
pub fn cover(g: &MultiGraph, specs: &[PartSpec], budget: &SearchBudget) -> Result<CoverOutcome> {
    let len = specs.first().map(|s| s.len).unwrap_or(PART_LEN);
    if specs.iter().any(|s| s.len != len || s.len == 0) {
        return Err(Error::InvalidRequest("all parts must share one positive length".into()));
    }
    if specs.iter().any(|s| s.kind == WalkKind::Cycle && s.len < 3) {
        return Err(Error::InvalidRequest("cycles need length at least 3".into()));
    }
    let edges = g.edge_count();
    let needed: usize = specs.iter().map(|s| s.len * s.count).sum();
    if needed != edges {
        return Err(Error::InvalidRequest(format!("parts hold {needed} edges but the graph has {edges}")));
    }
    if edges > budget.max_edges {
        return Err(Error::InvalidRequest(format!("{edges} edges exceed the search limit {}", budget.max_edges)));
    }
    let verts = g.vertices();
    let n = verts.len();
    let mut rem = vec![0u32; n * n];
    let mut deg = vec![0u32; n];
    let mut nbrs = vec![Vec::new(); n];
    for (u, v, m) in g.edges() {
        let (a, b) = (g.rank(u).unwrap(), g.rank(v).unwrap());
        rem[a * n + b] = m;
        rem[b * n + a] = m;
        deg[a] += m;
        deg[b] += m;
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    for list in nbrs.iter_mut() {
        list.sort();
    }
    if budget.seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for list in nbrs.iter_mut() {
            list.shuffle(&mut rng);
        }
    }
    let mut state = Cover {
        n,
        rem,
        deg,
        nbrs,
        specs,
        left: specs.iter().map(|s| s.count).collect(),
        edges_left: edges,
        len,
        parts: Vec::new(),
        nodes: 0,
        budget,
        started: Instant::now(),
    };
    Ok(match state.solve() {
        Status::Found => CoverOutcome::Found(
            state
                .parts
                .into_iter()
                .map(|(kind, vs)| Walk { kind, vertices: vs.into_iter().map(|i| verts[i]).collect() })
                .collect(),
        ),
        Status::Dead => CoverOutcome::ExhaustedNone,
        Status::Budget => CoverOutcome::BudgetExceeded,
    })
}

/// Looks for `p` paths and `q` cycles of length 8 in an explicit graph.
pub fn search_graph(g: &MultiGraph, p: usize, q: usize, budget: &SearchBudget) -> Result<CoverOutcome> {
    if PART_LEN * (p + q) != g.edge_count() {
        return Err(Error::InvalidRequest(format!(
            "8 (p + q) = {} differs from the edge count {}",
            PART_LEN * (p + q),
            g.edge_count()
        )));
    }
    let specs = [
        PartSpec { kind: WalkKind::Path, len: PART_LEN, count: p },
        PartSpec { kind: WalkKind::Cycle, len: PART_LEN, count: q },
    ];
    cover(g, &specs, budget)
}

/// Looks for an `(8; p, q)`-decomposition of `target(lambda)`.
pub fn search(target: &FamilyDescriptor, lambda: u32, p: usize, q: usize, budget: &SearchBudget) -> Result<SearchOutcome> {
    let g = build_family(target)?.scaled(lambda);
    Ok(match search_graph(&g, p, q, budget)? {
        CoverOutcome::Found(walks) => SearchOutcome::Found(Certificate::new(target.clone(), lambda, walks)),
        CoverOutcome::ExhaustedNone => SearchOutcome::ExhaustedNone,
        CoverOutcome::BudgetExceeded => SearchOutcome::BudgetExceeded,
    })
}

/// Runs the search for every split of the parts into paths and cycles.
/// The flag is true when no candidate ran out of budget.
pub fn enumerate_feasible(g: &MultiGraph, budget: &SearchBudget) -> Result<(BTreeSet<(usize, usize)>, bool)> {
    let edges = g.edge_count();
    if !edges.is_multiple_of(PART_LEN) {
        return Err(Error::InvalidRequest(format!("8 does not divide {edges}")));
    }
    let total = edges / PART_LEN;
    let mut found = BTreeSet::new();
    let mut complete = true;
    for p in 0..=total {
        match search_graph(g, p, total - p, budget)? {
            CoverOutcome::Found(_) => {
                found.insert((p, total - p));
            }
            CoverOutcome::ExhaustedNone => {}
            CoverOutcome::BudgetExceeded => complete = false,
        }
    }
    Ok((found, complete))
}

/// Walks of the same kind and length as `walk` that differ from it in at
/// most `distance` positions and use only edges of `g`.
pub fn repair_candidates(g: &MultiGraph, walk: &Walk, distance: usize) -> Vec<Walk> {
    fn rec(
        g: &MultiGraph,
        walk: &Walk,
        cur: &mut Vec<VertexId>,
        from: usize,
        left: usize,
        out: &mut BTreeSet<Walk>,
    ) {
        let candidate = Walk { kind: walk.kind, vertices: cur.clone() };
        if candidate.shape_defect(walk.len()).is_none()
            && candidate.edges().iter().all(|&(u, v)| g.multiplicity(u, v) > 0)
        {
            out.insert(candidate);
        }
        if left == 0 {
            return;
        }
        for pos in from..cur.len() {
            let original = cur[pos];
            for &v in g.vertices() {
                if v == original {
                    continue;
                }
                cur[pos] = v;
                rec(g, walk, cur, pos + 1, left - 1, out);
            }
            cur[pos] = original;
        }
    }
    let mut out = BTreeSet::new();
    let mut cur = walk.vertices.clone();
    rec(g, walk, &mut cur, 0, distance, &mut out);
    out.into_iter().collect()
}
