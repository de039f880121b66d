//! Planning, allocation and execution for tensor and wreath products of
//! complete graphs.
//!
//! A plan is a tree whose leaves are catalog blocks (or fixed walk lists)
//! embedded into the target. The leaves partition the target's edge
//! multiset, so choosing a feasible `(p_i, q_i)` for every leaf and taking
//! the union of the embedded leaf decompositions gives a decomposition of
//! the target.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog::Catalog;
use crate::certify::{parity_stats, verify, Certificate, Walk, WalkKind};
use crate::error::{Error, Result};
use crate::graph::{build_family, edge_key, FamilyDescriptor, VertexId};
use crate::PART_LEN;

pub mod tensor;
pub mod wreath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tensor,
    Wreath,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tensor" => Ok(Family::Tensor),
            "wreath" => Ok(Family::Wreath),
            other => Err(Error::InvalidRequest(format!("unknown family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Tensor => "tensor",
            Family::Wreath => "wreath",
        })
    }
}

/// A product instance: `K_m x K_n` or `K_m o complement(K_n)`, with every
/// edge repeated `lambda` times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub family: Family,
    pub m: u32,
    pub n: u32,
    pub lambda: u32,
}

impl Instance {
    pub fn new(family: Family, m: u32, n: u32, lambda: u32) -> Self {
        Instance { family, m, n, lambda }
    }

    /// The descriptor certificates are checked against. Tensor instances are
    /// normalized so that the smaller factor comes first.
    pub fn target(&self) -> FamilyDescriptor {
        match self.family {
            Family::Tensor => {
                let (a, b) = (self.m.min(self.n), self.m.max(self.n));
                FamilyDescriptor::tensor(FamilyDescriptor::Complete(a), FamilyDescriptor::Complete(b))
            }
            Family::Wreath => {
                FamilyDescriptor::wreath(FamilyDescriptor::Complete(self.m), FamilyDescriptor::Empty(self.n))
            }
        }
    }

    /// Edge count of the target, from the closed formula.
    pub fn edge_count(&self) -> u64 {
        let (m, n, l) = (self.m as u64, self.n as u64, self.lambda as u64);
        match self.family {
            Family::Tensor => l * m * n * (m.saturating_sub(1)) * (n.saturating_sub(1)) / 2,
            Family::Wreath => l * n * n * m * (m.saturating_sub(1)) / 2,
        }
    }

    /// Common degree of every vertex.
    pub fn degree(&self) -> u64 {
        let (m, n, l) = (self.m as u64, self.n as u64, self.lambda as u64);
        match self.family {
            Family::Tensor => l * m.saturating_sub(1) * n.saturating_sub(1),
            Family::Wreath => l * n * m.saturating_sub(1),
        }
    }

    pub fn vertex_count(&self) -> u64 {
        self.m as u64 * self.n as u64
    }

    pub fn with_lambda(&self, lambda: u32) -> Self {
        Instance { lambda, ..*self }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.family {
            Family::Tensor => "x",
            Family::Wreath => "o",
        };
        write!(f, "K{} {op} K{}({})", self.m, self.n, self.lambda)
    }
}

/// A full build request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub instance: Instance,
    pub p: usize,
    pub q: usize,
}

/// Where a leaf's walks come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafSource {
    Block(String),
    /// A fixed decomposition in leaf-local labels.
    Fixed(Vec<Walk>),
}

/// How leaf-local labels reach the host.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Embedding {
    Direct(BTreeMap<VertexId, VertexId>),
    /// Two copies of a leaf whose graph has no edge inside a group: copy A
    /// sends even walk positions through `map0` and odd ones through
    /// `map1`, copy B the other way round. Together they cover every leaf
    /// edge in both crossings between the two maps.
    Doubled {
        map0: BTreeMap<VertexId, VertexId>,
        map1: BTreeMap<VertexId, VertexId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub source: LeafSource,
    pub embed: Embedding,
}

impl Leaf {
    pub fn block(id: &str, map: BTreeMap<VertexId, VertexId>) -> Self {
        Leaf { source: LeafSource::Block(id.to_string()), embed: Embedding::Direct(map) }
    }

    pub fn name(&self) -> String {
        let base = match &self.source {
            LeafSource::Block(id) => id.clone(),
            LeafSource::Fixed(w) => format!("fixed[{}]", w.len()),
        };
        match self.embed {
            Embedding::Direct(_) => base,
            Embedding::Doubled { .. } => format!("{base} doubled"),
        }
    }

    fn multiplier(&self) -> usize {
        match self.embed {
            Embedding::Direct(_) => 1,
            Embedding::Doubled { .. } => 2,
        }
    }

    /// Feasible path counts; the cycle count is `parts - p`.
    pub fn feasible_p(&self, catalog: &Catalog) -> Result<Vec<usize>> {
        let base: Vec<usize> = match &self.source {
            LeafSource::Block(id) => catalog.get(id)?.feasible_p(),
            LeafSource::Fixed(w) => vec![w.iter().filter(|x| x.kind == WalkKind::Path).count()],
        };
        Ok(base.into_iter().map(|p| p * self.multiplier()).collect())
    }

    pub fn parts(&self, catalog: &Catalog) -> Result<usize> {
        let base = match &self.source {
            LeafSource::Block(id) => catalog.get(id)?.part_count(),
            LeafSource::Fixed(w) => w.len(),
        };
        Ok(base * self.multiplier())
    }

    fn local_walks(&self, catalog: &Catalog, p: usize, cache: &mut HashMap<(String, usize), Vec<Walk>>) -> Result<Vec<Walk>> {
        let m = self.multiplier();
        match &self.source {
            LeafSource::Block(id) => {
                let key = (id.clone(), p / m);
                if let Some(w) = cache.get(&key) {
                    return Ok(w.clone());
                }
                let block = catalog.get(id)?;
                let walks = block.walks(p / m, block.part_count() - p / m)?;
                cache.insert(key, walks.clone());
                Ok(walks)
            }
            LeafSource::Fixed(w) => Ok(w.clone()),
        }
    }

    /// Walks in host labels for a leaf-level path count `p`.
    pub fn host_walks(&self, catalog: &Catalog, p: usize) -> Result<Vec<Walk>> {
        self.host_walks_cached(catalog, p, &mut HashMap::new())
    }

    fn host_walks_cached(
        &self,
        catalog: &Catalog,
        p: usize,
        cache: &mut HashMap<(String, usize), Vec<Walk>>,
    ) -> Result<Vec<Walk>> {
        let local = self.local_walks(catalog, p, cache)?;
        let image = |map: &BTreeMap<VertexId, VertexId>, v: VertexId| {
            map.get(&v).copied().ok_or_else(|| Error::Embedding(format!("leaf {} has no image for {v}", self.name())))
        };
        let mut out = Vec::new();
        match &self.embed {
            Embedding::Direct(map) => {
                for w in &local {
                    let vertices = w.vertices.iter().map(|&v| image(map, v)).collect::<Result<Vec<_>>>()?;
                    out.push(Walk { kind: w.kind, vertices });
                }
            }
            Embedding::Doubled { map0, map1 } => {
                for w in &local {
                    for flip in [0, 1] {
                        let vertices = w
                            .vertices
                            .iter()
                            .enumerate()
                            .map(|(i, &v)| image(if (i + flip) % 2 == 0 { map0 } else { map1 }, v))
                            .collect::<Result<Vec<_>>>()?;
                        out.push(Walk { kind: w.kind, vertices });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Host edges covered by the leaf, with multiplicity.
    pub fn host_edges(&self, catalog: &Catalog) -> Result<Vec<((VertexId, VertexId), u32)>> {
        let local: Vec<((VertexId, VertexId), u32)> = match &self.source {
            LeafSource::Block(id) => catalog.get(id)?.target().edges().map(|(u, v, m)| ((u, v), m)).collect(),
            LeafSource::Fixed(walks) => walks.iter().flat_map(|w| w.edges()).map(|e| (e, 1)).collect(),
        };
        let mut out = Vec::new();
        let get = |map: &BTreeMap<VertexId, VertexId>, v: VertexId| {
            map.get(&v).copied().ok_or_else(|| Error::Embedding(format!("leaf {} has no image for {v}", self.name())))
        };
        for ((u, v), m) in local {
            match &self.embed {
                Embedding::Direct(map) => out.push((edge_key(get(map, u)?, get(map, v)?), m)),
                Embedding::Doubled { map0, map1 } => {
                    out.push((edge_key(get(map0, u)?, get(map1, v)?), m));
                    out.push((edge_key(get(map1, u)?, get(map0, v)?), m));
                }
            }
        }
        Ok(out)
    }

    /// The same leaf with every host label passed through `f`.
    pub fn relabel(&self, f: &impl Fn(VertexId) -> VertexId) -> Leaf {
        let remap = |map: &BTreeMap<VertexId, VertexId>| map.iter().map(|(&k, &v)| (k, f(v))).collect();
        let embed = match &self.embed {
            Embedding::Direct(map) => Embedding::Direct(remap(map)),
            Embedding::Doubled { map0, map1 } => Embedding::Doubled { map0: remap(map0), map1: remap(map1) },
        };
        Leaf { source: self.source.clone(), embed }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanNode {
    Leaf(Leaf),
    Sum { label: String, children: Vec<PlanNode> },
}

impl PlanNode {
    pub fn sum(label: impl Into<String>, children: Vec<PlanNode>) -> Self {
        PlanNode::Sum { label: label.into(), children }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            PlanNode::Leaf(l) => out.push(l),
            PlanNode::Sum { children, .. } => children.iter().for_each(|c| c.collect(out)),
        }
    }

    fn write_tree(&self, depth: usize, out: &mut String, max_depth: usize) {
        if depth > max_depth {
            return;
        }
        let pad = "  ".repeat(depth);
        match self {
            PlanNode::Leaf(l) => out.push_str(&format!("{pad}{}\n", l.name())),
            PlanNode::Sum { label, children } => {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                let mut leaves = Vec::new();
                self.collect(&mut leaves);
                for l in leaves {
                    *counts.entry(l.name()).or_insert(0) += 1;
                }
                let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
                out.push_str(&format!("{pad}{label}: {}\n", summary.join(", ")));
                for c in children {
                    if matches!(c, PlanNode::Sum { .. }) {
                        c.write_tree(depth + 1, out, max_depth);
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub instance: Instance,
    pub root: PlanNode,
    /// Rewrites and case labels in the order they were applied.
    pub trace: Vec<String>,
}

impl Plan {
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.root.collect(&mut out);
        out
    }

    pub fn target(&self) -> FamilyDescriptor {
        self.instance.target()
    }

    /// Indented outline of the sum nodes with leaf counts.
    pub fn outline(&self, max_depth: usize) -> String {
        let mut s = String::new();
        self.root.write_tree(0, &mut s, max_depth);
        s
    }

    pub fn total_parts(&self, catalog: &Catalog) -> Result<usize> {
        self.leaves().iter().map(|l| l.parts(catalog)).sum()
    }

    /// Checks that the leaves cover the target edge multiset exactly.
    pub fn check_partition(&self, catalog: &Catalog) -> Result<()> {
        let target = build_family(&self.target())?.scaled(self.instance.lambda);
        let mut covered: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
        for leaf in self.leaves() {
            for (e, m) in leaf.host_edges(catalog)? {
                *covered.entry(e).or_insert(0) += m;
            }
        }
        if &covered != target.edge_map() {
            let extra = covered.iter().find(|(e, &m)| target.edge_map().get(e) != Some(&m));
            let missing = target.edge_map().iter().find(|(e, _)| !covered.contains_key(e));
            return Err(Error::Embedding(format!(
                "plan leaves do not partition the target (first mismatch: {:?}, first missing: {:?})",
                extra.map(|((u, v), m)| format!("{u}-{v} x{m}")),
                missing.map(|((u, v), m)| format!("{u}-{v} x{m}")),
            )));
        }
        Ok(())
    }
}

/// One `(p_i, q_i)` per plan leaf, in leaf order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub per_leaf: Vec<(usize, usize)>,
}

/// Set of sums reachable by choosing one value per leaf, for every suffix
/// of the leaf list.
struct Reach {
    total: usize,
    words: usize,
    /// `suffix[i]` is a bitset over `0..=total`.
    suffix: Vec<Vec<u64>>,
}

impl Reach {
    fn new(options: &[Vec<usize>]) -> Self {
        let total: usize = options.iter().map(|o| o.iter().copied().max().unwrap_or(0)).sum();
        let words = total / 64 + 1;
        let mut suffix = vec![vec![0u64; words]; options.len() + 1];
        suffix[options.len()][0] = 1;
        for i in (0..options.len()).rev() {
            let (head, tail) = suffix.split_at_mut(i + 1);
            let (cur, next) = (&mut head[i], &tail[0]);
            for &s in &options[i] {
                shift_or(cur, next, s);
            }
        }
        Reach { total, words, suffix }
    }

    fn contains(&self, i: usize, value: usize) -> bool {
        value <= self.total && (self.suffix[i][value / 64] >> (value % 64)) & 1 == 1
    }

    fn values(&self, i: usize) -> Vec<usize> {
        (0..self.words * 64).filter(|&v| self.contains(i, v)).collect()
    }
}

fn shift_or(dst: &mut [u64], src: &[u64], shift: usize) {
    let (w, b) = (shift / 64, shift % 64);
    for i in (w..dst.len()).rev() {
        let j = i - w;
        let mut x = src[j] << b;
        if b > 0 && j > 0 {
            x |= src[j - 1] >> (64 - b);
        }
        dst[i] |= x;
    }
}

/// Path counts `p` for which the plan has an allocation.
pub fn reachable_p(plan: &Plan, catalog: &Catalog) -> Result<Vec<usize>> {
    let options = plan.leaves().iter().map(|l| l.feasible_p(catalog)).collect::<Result<Vec<_>>>()?;
    Ok(Reach::new(&options).values(0))
}

/// Splits `(p, q)` across the plan leaves. Leaves are filled in order, each
/// taking the largest path count that still leaves the remainder reachable
/// by the later leaves.
pub fn allocate(plan: &Plan, catalog: &Catalog, p: usize, q: usize) -> Result<Allocation> {
    let leaves = plan.leaves();
    let total = plan.total_parts(catalog)?;
    if p + q != total {
        return Err(Error::InvalidRequest(format!("p + q = {} but the target has {total} parts", p + q)));
    }
    let options = leaves.iter().map(|l| l.feasible_p(catalog)).collect::<Result<Vec<_>>>()?;
    let reach = Reach::new(&options);
    if !reach.contains(0, p) {
        return Err(Error::NoAllocation { p, q });
    }
    let mut left = p;
    let mut per_leaf = Vec::with_capacity(leaves.len());
    for (i, leaf) in leaves.iter().enumerate() {
        let parts = leaf.parts(catalog)?;
        let pick = options[i]
            .iter()
            .copied()
            .filter(|&x| x <= left && reach.contains(i + 1, left - x))
            .max()
            .expect("reachability guarantees a choice");
        per_leaf.push((pick, parts - pick));
        left -= pick;
    }
    Ok(Allocation { per_leaf })
}

/// Builds the certificate described by a plan and an allocation.
pub fn execute(plan: &Plan, allocation: &Allocation, catalog: &Catalog) -> Result<Certificate> {
    let leaves = plan.leaves();
    if leaves.len() != allocation.per_leaf.len() {
        return Err(Error::InvalidRequest("allocation does not match the plan".into()));
    }
    let mut cache = HashMap::new();
    let mut walks = Vec::new();
    for (leaf, &(p, _)) in leaves.iter().zip(&allocation.per_leaf) {
        walks.extend(leaf.host_walks_cached(catalog, p, &mut cache)?);
    }
    Ok(Certificate::new(plan.target(), plan.instance.lambda, walks))
}

/// Plans an instance with the case tree of its family.
pub fn plan(instance: &Instance, catalog: &Catalog) -> Result<Plan> {
    if instance.lambda == 0 {
        return Err(Error::InvalidRequest("lambda must be positive".into()));
    }
    if instance.m < 2 || instance.n < 2 {
        return Err(Error::InvalidRequest("m and n must be at least 2".into()));
    }
    let edges = instance.edge_count();
    if !edges.is_multiple_of(PART_LEN as u64) {
        return Err(Error::Infeasible(format!("8 does not divide the edge count {edges}")));
    }
    if instance.family == Family::Wreath && instance.vertex_count() < 9 {
        return Err(Error::Infeasible(format!("mn = {} is below 9", instance.vertex_count())));
    }
    match instance.family {
        Family::Tensor => tensor::plan(instance, catalog),
        Family::Wreath => wreath::plan(instance, catalog),
    }
}

/// Plans, allocates, executes and verifies.
pub fn build(request: &Request, catalog: &Catalog) -> Result<Certificate> {
    let plan = plan(&request.instance, catalog)?;
    let allocation = allocate(&plan, catalog, request.p, request.q)?;
    let cert = execute(&plan, &allocation, catalog)?;
    let report = verify(&cert);
    if !report.valid {
        return Err(Error::Embedding(format!(
            "assembled certificate failed verification: {}",
            report.violations[0].reason
        )));
    }
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Constructible {
    Supported { p_values: Vec<usize> },
    UnsupportedCase { reason: String },
    Infeasible { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub family: Family,
    pub m: u32,
    pub n: u32,
    pub lambda: u32,
    pub edges: u64,
    pub parts: u64,
    pub necessary_ok: bool,
    pub necessary_detail: String,
    pub parity_floor: u64,
    pub parity_excluded: Vec<u64>,
    pub constructible: Constructible,
}

/// Largest target built explicitly for the parity count; bigger ones use the degree formula.
const PARITY_BUILD_LIMIT: u64 = 200_000;

/// Necessary conditions, parity bound, and what the planner can build.
pub fn check_feasible(instance: &Instance, catalog: &Catalog) -> FeasibilityReport {
    let edges = instance.edge_count();
    let mut problems = Vec::new();
    if !edges.is_multiple_of(PART_LEN as u64) {
        problems.push(format!("8 does not divide {edges}"));
    }
    if instance.family == Family::Wreath && instance.vertex_count() < 9 {
        problems.push(format!("mn = {} < 9", instance.vertex_count()));
    }
    if instance.m < 2 || instance.n < 2 || instance.lambda == 0 {
        problems.push("m, n >= 2 and lambda >= 1 required".into());
    }
    let necessary_ok = problems.is_empty();
    let parity_floor = if edges <= PARITY_BUILD_LIMIT && instance.m >= 1 && instance.n >= 1 {
        match build_family(&instance.target()) {
            Ok(g) => parity_stats(&g.scaled(instance.lambda)).1 as u64,
            Err(_) => formula_floor(instance),
        }
    } else {
        formula_floor(instance)
    };
    let parts = edges / PART_LEN as u64;
    let constructible = if !necessary_ok {
        Constructible::Infeasible { reason: problems.join("; ") }
    } else {
        match plan(instance, catalog).and_then(|p| reachable_p(&p, catalog)) {
            Ok(p_values) if p_values.is_empty() => {
                Constructible::Infeasible { reason: "no allocation exists".into() }
            }
            Ok(p_values) => Constructible::Supported { p_values },
            Err(Error::Infeasible(reason)) => Constructible::Infeasible { reason },
            Err(e) => Constructible::UnsupportedCase { reason: e.to_string() },
        }
    };
    FeasibilityReport {
        family: instance.family,
        m: instance.m,
        n: instance.n,
        lambda: instance.lambda,
        edges,
        parts,
        necessary_ok,
        necessary_detail: if necessary_ok {
            format!("8 divides {edges}")
        } else {
            problems.join("; ")
        },
        parity_floor,
        parity_excluded: if parity_floor == 0 { vec![1] } else { Vec::new() },
        constructible,
    }
}

fn formula_floor(instance: &Instance) -> u64 {
    if instance.degree() % 2 == 1 {
        instance.vertex_count() / 2
    } else {
        0
    }
}

/// Compresses a sorted list into `a..b` ranges for display.
pub fn format_ranges(values: &[usize]) -> String {
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == values[j] + 1 {
            j += 1;
        }
        out.push(if i == j { values[i].to_string() } else { format!("{}..{}", values[i], values[j]) });
        i = j + 1;
    }
    out.join(", ")
}

/// Splits `lambda` into layers from `{4, 2, 1}`, fewest layers first, larger
/// layers first among equals. The trivial split `[lambda]` is included when
/// `lambda` is itself a layer size.
pub fn layerings(lambda: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for part in [4, 2, 1] {
            if part <= max && part <= left {
                cur.push(part);
                rec(left - part, part, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if lambda <= 64 {
        rec(lambda, 4, &mut Vec::new(), &mut out);
    } else {
        // only uniform layerings for large lambda
        for part in [4, 2, 1] {
            if lambda.is_multiple_of(part) {
                out.push(vec![part; (lambda / part) as usize]);
            }
        }
    }
    out.sort_by_key(|l| l.len());
    out
}

/// Plans `instance` as a stack of layers of smaller multiplicity, using
/// `direct` for each layer.
pub(crate) fn plan_layered(
    instance: &Instance,
    catalog: &Catalog,
    direct: impl Fn(&Instance, &Catalog) -> Result<Plan>,
) -> Result<Plan> {
    let mut last_err = None;
    for layers in layerings(instance.lambda) {
        if layers.len() < 2 {
            continue;
        }
        let mut cache: HashMap<u32, Plan> = HashMap::new();
        let mut ok = true;
        for &l in &layers {
            if cache.contains_key(&l) {
                continue;
            }
            let layer = instance.with_lambda(l);
            if !layer.edge_count().is_multiple_of(PART_LEN as u64) {
                ok = false;
                break;
            }
            match direct(&layer, catalog) {
                Ok(p) => {
                    cache.insert(l, p);
                }
                Err(e) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let label = format!(
            "layers {}",
            layers.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" + ")
        );
        let mut trace = vec![format!("lambda = {} split as {label}", instance.lambda)];
        let mut children = Vec::new();
        for (i, l) in layers.iter().enumerate() {
            let p = &cache[l];
            trace.extend(p.trace.iter().map(|t| format!("layer {i} (lambda {l}): {t}")));
            children.push(PlanNode::sum(format!("layer {i}, lambda {l}"), vec![p.root.clone()]));
        }
        return Ok(Plan { instance: *instance, root: PlanNode::sum(label, children), trace });
    }
    Err(Error::UnsupportedCase(match last_err {
        Some(e) => format!("{instance}: no supported layering ({e})"),
        None => format!("{instance}: no supported layering"),
    }))
}
