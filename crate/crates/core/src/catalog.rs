//! Base blocks: seed parts expanded by a rotation, plus recipes that trade
//! groups of parts for paths. Feasible `(p, q)` sets are computed from the
//! recipes, not trusted from the data file.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use serde::Deserialize;

use crate::certify::{verify, Certificate, Walk, WalkKind};
use crate::error::{Error, Result};
use crate::graph::{apply_permutation, build_family, FamilyDescriptor, MultiGraph, Permutation, VertexId};
use crate::PART_LEN;

/// Environment variable naming an alternative block data file.
pub const BLOCK_DATA_ENV: &str = "OCTODECOMP_BLOCK_DATA";

const BUILTIN_DATA: &str = include_str!("../data/blocks.json");

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    format: u32,
    blocks: Vec<RawBlock>,
}

fn one() -> u32 {
    1
}

fn zero_list() -> Vec<u32> {
    vec![0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    id: String,
    source: String,
    graph: FamilyDescriptor,
    #[serde(default = "one")]
    lambda: u32,
    rotation: Option<String>,
    printed_rotation: Option<String>,
    seeds: Vec<RawSeed>,
    #[serde(default)]
    recipes: Vec<RawRecipe>,
    declared_feasible: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeed {
    id: String,
    kind: WalkKind,
    walk: String,
    #[serde(default = "zero_list")]
    exponents: Vec<u32>,
    #[serde(default)]
    repaired: bool,
    printed_walk: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecipe {
    id: String,
    consumes: Vec<String>,
    produces: Vec<String>,
    #[serde(default = "zero_list")]
    shifts: Vec<u32>,
    #[serde(default)]
    repaired: bool,
    printed_produces: Option<Vec<String>>,
    printed_consumes: Option<Vec<String>>,
}

/// A seed part and the rotation exponents it is expanded under.
#[derive(Clone, Debug)]
pub struct Seed {
    pub id: String,
    pub walk: Walk,
    pub exponents: Vec<u32>,
    pub repaired: bool,
    pub printed_walk: Option<String>,
}

/// A recombination as written in the data file, before rotation.
#[derive(Clone, Debug)]
pub struct RecipeSpec {
    pub id: String,
    pub consumes: Vec<String>,
    pub produces: Vec<Walk>,
    pub shifts: Vec<u32>,
    pub repaired: bool,
    pub printed: Option<(Option<Vec<String>>, Option<Vec<String>>)>,
}

/// A recipe applied at one rotation shift: concrete consumed parts and
/// produced paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recipe {
    pub name: String,
    pub consumed: Vec<usize>,
    pub consumed_walks: Vec<Walk>,
    pub produced: Vec<Walk>,
}

impl Recipe {
    pub fn delta(&self) -> (isize, isize) {
        let cons_paths = self.consumed_walks.iter().filter(|w| w.kind == WalkKind::Path).count() as isize;
        let cons_cycles = self.consumed_walks.len() as isize - cons_paths;
        (self.produced.len() as isize - cons_paths, -cons_cycles)
    }
}

fn edge_multiset(walks: &[Walk]) -> BTreeMap<(VertexId, VertexId), usize> {
    let mut out = BTreeMap::new();
    for w in walks {
        for e in w.edges() {
            *out.entry(e).or_insert(0) += 1;
        }
    }
    out
}

/// Replaces the recipe's consumed walks in `parts` by its produced paths.
/// Consumed walks are matched by kind and edge set.
pub fn recombine(parts: &[Walk], recipe: &Recipe) -> Result<Vec<Walk>> {
    if edge_multiset(&recipe.consumed_walks) != edge_multiset(&recipe.produced) {
        return Err(Error::RecipeMismatch(format!(
            "{}: consumed and produced edge multisets differ",
            recipe.name
        )));
    }
    for w in &recipe.produced {
        if w.kind != WalkKind::Path {
            return Err(Error::RecipeMismatch(format!("{}: produces a {}", recipe.name, w.kind)));
        }
        if let Some(d) = w.shape_defect(PART_LEN) {
            return Err(Error::RecipeMismatch(format!("{}: produced {d}", recipe.name)));
        }
    }
    let mut rest: Vec<Option<&Walk>> = parts.iter().map(Some).collect();
    for c in &recipe.consumed_walks {
        let key = edge_multiset(std::slice::from_ref(c));
        let slot = rest.iter_mut().find(|s| {
            s.is_some_and(|w| w.kind == c.kind && edge_multiset(std::slice::from_ref(w)) == key)
        });
        match slot {
            Some(s) => *s = None,
            None => {
                return Err(Error::RecipeMismatch(format!(
                    "{}: consumed {} `{c}` is not among the parts",
                    recipe.name, c.kind
                )))
            }
        }
    }
    let mut out: Vec<Walk> = rest.into_iter().flatten().cloned().collect();
    out.extend(recipe.produced.iter().cloned());
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub id: String,
    pub source: String,
    pub graph: FamilyDescriptor,
    pub lambda: u32,
    pub rotation: Option<Permutation>,
    pub printed_rotation: Option<String>,
    pub seeds: Vec<Seed>,
    pub recipes: Vec<RecipeSpec>,
    pub declared_feasible: BTreeSet<(usize, usize)>,
    /// Expanded parts, named `seed@exponent`.
    pub parts: Vec<(String, Walk)>,
    /// Every recipe at every shift, in data order.
    pub instances: Vec<Recipe>,
    target: MultiGraph,
    feasible: BTreeMap<(usize, usize), Vec<usize>>,
}

impl BlockSpec {
    fn load(raw: RawBlock) -> Result<Self> {
        let fail = |message: String| Error::Catalog { block: raw.id.clone(), message };
        if raw.lambda == 0 {
            return Err(fail("lambda must be positive".into()));
        }
        let target = build_family(&raw.graph)?.scaled(raw.lambda);
        let rotation = match &raw.rotation {
            Some(text) => {
                let rho = Permutation::parse(text, target.vertices().iter().copied())?;
                if !rho.is_automorphism(&target) {
                    return Err(fail(format!("rotation {rho} is not an automorphism")));
                }
                Some(rho)
            }
            None => None,
        };
        let identity = Permutation::identity(target.vertices().iter().copied());
        let rho = rotation.as_ref().unwrap_or(&identity);

        let mut seeds = Vec::new();
        let mut parts = Vec::new();
        for s in raw.seeds {
            let walk = Walk::parse(s.kind, &s.walk)?;
            for &k in &s.exponents {
                let image = apply_permutation(rho, &walk, k)?;
                parts.push((format!("{}@{k}", s.id), image));
            }
            seeds.push(Seed {
                id: s.id,
                walk,
                exponents: s.exponents,
                repaired: s.repaired,
                printed_walk: s.printed_walk,
            });
        }
        if parts.len() > 64 {
            return Err(fail(format!("{} parts exceed the supported 64", parts.len())));
        }
        let walks: Vec<Walk> = parts.iter().map(|(_, w)| w.clone()).collect();
        let report = verify(&Certificate::new(raw.graph.clone(), raw.lambda, walks));
        if !report.valid {
            return Err(fail(format!("seed expansion is not a decomposition: {}", report.violations[0].reason)));
        }

        let index: BTreeMap<&str, usize> = parts.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
        let edge_sets: Vec<_> = parts.iter().map(|(_, w)| edge_multiset(std::slice::from_ref(w))).collect();
        let mut recipes = Vec::new();
        let mut instances = Vec::new();
        for r in raw.recipes {
            let produces = r
                .produces
                .iter()
                .map(|t| Walk::parse(WalkKind::Path, t))
                .collect::<Result<Vec<_>>>()?;
            for &shift in &r.shifts {
                let mut consumed = Vec::new();
                for c in &r.consumes {
                    let name = if c.contains('@') { c.clone() } else { format!("{c}@0") };
                    let &i = index
                        .get(name.as_str())
                        .ok_or_else(|| fail(format!("recipe {} consumes unknown part {name}", r.id)))?;
                    let image = apply_permutation(rho, &parts[i].1, shift)?;
                    let key = edge_multiset(std::slice::from_ref(&image));
                    let seed = name.split('@').next().unwrap();
                    let candidates: Vec<usize> = (0..parts.len())
                        .filter(|&j| parts[j].1.kind == image.kind && edge_sets[j] == key)
                        .collect();
                    let j = candidates
                        .iter()
                        .copied()
                        .find(|&j| parts[j].0.split('@').next() == Some(seed))
                        .or_else(|| candidates.first().copied())
                        .ok_or_else(|| {
                            fail(format!("recipe {} at shift {shift}: image of {name} is not a part", r.id))
                        })?;
                    if consumed.contains(&j) {
                        return Err(fail(format!("recipe {} at shift {shift} consumes {} twice", r.id, parts[j].0)));
                    }
                    consumed.push(j);
                }
                let produced = produces
                    .iter()
                    .map(|w| apply_permutation(rho, w, shift))
                    .collect::<Result<Vec<_>>>()?;
                let inst = Recipe {
                    name: format!("{}@{shift}", r.id),
                    consumed_walks: consumed.iter().map(|&j| parts[j].1.clone()).collect(),
                    consumed,
                    produced,
                };
                let consumed_parts: Vec<Walk> = inst.consumed_walks.clone();
                recombine(&consumed_parts, &inst).map_err(|e| fail(e.to_string()))?;
                instances.push(inst);
            }
            recipes.push(RecipeSpec {
                id: r.id,
                consumes: r.consumes,
                produces,
                shifts: r.shifts,
                repaired: r.repaired,
                printed: match (r.printed_consumes, r.printed_produces) {
                    (None, None) => None,
                    other => Some(other),
                },
            });
        }

        let feasible = reachable(&parts, &instances);
        let declared: BTreeSet<(usize, usize)> = raw.declared_feasible.into_iter().collect();
        if let Some(missing) = declared.iter().find(|pq| !feasible.contains_key(pq)) {
            return Err(fail(format!("declared pair {missing:?} is not reachable by recipes")));
        }

        Ok(BlockSpec {
            id: raw.id,
            source: raw.source,
            graph: raw.graph,
            lambda: raw.lambda,
            rotation,
            printed_rotation: raw.printed_rotation,
            seeds,
            recipes,
            declared_feasible: declared,
            parts,
            instances,
            target,
            feasible,
        })
    }

    /// The block graph with multiplicities, over block-local labels.
    pub fn target(&self) -> &MultiGraph {
        &self.target
    }

    pub fn edge_count(&self) -> usize {
        self.target.edge_count()
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn feasible(&self) -> BTreeSet<(usize, usize)> {
        self.feasible.keys().copied().collect()
    }

    /// Feasible path counts (the cycle count is implied).
    pub fn feasible_p(&self) -> Vec<usize> {
        self.feasible.keys().map(|&(p, _)| p).collect()
    }

    pub fn is_feasible(&self, p: usize, q: usize) -> bool {
        self.feasible.contains_key(&(p, q))
    }

    /// Names of the recipe instances used for `(p, q)`.
    pub fn combination(&self, p: usize, q: usize) -> Option<Vec<&str>> {
        self.feasible
            .get(&(p, q))
            .map(|c| c.iter().map(|&i| self.instances[i].name.as_str()).collect())
    }

    /// Parts of a `(p, q)` decomposition in block-local labels.
    pub fn walks(&self, p: usize, q: usize) -> Result<Vec<Walk>> {
        let combo = self.feasible.get(&(p, q)).ok_or_else(|| Error::InfeasibleForBlock {
            block: self.id.clone(),
            p,
            q,
            feasible: self.feasible.keys().copied().collect(),
        })?;
        let mut walks: Vec<Walk> = self.parts.iter().map(|(_, w)| w.clone()).collect();
        for &i in combo {
            walks = recombine(&walks, &self.instances[i])?;
        }
        Ok(walks)
    }

    pub fn build(&self, p: usize, q: usize) -> Result<Certificate> {
        Ok(Certificate::new(self.graph.clone(), self.lambda, self.walks(p, q)?))
    }
}

/// Every `(p, q)` reachable by applying pairwise disjoint recipe instances,
/// with the first combination found for each pair.
fn reachable(parts: &[(String, Walk)], instances: &[Recipe]) -> BTreeMap<(usize, usize), Vec<usize>> {
    let p0 = parts.iter().filter(|(_, w)| w.kind == WalkKind::Path).count() as isize;
    let q0 = parts.len() as isize - p0;
    let masks: Vec<u64> = instances
        .iter()
        .map(|r| r.consumed.iter().fold(0u64, |m, &j| m | 1 << j))
        .collect();
    let deltas: Vec<(isize, isize)> = instances.iter().map(Recipe::delta).collect();

    struct Dfs<'a> {
        masks: &'a [u64],
        deltas: &'a [(isize, isize)],
        seen: HashSet<(usize, u64, isize)>,
        out: BTreeMap<(usize, usize), Vec<usize>>,
        chosen: Vec<usize>,
    }
    impl Dfs<'_> {
        fn go(&mut self, i: usize, used: u64, p: isize, q: isize) {
            if !self.seen.insert((i, used, p)) {
                return;
            }
            self.out.entry((p as usize, q as usize)).or_insert_with(|| self.chosen.clone());
            for k in i..self.masks.len() {
                if self.masks[k] & used == 0 {
                    self.chosen.push(k);
                    let (dp, dq) = self.deltas[k];
                    self.go(k + 1, used | self.masks[k], p + dp, q + dq);
                    self.chosen.pop();
                }
            }
        }
    }
    let mut dfs = Dfs { masks: &masks, deltas: &deltas, seen: HashSet::new(), out: BTreeMap::new(), chosen: Vec::new() };
    dfs.go(0, 0, p0, q0);
    dfs.out
}

/// Result of re-validating one block.
#[derive(Clone, Debug)]
pub struct BlockCheck {
    pub id: String,
    pub feasible: Vec<(usize, usize)>,
    pub certificates: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    blocks: Vec<BlockSpec>,
}

impl Catalog {
    /// Parses and validates block data.
    pub fn load(text: &str) -> Result<Self> {
        let raw: RawCatalog = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.format != 1 {
            return Err(Error::Parse { line: 1, column: 1, message: format!("unsupported block data format {}", raw.format) });
        }
        let mut seen = BTreeSet::new();
        let mut blocks = Vec::new();
        for b in raw.blocks {
            if !seen.insert(b.id.clone()) {
                return Err(Error::Catalog { block: b.id, message: "duplicate id".into() });
            }
            blocks.push(BlockSpec::load(b)?);
        }
        Ok(Catalog { blocks })
    }

    /// The catalog compiled into the crate.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::load(BUILTIN_DATA).expect("built-in block data is valid"))
    }

    /// The catalog named by `OCTODECOMP_BLOCK_DATA`, or the built-in one.
    pub fn from_env() -> Result<Catalog> {
        match std::env::var_os(BLOCK_DATA_ENV) {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.to_string_lossy())))?;
                Catalog::load(&text)
            }
            None => Ok(Catalog::builtin().clone()),
        }
    }

    pub fn list_blocks(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.id.as_str()).collect()
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn get(&self, id: &str) -> Result<&BlockSpec> {
        self.blocks
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::UnknownBlock(id.to_string()))
    }

    pub fn block_feasible(&self, id: &str) -> Result<BTreeSet<(usize, usize)>> {
        Ok(self.get(id)?.feasible())
    }

    pub fn block_build(&self, id: &str, p: usize, q: usize) -> Result<Certificate> {
        self.get(id)?.build(p, q)
    }

    /// Builds and verifies every feasible pair of a block.
    pub fn check_block(&self, id: &str) -> Result<BlockCheck> {
        let block = self.get(id)?;
        let feasible: Vec<(usize, usize)> = block.feasible().into_iter().collect();
        let mut failures = Vec::new();
        for &(p, q) in &feasible {
            match block.build(p, q) {
                Ok(cert) => {
                    let report = verify(&cert);
                    if !report.valid || cert.p != p || cert.q != q {
                        failures.push(format!("({p}, {q}): {}", report.to_string().trim_end()));
                    }
                }
                Err(e) => failures.push(format!("({p}, {q}): {e}")),
            }
        }
        let (_, floor) = crate::certify::parity_stats(block.target());
        if feasible.iter().map(|&(p, _)| p).min() != Some(floor) {
            failures.push(format!("least feasible p differs from the parity floor {floor}"));
        }
        Ok(BlockCheck { id: block.id.clone(), certificates: feasible.len(), feasible, failures })
    }
}
