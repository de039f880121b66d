//! Certificates, their canonical serialization, and the verifier.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_family, edge_key, parse_vertices, FamilyDescriptor, MultiGraph, VertexId};
use crate::PART_LEN;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
    Path,
    Cycle,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkKind::Path => "path",
            WalkKind::Cycle => "cycle",
        })
    }
}

/// A path or a cycle given by its vertex sequence. A cycle lists each vertex
/// once; the closing edge is implicit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Walk {
    pub kind: WalkKind,
    pub vertices: Vec<VertexId>,
}

impl Walk {
    pub fn path(vertices: Vec<VertexId>) -> Self {
        Walk { kind: WalkKind::Path, vertices }
    }

    pub fn cycle(vertices: Vec<VertexId>) -> Self {
        Walk { kind: WalkKind::Cycle, vertices }
    }

    pub fn parse(kind: WalkKind, text: &str) -> Result<Self> {
        Ok(Walk { kind, vertices: parse_vertices(text)? })
    }

    /// Edges as ordered pairs, one per step (including the closing step of a cycle).
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let vs = &self.vertices;
        let mut out: Vec<_> = vs.windows(2).map(|w| edge_key(w[0], w[1])).collect();
        if self.kind == WalkKind::Cycle && vs.len() > 2 {
            out.push(edge_key(vs[vs.len() - 1], vs[0]));
        }
        out
    }

    /// Number of edges of the walk.
    pub fn len(&self) -> usize {
        match self.kind {
            WalkKind::Path => self.vertices.len().saturating_sub(1),
            WalkKind::Cycle => self.vertices.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Why the walk is not a simple path or cycle of the given length, if it is not.
    pub fn shape_defect(&self, length: usize) -> Option<String> {
        let want = match self.kind {
            WalkKind::Path => length + 1,
            WalkKind::Cycle => length,
        };
        if self.vertices.len() != want {
            return Some(format!(
                "{} has {} vertices, expected {want}",
                self.kind,
                self.vertices.len()
            ));
        }
        let mut seen = self.vertices.clone();
        seen.sort();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Some(format!("{} repeats vertex {}", self.kind, w[0]));
        }
        if self.kind == WalkKind::Cycle && length < 3 {
            return Some("cycle shorter than 3".into());
        }
        None
    }

    /// Canonical orientation: cycles start at their least vertex with the
    /// lesser neighbour second, paths start at the lesser endpoint.
    pub fn normalized(&self) -> Walk {
        let mut vs = self.vertices.clone();
        if vs.len() < 2 {
            return self.clone();
        }
        match self.kind {
            WalkKind::Path => {
                if vs[vs.len() - 1] < vs[0] {
                    vs.reverse();
                }
            }
            WalkKind::Cycle => {
                let start = (0..vs.len()).min_by_key(|&i| vs[i]).unwrap();
                vs.rotate_left(start);
                if vs[vs.len() - 1] < vs[1] {
                    vs[1..].reverse();
                }
            }
        }
        Walk { kind: self.kind, vertices: vs }
    }

    pub fn map_vertices(&self, mut f: impl FnMut(VertexId) -> VertexId) -> Walk {
        Walk { kind: self.kind, vertices: self.vertices.iter().map(|&v| f(v)).collect() }
    }
}

impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        f.write_str(&names.join(" "))
    }
}

/// A claimed `(8; p, q)`-decomposition of `target(lambda)`.
///
/// Fields are declared in alphabetical order so that the derived serializer
/// writes sorted keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: u32,
    pub lambda: u32,
    pub p: usize,
    pub parts: Vec<Walk>,
    pub q: usize,
    pub target: FamilyDescriptor,
}

impl Certificate {
    /// Builds a certificate with normalized, sorted parts and counts taken from the parts.
    pub fn new(target: FamilyDescriptor, lambda: u32, parts: Vec<Walk>) -> Self {
        let mut parts: Vec<Walk> = parts.iter().map(Walk::normalized).collect();
        parts.sort();
        let p = parts.iter().filter(|w| w.kind == WalkKind::Path).count();
        let q = parts.len() - p;
        Certificate { format: FORMAT_VERSION, lambda, p, parts, q, target }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("certificate serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: Certificate = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cert.format != FORMAT_VERSION {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("unsupported format {}, expected {FORMAT_VERSION}", cert.format),
            });
        }
        Ok(cert)
    }
}

/// Canonical bytes of a certificate: compact JSON, sorted keys, trailing newline.
pub fn serialize(cert: &Certificate) -> Vec<u8> {
    cert.to_json().into_bytes()
}

pub fn deserialize(bytes: &[u8]) -> Result<Certificate> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 1,
        column: e.valid_up_to() + 1,
        message: "input is not UTF-8".into(),
    })?;
    Certificate::from_json(text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Part(usize),
    Edge(VertexId, VertexId),
    Certificate,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Part(i) => write!(f, "part {i}"),
            Location::Edge(u, v) => write!(f, "edge {u}-{v}"),
            Location::Certificate => write!(f, "certificate"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: Location,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return writeln!(f, "valid");
        }
        writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.location, v.reason)?;
        }
        Ok(())
    }
}

/// Checks a certificate against the canonical graph of its target.
pub fn verify(cert: &Certificate) -> VerifyReport {
    let mut violations = Vec::new();
    let mut push = |location, reason: String| violations.push(Violation { location, reason });

    if cert.format != FORMAT_VERSION {
        push(Location::Certificate, format!("unsupported format {}", cert.format));
    }
    if cert.lambda == 0 {
        push(Location::Certificate, "lambda must be positive".into());
    }
    let graph = match build_family(&cert.target) {
        Ok(g) => g.scaled(cert.lambda),
        Err(e) => {
            push(Location::Certificate, format!("target cannot be built: {e}"));
            return VerifyReport { valid: false, violations };
        }
    };

    let mut covered: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
    let mut paths = 0;
    for (i, part) in cert.parts.iter().enumerate() {
        if part.kind == WalkKind::Path {
            paths += 1;
        }
        if let Some(defect) = part.shape_defect(PART_LEN) {
            push(Location::Part(i), defect);
        }
        for (u, v) in part.edges() {
            if u == v {
                push(Location::Part(i), format!("loop at {u}"));
                continue;
            }
            if graph.multiplicity(u, v) == 0 {
                push(Location::Part(i), format!("{u}-{v} is not an edge of the target"));
            }
            *covered.entry((u, v)).or_insert(0) += 1;
        }
    }

    for (&(u, v), &c) in &covered {
        let m = graph.multiplicity(u, v);
        if m > 0 && c > m {
            push(Location::Edge(u, v), format!("covered {c} times, multiplicity {m}"));
        }
    }
    for (u, v, m) in graph.edges() {
        let c = covered.get(&(u, v)).copied().unwrap_or(0);
        if c < m {
            push(Location::Edge(u, v), format!("covered {c} times, multiplicity {m}"));
        }
    }

    let cycles = cert.parts.len() - paths;
    if cert.p != paths {
        push(Location::Certificate, format!("claims p = {} but has {paths} paths", cert.p));
    }
    if cert.q != cycles {
        push(Location::Certificate, format!("claims q = {} but has {cycles} cycles", cert.q));
    }
    let edges = graph.edge_count();
    if PART_LEN * (cert.p + cert.q) != edges {
        push(
            Location::Certificate,
            format!("8 (p + q) = {} but the target has {edges} edges", PART_LEN * (cert.p + cert.q)),
        );
    }

    VerifyReport { valid: violations.is_empty(), violations }
}

/// Number of odd-degree vertices and the resulting lower bound on paths.
pub fn parity_stats(g: &MultiGraph) -> (usize, usize) {
    let odd = g.degrees().values().filter(|&&d| d % 2 == 1).count();
    (odd, odd / 2)
}
