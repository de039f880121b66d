//! Explicit decompositions of tensor and wreath products of complete graphs
//! into paths and cycles of length 8.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds the graph families and products over [`VertexId`] labels.
//! * [`certify`] holds certificates and the independent verifier.
//! * [`catalog`] loads the base blocks (seed parts, rotations, recipes).
//! * [`factor`] provides the small decompositions used as rewrite fuel.
//! * [`engine`] plans a target as embedded blocks, allocates `(p, q)` and executes.
//! * [`oracle`] is an exact backtracking search for small graphs.

pub mod catalog;
pub mod certify;
pub mod engine;
pub mod error;
pub mod factor;
pub mod graph;
pub mod oracle;

pub use catalog::Catalog;
pub use certify::{verify, Certificate, VerifyReport, Walk, WalkKind};
pub use error::{Error, Result};
pub use graph::{build_family, FamilyDescriptor, MultiGraph, VertexId};

/// Number of edges in every part of a decomposition.
pub const PART_LEN: usize = 8;
