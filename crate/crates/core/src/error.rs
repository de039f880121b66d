use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error("vertex {0} is outside the permutation domain")]
    PermutationDomain(VertexId),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown block `{0}`")]
    UnknownBlock(String),

    #[error("({p}, {q}) is not feasible for block `{block}`; feasible pairs: {feasible:?}")]
    InfeasibleForBlock {
        block: String,
        p: usize,
        q: usize,
        feasible: Vec<(usize, usize)>,
    },

    #[error("recipe mismatch: {0}")]
    RecipeMismatch(String),

    #[error("catalog error in `{block}`: {message}")]
    Catalog { block: String, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    #[error("grouping scheme {scheme} does not apply to n = {n}")]
    SchemeMismatch { scheme: String, n: u32 },

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("no allocation of p = {p}, q = {q} across the plan leaves")]
    NoAllocation { p: usize, q: usize },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("io error: {0}")]
    Io(String),
}
