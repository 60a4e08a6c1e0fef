use thiserror::Error;

use crate::model::{VertexId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid framework: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("rank tolerance must be finite and nonnegative, got {0}")]
    BadTolerance(f64),

    #[error("operator leaks {leakage:.3e} outside the subspace (limit {limit:.1e})")]
    InvarianceViolation { leakage: f64, limit: f64 },

    #[error("function value component {component} is not finite")]
    NonFiniteFunction { component: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vertex subset is empty")]
    EmptySubset,

    #[error("induced subgraph on {0:?} has no edges")]
    EdgelessSubgraph(Vec<VertexId>),

    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),

    #[error("pinned set must be nonempty and leave at least one free vertex")]
    PinnedSet,

    #[error("graph has {found} vertices; automorphism search is bounded at {bound}")]
    BoundExceeded { found: usize, bound: usize },

    #[error("symmetry set is not a group: {0}")]
    ClosureFailure(String),

    #[error("framework is not proper: vertices {0} and {1} coincide")]
    NotProper(VertexId, VertexId),

    #[error(
        "character balance violated at element {element}: residual {residual:.3e} \
         (smallest retained singular value {smallest_kept:?}, largest discarded {largest_dropped:?})"
    )]
    BalanceViolation {
        element: usize,
        residual: f64,
        smallest_kept: Option<f64>,
        largest_dropped: Option<f64>,
    },

    #[error("matrix is not orthogonal (deviation {0:.3e})")]
    NotOrthogonal(f64),

    #[error("invalid point-line system: {0}")]
    InvalidPointLine(String),

    #[error("line {0} passes through the origin")]
    LineThroughOrigin(VertexId),

    #[error("invalid body framework: {0}")]
    InvalidBody(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("flex is not compatible: residual {0:.3e}")]
    Compatibility(f64),

    #[error("subframework enumeration produced more than {0} subgraphs")]
    EnumerationBound(usize),

    #[error("invalid periodic framework: {0}")]
    InvalidPeriodic(String),

    #[error("point-group candidate is incompatible with the lattice: {0}")]
    LatticeIncompatible(String),

    #[error("edge orbit ({i}, {j}) has a zero bond vector")]
    ZeroBond { i: VertexId, j: VertexId },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
