use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius must be finite and positive, got {0}")]
    BadRadius(f64),

    #[error("node coordinates must be finite: node {0} at ({1}, {2})")]
    NonFiniteCoordinate(NodeId, f64, f64),

    #[error("node {0} lies outside the cell (distance {1} > radius {2})")]
    NodeOutsideCell(NodeId, f64, f64),

    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("grid spec kind {found} does not match generator (expected {expected})")]
    GridKindMismatch { expected: &'static str, found: &'static str },

    #[error("random spec kind {found} does not match generator (expected {expected})")]
    RandomKindMismatch { expected: &'static str, found: &'static str },

    #[error("no square grid pitch yields {target} lattice points; nearest attainable counts are {below} and {above}")]
    UnattainableGridCount { target: usize, below: usize, above: usize },

    #[error("input combination is not valid; completion is only defined on valid combinations")]
    InvalidCombination,

    #[error("completion produced an invalid combination: reverse flows conflict with the connectivity of the input")]
    CompletionConflict,

    #[error("brute force refuses {nodes} nodes (cap {cap} in this mode)")]
    BruteForceCap { nodes: usize, cap: usize },

    #[error("separation must be finite and positive, got {0}")]
    BadSeparation(f64),

    #[error("inverse-trig argument {0} leaves no admissible angle; separation incompatible with this construction")]
    TrigDomain(f64),

    #[error("rate vector must be nonempty")]
    EmptyRates,

    #[error("rates must be finite and positive, got {0}")]
    BadRate(f64),

    #[error("packet size must be finite and positive, got {0}")]
    BadPacketSize(f64),

    #[error("combination cap must be at least 1")]
    BadCap,

    #[error("duplicate packet id {0}")]
    DuplicatePacketId(u64),

    #[error("exact partition refuses {vertices} vertices (cap 40); use greedy mode")]
    PartitionTooLarge { vertices: usize },

    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("exact search refuses n = {n} above the exact-search cap {cap}; set best_effort to search with a node budget")]
    ExactSearchCap { n: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
