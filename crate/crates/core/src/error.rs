use alloc::string::String;

use crate::network::{EdgeId, PathId, VertexId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: EdgeId, vertex: VertexId },
    #[error("commodity {commodity} references unknown vertex {vertex}")]
    UnknownCommodityVertex { commodity: usize, vertex: VertexId },
    #[error("edge ids must be dense: expected {expected}, found {found}")]
    NonDenseEdgeId { expected: usize, found: usize },
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown path {0}")]
    UnknownPath(PathId),
    #[error("sink {sink} is unreachable from source {origin}")]
    SinkUnreachable { origin: VertexId, sink: VertexId },
    #[error("commodity {commodity}: invalid path: {reason}")]
    InvalidPath { commodity: usize, reason: String },
    #[error("commodity {commodity}: demand must be finite and nonnegative")]
    InvalidDemand { commodity: usize },
    #[error("expected {expected} cost functions (one per edge), found {found}")]
    CostCountMismatch { expected: usize, found: usize },
    #[error("negative flow {flow}")]
    NegativeFlow { flow: f64 },
    #[error("negative coefficient {name} = {value}")]
    NegativeCoefficient { name: &'static str, value: f64 },
    #[error("own-flow monotonicity violated: {name} = {value}")]
    AssumptionViolated { name: &'static str, value: f64 },
    #[error("invalid platooning parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("edge {0} has a non-affine cost function")]
    NotAffine(EdgeId),
    #[error("the game admits no potential (max symmetry residual {max_residual:e}); impose tolls first")]
    NoPotential { max_residual: f64 },
    #[error("commodity {commodity} has positive demand but no admissible path")]
    Infeasible { commodity: usize },
    #[error("flow vector is infeasible (max residual {max_residual:e})")]
    InfeasibleFlows { max_residual: f64 },
    #[error("flow vector has {found} paths, game has {expected}")]
    FlowLengthMismatch { expected: usize, found: usize },
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("price of anarchy {ratio} exceeds the affine bound of 2")]
    BoundViolated { ratio: f64 },
}
