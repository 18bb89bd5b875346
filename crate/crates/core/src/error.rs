use thiserror::Error;

use crate::geometry::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {}", .0.join("; "))]
    Schema(Vec<String>),
    #[error("interiors of polygons `{first}` and `{second}` overlap")]
    Overlap { first: String, second: String },
    #[error("polygon `{0}` has an empty interior")]
    DegeneratePolygon(String),
    #[error("triangle is not strictly counterclockwise")]
    DegenerateTriangle,
    #[error("query point lies on the walk; winding number undefined")]
    OnBoundary,
    #[error("plane graph drawing is not an embedding: {0}")]
    Embedding(String),
    #[error("face tag error: {0}")]
    Tag(String),
    #[error("{k} required objects exceed the solver capacity of {limit}")]
    Capacity { k: usize, limit: usize },
    #[error("edge {a}-{b} has non-positive weight {weight}")]
    NonpositiveWeight { a: Point, b: Point, weight: f64 },
    #[error("reference point of `{0}` lies on the walk")]
    ReferenceOnWalk(String),
    #[error("walk edge {a}-{b} leaves the free space")]
    FreeSpaceViolation { a: Point, b: Point },
    #[error("multigraph has a vertex of odd degree")]
    NotEulerian,
    #[error("multigraph is not connected")]
    NotConnected,
    #[error("multiplicity reduction disconnected the multigraph")]
    DisconnectedAfterReduction,
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),
    #[error("instance generation failed: {0}")]
    GenerationFailure(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
