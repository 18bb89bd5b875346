//! Minimum-cost enclosure of polygonal objects with penalties.
//!
//! Given disjoint polygons marked required or optional (with a penalty), find a
//! weakly simple polygon in free space that encloses every required object and
//! minimizes its length plus the penalties of the optional objects it encloses.
//! The inverted variant keeps required objects outside and charges penalties for
//! optional objects left outside.
//!
//! Coordinates are exact integers; weights are generic over [`Weight`] (`f64`
//! and `f32`).

mod bound;
pub mod dijkstra;
pub mod dp;
pub mod error;
pub mod freespace;
pub mod geometry;
pub mod instance;
pub mod inverted;
mod label;
pub mod mask;
pub mod oracle;
pub mod pipeline;
pub mod render;
pub mod scalar;
pub mod uncross;
pub mod verify;
pub mod walk;

pub use dijkstra::{SolverOutput, SolverStats};
pub use error::{Error, Result};
pub use freespace::FreeSpaceGraph;
pub use geometry::{Point, QPoint, Segment};
pub use instance::{InputPolygon, Instance, Kind, Mode};
pub use mask::SubsetMask;
pub use pipeline::{solve, SolveResult, SolverKind};
pub use scalar::Weight;
pub use uncross::Polygon;
pub use verify::Solution;
pub use walk::Walk;

pub type InstanceF64 = Instance<f64>;
pub type InstanceF32 = Instance<f32>;
pub type FreeSpaceGraphF64 = FreeSpaceGraph<f64>;
pub type FreeSpaceGraphF32 = FreeSpaceGraph<f32>;
pub type WalkF64 = Walk<f64>;
pub type PolygonF64 = Polygon<f64>;
pub type SolutionF64 = Solution<f64>;
pub type SolveResultF64 = SolveResult<f64>;
