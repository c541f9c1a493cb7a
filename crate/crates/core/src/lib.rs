pub mod augment;
pub mod curriculum;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod sampling;

pub use error::{Result, SgaError};
pub use graph::{Change, EdgeSample, Sign, SignedGraph, Triangle, TriangleStats};
