//! Editing distance between labelled Reeb graphs of simple Morse functions
//! on the circle.

pub mod circlefn;
pub mod distance;
pub mod edits;
pub mod error;
pub mod homotopy;
pub mod parallel;
pub mod pseudodist;
pub mod random;
pub mod reeb;
pub mod sweep;

pub use circlefn::{CircleFunction, CriticalIndex, CriticalPoint, GenericityReport, Tolerances};
pub use error::Error;
pub use reeb::{LabelledReebGraph, Vertex, VertexId};
