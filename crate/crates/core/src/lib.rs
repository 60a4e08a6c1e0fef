//! Rigidity and symmetry analysis of bar-joint frameworks and their
//! point-line, body-pin and periodic relatives.

pub mod bodypin;
pub mod characters;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod periodic;
pub mod pointline;
pub mod rigidity;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::{Framework, FrameworkGraph, VertexId, VertexPartition, Violation};
