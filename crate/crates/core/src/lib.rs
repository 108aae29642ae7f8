pub mod block;
pub mod bounds;
pub mod eigen;
pub mod harness;
pub mod io;
pub mod error;
pub mod jordan;
pub mod matrix;
pub mod random;
pub mod spectrum;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, TriangularSplit, C64};
