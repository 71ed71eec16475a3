//! Axisymmetric finite-volume harness for projected bubbles.

pub mod grid;
pub mod harness;
pub mod laplace;

pub use grid::{AxisymGrid, Field, Focus};
pub use harness::*;
pub use laplace::Laplacian;
