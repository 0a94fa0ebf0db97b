//! Exact counts, exponential sums and circle-method main terms for
//! equilateral triangles in the integer lattice.

pub mod arcs;
pub mod cache;
pub mod error;
pub mod gauss;
pub mod grid;
pub mod lattice;
pub mod moments;
pub mod numeric;
pub mod operators;
pub mod oscillatory;
pub mod report;
pub mod rng;
pub mod singular;

pub use error::{Error, Result};
pub use numeric::C64;
pub use report::VerificationReport;
