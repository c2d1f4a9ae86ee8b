//! Exact, degreewise computations with quasicoherent sheaves on a plane-like
//! scheme glued from two affine patches along a non-affine overlap.
//!
//! Modules over `R = k[x_1..x_n]` are represented by their graded pieces and
//! variable actions; sections over unions of distinguished opens come from
//! Čech complexes with a bounded denominator exponent ("cap").

pub mod cech;
pub mod error;
pub mod graded;
pub mod linalg;
pub mod matlis;
pub mod poly;
pub mod report;
pub mod scenario;
pub mod scheme;

pub use error::{Error, Result};
