//! Exact linear algebra over `Q` or `F_p`.
//!
//! Everything downstream is computed one graded piece at a time, so the only
//! primitives needed are dense elimination, kernels, and quotients with a
//! canonical choice of basis.

mod field;
mod mat;

pub use field::{FieldSpec, Scalar};
pub use mat::{image_quotient, Mat, Quotient, Subspace};
