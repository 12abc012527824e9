//! Dense linear algebra at MPFR precision.

pub mod lu;
pub mod matrix;
pub mod qr;
pub mod schur;
pub mod svd;
pub mod vector;

pub use lu::{LuFactor, SolveInfo};
pub use matrix::CMatrix;
pub use qr::{orthonormalize, orthonormalize_prefix, project_out, OrthoBasis};
pub use schur::{schur, Schur};
pub use svd::{sigma_max, sigma_min, singular_values};
pub use vector::{combine, HVector};
