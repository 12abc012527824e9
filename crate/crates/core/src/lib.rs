//! Numerical lab for extremal vectors of bounded operators.
//!
//! Given an operator `T` (scaled to norm `1/K`), a datum `y` and a unit
//! target `x0`, the extremal polynomial `l` of minimal coefficient norm with
//! `||x0 - l(T) y|| <= eps` is obtained in closed form from the resolvent
//! `z = (I + G)^-1 x0` of the Gram operator `G = sum_j T^j y (T^j y)*`.
//! On top of that sit the first-order calculus of the construction
//! iteration, its step selection and driver, operator-class probes and
//! invariant-subspace diagnostics.
//!
//! All arithmetic runs on MPFR reals at the precision fixed by
//! [`PrecisionCtx`].

pub mod diagnostics;
pub mod error;
pub mod generators;
pub mod linalg;
pub mod mc;
pub mod operator;
pub mod precision;
pub mod probes;
pub mod scalar;
pub mod serial;
pub mod solver;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{LabError, LabResult};
pub use linalg::{CMatrix, HVector};
pub use operator::{
    autocorrelation, gram_apply, krylov_basis, normalize_operator, CoeffSeq, KrylovBasis,
    OperatorKind, OperatorSpec,
};
pub use precision::{decimal, Exponents, PrecisionCtx};
pub use scalar::Cx;
pub use solver::{calibrate_scale, oracle_minimize, solve_extremal, ExtremalState};
