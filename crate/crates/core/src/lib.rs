//! Operator layer-cake calculus, integral pretty-good measurements and one-shot
//! random-coding bounds for classical-quantum packing problems.

// `!(x > 0.0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod ensemble;
pub mod error;
pub mod info;
pub mod integrals;
pub mod linalg;
pub mod measure;
pub mod packing;
pub mod quadrature;
pub mod random;
pub mod scalar;

pub use ensemble::{BipartiteState, CqChannel, CqEnsemble};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use linalg::{CMatrix, DensityOp, EigenSystem, HermitianOp, Projector, PsdOp};
pub use random::RngSeed;
pub use scalar::ScalarFn;
