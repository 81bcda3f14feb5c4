//! Exact computations in the spherical Hecke algebra of GL_n over a p-adic
//! field, on both sides of the Satake isomorphism.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod hecke;
pub mod jacquet;
pub mod laurent;
pub mod linalg;
pub mod padic;
pub mod quotient;
pub mod scalars;
pub mod suite;
pub mod symfun;
pub mod weyl;

pub use error::{Error, Result};
pub use laurent::{ExpVec, LaurentPoly};
pub use scalars::{half_power, QuadScalar, Rat};
pub use symfun::Partition;
pub use weyl::Permutation;
