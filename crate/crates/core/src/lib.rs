//! Arbitrary-precision engines for quench dynamics of BCS pairing states
//! under non-Hermitian Hatano-Nelson hopping.
//!
//! The crate provides a multi-limb float ([`MpFloat`]), dense complex linear
//! algebra at that precision, the lattice model, a Gaussian (Bogoliubov)
//! state engine, a many-body exact-diagonalisation oracle and the observables
//! computed from either.

pub mod ed;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod mpfloat;
pub mod precision;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use mpfloat::MpFloat;
pub use precision::PrecisionContext;
pub use scalar::{Cx, Real};
