//! Polyadic (n-ary) generalizations of the Pauli matrices.
//!
//! The crate is split into an exact symbolic layer and a floating-point
//! oracle layer:
//!
//! * [`pauli`] holds the exact algebra of the four sigma indices.
//! * [`matrix`] is the dense complex substrate (2x2 blocks, block-cyclic
//!   matrices and plain dense matrices).
//! * [`su2`] builds the polyadic group `SU^[n](2)` from its block parameters.
//! * [`sigma`] constructs elementary, full and heterogeneous Σ-matrices and
//!   their multiplication rules.
//! * [`phase`] turns those into finite n-ary semigroups and groups with
//!   phases drawn from the q-th roots of unity.
//! * [`oracle`] lowers every symbolic object to a dense matrix and checks
//!   the symbolic rules against literal matrix products.
//! * [`cli`] is the batch front end behind the `polysigma` binary.

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod pauli;
pub mod phase;
pub mod sigma;
pub mod su2;

pub use error::{Error, Result};
pub use matrix::{BlockCyclicMatrix, DenseMatrix, Matrix2, C64};
pub use pauli::{SigmaIndex, Unit};
