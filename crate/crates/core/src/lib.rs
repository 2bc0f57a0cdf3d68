//! Relative index theory for finite von Neumann algebras, modelled as
//! weighted direct sums of matrix algebras.
//!
//! The crate computes the Ξ-operator and ξ-index of dissipative operators,
//! Fuglede–Kadison and path determinants, checks the Birman–Schwinger
//! principle, and assembles the Birman–Krein formula for the
//! characteristic function of a dissipative triple.

// `!(x <= tol)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod algebra;
pub mod bschwinger;
mod dense;
pub mod dets;
pub mod ensemble;
pub mod eps;
pub mod error;
pub mod matrix_io;
pub mod oplog;
pub mod quad;
pub mod report;
pub mod scattering;
pub mod xi;

pub use algebra::{AlgebraDescriptor, Block, Operator};
pub use dense::Matrix;
pub use ensemble::Ensemble;
pub use eps::{EpsSchedule, Extrapolation};
pub use error::{Error, Result};
pub use oplog::BranchConvention;
pub use report::VerificationReport;
pub use xi::{XiOptions, XiStrategy};
