//! Dirac operators on planar domains with a large mass barrier outside.
//!
//! The crate computes spectra of the massless Dirac operator `H_M` whose mass
//! term `M σ₃` is switched on outside a domain `Ω`, compares them with the
//! infinite-mass (MIT bag) limit, and checks the first-order `1/M` correction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod disk;
pub mod error;
pub mod fit;
pub mod grid;
pub mod layer;
pub mod quadrature;
pub mod radial_fd;
pub mod roots;
pub mod spinor;
pub mod verify;

pub use error::{Error, Result};
