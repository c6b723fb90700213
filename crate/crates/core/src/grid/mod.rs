//! Uniform-grid discretisation of `H_M` for general smooth domains.

pub mod eigs;
pub mod gram;
pub mod operator;
pub mod shape;
pub mod trace;

pub use eigs::{folded_spectrum_eigs, folded_spectrum_eigs_multilevel, EigenPair, EigenSettings, EigenSolution, Preconditioner};
pub use operator::GridOperator;
pub use shape::{BoundaryPoint, ShapeKind, ShapeSpec};
pub use gram::{gram_correction_matrix, orthonormalize_interior, CorrectionMatrix};
pub use trace::{boundary_trace, BoundaryTrace};
