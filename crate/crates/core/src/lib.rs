//! Entanglement measures for two-qubit mixed states.
//!
//! The crate computes negativity, concurrence, entanglement of formation and
//! relative entropy of entanglement for 4x4 density matrices, and provides the
//! analytic bound curves relating them together with classifiers for the
//! states that attain those bounds.
//!
//! Modules, bottom-up:
//!
//! - [`matcore`]: fixed-size complex linear algebra (Jacobi eigensolver, SVD,
//!   PSD factorization, matrix functions).
//! - [`states`]: validated density matrices, Bell-diagonal and extremal state
//!   families, seeded random sampling, JSON state files.
//! - [`measures`]: partial transpose, negativity, concurrence, entanglement of
//!   formation.
//! - [`filters`]: local filtering, the Bell-diagonal normal form and the
//!   equal-concurrence pure-state decomposition.
//! - [`relent`]: entropies and a conditional-gradient solver for the relative
//!   entropy of entanglement.
//! - [`bounds`]: the negativity/concurrence and relative-entropy/formation
//!   bound curves and tightness checks.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod filters;
pub mod matcore;
pub mod measures;
pub mod relent;
pub mod states;

pub use error::{Error, Result};
pub use matcore::{Mat2, Mat4, C64};
pub use states::{BellDiagonalSpec, DensityMatrix, ExtremalFamilySpec, PureState};
