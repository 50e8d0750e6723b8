//! Finite element eigenvalue solver for 2D second-order elliptic operators.
//!
//! The crate assembles Lagrange discretizations of
//! `-div(A grad u) = lambda rho u` on triangulated domains with homogeneous
//! Dirichlet boundary conditions, and solves the resulting generalized
//! eigenproblems either directly or through a multi-level correction scheme:
//! one eigensolve on the coarsest space, then per level a single linear
//! source solve plus a small eigensolve on the coarse space augmented by the
//! current approximation.

// Indexed loops intentionally mirror the matrix notation they implement, and
// positivity checks are written `!(x > 0.0)` so that NaN also fails them.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod correction;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};
