//! Lagrange finite element spaces on triangle meshes: P1/P2/P3 dof layout,
//! stiffness/mass assembly, nested-space prolongation, and error norms.

pub mod assembly;
pub mod basis;
mod prolongation;
pub mod quadrature;
mod space;

pub use assembly::{
    apply_dirichlet, assemble_mass, assemble_stiffness, energy_error, expand_free, integrate,
    interpolate, l2_error, restrict_to_free,
};
pub use prolongation::prolongation;
pub use space::{CoefficientField, FeSpace};
