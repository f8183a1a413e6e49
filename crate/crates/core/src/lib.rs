//! Mixed finite-element solver for incompressible Stokes flow with von Mises
//! viscoplastic rheologies.
//!
//! The crate provides Taylor-Hood discretisations on structured triangular
//! meshes, pointwise ideal and composite rheology kernels, three nonlinear
//! iterations (Picard, standard Newton and stress-velocity Newton) and the
//! two-dimensional benchmark problems used to compare them.

pub mod fem;
pub mod io;
pub mod linsolve;
pub mod mesh;
pub mod nonlinear;
pub mod problems;
pub mod rheology;
pub mod tensor;

/// A point in the plane.
pub type Point = [f64; 2];

pub use fem::{MixedField, MixedSpace, StressField};
pub use mesh::{Diagonal, Side, TriMesh};
pub use nonlinear::{ConvergenceRecord, LineSearch, Method, SolverConfig, Termination};
pub use rheology::{Law, RheologyParams, TangentTensor};
pub use tensor::SymTensor;
