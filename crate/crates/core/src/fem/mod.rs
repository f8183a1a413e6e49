//! Taylor-Hood mixed finite elements: reference bases, quadrature, degree of
//! freedom maps, assembly and Dirichlet conditions.

pub mod assembly;
pub mod basis;
pub mod bc;
pub mod quadrature;
pub mod space;

use std::fmt;
use std::sync::Arc;

use crate::tensor::SymTensor;
use crate::Point;

pub use assembly::{
    assemble_load, assemble_operator, assemble_residual, energy, project_to_vertices, strain_invariants,
    strain_rates, Energy, PointState,
};
pub use bc::DirichletSet;
pub use space::{FieldSpace, MixedSpace, SpaceError};

/// Coefficients of a mixed `(u, p)` field. Velocity dofs come first, ordered
/// `2·node + component`; pressure dofs follow.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedField {
    pub coeffs: Vec<f64>,
    pub n_u: usize,
}

impl MixedField {
    pub fn zeros(space: &MixedSpace) -> Self {
        Self { coeffs: vec![0.0; space.n_dofs()], n_u: space.n_u() }
    }

    pub fn from_coeffs(space: &MixedSpace, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.n_dofs());
        Self { coeffs, n_u: space.n_u() }
    }

    pub fn u(&self) -> &[f64] {
        &self.coeffs[..self.n_u]
    }

    pub fn p(&self) -> &[f64] {
        &self.coeffs[self.n_u..]
    }

    /// Velocity at a velocity node.
    pub fn velocity_at(&self, node: usize) -> [f64; 2] {
        [self.coeffs[2 * node], self.coeffs[2 * node + 1]]
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &MixedField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }
}

/// Symmetric tensor samples at every quadrature point, element-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StressField {
    pub samples: Vec<SymTensor>,
    pub n_qp: usize,
}

impl StressField {
    pub fn zeros(space: &MixedSpace) -> Self {
        let n_qp = space.quadrature.len();
        Self { samples: vec![SymTensor::ZERO; space.num_elements() * n_qp], n_qp }
    }

    #[inline]
    pub fn get(&self, elem: usize, q: usize) -> SymTensor {
        self.samples[elem * self.n_qp + q]
    }

    pub fn axpy(&mut self, alpha: f64, other: &StressField) {
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += alpha * *b;
        }
    }
}

/// Vector-valued function of position, such as a body force.
#[derive(Clone)]
pub struct VectorField(Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>);

impl VectorField {
    pub fn new(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: Point) -> [f64; 2] {
        (self.0)(x)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField(..)")
    }
}
