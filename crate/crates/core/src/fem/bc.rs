//! Dirichlet constraints on velocity (and optionally pressure) dofs, applied
//! by symmetric elimination.

use crate::fem::MixedSpace;
use crate::linsolve::CsrMatrix;
use crate::mesh::Side;
use crate::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSet {
    values: Vec<Option<f64>>,
}

impl DirichletSet {
    pub fn new(space: &MixedSpace) -> Self {
        Self { values: vec![None; space.n_dofs()] }
    }

    pub fn fix(&mut self, dof: usize, value: f64) {
        self.values[dof] = Some(value);
    }

    /// Prescribes velocity component `comp` on a side.
    pub fn add_component(&mut self, space: &MixedSpace, side: Side, comp: usize, value: f64) {
        self.add_component_fn(space, side, comp, |_| value);
    }

    pub fn add_component_fn(&mut self, space: &MixedSpace, side: Side, comp: usize, f: impl Fn(Point) -> f64) {
        for n in space.velocity.side_nodes(&space.mesh, side) {
            self.fix(space.vel_dof(n, comp), f(space.velocity.node_coords[n]));
        }
    }

    /// Prescribes `u · n = value` with `n` the outward normal of `side`.
    pub fn add_normal(&mut self, space: &MixedSpace, side: Side, value: f64) {
        let comp = side.normal_component();
        let sign = side.normal()[comp];
        self.add_component(space, side, comp, sign * value);
    }

    /// Prescribes both velocity components on a side from a function.
    pub fn add_velocity_fn(&mut self, space: &MixedSpace, side: Side, f: impl Fn(Point) -> [f64; 2]) {
        for n in space.velocity.side_nodes(&space.mesh, side) {
            let v = f(space.velocity.node_coords[n]);
            self.fix(space.vel_dof(n, 0), v[0]);
            self.fix(space.vel_dof(n, 1), v[1]);
        }
    }

    pub fn pin_pressure(&mut self, space: &MixedSpace, node: usize, value: f64) {
        self.fix(space.pres_dof(node), value);
    }

    #[inline]
    pub fn is_fixed(&self, dof: usize) -> bool {
        self.values[dof].is_some()
    }

    pub fn value(&self, dof: usize) -> Option<f64> {
        self.values[dof]
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fixed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    /// Same constrained dofs with zero values.
    pub fn homogeneous(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.map(|_| 0.0)).collect() }
    }

    /// Writes the prescribed values into `x`.
    pub fn lift(&self, x: &mut [f64]) {
        for (i, v) in self.fixed() {
            x[i] = v;
        }
    }

    /// Zeroes constrained entries of `x`.
    pub fn zero(&self, x: &mut [f64]) {
        for (i, _) in self.fixed() {
            x[i] = 0.0;
        }
    }

    /// Eliminates the constraints from `a x = b`, keeping `a` symmetric when
    /// it was. Constrained rows become unit rows `x_i = g_i`; explicit zeros
    /// are removed afterwards.
    pub fn apply(&self, a: &mut CsrMatrix, b: &mut [f64]) {
        assert_eq!(a.nrows, self.values.len());
        for i in 0..a.nrows {
            let fixed_row = self.values[i];
            for p in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[p];
                match (fixed_row, self.values[j]) {
                    (Some(_), _) => a.values[p] = if i == j { 1.0 } else { 0.0 },
                    (None, Some(g)) => {
                        b[i] -= a.values[p] * g;
                        a.values[p] = 0.0;
                    }
                    (None, None) => {}
                }
            }
            if let Some(g) = fixed_row {
                b[i] = g;
            }
        }
        a.finalize();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, Diagonal};

    #[test]
    fn normal_sign_convention() {
        let s = MixedSpace::new(rectangle_mesh(4.0, 2.0, 4, 2, Diagonal::Right).unwrap(), 2).unwrap();
        let mut bc = DirichletSet::new(&s);
        bc.add_normal(&s, Side::Left, -1.0);
        bc.add_normal(&s, Side::Bottom, 0.5);
        for n in s.velocity.side_nodes(&s.mesh, Side::Left) {
            assert_eq!(bc.value(s.vel_dof(n, 0)), Some(1.0));
        }
        for n in s.velocity.side_nodes(&s.mesh, Side::Bottom) {
            assert_eq!(bc.value(s.vel_dof(n, 1)), Some(-0.5));
        }
    }

    #[test]
    fn elimination_gives_prescribed_values() {
        let a0 = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (1, 2, 1.0), (2, 1, 1.0), (2, 2, 2.0)],
        );
        let mut bc = DirichletSet { values: vec![None, None, Some(2.0)] };
        let mut a = a0.clone();
        let mut b = vec![1.0, 2.0, 0.0];
        bc.apply(&mut a, &mut b);
        assert!(a.max_asymmetry() == 0.0);
        let x = crate::linsolve::DirectSolver::new().solve(&a, &b).unwrap();
        assert!((x[2] - 2.0).abs() < 1e-14);
        // free rows satisfy the original equations
        let ax = a0.matvec(&x);
        assert!((ax[0] - 1.0).abs() < 1e-13 && (ax[1] - 2.0).abs() < 1e-13);
        bc.fix(0, 0.0);
        assert_eq!(bc.len(), 2);
    }
}
