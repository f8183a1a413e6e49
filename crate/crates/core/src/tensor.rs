//! Symmetric 2×2 tensors stored as `(xx, yy, xy)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor { xx: 0.0, yy: 0.0, xy: 0.0 };

    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    /// Symmetric part of a velocity gradient `grad[i][j] = ∂u_i/∂x_j`.
    pub fn sym_grad(grad: [[f64; 2]; 2]) -> Self {
        Self {
            xx: grad[0][0],
            yy: grad[1][1],
            xy: 0.5 * (grad[0][1] + grad[1][0]),
        }
    }

    /// Full contraction `a : b`.
    #[inline]
    pub fn ddot(&self, other: &SymTensor) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    /// `sqrt(a:a / 2)`.
    #[inline]
    pub fn second_invariant(&self) -> f64 {
        (0.5 * self.ddot(self)).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.yy.is_finite() && self.xy.is_finite()
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(self, o: SymTensor) -> SymTensor {
        SymTensor::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, o: SymTensor) {
        self.xx += o.xx;
        self.yy += o.yy;
        self.xy += o.xy;
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(self, o: SymTensor) -> SymTensor {
        SymTensor::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        SymTensor::new(-self.xx, -self.yy, -self.xy)
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, t: SymTensor) -> SymTensor {
        SymTensor::new(self * t.xx, self * t.yy, self * t.xy)
    }
}
