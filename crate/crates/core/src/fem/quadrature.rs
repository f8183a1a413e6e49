//! Quadrature on the reference triangle `{ξ ≥ 0, η ≥ 0, ξ + η ≤ 1}`.
//!
//! Rules are conical products of Gauss-Legendre rules through the collapsed
//! map `(s, t) ↦ (s, t(1 − s))`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_n'
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Clone, Debug)]
pub struct TriangleQuadrature {
    pub order: usize,
    pub points: Vec<[f64; 2]>,
    /// Weights sum to the reference area 1/2.
    pub weights: Vec<f64>,
}

impl TriangleQuadrature {
    /// Rule exact for polynomials of total degree `order`.
    pub fn new(order: usize) -> Self {
        let n = (order + 2).div_ceil(2).max(1);
        let (gx, gw) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&s, &ws) in gx.iter().zip(&gw) {
            for (&t, &wt) in gx.iter().zip(&gw) {
                points.push([s, t * (1.0 - s)]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        Self { order, points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
