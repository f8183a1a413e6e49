//! Continuous Lagrange bases on the reference triangle.
//!
//! Nodes sit on the equispaced barycentric lattice `{(i, j, l)/k : i+j+l = k}`
//! and basis functions follow the Silvester product formula. Barycentric
//! coordinates are `λ0 = 1 − ξ − η`, `λ1 = ξ`, `λ2 = η`.

/// Where a lattice node lives on the reference triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeLocation {
    Vertex(usize),
    /// Edge between local vertices `a < b`; `position` counts lattice steps
    /// away from vertex `a` (1..k-1).
    Edge { a: usize, b: usize, position: usize },
    Interior,
}

#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    pub degree: usize,
    /// Barycentric multi-indices; vertex nodes first, then edge nodes, then interior.
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be at least 1");
        let k = degree;
        let mut nodes = vec![[k, 0, 0], [0, k, 0], [0, 0, k]];
        for (a, b) in [(0usize, 1usize), (1, 2), (0, 2)] {
            for pos in 1..k {
                let mut m = [0; 3];
                m[a] = k - pos;
                m[b] = pos;
                nodes.push(m);
            }
        }
        for i in 1..k {
            for j in 1..k - i {
                nodes.push([k - i - j, i, j]);
            }
        }
        Self { degree, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn location(&self, node: usize) -> NodeLocation {
        let m = self.nodes[node];
        let nonzero: Vec<usize> = (0..3).filter(|&c| m[c] > 0).collect();
        match nonzero.len() {
            1 => NodeLocation::Vertex(nonzero[0]),
            2 => NodeLocation::Edge { a: nonzero[0], b: nonzero[1], position: m[nonzero[1]] },
            _ => NodeLocation::Interior,
        }
    }

    /// Reference coordinates of a node.
    pub fn node_point(&self, node: usize) -> [f64; 2] {
        let m = self.nodes[node];
        let k = self.degree as f64;
        [m[1] as f64 / k, m[2] as f64 / k]
    }

    /// Values and reference gradients `(∂/∂ξ, ∂/∂η)` at `p`.
    pub fn eval(&self, p: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let k = self.degree;
        let lam = [1.0 - p[0] - p[1], p[0], p[1]];
        // table[c][m] = (P_m(λ_c), P_m'(λ_c))
        let mut table = [[(0.0f64, 0.0f64); 8]; 3];
        assert!(k < 8);
        for c in 0..3 {
            table[c][0] = (1.0, 0.0);
            let kl = k as f64 * lam[c];
            for m in 1..=k {
                let (prev, dprev) = table[c][m - 1];
                let factor = (kl - (m - 1) as f64) / m as f64;
                let dfactor = k as f64 / m as f64;
                table[c][m] = (prev * factor, dprev * factor + prev * dfactor);
            }
        }
        for (n, m) in self.nodes.iter().enumerate() {
            let (p0, d0) = table[0][m[0]];
            let (p1, d1) = table[1][m[1]];
            let (p2, d2) = table[2][m[2]];
            values[n] = p0 * p1 * p2;
            let dl0 = d0 * p1 * p2;
            let dl1 = p0 * d1 * p2;
            let dl2 = p0 * p1 * d2;
            grads[n] = [dl1 - dl0, dl2 - dl0];
        }
    }
}
