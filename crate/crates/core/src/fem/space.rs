//! Global numbering of continuous Lagrange spaces and the Taylor-Hood pair.
//!
//! Mesh vertices keep their index as node numbers, edge nodes are shared
//! through a map keyed by the sorted vertex pair and interior nodes are owned
//! by their element. Element geometry is affine.

use std::collections::HashMap;

use crate::fem::basis::{LagrangeBasis, NodeLocation};
use crate::fem::quadrature::TriangleQuadrature;
use crate::linsolve::SparsityPattern;
use crate::mesh::{Side, TriMesh};
use crate::Point;

pub const MIN_DEGREE: usize = 2;
pub const MAX_DEGREE: usize = 4;
pub const MAX_QUAD_ORDER: usize = 12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SpaceError {
    #[error("velocity degree must be between {MIN_DEGREE} and {MAX_DEGREE}, got {0}")]
    BadDegree(usize),
    #[error("quadrature order must be between 1 and {MAX_QUAD_ORDER}, got {0}")]
    BadQuadOrder(usize),
    #[error("element {elem} has non-positive Jacobian determinant {det:e}")]
    Degenerate { elem: usize, det: f64 },
}

/// One continuous Lagrange space on a mesh.
#[derive(Clone, Debug)]
pub struct FieldSpace {
    pub basis: LagrangeBasis,
    /// `num_elements × basis.len()` global node numbers.
    pub elem_nodes: Vec<usize>,
    pub num_nodes: usize,
    pub node_coords: Vec<Point>,
    /// First global node of the `k − 1` nodes on each edge, keyed `(lo, hi)`.
    edge_base: HashMap<(usize, usize), usize>,
}

impl FieldSpace {
    pub fn new(mesh: &TriMesh, degree: usize) -> Self {
        let basis = LagrangeBasis::new(degree);
        let nloc = basis.len();
        let per_edge = degree - 1;
        let nv = mesh.num_vertices();
        let mut edge_base = HashMap::new();
        let mut next = nv;
        for tri in &mesh.triangles {
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                let key = (tri[a].min(tri[b]), tri[a].max(tri[b]));
                edge_base.entry(key).or_insert_with(|| {
                    let base = next;
                    next += per_edge;
                    base
                });
            }
        }
        let per_interior = nloc - 3 - 3 * per_edge;
        let mut elem_nodes = Vec::with_capacity(mesh.num_triangles() * nloc);
        let mut node_coords = vec![[0.0; 2]; next + per_interior * mesh.num_triangles()];
        node_coords[..nv].copy_from_slice(&mesh.vertices);
        for (e, tri) in mesh.triangles.iter().enumerate() {
            let coords = mesh.triangle_coords(e);
            let mut interior = 0;
            for n in 0..nloc {
                let g = match basis.location(n) {
                    NodeLocation::Vertex(v) => tri[v],
                    NodeLocation::Edge { a, b, position } => {
                        let (ga, gb) = (tri[a], tri[b]);
                        let base = edge_base[&(ga.min(gb), ga.max(gb))];
                        let steps = if ga < gb { position } else { degree - position };
                        base + steps - 1
                    }
                    NodeLocation::Interior => {
                        let g = next + e * per_interior + interior;
                        interior += 1;
                        g
                    }
                };
                if g >= nv {
                    let m = basis.nodes[n];
                    let k = degree as f64;
                    let (l0, l1, l2) = (m[0] as f64 / k, m[1] as f64 / k, m[2] as f64 / k);
                    node_coords[g] = [
                        l0 * coords[0][0] + l1 * coords[1][0] + l2 * coords[2][0],
                        l0 * coords[0][1] + l1 * coords[1][1] + l2 * coords[2][1],
                    ];
                }
                elem_nodes.push(g);
            }
        }
        Self { basis, elem_nodes, num_nodes: node_coords.len(), node_coords, edge_base }
    }

    pub fn nloc(&self) -> usize {
        self.basis.len()
    }

    pub fn element_nodes(&self, e: usize) -> &[usize] {
        let n = self.nloc();
        &self.elem_nodes[e * n..(e + 1) * n]
    }

    /// All nodes on the mesh edge `(a, b)`, ordered from `a` to `b`.
    pub fn edge_nodes(&self, a: usize, b: usize) -> Vec<usize> {
        let k = self.basis.degree;
        let base = self.edge_base[&(a.min(b), a.max(b))];
        let mut out = vec![a];
        let inner: Vec<usize> = (0..k - 1).map(|s| base + s).collect();
        if a < b {
            out.extend(inner);
        } else {
            out.extend(inner.into_iter().rev());
        }
        out.push(b);
        out
    }

    /// Distinct nodes on one side of the rectangle.
    pub fn side_nodes(&self, mesh: &TriMesh, side: Side) -> Vec<usize> {
        let mut nodes: Vec<usize> = mesh.side_edges(side).flat_map(|[a, b]| self.edge_nodes(a, b)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Affine map `x = origin + J ξ`.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    /// `J⁻ᵀ`, maps reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    #[inline]
    pub fn map(&self, p: [f64; 2]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            self.origin[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        ]
    }

    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Taylor-Hood `P_k / P_{k−1}` pair with its quadrature and matrix pattern.
#[derive(Clone, Debug)]
pub struct MixedSpace {
    pub mesh: TriMesh,
    pub degree: usize,
    pub velocity: FieldSpace,
    pub pressure: FieldSpace,
    pub quadrature: TriangleQuadrature,
    pub geometry: Vec<ElementGeometry>,
    /// Tabulated velocity basis values, `q × nloc_v`.
    pub vel_values: Vec<f64>,
    /// Tabulated reference velocity gradients, `q × nloc_v`.
    pub vel_ref_grads: Vec<[f64; 2]>,
    /// Tabulated pressure basis values, `q × nloc_p`.
    pub pres_values: Vec<f64>,
    pub pattern: SparsityPattern,
}

impl MixedSpace {
    pub fn default_quadrature_order(degree: usize) -> usize {
        (2 * degree + 4).min(MAX_QUAD_ORDER)
    }

    pub fn new(mesh: TriMesh, degree: usize) -> Result<Self, SpaceError> {
        Self::with_quadrature_order(mesh, degree, Self::default_quadrature_order(degree))
    }

    pub fn with_quadrature_order(mesh: TriMesh, degree: usize, order: usize) -> Result<Self, SpaceError> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
            return Err(SpaceError::BadDegree(degree));
        }
        if !(1..=MAX_QUAD_ORDER).contains(&order) {
            return Err(SpaceError::BadQuadOrder(order));
        }
        let mut geometry = Vec::with_capacity(mesh.num_triangles());
        for e in 0..mesh.num_triangles() {
            let [p0, p1, p2] = mesh.triangle_coords(e);
            let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !(det > 0.0) {
                return Err(SpaceError::Degenerate { elem: e, det });
            }
            // J⁻¹ = [[d, −b], [−c, a]] / det, transposed
            let inv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
            geometry.push(ElementGeometry { origin: p0, jac, inv_t, det });
        }
        let velocity = FieldSpace::new(&mesh, degree);
        let pressure = FieldSpace::new(&mesh, degree - 1);
        let quadrature = TriangleQuadrature::new(order);
        let (nv, np) = (velocity.nloc(), pressure.nloc());
        let mut vel_values = vec![0.0; quadrature.len() * nv];
        let mut vel_ref_grads = vec![[0.0; 2]; quadrature.len() * nv];
        let mut pres_values = vec![0.0; quadrature.len() * np];
        let mut scratch = vec![[0.0; 2]; np];
        for (q, &pt) in quadrature.points.iter().enumerate() {
            velocity.basis.eval(pt, &mut vel_values[q * nv..(q + 1) * nv], &mut vel_ref_grads[q * nv..(q + 1) * nv]);
            pressure.basis.eval(pt, &mut pres_values[q * np..(q + 1) * np], &mut scratch);
        }
        let mut space = Self {
            mesh,
            degree,
            velocity,
            pressure,
            quadrature,
            geometry,
            vel_values,
            vel_ref_grads,
            pres_values,
            pattern: SparsityPattern { n: 0, row_ptr: vec![0], col_idx: vec![] },
        };
        let n_u = space.n_u();
        let blocks: Vec<Vec<usize>> = (0..space.num_elements()).map(|e| space.element_dofs(e)).collect();
        space.pattern =
            SparsityPattern::from_blocks(space.n_dofs(), blocks.iter().map(|b| b.as_slice()), |i, j| i < n_u || j < n_u);
        Ok(space)
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_triangles()
    }

    pub fn n_u(&self) -> usize {
        2 * self.velocity.num_nodes
    }

    pub fn n_p(&self) -> usize {
        self.pressure.num_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_u() + self.n_p()
    }

    #[inline]
    pub fn vel_dof(&self, node: usize, comp: usize) -> usize {
        2 * node + comp
    }

    #[inline]
    pub fn pres_dof(&self, node: usize) -> usize {
        self.n_u() + node
    }

    /// Local ordering: velocity `2·a + c` for local node `a`, then pressure.
    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let mut dofs = Vec::with_capacity(2 * self.velocity.nloc() + self.pressure.nloc());
        for &n in self.velocity.element_nodes(e) {
            dofs.push(2 * n);
            dofs.push(2 * n + 1);
        }
        let n_u = self.n_u();
        dofs.extend(self.pressure.element_nodes(e).iter().map(|&n| n_u + n));
        dofs
    }

    /// Physical coordinates of quadrature point `q` in element `e`.
    #[inline]
    pub fn qp_point(&self, e: usize, q: usize) -> Point {
        self.geometry[e].map(self.quadrature.points[q])
    }

    /// Integration weight of quadrature point `q` in element `e`.
    #[inline]
    pub fn qp_weight(&self, e: usize, q: usize) -> f64 {
        self.quadrature.weights[q] * self.geometry[e].det
    }

    /// Physical velocity-basis gradients at `(e, q)`.
    #[inline]
    pub fn vel_grads(&self, e: usize, q: usize, out: &mut [[f64; 2]]) {
        let nv = self.velocity.nloc();
        let g = &self.geometry[e];
        for (o, r) in out.iter_mut().zip(&self.vel_ref_grads[q * nv..(q + 1) * nv]) {
            *o = g.grad(*r);
        }
    }

    #[inline]
    pub fn vel_values_at(&self, q: usize) -> &[f64] {
        let nv = self.velocity.nloc();
        &self.vel_values[q * nv..(q + 1) * nv]
    }

    #[inline]
    pub fn pres_values_at(&self, q: usize) -> &[f64] {
        let np = self.pressure.nloc();
        &self.pres_values[q * np..(q + 1) * np]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, Diagonal};

    #[test]
    fn dof_counts_match_euler_formula() {
        for diag in [Diagonal::Right, Diagonal::Crossed] {
            let mesh = rectangle_mesh(2.0, 1.0, 4, 3, diag).unwrap();
            let (nv, ne) = (mesh.num_vertices(), mesh.num_triangles());
            let edges = mesh.edge_counts().len();
            for k in 2..=4 {
                let s = FieldSpace::new(&mesh, k);
                let interior = (k - 1) * (k - 2) / 2;
                assert_eq!(s.num_nodes, nv + (k - 1) * edges + interior * ne);
            }
        }
    }

    #[test]
    fn shared_edge_nodes_coincide() {
        let mesh = rectangle_mesh(1.0, 1.0, 3, 2, Diagonal::Crossed).unwrap();
        let s = FieldSpace::new(&mesh, 4);
        for e in 0..mesh.num_triangles() {
            let geom = {
                let [p0, p1, p2] = mesh.triangle_coords(e);
                [p0, p1, p2]
            };
            for (n, &g) in s.element_nodes(e).iter().enumerate() {
                let m = s.basis.nodes[n];
                let k = 4.0;
                let x: Vec<f64> = (0..2)
                    .map(|d| (m[0] as f64 * geom[0][d] + m[1] as f64 * geom[1][d] + m[2] as f64 * geom[2][d]) / k)
                    .collect();
                assert!((x[0] - s.node_coords[g][0]).abs() < 1e-14);
                assert!((x[1] - s.node_coords[g][1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn side_nodes_lie_on_side() {
        let mesh = rectangle_mesh(4.0, 1.0, 8, 2, Diagonal::Right).unwrap();
        let s = FieldSpace::new(&mesh, 3);
        let left = s.side_nodes(&mesh, Side::Left);
        assert_eq!(left.len(), 2 * 3 + 1);
        assert!(left.iter().all(|&n| s.node_coords[n][0].abs() < 1e-14));
        let top = s.side_nodes(&mesh, Side::Top);
        assert_eq!(top.len(), 8 * 3 + 1);
        assert!(top.iter().all(|&n| (s.node_coords[n][1] - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rejects_bad_degree() {
        let mesh = rectangle_mesh(1.0, 1.0, 1, 1, Diagonal::Right).unwrap();
        assert_eq!(MixedSpace::new(mesh.clone(), 1).unwrap_err(), SpaceError::BadDegree(1));
        assert_eq!(MixedSpace::new(mesh, 5).unwrap_err(), SpaceError::BadDegree(5));
    }

    #[test]
    fn geometry_weights_sum_to_area() {
        let mesh = rectangle_mesh(4.0, 2.0, 5, 3, Diagonal::Crossed).unwrap();
        let s = MixedSpace::new(mesh, 2).unwrap();
        let total: f64 = (0..s.num_elements())
            .flat_map(|e| (0..s.quadrature.len()).map(move |q| (e, q)))
            .map(|(e, q)| s.qp_weight(e, q))
            .sum();
        assert!((total - 8.0).abs() < 1e-12);
    }
}
