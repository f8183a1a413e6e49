//! Structured triangulations of axis-aligned rectangles `[0, Lx] × [0, Ly]`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Outward unit normal.
    pub fn normal(self) -> Point {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    /// Velocity component normal to this side.
    pub fn normal_component(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diagonal {
    /// Each cell split along its bottom-left to top-right diagonal.
    Right,
    /// Each cell split into four triangles around its centroid.
    Crossed,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MeshError {
    #[error("domain lengths must be positive, got {lx} x {ly}")]
    NonpositiveDimensions { lx: f64, ly: f64 },
    #[error("subdivision counts must be at least 1, got {nx} x {ny}")]
    NoCells { nx: usize, ny: usize },
    #[error("grading focus ({0}, {1}) lies outside the domain")]
    FocusOutside(f64, f64),
    #[error("grading ratio must be >= 1, got {0}")]
    BadGrading(f64),
    #[error("edge ({0}, {1}) is not on the boundary")]
    NotBoundary(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: Side,
}

/// Triangle mesh with counterclockwise triangles and tagged boundary edges.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    /// Closed counterclockwise loop around the rectangle.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub lx: f64,
    pub ly: f64,
    /// Longest edge length.
    pub characteristic_h: f64,
}

const COORD_TOL: f64 = 1e-12;

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_coords(t);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [p, q, r] = self.triangle_coords(t);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Number of triangles sharing each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().flat_map(move |tri| {
            (0..3).map(move |k| {
                let (p, q) = (self.vertices[tri[k]], self.vertices[tri[(k + 1) % 3]]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
        })
    }

    /// Which side of the rectangle contains the edge `(a, b)`.
    pub fn boundary_tag(&self, edge: [usize; 2]) -> Result<Side, MeshError> {
        let (p, q) = (self.vertices[edge[0]], self.vertices[edge[1]]);
        let on = |v: f64, target: f64| (v - target).abs() <= COORD_TOL * (1.0 + target.abs());
        if on(p[0], 0.0) && on(q[0], 0.0) {
            Ok(Side::Left)
        } else if on(p[0], self.lx) && on(q[0], self.lx) {
            Ok(Side::Right)
        } else if on(p[1], 0.0) && on(q[1], 0.0) {
            Ok(Side::Bottom)
        } else if on(p[1], self.ly) && on(q[1], self.ly) {
            Ok(Side::Top)
        } else {
            Err(MeshError::NotBoundary(edge[0], edge[1]))
        }
    }

    /// Vertex lists of all boundary edges on `side`.
    pub fn side_edges(&self, side: Side) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.boundary_edges.iter().filter(move |e| e.side == side).map(|e| e.vertices)
    }
}

fn check_dims(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<(), MeshError> {
    if !(lx > 0.0 && ly > 0.0) {
        return Err(MeshError::NonpositiveDimensions { lx, ly });
    }
    if nx == 0 || ny == 0 {
        return Err(MeshError::NoCells { nx, ny });
    }
    Ok(())
}

fn uniform_nodes(length: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| length * i as f64 / n as f64).collect()
}

/// Uniform structured triangulation.
pub fn rectangle_mesh(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    diagonal: Diagonal,
) -> Result<TriMesh, MeshError> {
    check_dims(lx, ly, nx, ny)?;
    Ok(tensor_mesh(&uniform_nodes(lx, nx), &uniform_nodes(ly, ny), diagonal))
}

/// Structured triangulation whose node lines cluster geometrically around
/// `focus`. The cell next to the focus is about `grading` times smaller than
/// the coarsest cell on that side.
pub fn graded_rectangle_mesh(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    focus: Point,
    grading: f64,
    diagonal: Diagonal,
) -> Result<TriMesh, MeshError> {
    check_dims(lx, ly, nx, ny)?;
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(MeshError::BadGrading(grading));
    }
    let inside = |v: f64, l: f64| v >= 0.0 && v <= l;
    if !inside(focus[0], lx) || !inside(focus[1], ly) {
        return Err(MeshError::FocusOutside(focus[0], focus[1]));
    }
    let xs = graded_nodes(lx, nx, focus[0], grading);
    let ys = graded_nodes(ly, ny, focus[1], grading);
    Ok(tensor_mesh(&xs, &ys, diagonal))
}

/// Node line on `[0, length]` with `n` cells, refined toward `focus`.
///
/// On each side of the focus the spacing grows as `h0·g^(j/r)` for the first
/// `r = max(m/2, 1)` cells and stays at `h0·g` afterwards.
pub fn graded_nodes(length: f64, n: usize, focus: f64, grading: f64) -> Vec<f64> {
    if grading == 1.0 || n == 1 {
        return uniform_nodes(length, n);
    }
    let left_len = focus;
    let right_len = length - focus;
    let mut m_left = ((n as f64) * left_len / length).round() as usize;
    if left_len > 0.0 && right_len > 0.0 {
        m_left = m_left.clamp(1, n - 1);
    } else if left_len <= 0.0 {
        m_left = 0;
    } else {
        m_left = n;
    }
    let m_right = n - m_left;

    let side_steps = |m: usize, len: f64| -> Vec<f64> {
        if m == 0 {
            return Vec::new();
        }
        let ramp = (m / 2).max(1) as f64;
        let weights: Vec<f64> =
            (0..m).map(|j| grading.powf((j as f64 / ramp).min(1.0))).collect();
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| len * w / total).collect()
    };

    let mut nodes = Vec::with_capacity(n + 1);
    let left = side_steps(m_left, left_len);
    let mut x = focus;
    let mut left_nodes = vec![focus];
    for h in &left {
        x -= h;
        left_nodes.push(x);
    }
    left_nodes.reverse();
    if let Some(first) = left_nodes.first_mut() {
        *first = 0.0;
    }
    nodes.extend(left_nodes);

    let right = side_steps(m_right, right_len);
    let mut x = focus;
    for h in &right {
        x += h;
        nodes.push(x);
    }
    *nodes.last_mut().unwrap() = length;
    nodes
}

fn tensor_mesh(xs: &[f64], ys: &[f64], diagonal: Diagonal) -> TriMesh {
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let grid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in ys {
        for &x in xs {
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (grid(i, j), grid(i + 1, j), grid(i, j + 1), grid(i + 1, j + 1));
            match diagonal {
                Diagonal::Right => {
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
                Diagonal::Crossed => {
                    let c = vertices.len();
                    vertices.push([0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])]);
                    triangles.push([v00, v10, c]);
                    triangles.push([v10, v11, c]);
                    triangles.push([v11, v01, c]);
                    triangles.push([v01, v00, c]);
                }
            }
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge { vertices: [grid(i, 0), grid(i + 1, 0)], side: Side::Bottom });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge { vertices: [grid(nx, j), grid(nx, j + 1)], side: Side::Right });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [grid(i + 1, ny), grid(i, ny)], side: Side::Top });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [grid(0, j + 1), grid(0, j)], side: Side::Left });
    }
    let mut mesh = TriMesh {
        vertices,
        triangles,
        boundary_edges,
        lx: xs[nx],
        ly: ys[ny],
        characteristic_h: 0.0,
    };
    mesh.characteristic_h = mesh.edge_lengths().fold(0.0, f64::max);
    mesh
}
