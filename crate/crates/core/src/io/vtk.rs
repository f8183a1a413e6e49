//! Legacy ASCII VTK output on the mesh vertices.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::fem::{project_to_vertices, strain_invariants, MixedField, MixedSpace};
use crate::mesh::TriMesh;
use crate::rheology::RheologyParams;

/// VTK cell type of a linear triangle.
pub const VTK_TRIANGLE: u8 = 5;

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct VtkError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub enum PointData<'a> {
    Scalars(&'a str, &'a [f64]),
    Vectors(&'a str, &'a [[f64; 3]]),
}

pub struct CellData<'a> {
    pub name: &'a str,
    pub values: &'a [u32],
}

/// Unstructured grid with the given point and cell attributes.
pub fn write_vtk(
    path: &Path,
    mesh: &TriMesh,
    title: &str,
    point_data: &[PointData<'_>],
    cell_data: &[CellData<'_>],
) -> Result<(), VtkError> {
    let mut s = String::new();
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    // writes to a String cannot fail
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    if !cell_data.is_empty() {
        let _ = writeln!(s, "CELL_DATA {nt}");
        for c in cell_data {
            assert_eq!(c.values.len(), nt, "cell field {} has wrong length", c.name);
            let _ = writeln!(s, "SCALARS {} int 1\nLOOKUP_TABLE default", c.name);
            for v in c.values {
                let _ = writeln!(s, "{v}");
            }
        }
    }
    if !point_data.is_empty() {
        let _ = writeln!(s, "POINT_DATA {nv}");
        for d in point_data {
            match d {
                PointData::Scalars(name, values) => {
                    assert_eq!(values.len(), nv, "point field {name} has wrong length");
                    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                    for v in values.iter() {
                        let _ = writeln!(s, "{v}");
                    }
                }
                PointData::Vectors(name, values) => {
                    assert_eq!(values.len(), nv, "point field {name} has wrong length");
                    let _ = writeln!(s, "VECTORS {name} double");
                    for v in values.iter() {
                        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
                    }
                }
            }
        }
    }
    std::fs::write(path, s).map_err(|source| VtkError { path: path.to_path_buf(), source })
}

/// Vertex values of everything written to `solution.vtk`.
pub struct VertexFields {
    pub velocity: Vec<[f64; 3]>,
    pub pressure: Vec<f64>,
    pub eii: Vec<f64>,
    pub viscosity: Vec<f64>,
    pub tau_y: Vec<f64>,
}

impl VertexFields {
    pub fn compute(space: &MixedSpace, field: &MixedField, rheology: &RheologyParams) -> Self {
        let mesh = &space.mesh;
        let nv = mesh.num_vertices();
        // mesh vertices are the first nodes of both Lagrange spaces
        let velocity = (0..nv)
            .map(|n| {
                let v = field.velocity_at(n);
                [v[0], v[1], 0.0]
            })
            .collect();
        let pressure = field.p()[..nv].to_vec();
        let eii_q = strain_invariants(space, field);
        let nq = space.quadrature.len();
        let visc_q: Vec<f64> =
            eii_q.iter().enumerate().map(|(i, &e)| rheology.at(space.qp_point(i / nq, i % nq)).viscosity(e)).collect();
        let tau_y = mesh.vertices.iter().map(|&x| rheology.tau_y.eval(x)).collect();
        Self {
            velocity,
            pressure,
            eii: project_to_vertices(space, &eii_q),
            viscosity: project_to_vertices(space, &visc_q),
            tau_y,
        }
    }
}

pub fn write_solution_vtk(
    path: &Path,
    space: &MixedSpace,
    field: &MixedField,
    rheology: &RheologyParams,
    regions: &[u32],
) -> Result<(), VtkError> {
    let f = VertexFields::compute(space, field, rheology);
    write_vtk(
        path,
        &space.mesh,
        "viscoplastic Stokes solution",
        &[
            PointData::Vectors("velocity", &f.velocity),
            PointData::Scalars("pressure", &f.pressure),
            PointData::Scalars("eII", &f.eii),
            PointData::Scalars("viscosity", &f.viscosity),
            PointData::Scalars("tau_y", &f.tau_y),
        ],
        &[CellData { name: "region", values: regions }],
    )
}

pub fn write_mesh_vtk(path: &Path, mesh: &TriMesh, regions: &[u32]) -> Result<(), VtkError> {
    write_vtk(path, mesh, "mesh", &[], &[CellData { name: "region", values: regions }])
}
