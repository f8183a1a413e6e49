mod common;

use std::path::Path;
use std::process::Command;

use common::interpolate;
use vpstokes::io::vtk::{write_solution_vtk, write_vtk, CellData, PointData, VertexFields};
use vpstokes::io::{run, RunConfig};
use vpstokes::mesh::rectangle_mesh;
use vpstokes::problems::ProblemKind;
use vpstokes::{Diagonal, Law, Method, MixedSpace, RheologyParams};
use vtkio::model::{Attribute, CellType, DataSet, Piece};

fn small_config(dir: &Path) -> RunConfig {
    let mut c = RunConfig::defaults(ProblemKind::Example1);
    c.mesh.nx = 16;
    c.mesh.ny = 4;
    c.mesh.grading = 1.0;
    c.solver.method = Method::Newton;
    c.output.dir = dir.to_path_buf();
    c
}

/// Rows of `convergence.csv` without the wall-time column.
fn csv_numbers(path: &Path) -> Vec<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["iter", "residual", "rel_residual", "energy", "step_length", "backtracks", "wall_time_s"]
    );
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            rec.iter().take(6).map(|v| v.parse::<f64>().unwrap()).collect()
        })
        .collect()
}

fn unstructured_piece(path: &Path) -> vtkio::model::UnstructuredGridPiece {
    let vtk = vtkio::Vtk::import(path).unwrap();
    match vtk.data {
        DataSet::UnstructuredGrid { mut pieces, .. } => match pieces.remove(0) {
            Piece::Inline(p) => *p,
            _ => panic!("expected inline piece"),
        },
        _ => panic!("expected an unstructured grid"),
    }
}

#[test]
fn two_triangle_vtk_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.vtk");
    let mesh = rectangle_mesh(1.0, 1.0, 1, 1, Diagonal::Right).unwrap();
    let s = [0.0, 1.0, 2.0, 3.0];
    let v = [[1.0, 0.0, 0.0]; 4];
    write_vtk(
        &path,
        &mesh,
        "test",
        &[PointData::Scalars("s", &s), PointData::Vectors("v", &v)],
        &[CellData { name: "region", values: &[0, 1] }],
    )
    .unwrap();
    let piece = unstructured_piece(&path);
    assert_eq!(piece.num_points(), 4);
    assert_eq!(piece.cells.types, vec![CellType::Triangle; 2]);
    let names: Vec<String> = piece
        .data
        .point
        .iter()
        .map(|a| match a {
            Attribute::DataArray(d) => d.name.clone(),
            Attribute::Field { name, .. } => name.clone(),
        })
        .collect();
    assert_eq!(names, ["s", "v"]);
    match &piece.data.point[0] {
        Attribute::DataArray(d) => assert_eq!(d.data.clone().into_vec::<f64>().unwrap(), s),
        _ => panic!("scalar field missing"),
    }
}

#[test]
fn rigid_rotation_has_zero_strain_rate_in_output() {
    let space = MixedSpace::new(rectangle_mesh(2.0, 1.0, 4, 2, Diagonal::Right).unwrap(), 2).unwrap();
    let field = interpolate(&space, |[x, y]| [-y, x]);
    let rh = RheologyParams::constant(Law::Composite, 1.0, 1.0, 0.0).unwrap();
    let f = VertexFields::compute(&space, &field, &rh);
    assert!(f.eii.iter().all(|e| e.abs() < 1e-13));
    assert!(f.viscosity.iter().all(|m| (m - 1.0).abs() < 1e-12));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solution.vtk");
    write_solution_vtk(&path, &space, &field, &rh, &vec![0; space.num_elements()]).unwrap();
    let piece = unstructured_piece(&path);
    assert_eq!(piece.num_points(), space.mesh.num_vertices());
    assert_eq!(piece.data.point.len(), 5);
}

#[test]
fn run_writes_all_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let cfg = small_config(&a);
    let summary = run(&cfg).unwrap();
    assert!(summary.outcome.converged());
    for f in ["convergence.csv", "solution.vtk", "mesh.vtk", "config.echo"] {
        assert!(a.join(f).is_file(), "{f} missing");
    }
    let rows = csv_numbers(&a.join("convergence.csv"));
    assert_eq!(rows.len(), summary.outcome.record.rows.len());
    for (i, r) in rows.iter().enumerate() {
        assert!(r.iter().all(|v| v.is_finite()));
        assert_eq!(r[0], i as f64);
        assert!(r[4] > 0.0 && r[4] <= 1.0);
    }
    let mesh = unstructured_piece(&a.join("mesh.vtk"));
    assert_eq!(mesh.cells.types.len(), summary.num_elements);

    // same configuration again
    let b = dir.path().join("b");
    run(&small_config(&b)).unwrap();
    assert_eq!(rows, csv_numbers(&b.join("convergence.csv")));

    // the echoed configuration alone reproduces the run
    let mut echoed = RunConfig::from_file(Some(&a.join("config.echo")), &Default::default()).unwrap();
    assert_eq!(echoed, cfg);
    let c = dir.path().join("c");
    echoed.output.dir = c.clone();
    run(&echoed).unwrap();
    assert_eq!(rows, csv_numbers(&c.join("convergence.csv")));
}

#[test]
fn converged_start_writes_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    // the relative residual of the initial guess is 1 by definition
    cfg.solver.rel_tol = 1.0;
    let summary = run(&cfg).unwrap();
    assert!(summary.outcome.converged());
    assert_eq!(summary.outcome.record.iterations(), 0);
    assert_eq!(csv_numbers(&dir.path().join("convergence.csv")).len(), 1);
}

#[test]
fn cli_reports_bad_config_with_its_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[solver]\nno_such_key = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vpstokes"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.no_such_key"));
    std::fs::write(&cfg, "[solver]\ndegree = 7\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vpstokes")).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn cli_runs_a_small_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vpstokes"))
        .args(["--problem", "example2", "--law", "composite", "--method", "svnewton", "--nx", "12", "--ny", "6"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let echo = std::fs::read_to_string(dir.path().join("config.echo")).unwrap();
    let cfg = RunConfig::from_sources(Some(&echo), &Default::default()).unwrap();
    assert_eq!(cfg.problem.kind, ProblemKind::Example2);
    assert_eq!((cfg.mesh.nx, cfg.mesh.ny), (12, 6));
}
