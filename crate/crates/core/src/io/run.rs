//! One complete run: build the problem, solve, write the outputs.

use std::path::PathBuf;
use std::time::Instant;

use crate::fem::{MixedSpace, SpaceError};
use crate::io::config::{ConfigError, RunConfig};
use crate::io::csv::{ConvergenceCsv, CsvError};
use crate::io::vtk::{write_mesh_vtk, write_solution_vtk, VtkError};
use crate::mesh::{graded_rectangle_mesh, rectangle_mesh, MeshError, TriMesh};
use crate::nonlinear::{NonlinearProblem, SolveOutcome, Solver, SolverError, Termination};
use crate::problems::ScaledProblem;
use crate::rheology::RheologyError;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("discretisation: {0}")]
    Space(#[from] SpaceError),
    #[error("rheology: {0}")]
    Rheology(#[from] RheologyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Vtk(#[from] VtkError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Converged = 0,
    Other = 1,
    MaxIterations = 2,
    LineSearchFailure = 3,
    LinearSolveFailure = 4,
    ConfigError = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_termination(t: Termination) -> Self {
        match t {
            Termination::Converged => ExitStatus::Converged,
            Termination::MaxIterations => ExitStatus::MaxIterations,
            Termination::LineSearchFailure => ExitStatus::LineSearchFailure,
        }
    }

    pub fn from_error(e: &RunError) -> Self {
        match e {
            RunError::Config(_) | RunError::Mesh(_) | RunError::Space(_) | RunError::Rheology(_) => {
                ExitStatus::ConfigError
            }
            RunError::Solver(SolverError::Config(_)) => ExitStatus::ConfigError,
            RunError::Solver(SolverError::Linear(_)) => ExitStatus::LinearSolveFailure,
            _ => ExitStatus::Other,
        }
    }
}

pub struct RunSummary {
    pub outcome: SolveOutcome,
    pub num_elements: usize,
    pub num_dofs: usize,
    pub elapsed: f64,
}

impl RunSummary {
    pub fn status(&self) -> ExitStatus {
        ExitStatus::from_termination(self.outcome.termination)
    }
}

/// Mesh for a scaled problem, graded toward its focus when requested.
pub fn build_mesh(config: &RunConfig, problem: &ScaledProblem) -> Result<TriMesh, MeshError> {
    let m = &config.mesh;
    if m.grading > 1.0 {
        graded_rectangle_mesh(problem.lx, problem.ly, m.nx, m.ny, problem.focus(), m.grading, m.diagonal)
    } else {
        rectangle_mesh(problem.lx, problem.ly, m.nx, m.ny, m.diagonal)
    }
}

pub fn build_space(config: &RunConfig, problem: &ScaledProblem) -> Result<MixedSpace, RunError> {
    let mesh = build_mesh(config, problem)?;
    let k = config.solver.degree;
    let order = config.solver.quad_order.unwrap_or(MixedSpace::default_quadrature_order(k));
    Ok(MixedSpace::with_quadrature_order(mesh, k, order)?)
}

pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    config.validate()?;
    let problem = config.problem.nondimensionalize().map_err(ConfigError::Invalid)?;
    let space = build_space(config, &problem)?;
    let rheology = problem.rheology(config.solver.law)?;
    let bc = problem.boundary_conditions(&space);
    let out = &config.output;
    let io_err = |path: PathBuf| move |source| RunError::Io { path, source };
    std::fs::create_dir_all(&out.dir).map_err(io_err(out.dir.clone()))?;
    let echo = out.dir.join("config.echo");
    std::fs::write(&echo, config.to_toml()).map_err(io_err(echo.clone()))?;
    let region_of = problem.region_fn();
    let regions: Vec<u32> = (0..space.num_elements()).map(|e| region_of(space.mesh.centroid(e))).collect();
    if out.mesh {
        write_mesh_vtk(&out.dir.join("mesh.vtk"), &space.mesh, &regions)?;
    }
    let mut csv = if out.convergence { Some(ConvergenceCsv::create(&out.dir.join("convergence.csv"))?) } else { None };
    let nl = NonlinearProblem { space: &space, rheology: &rheology, force: None, bc: &bc };
    let mut solver = Solver::new(nl, config.solver_config())?;
    let mut csv_error = None;
    let result = solver.solve_with_observer(|row| {
        if let Some(w) = csv.as_mut() {
            if let Err(e) = w.write(row) {
                csv_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = csv_error {
        return Err(e.into());
    }
    let outcome = result?;
    if out.fields {
        write_solution_vtk(&out.dir.join("solution.vtk"), &space, &outcome.field, &rheology, &regions)?;
    }
    Ok(RunSummary {
        num_elements: space.num_elements(),
        num_dofs: space.n_dofs(),
        outcome,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
