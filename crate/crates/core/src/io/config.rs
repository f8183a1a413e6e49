//! Run configuration: TOML file with `[problem]`, `[mesh]`, `[solver]` and
//! `[output]` sections, overlaid on per-problem defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mesh::Diagonal;
use crate::nonlinear::{InitialGuess, LineSearch, Method, SolverConfig};
use crate::problems::{ProblemKind, ProblemSpec};
use crate::rheology::Law;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub diagonal: Diagonal,
    /// Ratio between the coarsest and the finest cell; 1 gives a uniform mesh.
    pub grading: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub law: Law,
    pub method: Method,
    pub degree: usize,
    /// Defaults to `2k + 4` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    /// Defaults to none for Picard and energy descent otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_search: Option<LineSearch>,
    pub max_backtracks: usize,
    pub alpha_min: f64,
    pub initial_guess: InitialGuess,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub fields: bool,
    pub mesh: bool,
    pub convergence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub mesh: MeshConfig,
    pub solver: SolverSection,
    pub output: OutputConfig,
}

/// Flag-level overrides, applied after the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub problem: Option<ProblemKind>,
    pub law: Option<Law>,
    pub method: Option<Method>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub diagonal: Option<Diagonal>,
    pub grading: Option<f64>,
    pub degree: Option<usize>,
    pub quad_order: Option<usize>,
    pub rel_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub line_search: Option<LineSearch>,
    pub depth_dependent_yield: bool,
    /// Dimensional viscosity floor, Pa·s.
    pub mu_min: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(kind: ProblemKind) -> Self {
        let (nx, ny, grading) = match kind {
            ProblemKind::Example1 => (64, 16, 3.0),
            ProblemKind::Example2 => (46, 23, 4.0),
        };
        let solver = SolverConfig::default();
        Self {
            problem: ProblemSpec::defaults(kind),
            mesh: MeshConfig { nx, ny, diagonal: Diagonal::Right, grading },
            solver: SolverSection {
                law: Law::Composite,
                method: solver.method,
                degree: 2,
                quad_order: None,
                rel_tol: solver.rel_tol,
                abs_tol: solver.abs_tol,
                max_iters: solver.max_iters,
                line_search: None,
                max_backtracks: solver.max_backtracks,
                alpha_min: solver.alpha_min,
                initial_guess: solver.initial_guess,
            },
            output: OutputConfig { dir: PathBuf::from("out"), fields: true, mesh: true, convergence: true },
        }
    }

    /// Parses file text (possibly empty) and applies flag overrides.
    pub fn from_sources(text: Option<&str>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let file: toml::Table = match text {
            Some(t) => t.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?,
            None => toml::Table::new(),
        };
        let file_kind = match file.get("problem").and_then(|p| p.get("kind")) {
            Some(v) => Some(
                v.clone()
                    .try_into::<ProblemKind>()
                    .map_err(|e| ConfigError::Parse(format!("problem.kind: {e}")))?,
            ),
            None => None,
        };
        let kind = overrides.problem.or(file_kind).unwrap_or(ProblemKind::Example1);
        let mut base = toml::Table::try_from(Self::defaults(kind)).map_err(|e| ConfigError::Parse(e.to_string()))?;
        merge(&mut base, file, "")?;
        // the flag decides the problem when both are given
        if let Some(toml::Value::Table(p)) = base.get_mut("problem") {
            p.insert("kind".into(), toml::Value::String(kind.to_string()));
        }
        let mut cfg: RunConfig =
            toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => {
                Some(std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.to_path_buf(), source })?)
            }
            None => None,
        };
        Self::from_sources(text.as_deref(), overrides)
    }

    fn apply(&mut self, o: &Overrides) {
        let s = &mut self.solver;
        if let Some(v) = o.law {
            s.law = v;
        }
        if let Some(v) = o.method {
            s.method = v;
        }
        if let Some(v) = o.degree {
            s.degree = v;
        }
        if let Some(v) = o.quad_order {
            s.quad_order = Some(v);
        }
        if let Some(v) = o.rel_tol {
            s.rel_tol = v;
        }
        if let Some(v) = o.max_iters {
            s.max_iters = v;
        }
        if let Some(v) = o.line_search {
            s.line_search = Some(v);
        }
        let m = &mut self.mesh;
        if let Some(v) = o.nx {
            m.nx = v;
        }
        if let Some(v) = o.ny {
            m.ny = v;
        }
        if let Some(v) = o.diagonal {
            m.diagonal = v;
        }
        if let Some(v) = o.grading {
            m.grading = v;
        }
        if o.depth_dependent_yield {
            self.problem.depth_dependent_yield = true;
        }
        if let Some(v) = o.mu_min {
            self.problem.mu_min = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.problem.validate().map_err(|e| ConfigError::Invalid(format!("problem: {e}")))?;
        if self.mesh.nx == 0 || self.mesh.ny == 0 {
            return bad(format!("mesh.nx and mesh.ny must be positive, got {} x {}", self.mesh.nx, self.mesh.ny));
        }
        if !(self.mesh.grading >= 1.0 && self.mesh.grading.is_finite()) {
            return bad(format!("mesh.grading must be >= 1, got {}", self.mesh.grading));
        }
        if !(2..=4).contains(&self.solver.degree) {
            return bad(format!("solver.degree must be 2, 3 or 4, got {}", self.solver.degree));
        }
        if let Some(q) = self.solver.quad_order {
            if !(1..=crate::fem::space::MAX_QUAD_ORDER).contains(&q) {
                return bad(format!("solver.quad_order must lie in 1..=12, got {q}"));
            }
        }
        self.solver_config().validate().map_err(|e| ConfigError::Invalid(format!("solver: {e}")))?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            method: s.method,
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            max_iters: s.max_iters,
            line_search: s.line_search.unwrap_or(SolverConfig::default_line_search(s.method)),
            max_backtracks: s.max_backtracks,
            alpha_min: s.alpha_min,
            initial_guess: s.initial_guess,
        }
    }

    /// Effective configuration as TOML, re-readable by [`RunConfig::from_sources`].
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }
}

/// Recursively overlays `src` onto `dst`, rejecting keys that are absent
/// from the defaults.
fn merge(dst: &mut toml::Table, src: toml::Table, prefix: &str) -> Result<(), ConfigError> {
    for (key, value) in src {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match (dst.get_mut(&key), value) {
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) => merge(d, s, &path)?,
            (Some(toml::Value::Table(_)), _) => {
                return Err(ConfigError::Parse(format!("`{path}` must be a section")));
            }
            (_, v) => {
                let optional = matches!(path.as_str(), "solver.quad_order" | "solver.line_search" | "problem.interface_sharpness");
                if dst.contains_key(&key) || optional {
                    dst.insert(key, v);
                } else {
                    return Err(ConfigError::Parse(format!("unknown key `{path}`")));
                }
            }
        }
    }
    Ok(())
}
