//! Picard, standard Newton and stress-velocity Newton iterations with
//! backtracking line search.
//!
//! All three drivers share one loop: evaluate the residual, stop if it is
//! small enough, compute a search direction, backtrack on the chosen merit
//! function, record the iteration. The stress-velocity variant additionally
//! carries a quadrature-point stress `τ` that starts at zero and is advanced
//! with the same step length as the velocity.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::fem::{
    assemble_load, assemble_operator, assemble_residual, energy, strain_rates, DirichletSet, MixedField,
    MixedSpace, StressField, VectorField,
};
use crate::linsolve::{CsrMatrix, DirectSolver, SolveError};
use crate::rheology::{RheologyParams, TangentTensor};
use crate::tensor::SymTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Picard,
    Newton,
    #[serde(rename = "svnewton")]
    SvNewton,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Picard => "picard",
            Method::Newton => "newton",
            Method::SvNewton => "svnewton",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineSearch {
    #[serde(rename = "energy")]
    EnergyDescent,
    #[serde(rename = "residual")]
    ResidualDescent,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for LineSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineSearch::EnergyDescent => "energy",
            LineSearch::ResidualDescent => "residual",
            LineSearch::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    /// Zero field with the boundary values written in.
    Zero,
    /// One Picard solve from the zero field (viscosity at its `ε_II = 0` value).
    LinearStokes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    pub line_search: LineSearch,
    pub max_backtracks: usize,
    pub alpha_min: f64,
    pub initial_guess: InitialGuess,
}

impl SolverConfig {
    /// Defaults for `method`; Picard runs without a line search.
    pub fn new(method: Method) -> Self {
        Self {
            method,
            rel_tol: 1e-6,
            abs_tol: 1e-14,
            max_iters: 100,
            line_search: Self::default_line_search(method),
            max_backtracks: 30,
            alpha_min: 2f64.powi(-30),
            initial_guess: InitialGuess::LinearStokes,
        }
    }

    pub fn default_line_search(method: Method) -> LineSearch {
        match method {
            Method::Picard => LineSearch::None,
            Method::Newton | Method::SvNewton => LineSearch::EnergyDescent,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0) {
            return Err(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0) {
            return Err(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return Err(format!("alpha_min must lie in (0, 1], got {}", self.alpha_min));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(Method::SvNewton)
    }
}

/// One row of the convergence history. Row 0 describes the initial guess.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual: f64,
    pub rel_residual: f64,
    pub energy: f64,
    pub step_length: f64,
    pub backtracks: usize,
    /// Seconds since the start of the solve.
    pub wall_time: f64,
    /// Relative mismatch between the carried stress and the constitutive
    /// stress (stress-velocity Newton only).
    pub stress_residual: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<IterationRecord>,
}

impl ConvergenceRecord {
    /// Number of nonlinear iterations taken (rows after the initial one).
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.rows.last()
    }

    pub fn final_rel_residual(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.rel_residual)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "maximum iterations reached",
            Termination::LineSearchFailure => "line search failure",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("linear solve failed: {0}")]
    Linear(#[from] SolveError),
}

/// Discrete nonlinear problem: space, rheology, forcing and boundary data.
#[derive(Clone, Copy)]
pub struct NonlinearProblem<'a> {
    pub space: &'a MixedSpace,
    pub rheology: &'a RheologyParams,
    pub force: Option<&'a VectorField>,
    pub bc: &'a DirichletSet,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub field: MixedField,
    /// Carried stress for stress-velocity Newton, constitutive stress otherwise.
    pub stress: StressField,
    pub record: ConvergenceRecord,
    pub termination: Termination,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Line-search outcome: step length and number of halvings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub alpha: f64,
    pub backtracks: usize,
    pub accepted: bool,
}

/// Driver state shared across iterations; keeps the symbolic factorization.
pub struct Solver<'a> {
    pub problem: NonlinearProblem<'a>,
    pub config: SolverConfig,
    linear: DirectSolver,
    homogeneous: DirichletSet,
}

impl<'a> Solver<'a> {
    pub fn new(problem: NonlinearProblem<'a>, config: SolverConfig) -> Result<Self, SolverError> {
        config.validate().map_err(SolverError::Config)?;
        Ok(Self { homogeneous: problem.bc.homogeneous(), problem, config, linear: DirectSolver::new() })
    }

    fn space(&self) -> &'a MixedSpace {
        self.problem.space
    }

    /// Assembles the tangent of `method` at `state` (unconstrained).
    pub fn tangent_matrix(&self, method: Method, state: &MixedField, tau: Option<&StressField>) -> CsrMatrix {
        let rh = self.problem.rheology;
        match method {
            Method::Picard => {
                assemble_operator(self.space(), state, |p| rh.at(p.x).picard_tangent(p.eps.second_invariant()))
            }
            Method::Newton => assemble_operator(self.space(), state, |p| rh.at(p.x).newton_tangent(&p.eps)),
            Method::SvNewton => {
                let tau = tau.expect("stress-velocity tangent needs a stress field");
                assemble_operator(self.space(), state, |p| rh.at(p.x).svn_tangent(&p.eps, &tau.get(p.elem, p.qp)))
            }
        }
    }

    /// Assembles with an arbitrary pointwise tangent.
    pub fn custom_matrix<F>(&self, state: &MixedField, provider: F) -> CsrMatrix
    where
        F: Fn(&crate::fem::PointState) -> TangentTensor + Sync,
    {
        assemble_operator(self.space(), state, provider)
    }

    pub fn residual(&self, state: &MixedField) -> Vec<f64> {
        let p = &self.problem;
        assemble_residual(p.space, state, p.rheology, p.force, p.bc)
    }

    pub fn energy(&self, state: &MixedField) -> crate::fem::Energy {
        let p = &self.problem;
        energy(p.space, state, p.rheology, p.force)
    }

    /// Solves the Picard system at `state` for the new `(u, p)` directly.
    pub fn picard_step(&mut self, state: &MixedField) -> Result<MixedField, SolverError> {
        let mut a = self.tangent_matrix(Method::Picard, state, None);
        let mut rhs = assemble_load(self.space(), self.problem.force);
        self.problem.bc.apply(&mut a, &mut rhs);
        let x = self.linear.solve(&a, &rhs)?;
        Ok(MixedField::from_coeffs(self.space(), x))
    }

    fn solve_update(&mut self, mut a: CsrMatrix, residual: &[f64]) -> Result<MixedField, SolverError> {
        let mut rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        self.homogeneous.apply(&mut a, &mut rhs);
        let x = self.linear.solve(&a, &rhs)?;
        Ok(MixedField::from_coeffs(self.space(), x))
    }

    /// Standard Newton update `(ũ, p̃)` at `state`.
    pub fn newton_step(&mut self, state: &MixedField, residual: &[f64]) -> Result<MixedField, SolverError> {
        let a = self.tangent_matrix(Method::Newton, state, None);
        self.solve_update(a, residual)
    }

    /// Stress-velocity Newton update `(ũ, p̃, τ̃)` at `(state, τ)`.
    pub fn svn_step(
        &mut self,
        state: &MixedField,
        tau: &StressField,
        residual: &[f64],
    ) -> Result<(MixedField, StressField), SolverError> {
        let a = self.tangent_matrix(Method::SvNewton, state, Some(tau));
        let update = self.solve_update(a, residual)?;
        let tau_update = self.stress_update(state, tau, &update);
        Ok((update, tau_update))
    }

    /// `τ̃` at every quadrature point from the linearized stress relation.
    pub fn stress_update(&self, state: &MixedField, tau: &StressField, update: &MixedField) -> StressField {
        let space = self.space();
        let eps = strain_rates(space, state);
        let deps = strain_rates(space, update);
        let nq = space.quadrature.len();
        let mut out = StressField::zeros(space);
        for e in 0..space.num_elements() {
            for q in 0..nq {
                let i = e * nq + q;
                let su = self.problem.rheology.at(space.qp_point(e, q)).stress_update(&eps[i], &tau.get(e, q));
                out.samples[i] = su.apply(&deps[i]);
            }
        }
        out
    }

    /// Constitutive stress `2 μ(ε_II) ε̇` without the floor, at every
    /// quadrature point.
    pub fn constitutive_stress(&self, state: &MixedField) -> StressField {
        let space = self.space();
        let eps = strain_rates(space, state);
        let nq = space.quadrature.len();
        let mut out = StressField::zeros(space);
        for (i, e) in eps.iter().enumerate() {
            out.samples[i] = self.problem.rheology.at(space.qp_point(i / nq, i % nq)).stress(e);
        }
        out
    }

    /// `‖τ − τ(u)‖ / ‖τ(u)‖` in the quadrature-weighted L2 sense.
    pub fn stress_residual(&self, state: &MixedField, tau: &StressField) -> f64 {
        let space = self.space();
        let sigma = self.constitutive_stress(state);
        let nq = space.quadrature.len();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, (t, s)) in tau.samples.iter().zip(&sigma.samples).enumerate() {
            let w = space.qp_weight(i / nq, i % nq);
            let d: SymTensor = *t - *s;
            num += w * d.ddot(&d);
            den += w * s.ddot(s);
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Initial iterate according to the configuration.
    pub fn initial_guess(&mut self) -> Result<MixedField, SolverError> {
        let mut zero = MixedField::zeros(self.space());
        match self.config.initial_guess {
            InitialGuess::Zero => {
                self.problem.bc.lift(&mut zero.coeffs);
                Ok(zero)
            }
            InitialGuess::LinearStokes => self.picard_step(&zero),
        }
    }

    /// Halving backtracking on the configured merit function.
    fn line_search(
        &self,
        state: &MixedField,
        update: &MixedField,
        current_energy: f64,
        current_residual: f64,
    ) -> (Step, MixedField) {
        let mut alpha = 1.0;
        let mut backtracks = 0;
        loop {
            let mut trial = state.clone();
            trial.axpy(alpha, update);
            let accepted = trial.is_finite()
                && match self.config.line_search {
                    LineSearch::None => true,
                    LineSearch::EnergyDescent => {
                        let e = self.energy(&trial);
                        e.value <= current_energy + 64.0 * f64::EPSILON * e.magnitude
                    }
                    LineSearch::ResidualDescent => norm(&self.residual(&trial)) < current_residual,
                };
            if accepted {
                return (Step { alpha, backtracks, accepted: true }, trial);
            }
            if backtracks >= self.config.max_backtracks || alpha * 0.5 < self.config.alpha_min {
                return (Step { alpha, backtracks, accepted: false }, state.clone());
            }
            alpha *= 0.5;
            backtracks += 1;
        }
    }

    /// Runs the configured iteration from the configured initial guess.
    pub fn solve(&mut self) -> Result<SolveOutcome, SolverError> {
        self.solve_with_observer(|_| {})
    }

    pub fn solve_with_observer(
        &mut self,
        mut observer: impl FnMut(&IterationRecord),
    ) -> Result<SolveOutcome, SolverError> {
        let start = Instant::now();
        let state = self.initial_guess()?;
        self.iterate_from(state, start, &mut observer)
    }

    /// Runs the iteration from a given state (which must satisfy the
    /// Dirichlet data).
    pub fn iterate_from(
        &mut self,
        mut state: MixedField,
        start: Instant,
        observer: &mut dyn FnMut(&IterationRecord),
    ) -> Result<SolveOutcome, SolverError> {
        let method = self.config.method;
        let mut tau = StressField::zeros(self.space());
        let mut record = ConvergenceRecord::default();
        let mut residual = self.residual(&state);
        let mut res_norm = norm(&residual);
        let res0 = res_norm;
        let rel = |r: f64| if res0 == 0.0 { 0.0 } else { r / res0 };
        let mut current_energy = self.energy(&state).value;
        let stress_res = |s: &Self, st: &MixedField, t: &StressField| match method {
            Method::SvNewton => Some(s.stress_residual(st, t)),
            _ => None,
        };
        let row = IterationRecord {
            iter: 0,
            residual: res_norm,
            rel_residual: rel(res_norm),
            energy: current_energy,
            step_length: 1.0,
            backtracks: 0,
            wall_time: start.elapsed().as_secs_f64(),
            stress_residual: stress_res(self, &state, &tau),
        };
        observer(&row);
        record.rows.push(row);
        let termination = loop {
            let momentum_ok = rel(res_norm) <= self.config.rel_tol || res_norm <= self.config.abs_tol;
            // τ starts at zero with no data behind it, so the stress
            // consistency test applies only once it has been updated
            let stress_ok = record.rows.len() == 1
                || record.last().and_then(|r| r.stress_residual).is_none_or(|s| s <= self.config.rel_tol);
            let converged = momentum_ok && stress_ok;
            if converged {
                break Termination::Converged;
            }
            let iter = record.rows.len();
            if iter > self.config.max_iters {
                break Termination::MaxIterations;
            }
            let (update, tau_update) = match method {
                Method::Picard => {
                    let next = self.picard_step(&state)?;
                    let mut d = next;
                    d.axpy(-1.0, &state);
                    (d, None)
                }
                Method::Newton => (self.newton_step(&state, &residual)?, None),
                Method::SvNewton => {
                    let (u, t) = self.svn_step(&state, &tau, &residual)?;
                    (u, Some(t))
                }
            };
            if update.coeffs.iter().all(|&v| v == 0.0) {
                // nothing left to do; the residual is at roundoff level
                break Termination::Converged;
            }
            let (step, next) = self.line_search(&state, &update, current_energy, res_norm);
            if !step.accepted {
                break Termination::LineSearchFailure;
            }
            state = next;
            if let Some(t) = &tau_update {
                tau.axpy(step.alpha, t);
            }
            residual = self.residual(&state);
            res_norm = norm(&residual);
            current_energy = self.energy(&state).value;
            let row = IterationRecord {
                iter,
                residual: res_norm,
                rel_residual: rel(res_norm),
                energy: current_energy,
                step_length: step.alpha,
                backtracks: step.backtracks,
                wall_time: start.elapsed().as_secs_f64(),
                stress_residual: stress_res(self, &state, &tau),
            };
            observer(&row);
            record.rows.push(row);
        };
        let stress = match method {
            Method::SvNewton => tau,
            _ => self.constitutive_stress(&state),
        };
        Ok(SolveOutcome { field: state, stress, record, termination })
    }
}

/// Convenience wrapper: builds a solver and runs it.
pub fn solve(problem: NonlinearProblem<'_>, config: SolverConfig) -> Result<SolveOutcome, SolverError> {
    Solver::new(problem, config)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{rectangle_mesh, Diagonal, Side};
    use crate::rheology::Law;

    fn setup(law: Law, tau_y: f64) -> (MixedSpace, RheologyParams, DirichletSet) {
        let space = MixedSpace::new(rectangle_mesh(2.0, 1.0, 6, 3, Diagonal::Right).unwrap(), 2).unwrap();
        let mu_min = if law == Law::Ideal { 1e-3 } else { 0.0 };
        let rh = RheologyParams::constant(law, tau_y, 1.0, mu_min).unwrap();
        let mut bc = DirichletSet::new(&space);
        bc.add_normal(&space, Side::Left, -1.0);
        bc.add_normal(&space, Side::Right, -1.0);
        bc.add_normal(&space, Side::Bottom, 0.0);
        (space, rh, bc)
    }

    #[test]
    fn linear_problem_converges_in_one_iteration() {
        let (space, rh, bc) = setup(Law::Ideal, 1e30);
        let problem = NonlinearProblem { space: &space, rheology: &rh, force: None, bc: &bc };
        for method in [Method::Picard, Method::Newton, Method::SvNewton] {
            let mut cfg = SolverConfig::new(method);
            cfg.initial_guess = InitialGuess::Zero;
            let out = solve(problem, cfg).unwrap();
            assert_eq!(out.termination, Termination::Converged, "{method}");
            assert_eq!(out.record.iterations(), 1, "{method}");
        }
    }

    #[test]
    fn converged_start_returns_immediately() {
        let (space, rh, bc) = setup(Law::Composite, 1e30);
        let problem = NonlinearProblem { space: &space, rheology: &rh, force: None, bc: &bc };
        let mut cfg = SolverConfig::new(Method::Newton);
        cfg.rel_tol = 1e-3;
        cfg.abs_tol = 1e-6;
        let out = solve(problem, cfg).unwrap();
        assert_eq!(out.record.iterations(), 0);
        assert_eq!(out.record.rows.len(), 1);
        assert_eq!(out.record.rows[0].step_length, 1.0);
    }

    #[test]
    fn picard_fixed_point_is_stable() {
        let (space, rh, bc) = setup(Law::Composite, 2.0);
        let problem = NonlinearProblem { space: &space, rheology: &rh, force: None, bc: &bc };
        let mut cfg = SolverConfig::new(Method::Newton);
        cfg.rel_tol = 1e-12;
        let out = solve(problem, cfg).unwrap();
        assert!(out.converged());
        let mut s = Solver::new(problem, SolverConfig::new(Method::Picard)).unwrap();
        let again = s.picard_step(&out.field).unwrap();
        let diff: f64 = norm(&again.coeffs.iter().zip(&out.field.coeffs).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(diff <= 1e-8 * norm(&out.field.coeffs), "diff {diff}");
    }

    #[test]
    fn nonlinear_methods_converge() {
        let (space, rh, bc) = setup(Law::Composite, 1.0);
        let problem = NonlinearProblem { space: &space, rheology: &rh, force: None, bc: &bc };
        for method in [Method::Newton, Method::SvNewton] {
            let out = solve(problem, SolverConfig::new(method)).unwrap();
            assert!(out.converged(), "{method}: {:?}", out.record.rows.last());
            let energies: Vec<f64> = out.record.rows.iter().map(|r| r.energy).collect();
            for w in energies.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
            }
        }
    }
}
