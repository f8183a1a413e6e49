#![allow(dead_code)]

use rand::Rng;
use vpstokes::fem::{strain_invariants, DirichletSet};
use vpstokes::io::run::build_space;
use vpstokes::io::RunConfig;
use vpstokes::nonlinear::{NonlinearProblem, SolveOutcome, Solver};
use vpstokes::problems::{ProblemKind, ScaledProblem};
use vpstokes::{Law, Method, MixedField, MixedSpace, RheologyParams};

/// Interpolates a velocity function at the velocity nodes; pressure is zero.
pub fn interpolate(space: &MixedSpace, f: impl Fn([f64; 2]) -> [f64; 2]) -> MixedField {
    let mut x = MixedField::zeros(space);
    for (n, &p) in space.velocity.node_coords.iter().enumerate() {
        let v = f(p);
        x.coeffs[space.vel_dof(n, 0)] = v[0];
        x.coeffs[space.vel_dof(n, 1)] = v[1];
    }
    x
}

/// A few random trigonometric modes with amplitude `amp`.
pub fn random_smooth_field(rng: &mut impl Rng, space: &MixedSpace, amp: f64) -> MixedField {
    let modes: Vec<[f64; 6]> = (0..4)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..6.3),
                rng.random_range(0.0..6.3),
            ]
        })
        .collect();
    interpolate(space, |[x, y]| {
        let mut v = [0.0; 2];
        for m in &modes {
            let s = (m[2] * x + m[4]).sin() * (m[3] * y + m[5]).cos();
            v[0] += amp * m[0] * s;
            v[1] += amp * m[1] * (m[3] * x + m[5]).cos() * (m[2] * y + m[4]).sin();
        }
        v
    })
}

/// Everything needed to run one benchmark configuration.
pub struct Case {
    pub config: RunConfig,
    pub problem: ScaledProblem,
    pub space: MixedSpace,
    pub rheology: RheologyParams,
    pub bc: DirichletSet,
}

impl Case {
    pub fn new(config: RunConfig) -> Self {
        let problem = config.problem.nondimensionalize().unwrap();
        let space = build_space(&config, &problem).unwrap();
        let rheology = problem.rheology(config.solver.law).unwrap();
        let bc = problem.boundary_conditions(&space);
        Self { config, problem, space, rheology, bc }
    }

    pub fn benchmark(kind: ProblemKind, law: Law, nx: usize, ny: usize) -> Self {
        let mut c = RunConfig::defaults(kind);
        c.solver.law = law;
        c.mesh.nx = nx;
        c.mesh.ny = ny;
        Self::new(c)
    }

    pub fn nonlinear(&self) -> NonlinearProblem<'_> {
        NonlinearProblem { space: &self.space, rheology: &self.rheology, force: None, bc: &self.bc }
    }

    pub fn solver(&self, method: Method) -> Solver<'_> {
        let mut cfg = self.config.solver_config();
        cfg.method = method;
        cfg.line_search = self.config.solver.line_search.unwrap_or(vpstokes::SolverConfig::default_line_search(method));
        Solver::new(self.nonlinear(), cfg).unwrap()
    }

    pub fn solve(&self, method: Method) -> SolveOutcome {
        self.solver(method).solve().unwrap()
    }

    /// Largest ratio `τ_II / τ_y` of the constitutive stress over all
    /// quadrature points.
    pub fn max_yield_ratio(&self, field: &MixedField) -> f64 {
        let nq = self.space.quadrature.len();
        strain_invariants(&self.space, field)
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let x = self.space.qp_point(i / nq, i % nq);
                let l = self.rheology.at(x);
                2.0 * l.yield_limited_viscosity(e) * e / l.tau_y
            })
            .fold(0.0, f64::max)
    }

    pub fn max_eii(&self, field: &MixedField) -> f64 {
        strain_invariants(&self.space, field).into_iter().fold(0.0, f64::max)
    }
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

pub mod manufactured {
    use std::f64::consts::PI;

    use vpstokes::fem::{DirichletSet, VectorField};
    use vpstokes::mesh::rectangle_mesh;
    use vpstokes::nonlinear::{solve, InitialGuess, NonlinearProblem};
    use vpstokes::{Diagonal, Law, Method, MixedSpace, RheologyParams, Side, SolverConfig};

    /// Velocity from the stream function `sin²(πx) sin²(πy)`.
    pub fn velocity([x, y]: [f64; 2]) -> [f64; 2] {
        let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
        [PI * sx * sx * (2.0 * PI * y).sin(), -PI * (2.0 * PI * x).sin() * sy * sy]
    }

    pub fn pressure([x, y]: [f64; 2]) -> f64 {
        (PI * x).cos() * (PI * y).cos()
    }

    /// `−Δu + ∇p` for unit viscosity.
    pub fn force([x, y]: [f64; 2]) -> [f64; 2] {
        let c = 2.0 * PI.powi(3);
        let lap = [
            c * (2.0 * PI * y).sin() * (2.0 * (2.0 * PI * x).cos() - 1.0),
            -c * (2.0 * PI * x).sin() * (2.0 * (2.0 * PI * y).cos() - 1.0),
        ];
        let grad_p = [-PI * (PI * x).sin() * (PI * y).cos(), -PI * (PI * x).cos() * (PI * y).sin()];
        [-lap[0] + grad_p[0], -lap[1] + grad_p[1]]
    }

    /// L2 errors of velocity and mean-adjusted pressure on an `n × n` mesh.
    pub fn errors(k: usize, n: usize) -> (f64, f64) {
        let mesh = rectangle_mesh(1.0, 1.0, n, n, Diagonal::Right).unwrap();
        let space = MixedSpace::new(mesh, k).unwrap();
        // viscous branch everywhere: τ_y far above any stress in the flow
        let rh = RheologyParams::constant(Law::Ideal, 1e12, 1.0, 0.0).unwrap();
        let mut bc = DirichletSet::new(&space);
        for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
            bc.add_velocity_fn(&space, side, velocity);
        }
        bc.pin_pressure(&space, 0, pressure(space.mesh.vertices[0]));
        let f = VectorField::new(force);
        let mut cfg = SolverConfig::new(Method::Picard);
        cfg.rel_tol = 1e-10;
        // from rest a single Picard solve is exact, so the residual drops to roundoff
        cfg.initial_guess = InitialGuess::Zero;
        let out = solve(NonlinearProblem { space: &space, rheology: &rh, force: Some(&f), bc: &bc }, cfg).unwrap();
        assert!(out.converged());
        let x = &out.field;
        let n_u = space.n_u();
        let (mut eu, mut mean_diff, mut area) = (0.0, 0.0, 0.0);
        let mut pdiff = Vec::new();
        for e in 0..space.num_elements() {
            let vn = space.velocity.element_nodes(e);
            let pn = space.pressure.element_nodes(e);
            for q in 0..space.quadrature.len() {
                let w = space.qp_weight(e, q);
                let pt = space.qp_point(e, q);
                let mut uh = [0.0; 2];
                for (&node, v) in vn.iter().zip(space.vel_values_at(q)) {
                    uh[0] += v * x.coeffs[space.vel_dof(node, 0)];
                    uh[1] += v * x.coeffs[space.vel_dof(node, 1)];
                }
                let ph: f64 = pn.iter().zip(space.pres_values_at(q)).map(|(&node, v)| v * x.coeffs[n_u + node]).sum();
                let ue = velocity(pt);
                eu += w * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
                let d = ph - pressure(pt);
                mean_diff += w * d;
                area += w;
                pdiff.push((w, d));
            }
        }
        let m = mean_diff / area;
        let ep: f64 = pdiff.iter().map(|(w, d)| w * (d - m) * (d - m)).sum();
        (eu.sqrt(), ep.sqrt())
    }

    /// Observed orders between consecutive meshes.
    pub fn rates(errors: &[f64]) -> Vec<f64> {
        errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }
}
