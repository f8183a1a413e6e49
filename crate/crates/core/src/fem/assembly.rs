//! Element integration of the saddle-point operator, residual, load and
//! energy.
//!
//! Element contributions are computed in parallel over fixed-size chunks and
//! scattered serially in element order, so results do not depend on the
//! thread count.

use rayon::prelude::*;

use crate::fem::bc::DirichletSet;
use crate::fem::{MixedField, MixedSpace, VectorField};
use crate::linsolve::CsrMatrix;
use crate::rheology::{RheologyParams, TangentTensor};
use crate::tensor::SymTensor;
use crate::Point;

const CHUNK: usize = 1024;

/// What a tangent provider sees at a quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct PointState {
    pub elem: usize,
    pub qp: usize,
    pub x: Point,
    /// Strain rate of the current state.
    pub eps: SymTensor,
}

/// Strain rates of the basis functions `φ_a e_c`, indexed `2·a + c`.
#[inline]
fn basis_strains(grads: &[[f64; 2]], out: &mut [SymTensor]) {
    for (a, g) in grads.iter().enumerate() {
        out[2 * a] = SymTensor::new(g[0], 0.0, 0.5 * g[1]);
        out[2 * a + 1] = SymTensor::new(0.0, g[1], 0.5 * g[0]);
    }
}

/// Strain rate of the velocity part of `coeffs` from physical gradients.
#[inline]
fn strain_from(space: &MixedSpace, e: usize, coeffs: &[f64], grads: &[[f64; 2]]) -> SymTensor {
    let mut g = [[0.0; 2]; 2];
    for (&n, d) in space.velocity.element_nodes(e).iter().zip(grads) {
        let (ux, uy) = (coeffs[2 * n], coeffs[2 * n + 1]);
        g[0][0] += ux * d[0];
        g[0][1] += ux * d[1];
        g[1][0] += uy * d[0];
        g[1][1] += uy * d[1];
    }
    SymTensor::sym_grad(g)
}

fn for_chunks<T, F, S>(n: usize, compute: F, mut scatter: S)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    S: FnMut(usize, T),
{
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let locals: Vec<T> = (start..end).into_par_iter().map(&compute).collect();
        for (off, l) in locals.into_iter().enumerate() {
            scatter(start + off, l);
        }
        start = end;
    }
}

/// Assembles `[A Bᵀ; B 0]` where `A_ij = ∫ T(ε̇(φ_j)) : ε̇(φ_i)` with the
/// tangent supplied pointwise and `B_qi = −∫ q ∇·φ_i`.
pub fn assemble_operator<F>(space: &MixedSpace, state: &MixedField, provider: F) -> CsrMatrix
where
    F: Fn(&PointState) -> TangentTensor + Sync,
{
    let nv = space.velocity.nloc();
    let np = space.pressure.nloc();
    let nd = 2 * nv + np;
    let mut matrix = CsrMatrix::zeros(&space.pattern);
    let compute = |e: usize| {
        let mut local = vec![0.0; nd * nd];
        let mut grads = vec![[0.0; 2]; nv];
        let mut strains = vec![SymTensor::ZERO; 2 * nv];
        let mut images = vec![SymTensor::ZERO; 2 * nv];
        for q in 0..space.quadrature.len() {
            let w = space.qp_weight(e, q);
            space.vel_grads(e, q, &mut grads);
            basis_strains(&grads, &mut strains);
            let eps = strain_from(space, e, &state.coeffs, &grads);
            let t = provider(&PointState { elem: e, qp: q, x: space.qp_point(e, q), eps });
            for (img, s) in images.iter_mut().zip(&strains) {
                *img = t.apply(s);
            }
            for i in 0..2 * nv {
                let row = &mut local[i * nd..i * nd + 2 * nv];
                for (j, img) in images.iter().enumerate() {
                    row[j] += w * strains[i].ddot(img);
                }
            }
            let pv = space.pres_values_at(q);
            for (b, &qv) in pv.iter().enumerate() {
                let pi = 2 * nv + b;
                for (a, g) in grads.iter().enumerate() {
                    for c in 0..2 {
                        let v = -w * qv * g[c];
                        local[pi * nd + 2 * a + c] += v;
                        local[(2 * a + c) * nd + pi] += v;
                    }
                }
            }
        }
        local
    };
    for_chunks(space.num_elements(), compute, |e, local| {
        let dofs = space.element_dofs(e);
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let v = local[i * nd + j];
                if v != 0.0 {
                    matrix.add(gi, gj, v);
                }
            }
        }
    });
    matrix
}

/// Load vector `∫ f · φ_i` (zero in pressure rows).
pub fn assemble_load(space: &MixedSpace, force: Option<&VectorField>) -> Vec<f64> {
    let mut load = vec![0.0; space.n_dofs()];
    let Some(f) = force else { return load };
    let nv = space.velocity.nloc();
    let compute = |e: usize| {
        let mut local = vec![0.0; 2 * nv];
        for q in 0..space.quadrature.len() {
            let w = space.qp_weight(e, q);
            let fx = f.eval(space.qp_point(e, q));
            for (a, &phi) in space.vel_values_at(q).iter().enumerate() {
                local[2 * a] += w * fx[0] * phi;
                local[2 * a + 1] += w * fx[1] * phi;
            }
        }
        local
    };
    for_chunks(space.num_elements(), compute, |e, local| {
        for (a, &n) in space.velocity.element_nodes(e).iter().enumerate() {
            load[2 * n] += local[2 * a];
            load[2 * n + 1] += local[2 * a + 1];
        }
    });
    load
}

/// Nonlinear residual `r_u = A(u)u + Bᵀp − F`, `r_p = Bu`, with
/// Dirichlet-constrained entries set to zero.
pub fn assemble_residual(
    space: &MixedSpace,
    state: &MixedField,
    rheology: &RheologyParams,
    force: Option<&VectorField>,
    constraints: &DirichletSet,
) -> Vec<f64> {
    let nv = space.velocity.nloc();
    let np = space.pressure.nloc();
    let compute = |e: usize| {
        let mut local = vec![0.0; 2 * nv + np];
        let mut grads = vec![[0.0; 2]; nv];
        let pnodes = space.pressure.element_nodes(e);
        let n_u = space.n_u();
        for q in 0..space.quadrature.len() {
            let w = space.qp_weight(e, q);
            space.vel_grads(e, q, &mut grads);
            let eps = strain_from(space, e, &state.coeffs, &grads);
            let x = space.qp_point(e, q);
            let sigma = rheology.at(x).picard_tangent(eps.second_invariant()).isotropic_part() * eps;
            let pv = space.pres_values_at(q);
            let p: f64 = pnodes.iter().zip(pv).map(|(&n, v)| state.coeffs[n_u + n] * v).sum();
            let fx = force.map_or([0.0, 0.0], |f| f.eval(x));
            let phis = space.vel_values_at(q);
            for (a, g) in grads.iter().enumerate() {
                local[2 * a] += w * (sigma.xx * g[0] + sigma.xy * g[1] - p * g[0] - fx[0] * phis[a]);
                local[2 * a + 1] += w * (sigma.xy * g[0] + sigma.yy * g[1] - p * g[1] - fx[1] * phis[a]);
            }
            let div = eps.trace();
            for (b, &qv) in pv.iter().enumerate() {
                local[2 * nv + b] -= w * qv * div;
            }
        }
        local
    };
    let mut r = vec![0.0; space.n_dofs()];
    for_chunks(space.num_elements(), compute, |e, local| {
        for (i, g) in space.element_dofs(e).into_iter().enumerate() {
            r[g] += local[i];
        }
    });
    constraints.zero(&mut r);
    r
}

/// Energy value together with the sum of absolute contributions, which
/// bounds the roundoff in `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub magnitude: f64,
}

/// `Φ(u) = ∫ φ(ε_II) + 2μ̲ ε_II² − ∫ f·u`.
pub fn energy(space: &MixedSpace, state: &MixedField, rheology: &RheologyParams, force: Option<&VectorField>) -> Energy {
    let nv = space.velocity.nloc();
    let per_elem: Vec<(f64, f64)> = (0..space.num_elements())
        .into_par_iter()
        .map(|e| {
            let mut grads = vec![[0.0; 2]; nv];
            let (mut value, mut magnitude) = (0.0, 0.0);
            let nodes = space.velocity.element_nodes(e);
            for q in 0..space.quadrature.len() {
                let w = space.qp_weight(e, q);
                space.vel_grads(e, q, &mut grads);
                let eps = strain_from(space, e, &state.coeffs, &grads);
                let x = space.qp_point(e, q);
                let local = rheology.at(x);
                let s = eps.second_invariant();
                let internal = local.phi(s) + 2.0 * local.mu_min * s * s;
                let mut work = 0.0;
                if let Some(f) = force {
                    let fx = f.eval(x);
                    let phis = space.vel_values_at(q);
                    let (mut ux, mut uy) = (0.0, 0.0);
                    for (&n, &v) in nodes.iter().zip(phis) {
                        ux += state.coeffs[2 * n] * v;
                        uy += state.coeffs[2 * n + 1] * v;
                    }
                    work = fx[0] * ux + fx[1] * uy;
                }
                value += w * (internal - work);
                magnitude += w * (internal.abs() + work.abs());
            }
            (value, magnitude)
        })
        .collect();
    let (value, magnitude) = per_elem.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Energy { value, magnitude }
}

/// Strain-rate tensors at every quadrature point, element-major.
pub fn strain_rates(space: &MixedSpace, state: &MixedField) -> Vec<SymTensor> {
    let nv = space.velocity.nloc();
    let nq = space.quadrature.len();
    let per_elem: Vec<Vec<SymTensor>> = (0..space.num_elements())
        .into_par_iter()
        .map(|e| {
            let mut grads = vec![[0.0; 2]; nv];
            (0..nq)
                .map(|q| {
                    space.vel_grads(e, q, &mut grads);
                    strain_from(space, e, &state.coeffs, &grads)
                })
                .collect()
        })
        .collect();
    per_elem.into_iter().flatten().collect()
}

/// `ε_II` at every quadrature point.
pub fn strain_invariants(space: &MixedSpace, state: &MixedField) -> Vec<f64> {
    strain_rates(space, state).iter().map(|e| e.second_invariant()).collect()
}

/// Area-weighted average of element means of quadrature samples at mesh
/// vertices.
pub fn project_to_vertices(space: &MixedSpace, samples: &[f64]) -> Vec<f64> {
    let nq = space.quadrature.len();
    assert_eq!(samples.len(), nq * space.num_elements());
    let mesh = &space.mesh;
    let mut sum = vec![0.0; mesh.num_vertices()];
    let mut weight = vec![0.0; mesh.num_vertices()];
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let s = &samples[e * nq..(e + 1) * nq];
        let mean: f64 = s.iter().zip(&space.quadrature.weights).map(|(v, w)| v * w).sum::<f64>() * 2.0;
        let area = 0.5 * space.geometry[e].det;
        for &v in tri {
            sum[v] += area * mean;
            weight[v] += area;
        }
    }
    sum.iter().zip(&weight).map(|(s, w)| s / w).collect()
}
