mod common;

use common::{interpolate, random_smooth_field};
use rand::rngs::StdRng;
use rand::SeedableRng;
use vpstokes::fem::{assemble_operator, assemble_residual, energy, strain_invariants, DirichletSet};
use vpstokes::mesh::rectangle_mesh;
use vpstokes::{Diagonal, Law, MixedField, MixedSpace, RheologyParams, TangentTensor};

fn small_space(k: usize) -> MixedSpace {
    MixedSpace::new(rectangle_mesh(2.0, 1.0, 4, 3, Diagonal::Right).unwrap(), k).unwrap()
}

fn rheology(law: Law) -> RheologyParams {
    let mu_min = if law == Law::Ideal { 1e-2 } else { 0.0 };
    // yield strain rate 0.5 sits inside the range of the random fields
    RheologyParams::constant(law, 1.0, 1.0, mu_min).unwrap()
}

fn shifted(x: &MixedField, v: &MixedField, h: f64) -> MixedField {
    let mut y = x.clone();
    y.axpy(h, v);
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn energy_gradient_matches_residual() {
    let mut rng = StdRng::seed_from_u64(7);
    for k in [2, 3] {
        let space = small_space(k);
        let free = DirichletSet::new(&space);
        for law in [Law::Composite, Law::Ideal] {
            let rh = rheology(law);
            for _ in 0..5 {
                let u = random_smooth_field(&mut rng, &space, 1.0);
                let v = random_smooth_field(&mut rng, &space, 1.0);
                let h = 1e-5;
                let ep = energy(&space, &shifted(&u, &v, h), &rh, None).value;
                let em = energy(&space, &shifted(&u, &v, -h), &rh, None).value;
                let fd = (ep - em) / (2.0 * h);
                let r = assemble_residual(&space, &u, &rh, None, &free);
                let pairing = dot(&r[..space.n_u()], v.u());
                let phi = energy(&space, &u, &rh, None).value;
                assert!((fd - pairing).abs() <= 1e-6 * phi.abs().max(1.0), "{law}: fd {fd} pairing {pairing}");
            }
        }
    }
}

#[test]
fn composite_newton_operator_is_residual_derivative() {
    let mut rng = StdRng::seed_from_u64(11);
    let space = small_space(2);
    let free = DirichletSet::new(&space);
    let rh = rheology(Law::Composite);
    for _ in 0..3 {
        let u = random_smooth_field(&mut rng, &space, 1.0);
        let v = random_smooth_field(&mut rng, &space, 1.0);
        let h = 1e-6;
        let rp = assemble_residual(&space, &shifted(&u, &v, h), &rh, None, &free);
        let rm = assemble_residual(&space, &shifted(&u, &v, -h), &rh, None, &free);
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let a = assemble_operator(&space, &u, |p| rh.at(p.x).newton_tangent(&p.eps));
        let av = a.matvec(&v.coeffs);
        let err = common::rel_diff(&fd, &av);
        assert!(err <= 1e-5, "tangent mismatch {err}");
    }
}

#[test]
fn rigid_translation_is_in_the_kernel() {
    let space = small_space(3);
    let u = interpolate(&space, |_| [0.3, 0.2]);
    let a = assemble_operator(&space, &u, |_| TangentTensor::isotropic(0.0, 2.0));
    let t = interpolate(&space, |_| [1.0, -2.0]);
    let at = a.matvec(&t.coeffs);
    assert!(at.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn constant_viscosity_tangents_coincide() {
    // strain rates far below yield keep the ideal law on its viscous branch
    let space = small_space(2);
    let rh = RheologyParams::constant(Law::Ideal, 1e6, 3.0, 0.0).unwrap();
    let u = random_smooth_field(&mut StdRng::seed_from_u64(3), &space, 1.0);
    let stokes = assemble_operator(&space, &u, |_| TangentTensor::isotropic(0.0, 6.0));
    let picard = assemble_operator(&space, &u, |p| rh.at(p.x).picard_tangent(p.eps.second_invariant()));
    let newton = assemble_operator(&space, &u, |p| rh.at(p.x).newton_tangent(&p.eps));
    for m in [&picard, &newton] {
        assert_eq!(m.to_dense(), stokes.to_dense());
    }
}

#[test]
fn strain_invariant_of_simple_flows() {
    let space = small_space(2);
    let shear = interpolate(&space, |[_, y]| [y, 0.0]);
    assert!(strain_invariants(&space, &shear).iter().all(|e| (e - 0.5).abs() < 1e-13));
    let rotation = interpolate(&space, |[x, y]| [-y, x]);
    assert!(strain_invariants(&space, &rotation).iter().all(|e| e.abs() < 1e-13));
}

#[test]
fn energy_of_the_rest_state() {
    let space = small_space(2);
    let area = 2.0;
    let (ty, mr) = (0.7, 2.5);
    let zero = MixedField::zeros(&space);
    let ideal = RheologyParams::constant(Law::Ideal, ty, mr, 0.1).unwrap();
    let e = energy(&space, &zero, &ideal, None).value;
    assert!((e - area * ty * ty / (2.0 * mr)).abs() < 1e-13);
    let comp = RheologyParams::constant(Law::Composite, ty, mr, 0.0).unwrap();
    let e = energy(&space, &zero, &comp, None).value;
    assert!((e + area * ty * ty / mr * ty.ln()).abs() < 1e-13);
}

#[test]
fn assembly_is_independent_of_thread_count() {
    let space = MixedSpace::new(rectangle_mesh(4.0, 1.0, 48, 24, Diagonal::Right).unwrap(), 2).unwrap();
    let rh = rheology(Law::Composite);
    let free = DirichletSet::new(&space);
    let u = random_smooth_field(&mut StdRng::seed_from_u64(5), &space, 1.0);
    let build = || {
        let a = assemble_operator(&space, &u, |p| rh.at(p.x).newton_tangent(&p.eps));
        let r = assemble_residual(&space, &u, &rh, None, &free);
        let e = energy(&space, &u, &rh, None).value;
        (a, r, e)
    };
    let (a1, r1, e1) = build();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let (a3, r3, e3) = pool.install(build);
    assert_eq!(a1.values, a3.values);
    assert_eq!(r1, r3);
    assert!((e1 - e3).abs() <= 1e-14 * e1.abs());
}

#[test]
fn assembled_operators_are_symmetric() {
    let space = small_space(3);
    let mut rng = StdRng::seed_from_u64(13);
    let u = random_smooth_field(&mut rng, &space, 1.0);
    for law in [Law::Ideal, Law::Composite] {
        let rh = rheology(law);
        let tau: Vec<_> = (0..space.num_elements())
            .flat_map(|e| (0..space.quadrature.len()).map(move |q| (e, q)))
            .map(|(e, q)| {
                let x = space.qp_point(e, q);
                random_smooth_field_stress(x)
            })
            .collect();
        let nq = space.quadrature.len();
        let ops = [
            assemble_operator(&space, &u, |p| rh.at(p.x).picard_tangent(p.eps.second_invariant())),
            assemble_operator(&space, &u, |p| rh.at(p.x).newton_tangent(&p.eps)),
            assemble_operator(&space, &u, |p| rh.at(p.x).svn_tangent(&p.eps, &tau[p.elem * nq + p.qp])),
        ];
        for a in &ops {
            assert!(a.max_asymmetry() <= 1e-12 * a.norm_inf());
        }
    }
}

fn random_smooth_field_stress(x: [f64; 2]) -> vpstokes::SymTensor {
    vpstokes::SymTensor::new(x[0].sin(), -x[0].sin(), (x[0] * x[1]).cos())
}
