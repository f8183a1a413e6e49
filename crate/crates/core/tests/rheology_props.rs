use proptest::prelude::*;
use vpstokes::rheology::{picard_tangent, viscosity, LocalRheology, DEFAULT_EII_FLOOR};
use vpstokes::{Law, RheologyParams, SymTensor};

fn local(law: Law, tau_y: f64, mu_r: f64, mu_min: f64) -> LocalRheology {
    LocalRheology { law, tau_y, mu_r, mu_min, eii_floor: DEFAULT_EII_FLOOR }
}

fn law() -> impl Strategy<Value = Law> {
    prop_oneof![Just(Law::Ideal), Just(Law::Composite)]
}

fn unit_tensor() -> impl Strategy<Value = SymTensor> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("nonzero", |(a, b, c)| a * a + b * b + c * c > 1e-6)
        .prop_map(|(a, b, c)| {
            let t = SymTensor::new(a, b, c);
            (1.0 / t.norm()) * t
        })
}

// strain rates spread over several decades on both sides of the yield point
fn log_eii() -> impl Strategy<Value = f64> {
    (-6.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

fn params() -> impl Strategy<Value = (f64, f64)> {
    ((-1.0f64..2.0).prop_map(|e| 10f64.powf(e)), (-1.0f64..3.0).prop_map(|e| 10f64.powf(e)))
}

proptest! {
    #[test]
    fn composite_viscosity_is_below_both_arguments(eii in log_eii(), (ty, mr) in params()) {
        let l = local(Law::Composite, ty, mr, 0.0);
        let mu = l.viscosity(eii);
        prop_assert!(mu <= mr.min(ty / (2.0 * eii)) * (1.0 + 1e-15));
    }

    #[test]
    fn phi_is_convex_and_differentiable(law in law(), s in log_eii(), (ty, mr) in params()) {
        let l = local(law, ty, mr, 0.0);
        prop_assert!(l.phi_second(s) >= 0.0);
        let h = 1e-6 * s;
        let kink = ty / (2.0 * mr);
        prop_assume!(law == Law::Composite || (s - kink).abs() > 10.0 * h);
        let fd = (l.phi(s + h) - l.phi(s - h)) / (2.0 * h);
        let exact = l.phi_prime(s);
        // central differences carry roundoff ~ eps * (size of the terms of phi) / h
        let terms = l.phi(s).abs() + ty * ty / mr + 2.0 * ty * s;
        let roundoff = 4.0 * f64::EPSILON * terms / h;
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-300) + roundoff, "fd {fd} exact {exact}");
    }

    #[test]
    fn stress_is_bounded_by_yield(law in law(), eii in log_eii(), (ty, mr) in params(), floor in 0.0f64..1e-2) {
        let mu_min = if law == Law::Ideal { floor } else { 0.0 };
        let l = local(law, ty, mr, mu_min);
        prop_assert!(2.0 * l.viscosity(eii) * eii <= (ty + 2.0 * mu_min * eii) * (1.0 + 1e-14));
    }

    #[test]
    fn newton_tangent_is_positive_semidefinite(
        law in law(),
        dir in unit_tensor(),
        mag in log_eii(),
        (ty, mr) in params(),
        probes in prop::collection::vec(unit_tensor(), 16),
    ) {
        let l = local(law, ty, mr, 0.0);
        let eps = mag * dir;
        let psi = l.psi(eps.second_invariant());
        prop_assert!((0.0..=1.0).contains(&psi));
        let t = l.newton_tangent(&eps);
        for v in probes.iter().chain(std::iter::once(&dir)) {
            prop_assert!(t.bilinear(v, v) >= -1e-12 * t.isotropic_part().max(1.0));
        }
    }

    #[test]
    fn svn_deflation_is_bounded_by_isotropic_part(
        law in law(),
        dir in unit_tensor(),
        mag in log_eii(),
        tdir in unit_tensor(),
        tmag in (-3.0f64..3.0).prop_map(|e| 10f64.powf(e)),
        (ty, mr) in params(),
        probes in prop::collection::vec(unit_tensor(), 16),
    ) {
        let l = local(law, ty, mr, 0.0);
        let eps = mag * dir;
        let tau = tmag * tdir;
        let t = l.svn_tangent(&eps, &tau);
        let iso = t.isotropic_part();
        for v in &probes {
            // w : T v minus the isotropic part is the deflation contribution
            let deflation = (t.bilinear(v, v) - iso * v.ddot(v)).abs();
            prop_assert!(deflation <= iso * v.ddot(v) * (1.0 + 1e-12), "{deflation} > {iso}");
        }
    }

    #[test]
    fn picard_equals_newton_without_deflation(law in law(), dir in unit_tensor(), mag in log_eii(), (ty, mr) in params()) {
        let mu_min = if law == Law::Ideal { 1e-3 } else { 0.0 };
        let p = RheologyParams::constant(law, ty, mr, mu_min).unwrap();
        let eps = mag * dir;
        let x = [0.3, 0.7];
        let mut n = p.at(x).newton_tangent(&eps);
        n.deflation_scale = 0.0;
        let pic = picard_tangent(&p, eps.second_invariant(), x);
        prop_assert_eq!(n.floor_coeff, pic.floor_coeff);
        prop_assert_eq!(n.scalar_coeff, pic.scalar_coeff);
        for v in [SymTensor::new(1.0, 0.0, 0.0), SymTensor::new(0.0, 1.0, 0.0), SymTensor::new(0.0, 0.0, 1.0), dir] {
            prop_assert_eq!(n.apply(&v), pic.apply(&v));
        }
        prop_assert_eq!(viscosity(&p, eps.second_invariant(), x), pic.isotropic_part() / 2.0);
    }
}
