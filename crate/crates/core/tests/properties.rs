mod common;

use common::{c, gauss};
use gpvortex::connection::{connection, ConnectionOptions, Exact, Rational};
use gpvortex::dispersion::{dispersion_poly, free_kappa, roots};
use gpvortex::ode_engine::wronskian_states;
use gpvortex::oracle::{time_step, DiscreteOperator};
use gpvortex::quadrature::{lambda_mesh, MeshOptions};
use gpvortex::{FieldPair, FreePotential, Limit, RadialGrid, StateVector, THRESHOLD};
use num_complex::Complex64;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c(a, b))
}

fn state() -> impl Strategy<Value = StateVector> {
    (cplx(), cplx(), cplx(), cplx()).prop_map(|(a, b, d, e)| StateVector::new(a, b, d, e))
}

fn exact() -> impl Strategy<Value = Exact> {
    (-20i128..20, 1i128..12, prop::sample::select(vec![1u64, 2, 17, 34]), any::<bool>())
        .prop_map(|(n, d, m, im)| Exact::surd(Rational::new(n, d), m, im))
}

proptest! {
    #[test]
    fn wronskian_is_antisymmetric_and_bilinear(f in state(), g in state(), h in state(), a in cplx()) {
        let w = wronskian_states(&f, &g);
        prop_assert!((w + wronskian_states(&g, &f)).norm() < 1e-12 * (1.0 + w.norm()));
        let lhs = wronskian_states(&f, &(g + a * h));
        let rhs = w + a * wronskian_states(&f, &h);
        prop_assert!((lhs - rhs).norm() < 1e-11 * (1.0 + lhs.norm()));
    }

    #[test]
    fn interior_roots_solve_the_dispersion_relation(x in -6.0..6.0f64, y in 1e-3..4.0f64) {
        let z = c(x, y);
        let pt = roots(z).unwrap();
        for k in pt.k {
            prop_assert!(dispersion_poly(k, z).norm() <= 1e-12 * (1.0 + z.norm_sqr()));
        }
        prop_assert!(pt.k1().im > 0.0 && pt.k2().im > 0.0);
        prop_assert!((pt.k[2] + pt.k[0]).norm() == 0.0);
    }

    #[test]
    fn exact_arithmetic_matches_floating_point(a in exact(), b in exact(), d in exact()) {
        let (x, y, w) = (a.to_complex(), b.to_complex(), d.to_complex());
        prop_assert!(((&a + &b).to_complex() - (x + y)).norm() < 1e-9 * (1.0 + (x + y).norm()));
        let prod = &(&a * &b) * &d;
        prop_assert!((prod.to_complex() - x * y * w).norm() < 1e-9 * (1.0 + (x * y * w).norm()));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn meshes_integrate_threshold_weights(nodes in 200usize..1500, knee in 1.0..4.0f64, frac in 0.1..0.4f64) {
        let mesh = lambda_mesh(&MeshOptions { nodes, knee, near_fraction: frac, ..MeshOptions::default() }).unwrap();
        let len = 40.0 - THRESHOLD;
        let got = mesh.integrate(|l| (l - THRESHOLD).sqrt() * l);
        let want = 0.4 * len.powf(2.5) + THRESHOLD * 2.0 / 3.0 * len.powf(1.5);
        prop_assert!((got - want).abs() < 1e-9 * want);
        prop_assert!(mesh.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn field_distance_is_a_metric(s in 1.0..5.0f64, t in 1.0..5.0f64, a in cplx()) {
        let grid = RadialGrid::uniform(0.01, 8.0, 200).unwrap();
        let f = FieldPair::from_fn(&grid, |r| (c(gauss(r, s, 0.5), 0.0), c(0.0, gauss(r, t, 0.7))));
        let g = FieldPair::from_fn(&grid, |r| (c(0.0, gauss(r, t, 0.3)), c(gauss(r, s, 1.0), 0.0)));
        let h = f.combine(a, &g, c(1.0, 0.0)).unwrap();
        let (fg, fh, hg) = (f.distance(&g).unwrap(), f.distance(&h).unwrap(), h.distance(&g).unwrap());
        prop_assert!(fg <= fh + hg + 1e-12);
        prop_assert!((f.distance(&f).unwrap()).abs() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn discrete_operator_is_symmetric(seed in 0u64..1000) {
        let op = DiscreteOperator::new(&gpvortex::FreePotential, 1e-3, 5.0, 0.05).unwrap();
        let v = |k: u64| -> Vec<Complex64> {
            op.grid.nodes().iter().map(|&r| c((r * (1.0 + k as f64 * 0.37)).sin(), (r * 0.3 * k as f64).cos())).collect()
        };
        let (u, w) = (v(seed), v(seed + 7));
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let lhs = dot(&u, &op.apply_l1(&w));
        let rhs = dot(&op.apply_l1(&u), &w);
        prop_assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
    }

    #[test]
    fn crank_nicolson_conserves_the_energy(center in 3.0..6.0f64, width in 0.3..1.0f64, t in 0.1..1.0f64) {
        let op = DiscreteOperator::new(&common::vortex(), 1e-3, 12.0, 0.03).unwrap();
        let u0 = FieldPair::from_fn(&op.grid, |r| (c(gauss(r, center, width), 0.0), c(0.0, 0.5 * gauss(r, center, width))));
        let energy = |u: &FieldPair| -> f64 {
            let a: Complex64 = u.phi.iter().zip(op.apply_l2(&u.phi)).map(|(x, y)| x.conj() * y).sum();
            let b: Complex64 = u.psi.iter().zip(op.apply_l1(&u.psi)).map(|(x, y)| x.conj() * y).sum();
            (a + b).re
        };
        let u = time_step(&op, &u0, t, 0.01).unwrap();
        prop_assert!((energy(&u) - energy(&u0)).abs() < 1e-10 * energy(&u0));
    }

    #[test]
    fn free_kappa_closed_form(lam in 0.52..30.0f64, neg in any::<bool>()) {
        let lam = if neg { -lam } else { lam };
        let data = connection(lam, &FreePotential, &ConnectionOptions::default()).unwrap();
        let want = free_kappa(lam, Limit::Plus).unwrap();
        prop_assert!((data.kappa - want).norm() < 1e-7 * want.norm());
    }
}
