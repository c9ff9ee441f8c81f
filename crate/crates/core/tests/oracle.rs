mod common;

use common::{c, gauss, vortex};
use gpvortex::ode_engine::{system_rhs, SolveOptions};
use gpvortex::oracle::{
    discrete_resolvent, free_mu, free_resolvent_apply, lap_check, richardson, spectrum_scan, time_step, DiscreteOperator,
};
use gpvortex::{FieldPair, FreePotential, StateVector, THRESHOLD};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

#[test]
fn discretization_is_second_order() {
    let pot = vortex();
    let f = |r: f64| gauss(r, 4.0, 0.6);
    let d2f = |r: f64| ((r - 4.0).powi(2) / 0.1296 - 1.0 / 0.36) * f(r);
    let err = |h: f64| {
        let op = DiscreteOperator::new(&pot, 1e-3, 10.0, h).unwrap();
        let v: Vec<Complex64> = op.grid.nodes().iter().map(|&r| c(f(r), 0.0)).collect();
        let l2 = op.apply_l2(&v);
        op.grid
            .nodes()
            .iter()
            .zip(&l2)
            .map(|(&r, got)| {
                // Potential part from the system itself at z = 0.
                let s = StateVector::new(c(f(r), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
                let d = system_rhs(r, &s, c(0.0, 0.0), &pot).unwrap();
                (got - (-0.5 * d2f(r) + 0.5 * d.dphi)).norm()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (err(0.02), err(0.01));
    assert!(a < 1e-3 && (a / b - 4.0).abs() < 0.3, "{a} {b}");
}

#[test]
fn free_spectrum_follows_the_dispersion_relation() {
    let op = DiscreteOperator::new(&FreePotential, 1e-3, 20.0, 0.05).unwrap();
    let rep = spectrum_scan(&op, 6).unwrap();
    assert!(rep.max_imag <= 1e-6 * rep.scale);
    assert!(rep.eta > THRESHOLD && rep.eta < THRESHOLD + 0.05);
    // V ≡ 0: L₁, L₂ are shifts of one operator A, so λ² = s⁴ + 9s²/4 + 17/64 with s² ∈ σ(A).
    let n = op.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let k = 0.5 / (op.h * op.h);
        if i == j {
            2.0 * k + op.q_psi[i] - 0.125
        } else if i.abs_diff(j) == 1 {
            -k
        } else {
            0.0
        }
    });
    let mut want: Vec<f64> =
        SymmetricEigen::new(a).eigenvalues.iter().map(|&s2| (s2 * s2 + 2.25 * s2 + 17.0 / 64.0).sqrt()).collect();
    want.sort_by(f64::total_cmp);
    let got: Vec<f64> = rep.eigenvalues.iter().filter(|v| v.re > 0.0).map(|v| v.re).collect();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9 * w, "{g} vs {w}");
    }
}

#[test]
fn vortex_spectrum_is_real_with_a_gap() {
    let op = DiscreteOperator::new(&vortex(), 1e-3, 20.0, 0.02).unwrap();
    let rep = spectrum_scan(&op, 10).unwrap();
    assert!(rep.max_imag <= 1e-6 * rep.scale);
    assert!(rep.eta > 0.1);
}

fn packet(op: &DiscreteOperator) -> FieldPair {
    FieldPair::from_fn(&op.grid, |r| (c(gauss(r, 4.0, 0.5), 0.0), c(0.0, 0.6 * gauss(r, 4.3, 0.5))))
}

#[test]
fn crank_nicolson_basics() {
    let op = DiscreteOperator::new(&vortex(), 1e-3, 25.0, 0.02).unwrap();
    let u0 = packet(&op);
    assert_eq!(time_step(&op, &u0, 0.0, 1e-3).unwrap(), u0);
    let rich = richardson(&op, &u0, 1.0, 8e-3).unwrap();
    assert!((3.5..4.5).contains(&rich.ratio), "{rich:?}");
    let mut u = u0.clone();
    for k in 1..=4 {
        u = time_step(&op, &u, 0.5, 5e-3).unwrap();
        assert!(u.norm() <= (0.5 * k as f64).exp() * u0.norm());
    }
}

#[test]
fn free_packet_moves_at_group_velocity() {
    let op = DiscreteOperator::new(&FreePotential, 1e-3, 40.0, 0.01).unwrap();
    let k0 = 4.0f64;
    let a = 0.5 * k0 * k0;
    let lam = ((a + 0.125) * (a + 2.125)).sqrt();
    let pol = c(0.0, -(a + 2.125) / lam);
    let u0 = FieldPair::from_fn(&op.grid, |r| {
        let e = gauss(r, 10.0, 1.5) * Complex64::from_polar(1.0, k0 * r);
        (e, pol * e)
    });
    let t = 2.0;
    let u = time_step(&op, &u0, t, 2e-3).unwrap();
    let centroid = |f: &FieldPair| {
        let (m, w) = f.grid.nodes().iter().enumerate().fold((0.0, 0.0), |(m, w), (i, &r)| {
            let d = f.phi[i].norm_sqr() + f.psi[i].norm_sqr();
            (m + r * d, w + d)
        });
        m / w
    };
    let speed = k0 * (2.0 * a + 2.25) / (2.0 * lam);
    let moved = centroid(&u) - centroid(&u0);
    assert!((moved - speed * t).abs() < 0.1 * speed * t, "{moved} vs {}", speed * t);
}

#[test]
fn free_kernel_matches_sparse_solve() {
    // Im z large enough that the outgoing wave is negligible at the Dirichlet wall.
    let z = c(1.2, 0.8);
    let err = |h: f64| {
        let op = DiscreteOperator::new(&FreePotential, 1e-3, 30.0, h).unwrap();
        let f = FieldPair::from_fn(&op.grid, |r| (c(gauss(r, 3.0, 0.5), 0.0), c(0.3 * gauss(r, 3.5, 0.4), 0.0)));
        let kernel = free_resolvent_apply(z, &f).unwrap();
        let sparse = discrete_resolvent(&op, z, &f).unwrap();
        kernel.u.distance(&sparse).unwrap() / kernel.u.norm()
    };
    let (a, b) = (err(0.02), err(0.01));
    assert!(a < 1e-2 && a / b > 3.0, "{a} {b}");
}

#[test]
fn free_kernel_residual_for_random_bumps() {
    let grid = gpvortex::RadialGrid::uniform(0.01, 15.0, 3000).unwrap();
    for (k, z) in [c(0.3, 0.7), c(-2.5, 0.1), c(4.0, -0.6)].into_iter().enumerate() {
        let s = 2.0 + k as f64;
        let f = FieldPair::from_fn(&grid, |r| (c(gauss(r, s, 0.4), -gauss(r, s + 1.0, 0.6)), c(0.5 * gauss(r, s + 0.5, 0.5), 0.0)));
        let sol = free_resolvent_apply(z, &f).unwrap();
        assert!(sol.residual(&FreePotential, &f).unwrap() < 1e-5);
    }
}

#[test]
fn free_wronskians_grow_like_root_z() {
    let ratio = |z: Complex64| {
        let m = free_mu(z).unwrap();
        [m[0].norm() / z.norm().sqrt(), m[1].norm() / z.norm().sqrt()]
    };
    let a = ratio(c(10.0, 1.0));
    let b = ratio(c(100.0, 1.0));
    for j in 0..2 {
        assert!((a[j] / b[j] - 1.0).abs() < 0.5, "{a:?} {b:?}");
    }
}

#[test]
fn weighted_resolvent_stays_bounded() {
    let grid = gpvortex::RadialGrid::uniform(0.01, 25.0, 2500).unwrap();
    let f = FieldPair::from_fn(&grid, |r| (c(gauss(r, 3.0, 0.5), 0.0), c(0.0, 0.0)));
    let pot = vortex();
    let opts = SolveOptions::default();
    let strong = lap_check(&pot, 1.0, &[5.0], &[1e-1, 1e-3], &f, &opts).unwrap();
    let weak = lap_check(&pot, 0.6, &[5.0], &[1e-1, 1e-3], &f, &opts).unwrap();
    for (s, w) in strong.iter().zip(&weak) {
        assert!(s.value < w.value);
    }
    assert!(weak[1].value < 3.0 * weak[0].value);
}
