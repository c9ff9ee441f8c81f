mod common;

use std::sync::OnceLock;

use common::{c, gauss, vortex};
use gpvortex::dft::{evolve, forward, sine_cosine_split, BasisOptions};
use gpvortex::quadrature::MeshOptions;
use gpvortex::{DistortedBasis, FieldPair, RadialGrid};
use num_complex::Complex64;

fn basis() -> &'static DistortedBasis {
    static B: OnceLock<DistortedBasis> = OnceLock::new();
    B.get_or_init(|| {
        let grid = RadialGrid::uniform(0.02, 16.0, 800).unwrap();
        let opts = BasisOptions { mesh: MeshOptions { nodes: 500, r_cut: 30.0, ..MeshOptions::default() }, ..BasisOptions::default() };
        DistortedBasis::build(&vortex(), &grid, &opts).unwrap()
    })
}

fn bump(b: &DistortedBasis, a: f64, w: f64) -> FieldPair {
    FieldPair::from_fn(&b.r_grid, |r| (c(gauss(r, a, w), 0.0), c(0.7 * gauss(r, a + 0.4, w), 0.0)))
}

#[test]
fn basis_is_symmetric_and_smooth() {
    let b = basis();
    let n = b.len();
    for i in 0..n {
        assert!((b.lambda_grid[i] + b.lambda_grid[n - 1 - i]).abs() < 1e-12);
    }
    assert!(b.max_drift < 1e-6);
    assert!(b.parity_report().worst() < 1e-10);
}

#[test]
fn forward_is_linear() {
    let b = basis();
    let (f, g) = (bump(b, 3.0, 0.5), bump(b, 4.5, 0.7));
    let (x, y) = (c(0.3, -1.2), c(2.0, 0.5));
    let h = f.combine(x, &g, y).unwrap();
    let (cf, cg, ch) = (forward(&f, b).unwrap(), forward(&g, b).unwrap(), forward(&h, b).unwrap());
    for i in 0..b.len() {
        assert!((ch[i] - (x * cf[i] + y * cg[i])).norm() <= 1e-12 * (1.0 + ch[i].norm()));
    }
}

#[test]
fn orthogonalized_bump_has_small_coefficient() {
    let b = basis();
    let i = b.len() * 3 / 4;
    let f = bump(b, 3.0, 0.5);
    // σ₁ conj Θ pairs positively with Θ under ⟨Θ, σ₁·⟩.
    let th = &b.theta[i];
    let win = |r: f64| gauss(r, 3.5, 1.0);
    let probe = FieldPair::new(
        b.r_grid.clone(),
        th.iter().zip(b.r_grid.nodes()).map(|(t, &r)| t[1].conj() * win(r)).collect(),
        th.iter().zip(b.r_grid.nodes()).map(|(t, &r)| t[0].conj() * win(r)).collect(),
    )
    .unwrap();
    let cf = forward(&f, b).unwrap();
    let cp = forward(&probe, b).unwrap();
    let g = f.combine(c(1.0, 0.0), &probe, -cf[i] / cp[i]).unwrap();
    let cg = forward(&g, b).unwrap();
    assert!(cg[i].norm() < 1e-12 * cf[i].norm().max(cp[i].norm()));
    assert!(cg[i + 5].norm() > 1e-3 * cf[i + 5].norm());
}

#[test]
fn completeness_on_a_coarse_mesh() {
    let b = basis();
    let f = bump(b, 3.0, 0.5);
    let back = evolve(&f, 0.0, b).unwrap();
    let err = back.distance(&f).unwrap() / f.norm();
    assert!(err < 5e-3, "{err}");
}

#[test]
fn half_line_formula_matches_full_synthesis() {
    let b = basis();
    let f = bump(b, 3.5, 0.6);
    for t in [0.0, 0.7, 2.0] {
        let full = evolve(&f, t, b).unwrap();
        let half = sine_cosine_split(&f, t, b, 1e-6).unwrap();
        assert!(full.distance(&half).unwrap() <= 1e-6 * full.norm());
    }
}

#[test]
fn real_data_stays_real() {
    let b = basis();
    let f = bump(b, 3.0, 0.5);
    let u = evolve(&f, 1.3, b).unwrap();
    let imag = FieldPair::new(
        u.grid.clone(),
        u.phi.iter().map(|v| Complex64::from(v.im)).collect(),
        u.psi.iter().map(|v| Complex64::from(v.im)).collect(),
    )
    .unwrap();
    assert!(imag.norm() < 1e-3 * u.norm(), "{}", imag.norm() / u.norm());
}

#[test]
fn rough_data_is_rejected() {
    let b = basis();
    let square = |r: f64| if (2.0..4.0).contains(&r) { (9.0 * r).sin().signum() } else { 0.0 };
    let rough = FieldPair::from_fn(&b.r_grid, |r| (c(square(r), 0.0), c(0.0, 0.0)));
    assert!(evolve(&rough, 0.5, b).is_err());
}
