mod common;

use common::{c, vortex};
use gpvortex::dispersion::{boundary_roots, prefactors, roots};
use gpvortex::ode_engine::{solve_infinity_pair, solve_origin, wronskian_states, Seed, SolveOptions};
use gpvortex::{FreePotential, Label, Limit, RadialGrid};

#[test]
fn origin_branches_solve_the_system() {
    let pot = vortex();
    // Centered differences: the defect must shrink fourfold with h.
    let coarse = RadialGrid::uniform(2e-3, 4.0, 1000).unwrap();
    let fine = RadialGrid::uniform(2e-3, 4.0, 1999).unwrap();
    for z in [c(0.9, 0.0), c(3.0, 0.5), c(-1.5, -0.2)] {
        for label in [Label::Phi1, Label::Phi2, Label::Phi3, Label::Phi4] {
            let a = solve_origin(z, label, &pot, &coarse, &SolveOptions::default()).unwrap();
            let b = solve_origin(z, label, &pot, &fine, &SolveOptions::default()).unwrap();
            assert!(a.cutoff.is_none());
            let (ra, rb) = (a.residual(&pot, 0.3, 4.0), b.residual(&pot, 0.3, 4.0));
            assert!(ra < 1e-3 && ra / rb > 3.5, "{label:?} at {z}: {ra} -> {rb}");
        }
    }
}

#[test]
fn regular_branches_vanish_like_r_three_halves() {
    let pot = vortex();
    let grid = RadialGrid::new(vec![2e-3, 1e-2, 2e-2]).unwrap();
    let b = solve_origin(c(1.2, 0.0), Label::Phi2, &pot, &grid, &SolveOptions::default()).unwrap();
    let slope = b.log_slope(2e-3, 2e-2).unwrap() * (2e-2f64 - 2e-3);
    let want = 1.5 * (10f64).ln();
    assert!((slope - want).abs() < 1e-2, "{slope} vs {want}");
}

#[test]
fn decaying_branches_follow_plane_waves() {
    let pot = vortex();
    let grid = RadialGrid::new((1..=600).map(|i| 0.05 * i as f64).collect()).unwrap();
    let pt = prefactors(boundary_roots(2.0, Limit::Plus).unwrap()).unwrap();
    let (p1, p2) = solve_infinity_pair(&pt, &pot, &grid, &SolveOptions::default()).unwrap();
    for i in [359, 499, 599] {
        let (r, s) = (grid.nodes()[i], p1.states[i]);
        let e = (c(0.0, 1.0) * pt.k1() * r).exp();
        assert!((s.phi - e).norm() < 1e-9);
        assert!((s.psi - pt.c[0] * e).norm() < 1e-9);
    }
    // h = 0.05 bounds the difference defect by about h²|k₂|²/6.
    assert!(p1.residual(&pot, 2.0, 30.0) < 5e-3);
    assert!(p2.residual(&pot, 2.0, 30.0) < 5e-3);
    let slope = p2.log_slope(grid.nodes()[99], grid.nodes()[199]).unwrap();
    assert!((slope + pt.k2().im).abs() < 1e-3, "{slope}");
}

#[test]
fn long_grids_do_not_overflow() {
    let grid = RadialGrid::uniform(0.05, 100.0, 2000).unwrap();
    let pt = prefactors(boundary_roots(40.0, Limit::Plus).unwrap()).unwrap();
    let (p1, p2) = solve_infinity_pair(&pt, &vortex(), &grid, &SolveOptions::default()).unwrap();
    assert!(p1.states.iter().chain(&p2.states).all(|s| s.is_finite()));
    assert!((p1.states.last().unwrap().phi.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn hankel_and_exponential_seeds_agree() {
    let grid = RadialGrid::uniform(0.5, 20.0, 400).unwrap();
    let pt = roots(c(1.3, 0.4)).unwrap();
    let exp = SolveOptions::default();
    let hank = SolveOptions { seed: Seed::Hankel, ..exp };
    let f = solve_origin(pt.z, Label::Phi1, &FreePotential, &grid, &exp).unwrap();
    let (a, _) = solve_infinity_pair(&pt, &FreePotential, &grid, &exp).unwrap();
    let (b, _) = solve_infinity_pair(&pt, &FreePotential, &grid, &hank).unwrap();
    // Same decaying direction up to the seed normalization; h₊ carries the
    // 1/(kr) corrections of the flat problem, hence the loose tolerance.
    let i = 77;
    let wa = wronskian_states(&a.states[i], &f.states[i]);
    let wb = wronskian_states(&b.states[i], &f.states[i]);
    let ratio = a.states[grid.len() - 1].phi / b.states[grid.len() - 1].phi;
    assert!(((wa / wb) - ratio).norm() < 2e-2 * ratio.norm(), "{} vs {ratio}", wa / wb);
}

#[test]
fn conjugation_gives_the_mirror_branch() {
    let pot = vortex();
    let grid = RadialGrid::uniform(0.01, 3.0, 300).unwrap();
    let opts = SolveOptions::default();
    let a = solve_origin(c(1.7, 0.0), Label::Phi1, &pot, &grid, &opts).unwrap().conjugate();
    let b = solve_origin(c(-1.7, 0.0), Label::Phi1, &pot, &grid, &opts).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!((*x - *y).norm() <= 1e-9 * x.norm());
    }
}
