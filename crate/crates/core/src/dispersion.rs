//! Quartic dispersion relation, labeled roots and Wronskian prefactors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Threshold √17/8 of the essential spectrum.
pub const THRESHOLD: f64 = 0.515_388_203_202_207_6;

/// Minimum distance from ±√17/8 accepted by [`boundary_roots`].
pub const THRESHOLD_GUARD: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    UpperHalf,
    LowerHalf,
    BoundaryPlus,
    BoundaryMinus,
}

/// Sign of the boundary limit `λ ± i0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Limit {
    Plus,
    Minus,
}

impl Limit {
    pub fn sign(self) -> f64 {
        match self {
            Limit::Plus => 1.0,
            Limit::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub z: Complex64,
    pub side: Side,
    /// `k₁..k₄` with `k₃ = −k₁`, `k₄ = −k₂`.
    pub k: [Complex64; 4],
    pub c: [Complex64; 2],
    pub delta: Complex64,
    pub alpha: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl SpectralPoint {
    pub fn k1(&self) -> Complex64 {
        self.k[0]
    }
    pub fn k2(&self) -> Complex64 {
        self.k[1]
    }
    /// `ξ = |Re z| − √17/8`, the signed distance past the threshold.
    pub fn xi(&self) -> f64 {
        self.z.re.abs() - THRESHOLD
    }
}

/// `P(k, z) = ¼k⁴ + ⁹⁄₈k² + ¹⁷⁄₆₄ − z²`.
pub fn dispersion_poly(k: Complex64, z: Complex64) -> Complex64 {
    let k2 = k * k;
    0.25 * k2 * k2 + 1.125 * k2 + 17.0 / 64.0 - z * z
}

/// `c = −i(½k² + 17/8)/z`.
pub fn coefficient(k: Complex64, z: Complex64) -> Complex64 {
    -I * (0.5 * k * k + 2.125) / z
}

/// Whether `z` lies in the cut plane Ω.
pub fn in_domain(z: Complex64) -> bool {
    let on_imag_cut = z.re == 0.0 && z.im.abs() >= 1.0;
    let on_real_cut = z.im == 0.0 && z.re.abs() >= THRESHOLD;
    z.is_finite() && !on_imag_cut && !on_real_cut
}

fn finish(z: Complex64, side: Side, s: Complex64, k1: Complex64, k2: Complex64) -> Result<SpectralPoint> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Singular("c₁ is unbounded at z = 0".into()));
    }
    // c₂ = i(s−1)/z written without cancellation, c₁ = 1/c₂.
    let c2 = I * z / (1.0 + s);
    let c1 = 1.0 / c2;
    prefactors(SpectralPoint {
        z,
        side,
        k: [k1, k2, -k1, -k2],
        c: [c1, c2],
        delta: Complex64::new(0.0, 0.0),
        alpha: Complex64::new(0.0, 0.0),
        d1: Complex64::new(0.0, 0.0),
        d2: Complex64::new(0.0, 0.0),
    })
}

/// Labeled roots at an interior point of Ω.
pub fn roots(z: Complex64) -> Result<SpectralPoint> {
    if !in_domain(z) {
        return Err(domain(format!("z = {z} is on a branch cut; use boundary_roots")));
    }
    let s = (1.0 + z * z).sqrt();
    let g = (THRESHOLD - z).sqrt();
    let h = (THRESHOLD + z).sqrt();
    let m = (1.125 + s).sqrt();
    let k1 = I * std::f64::consts::SQRT_2 * g * h / m;
    let k2 = I * std::f64::consts::SQRT_2 * m;
    let side = if z.im < 0.0 { Side::LowerHalf } else { Side::UpperHalf };
    finish(z, side, s, k1, k2)
}

/// Limits `k_j(λ ± i0)` on the continuous spectrum.
pub fn boundary_roots(lambda: f64, limit: Limit) -> Result<SpectralPoint> {
    let gap = lambda.abs() - THRESHOLD;
    if !lambda.is_finite() || gap < THRESHOLD_GUARD {
        return Err(domain(format!("|λ| = {} is not past the threshold", lambda.abs())));
    }
    let z = Complex64::new(lambda, 0.0);
    let s = Complex64::new((1.0 + lambda * lambda).sqrt(), 0.0);
    let root = gap.sqrt();
    // The factor whose argument crosses the negative axis picks up ∓i.
    let (g, h) = if lambda > 0.0 {
        (Complex64::new(0.0, -limit.sign() * root), Complex64::new((THRESHOLD + lambda).sqrt(), 0.0))
    } else {
        (Complex64::new((THRESHOLD - lambda).sqrt(), 0.0), Complex64::new(0.0, limit.sign() * root))
    };
    let m = (1.125 + s).sqrt();
    let k1 = I * std::f64::consts::SQRT_2 * g * h / m;
    let k2 = I * std::f64::consts::SQRT_2 * m;
    let side = match limit {
        Limit::Plus => Side::BoundaryPlus,
        Limit::Minus => Side::BoundaryMinus,
    };
    finish(z, side, s, k1, k2)
}

/// Fill `δ = −2ik₁(1 − c₁²)`, `α = −2ik₂(1 − c₂²)` and their inverses.
pub fn prefactors(mut pt: SpectralPoint) -> Result<SpectralPoint> {
    let [c1, c2] = pt.c;
    pt.delta = -2.0 * I * pt.k[0] * (1.0 - c1 * c1);
    pt.alpha = -2.0 * I * pt.k[1] * (1.0 - c2 * c2);
    if pt.delta.norm() == 0.0 || pt.alpha.norm() == 0.0 || !pt.delta.is_finite() || !pt.alpha.is_finite() {
        return Err(Error::Singular(format!("degenerate Wronskian prefactor at z = {}", pt.z)));
    }
    pt.d1 = 1.0 / pt.delta;
    pt.d2 = 1.0 / pt.alpha;
    Ok(pt)
}

/// Free spectral density `W(σ₃Ψ₁(−λ), Ψ₁(λ))` for unit-normalized plane waves.
pub fn free_kappa(lambda: f64, limit: Limit) -> Result<Complex64> {
    let pt = boundary_roots(lambda, limit)?;
    let s = (1.0 + lambda * lambda).sqrt();
    Ok(4.0 * I * pt.k[0] * s * (s + 1.0) / (lambda * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn threshold_constant() {
        assert_eq!(THRESHOLD, 17f64.sqrt() / 8.0);
    }

    #[test]
    fn polynomial_spot_values() {
        assert!(dispersion_poly(c(0.0, 0.0), c(THRESHOLD, 0.0)).norm() < 1e-15);
        assert!(dispersion_poly(c(0.0, 1.5), c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(dispersion_poly(c(1.0, 0.0), c(0.0, 0.0)), c(105.0 / 64.0, 0.0));
    }

    #[test]
    fn imaginary_axis_closed_form() {
        for y in [0.1, 0.5, 0.9] {
            let pt = roots(c(0.0, y)).unwrap();
            let want = c(0.0, (2.25 - 2.0 * (1.0 - y * y).sqrt()).sqrt());
            assert!((pt.k1() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn origin_is_singular() {
        assert!(matches!(roots(c(0.0, 0.0)), Err(Error::Singular(_))));
        let pt = roots(c(0.0, 1e-9)).unwrap();
        assert!((pt.k1() - c(0.0, 0.5)).norm() < 1e-12);
        assert!((pt.k2() - c(0.0, 17f64.sqrt() / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn boundary_closed_forms() {
        let pt = boundary_roots(1.0, Limit::Plus).unwrap();
        let want = std::f64::consts::SQRT_2 * (std::f64::consts::SQRT_2 - 1.125).sqrt();
        assert!((pt.k1() - c(want, 0.0)).norm() < 1e-15);
        assert!((pt.k1().re - 0.76055).abs() < 1e-5);
        let near = boundary_roots(THRESHOLD + 1e-7, Limit::Plus).unwrap();
        assert!((near.k2() - c(0.0, 3.0 / std::f64::consts::SQRT_2)).norm() < 1e-6);
        assert!((near.c[0] - c(0.0, -17f64.sqrt())).norm() < 1e-5);
        assert!((near.c[1] - c(0.0, 1.0 / 17f64.sqrt())).norm() < 1e-6);
    }

    #[test]
    fn rejects_gap_and_cuts() {
        assert!(boundary_roots(0.5, Limit::Plus).is_err());
        assert!(boundary_roots(THRESHOLD + 1e-9, Limit::Plus).is_err());
        assert!(roots(c(1.0, 0.0)).is_err());
        assert!(roots(c(0.0, 2.0)).is_err());
    }

    #[test]
    fn interior_limits_converge_to_boundary() {
        for lam in [-3.0, -0.7, 0.6, 2.0] {
            for (lim, sgn) in [(Limit::Plus, 1.0), (Limit::Minus, -1.0)] {
                let b = boundary_roots(lam, lim).unwrap();
                let mut prev = f64::INFINITY;
                for y in [1e-2, 1e-4, 1e-6] {
                    let pt = roots(c(lam, sgn * y)).unwrap();
                    let err = (pt.k1() - b.k1()).norm() + (pt.k2() - b.k2()).norm();
                    assert!(err < prev);
                    prev = err;
                }
                assert!(prev < 1e-5, "λ={lam} {lim:?} err {prev}");
            }
        }
    }

    #[test]
    fn prefactor_threshold_scaling() {
        let a = boundary_roots(THRESHOLD + 1e-4, Limit::Plus).unwrap();
        let b = boundary_roots(THRESHOLD + 1e-6, Limit::Plus).unwrap();
        let slope = (b.d1.norm() / a.d1.norm()).ln() / (1e-6f64 / 1e-4).ln();
        assert!((slope + 0.5).abs() < 0.01, "slope {slope}");
        assert!((b.d2.norm() / a.d2.norm() - 1.0).abs() < 1e-3);
    }
}
