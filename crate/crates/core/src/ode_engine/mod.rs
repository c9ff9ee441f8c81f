//! Solutions of `(iℒ − z)F = 0` as a first-order complex system in `r`.

mod branch;
mod free;
mod hankel;
pub mod rk;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use branch::{
    origin_radius, seed_radius, solve_infinity, solve_infinity_pair, solve_origin, state_residual, HalfPlane, Label, Seed, SolutionBranch,
    SolveOptions, Tail,
};
pub use free::{free_pair, FreePair};
pub use hankel::{hankel_pair, HankelPair, SpecialFunctionTable};
pub use rk::{Flow, Integrator, OdeVec, Tolerance};

/// `(φ, ψ, φ', ψ')` at one radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub phi: Complex64,
    pub psi: Complex64,
    pub dphi: Complex64,
    pub dpsi: Complex64,
}

impl StateVector {
    pub fn new(phi: Complex64, psi: Complex64, dphi: Complex64, dpsi: Complex64) -> Self {
        Self { phi, psi, dphi, dpsi }
    }

    pub fn to_array(self) -> [Complex64; 4] {
        [self.phi, self.psi, self.dphi, self.dpsi]
    }

    pub fn from_array(a: [Complex64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// `σ₃` applied to values and derivatives.
    pub fn sigma3(self) -> Self {
        Self::new(self.phi, -self.psi, self.dphi, -self.dpsi)
    }

    pub fn scale(self, a: Complex64) -> Self {
        Self::new(a * self.phi, a * self.psi, a * self.dphi, a * self.dpsi)
    }

    pub fn conj(self) -> Self {
        Self::new(self.phi.conj(), self.psi.conj(), self.dphi.conj(), self.dpsi.conj())
    }

    pub fn norm(&self) -> f64 {
        (self.phi.norm_sqr() + self.psi.norm_sqr() + self.dphi.norm_sqr() + self.dpsi.norm_sqr()).sqrt()
    }

    /// Hermitian product `⟨self, other⟩ = Σ conj(selfᵢ)·otherᵢ`.
    pub fn hdot(&self, other: &Self) -> Complex64 {
        self.phi.conj() * other.phi
            + self.psi.conj() * other.psi
            + self.dphi.conj() * other.dphi
            + self.dpsi.conj() * other.dpsi
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.psi.is_finite() && self.dphi.is_finite() && self.dpsi.is_finite()
    }
}

impl Add for StateVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.phi + o.phi, self.psi + o.psi, self.dphi + o.dphi, self.dpsi + o.dpsi)
    }
}

impl Sub for StateVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.phi - o.phi, self.psi - o.psi, self.dphi - o.dphi, self.dpsi - o.dpsi)
    }
}

impl Mul<StateVector> for Complex64 {
    type Output = StateVector;
    fn mul(self, s: StateVector) -> StateVector {
        s.scale(self)
    }
}

impl OdeVec for StateVector {
    fn zero() -> Self {
        Self::default()
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.phi += a * x.phi;
        self.psi += a * x.psi;
        self.dphi += a * x.dphi;
        self.dpsi += a * x.dpsi;
    }
    fn sup_norm(&self) -> f64 {
        self.phi.norm().max(self.psi.norm()).max(self.dphi.norm()).max(self.dpsi.norm())
    }
}

/// Matrix Wronskian `Fᵗσ₃G' − (F')ᵗσ₃G`.
pub fn wronskian_states(f: &StateVector, g: &StateVector) -> Complex64 {
    f.phi * g.dphi - f.psi * g.dpsi - (f.dphi * g.phi - f.dpsi * g.psi)
}

/// Radial potentials `(V₁, V₂)` entering `ℒ`.
pub trait Potential: Sync {
    fn eval(&self, r: f64) -> (f64, f64);
    /// Taylor data `[V₁(0), V₁₂, V₂(0), V₂₂]` with `V(r) = V(0) + V₂ r² + O(r⁴)`.
    fn origin_series(&self) -> [f64; 4];
    /// Radius beyond which `|V₁|, |V₂| < eps`.
    fn decay_radius(&self, eps: f64) -> f64;
    /// Stable identifier of the potential for caching.
    fn fingerprint(&self) -> String;
}

/// `V₁ = V₂ = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreePotential;

impl Potential for FreePotential {
    fn eval(&self, _r: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    fn origin_series(&self) -> [f64; 4] {
        [0.0; 4]
    }
    fn decay_radius(&self, _eps: f64) -> f64 {
        0.0
    }
    fn fingerprint(&self) -> String {
        "free".into()
    }
}

/// Diagonal coefficients `(q_φ, q_ψ)` so that `φ'' = 2(q_φφ − izψ)`, `ψ'' = 2(q_ψψ + izφ)`.
#[inline]
pub(crate) fn coefficients<P: Potential + ?Sized>(r: f64, pot: &P) -> (f64, f64) {
    let sh = r.sinh();
    let cent = 0.375 / (sh * sh);
    let (v1, v2) = pot.eval(r);
    (cent + 2.125 + v2, cent + 0.125 + v1)
}

#[inline]
pub(crate) fn rhs_unchecked<P: Potential + ?Sized>(r: f64, y: &StateVector, z: Complex64, pot: &P) -> StateVector {
    let (qa, qb) = coefficients(r, pot);
    let iz = Complex64::new(-z.im, z.re);
    StateVector::new(y.dphi, y.dpsi, 2.0 * (qa * y.phi - iz * y.psi), 2.0 * (qb * y.psi + iz * y.phi))
}

/// Derivative of the state for `(iℒ − z)F = 0`.
pub fn system_rhs<P: Potential + ?Sized>(r: f64, state: &StateVector, z: Complex64, pot: &P) -> Result<StateVector> {
    if r <= 0.0 || r.is_nan() {
        return Err(domain(format!("system evaluated at r = {r}")));
    }
    Ok(rhs_unchecked(r, state, z, pot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{roots, THRESHOLD};

    #[test]
    fn free_plane_wave_is_exact_far_out() {
        let pt = roots(Complex64::new(0.8, 0.3)).unwrap();
        for j in 0..2 {
            let k = pt.k[j];
            let c = pt.c[j];
            let r = 40.0;
            let e = (Complex64::i() * k * r).exp();
            let y = StateVector::new(e, c * e, Complex64::i() * k * e, Complex64::i() * k * c * e);
            let d = system_rhs(r, &y, pt.z, &FreePotential).unwrap();
            let want = -k * k * e;
            assert!((d.dphi - want).norm() < 1e-12 * want.norm());
            assert!((d.dpsi - c * want).norm() < 1e-12 * (c * want).norm());
        }
    }

    #[test]
    fn threshold_constant_vector() {
        let z = Complex64::new(THRESHOLD, 0.0);
        let y = StateVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, -17f64.sqrt()), 0.0.into(), 0.0.into());
        let d = system_rhs(30.0, &y, z, &FreePotential).unwrap();
        assert!(d.dphi.norm() < 1e-12 && d.dpsi.norm() < 1e-12);
    }

    #[test]
    fn spot_value() {
        struct Const;
        impl Potential for Const {
            fn eval(&self, _r: f64) -> (f64, f64) {
                (-0.25, -0.75)
            }
            fn origin_series(&self) -> [f64; 4] {
                [-0.25, 0.0, -0.75, 0.0]
            }
            fn decay_radius(&self, _eps: f64) -> f64 {
                f64::INFINITY
            }
            fn fingerprint(&self) -> String {
                "const".into()
            }
        }
        let y = StateVector::new(
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(0.0, 1.0),
            Complex64::new(3.0, 0.0),
        );
        let z = Complex64::new(1.5, 0.5);
        let d = system_rhs(1.0, &y, z, &Const).unwrap();
        let sh2 = 1f64.sinh().powi(2);
        let qa = 3.0 / (8.0 * sh2) + 17.0 / 8.0 - 0.75;
        let qb = 3.0 / (8.0 * sh2) + 1.0 / 8.0 - 0.25;
        let i = Complex64::i();
        assert!((d.dphi - 2.0 * (qa * y.phi - i * z * y.psi)).norm() < 1e-14);
        assert!((d.dpsi - 2.0 * (qb * y.psi + i * z * y.phi)).norm() < 1e-14);
        assert_eq!(d.phi, y.dphi);
        assert!(system_rhs(0.0, &y, z, &Const).is_err());
    }

    #[test]
    fn wronskian_antisymmetric() {
        let f = StateVector::new(Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 4.0));
        let g = StateVector::new(Complex64::new(-2.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0));
        assert_eq!(wronskian_states(&f, &f), Complex64::new(0.0, 0.0));
        assert!((wronskian_states(&f, &g) + wronskian_states(&g, &f)).norm() < 1e-14);
    }
}
