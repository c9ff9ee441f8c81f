//! Modified Hankel functions `h_±` solving `−h'' + 3/(4x²)h = h`, `h_±(x) ~ e^{±ix}`.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::RadialGrid;

use super::free::FreePair;

const I: Complex64 = Complex64::new(0.0, 1.0);
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelPair {
    pub x: Complex64,
    pub hp: Complex64,
    pub dhp: Complex64,
    pub hm: Complex64,
    pub dhm: Complex64,
}

impl HankelPair {
    pub fn wronskian(&self) -> Complex64 {
        self.hp * self.dhm - self.dhp * self.hm
    }
}

/// Sampled `h_±` on an argument grid together with the free scalar pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecialFunctionTable {
    pub hankel: Vec<HankelPair>,
    pub free: FreePair,
}

impl SpecialFunctionTable {
    pub fn build(arguments: &[Complex64], k: Complex64, grid: &RadialGrid) -> Result<Self> {
        let hankel = arguments.iter().map(|&x| hankel_pair(x)).collect::<Result<Vec<_>>>()?;
        let free = super::free::free_pair(k, grid, &super::Integrator::with_tol(1e-300, 1e-12))?;
        Ok(Self { hankel, free })
    }
}

/// `h_±(x)` and derivatives for `Im x ≥ 0`. `h_-` is continued from the
/// positive axis through the upper half-plane.
pub fn hankel_pair(x: Complex64) -> Result<HankelPair> {
    if !x.is_finite() || x.im < -1e-14 * x.norm().max(1.0) {
        return Err(domain(format!("h± requested at x = {x} below the real axis")));
    }
    if x.norm() == 0.0 {
        return Err(domain("h± is singular at x = 0"));
    }
    if x.norm() < 1.0 {
        return Ok(series(x));
    }
    let (ip, dip) = laplace(x, 1.0);
    let ep = (I * x).exp();
    let hp = ep * ip;
    let dhp = I * hp + ep * dip;
    // Near the positive imaginary axis the branch point of the h₋ integrand
    // approaches the contour; h₋ is dominant there, so the series is safe.
    let (hm, dhm) = if x.norm() <= 30.0 && x.re.abs() < 0.3 * x.norm() {
        let s = series(x);
        (s.hm, s.dhm)
    } else {
        let (im, dim) = laplace(x, -1.0);
        let em = (-I * x).exp();
        let mut hm = em * im;
        let mut dhm = -I * hm + em * dim;
        if x.re < 0.0 {
            // Stokes jump picked up crossing the positive imaginary axis.
            hm -= 2.0 * I * hp;
            dhm -= 2.0 * I * dhp;
        }
        (hm, dhm)
    };
    Ok(HankelPair { x, hp, dhp, hm, dhm })
}

fn legendre_16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        gauss_quad::GaussLegendre::new(16).expect("valid degree").as_node_weight_pairs().to_vec()
    })
}

/// `(2/√π)∫₀^∞ e^{−t}√t (1 + s·it/(2x))^{1/2} dt` and its `x`-derivative, via `t = u²`.
fn laplace(x: Complex64, s: f64) -> (Complex64, Complex64) {
    let rule = legendre_16();
    let (u_max, panels) = (7.5, 30);
    let width = u_max / panels as f64;
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    let a = s * I / (2.0 * x);
    for p in 0..panels {
        let lo = p as f64 * width;
        for &(node, w) in rule {
            let u = lo + 0.5 * width * (node + 1.0);
            let t = u * u;
            let base = 2.0 * u * u * (-t).exp() * 0.5 * width * w;
            let root = (1.0 + a * t).sqrt();
            val += base * root;
            // d/dx (1 + s·it/(2x))^{1/2} = −a·t/(2x·root)
            der += base * (-a * t / (2.0 * x * root));
        }
    }
    (FRAC_2_SQRT_PI * val, FRAC_2_SQRT_PI * der)
}

/// Bessel power series for `J₁ ± iY₁` through `h_± = √(πx/2)·e^{±3πi/4}·H₁^{(1,2)}(x)`.
fn series(x: Complex64) -> HankelPair {
    let q = x / 2.0;
    let q2 = q * q;
    let log_term = (q.ln() + EULER_GAMMA) * (2.0 / PI);
    let (mut j0, mut j1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let (mut s0, mut s1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut term0 = Complex64::new(1.0, 0.0);
    let mut term1 = q;
    let mut harmonic = 0.0;
    let n_terms = 40 + 2 * x.norm() as usize;
    for m in 0..n_terms {
        let mf = m as f64;
        let h_next = harmonic + 1.0 / (mf + 1.0);
        j0 += term0;
        j1 += term1;
        s0 += term0 * harmonic;
        s1 += term1 * (harmonic + h_next);
        harmonic = h_next;
        term0 *= -q2 / ((mf + 1.0) * (mf + 1.0));
        term1 *= -q2 / ((mf + 1.0) * (mf + 2.0));
    }
    let y0 = log_term * j0 - (2.0 / PI) * s0;
    // ψ(m+1) + ψ(m+2) = −2γ + H_m + H_{m+1}
    let y1 = -2.0 / (PI * x) + log_term * j1 - (1.0 / PI) * s1;
    let dj1 = j0 - j1 / x;
    let dy1 = y0 - y1 / x;
    let sq = x.sqrt();
    let pref = (PI / 2.0).sqrt();
    let cp = pref * Complex64::from_polar(1.0, 0.75 * PI);
    let cm = pref * Complex64::from_polar(1.0, -0.75 * PI);
    let hp1 = j1 + I * y1;
    let hm1 = j1 - I * y1;
    let dhp1 = dj1 + I * dy1;
    let dhm1 = dj1 - I * dy1;
    HankelPair {
        x,
        hp: cp * sq * hp1,
        dhp: cp * (0.5 / sq * hp1 + sq * dhp1),
        hm: cm * sq * hm1,
        dhm: cm * (0.5 / sq * hm1 + sq * dhm1),
    }
}
