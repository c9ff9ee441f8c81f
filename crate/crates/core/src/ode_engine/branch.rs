//! Origin-normalized and infinity-normalized solution branches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{Side, SpectralPoint};
use crate::error::{domain, Error, Result};
use crate::grid::RadialGrid;

use super::{hankel_pair, rhs_unchecked, OdeVec, Flow, Integrator, Potential, StateVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
    Psi1,
    Psi2,
    Psi3,
    Psi4,
}

impl Label {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "phi1" => Label::Phi1,
            "phi2" => Label::Phi2,
            "phi3" => Label::Phi3,
            "phi4" => Label::Phi4,
            "psi1" => Label::Psi1,
            "psi2" => Label::Psi2,
            "psi3" => Label::Psi3,
            "psi4" => Label::Psi4,
            _ => return None,
        })
    }
}

/// Which end of the half-line fixes the normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tail {
    Origin,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPlane {
    Plus,
    Minus,
}

impl HalfPlane {
    pub fn flip(self) -> Self {
        match self {
            HalfPlane::Plus => HalfPlane::Minus,
            HalfPlane::Minus => HalfPlane::Plus,
        }
    }
}

/// Asymptotic form used to start the inward integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Seed {
    /// `e^{ik r}(1, c)`
    Exponential,
    /// `h₊(k r)(1, c)`
    Hankel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub atol: f64,
    pub rtol: f64,
    pub seed: Seed,
    /// Lower bound for the seeding radius of infinity branches.
    pub r_seed_min: f64,
    /// Potentials must be below this at the seeding radius.
    pub potential_eps: f64,
    /// Origin branches stop once the state exceeds this modulus.
    pub overflow: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { atol: 1e-300, rtol: 1e-11, seed: Seed::Exponential, r_seed_min: 16.0, potential_eps: 1e-13, overflow: 1e250 }
    }
}

impl SolveOptions {
    pub fn integrator(&self) -> Integrator {
        Integrator { h_max: 0.25, ..Integrator::with_tol(self.atol, self.rtol) }
    }
}

/// A solution of `(iℒ − z)F = 0` sampled on a radial grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub label: Label,
    pub tail: Tail,
    pub halfplane: HalfPlane,
    pub z: Complex64,
    pub grid: RadialGrid,
    pub states: Vec<StateVector>,
    /// Complex scale applied to the asymptotic seed.
    pub normalization: Complex64,
    /// Radius where an origin branch was truncated to avoid overflow.
    pub cutoff: Option<f64>,
}

impl SolutionBranch {
    pub fn state_at(&self, r: f64) -> Option<StateVector> {
        self.grid.find(r).and_then(|i| self.states.get(i).copied())
    }

    /// Largest radius carried by the branch.
    pub fn reach(&self) -> f64 {
        self.grid.nodes()[self.states.len().saturating_sub(1)]
    }

    /// `σ₃F(·, z)` as a solution at `−z` on the opposite side.
    pub fn reflect(&self) -> SolutionBranch {
        SolutionBranch {
            z: -self.z,
            halfplane: self.halfplane.flip(),
            states: self.states.iter().map(|s| s.sigma3()).collect(),
            ..self.clone()
        }
    }

    /// Complex conjugate, a solution at `−z̄` on the same side of the axis
    /// (the potentials are real).
    pub fn conjugate(&self) -> SolutionBranch {
        SolutionBranch {
            z: -self.z.conj(),
            states: self.states.iter().map(|s| s.conj()).collect(),
            normalization: self.normalization.conj(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, a: Complex64) -> SolutionBranch {
        SolutionBranch {
            states: self.states.iter().map(|s| s.scale(a)).collect(),
            normalization: self.normalization * a,
            ..self.clone()
        }
    }

    /// Largest relative defect of the stored states against the system, using
    /// centered differences of `(φ', ψ')` at interior nodes in `[r_lo, r_hi]`.
    pub fn residual<P: Potential + ?Sized>(&self, pot: &P, r_lo: f64, r_hi: f64) -> f64 {
        let n = self.states.len();
        state_residual(&self.grid.nodes()[..n], &self.states, self.z, pot, r_lo, r_hi)
    }

    /// Mean slope of `log|F|` between two radii.
    pub fn log_slope(&self, r_a: f64, r_b: f64) -> Option<f64> {
        let a = self.state_at(r_a)?;
        let b = self.state_at(r_b)?;
        let na = a.phi.norm().max(a.psi.norm());
        let nb = b.phi.norm().max(b.psi.norm());
        Some((nb.ln() - na.ln()) / (r_b - r_a))
    }
}

/// Residual check of [`SolutionBranch::residual`] for raw samples.
pub fn state_residual<P: Potential + ?Sized>(
    r: &[f64],
    s: &[StateVector],
    z: Complex64,
    pot: &P,
    r_lo: f64,
    r_hi: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..s.len().min(r.len()).saturating_sub(1) {
        if r[i] < r_lo || r[i] > r_hi {
            continue;
        }
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let (a, b, c) = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)));
        let d = rhs_unchecked(r[i], &s[i], z, pot);
        let dphi = a * s[i - 1].dphi + b * s[i].dphi + c * s[i + 1].dphi;
        let dpsi = a * s[i - 1].dpsi + b * s[i].dpsi + c * s[i + 1].dpsi;
        let scale = s[i].norm() + d.dphi.norm() + d.dpsi.norm();
        worst = worst.max(((dphi - d.dphi).norm() + (dpsi - d.dpsi).norm()) / scale);
    }
    worst
}

/// Frobenius seed at `r` for an origin branch.
pub(crate) fn origin_seed<P: Potential + ?Sized>(z: Complex64, label: Label, pot: &P, r: f64) -> Result<StateVector> {
    let [v10, v12, v20, v22] = pot.origin_series();
    let m0 = [[Complex64::from(2.0 * (2.0 + v20)), -2.0 * I * z], [2.0 * I * z, Complex64::from(2.0 * v10)]];
    let m2 = [2.0 * (0.025 + v22), 2.0 * (0.025 + v12)];
    let mul = |a: [Complex64; 2]| [m0[0][0] * a[0] + m0[0][1] * a[1], m0[1][0] * a[0] + m0[1][1] * a[1]];
    let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let scale = |a: [Complex64; 2], s: f64| [a[0] * s, a[1] * s];
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a0 = match label {
        Label::Phi1 | Label::Phi3 => [zero, one],
        Label::Phi2 | Label::Phi4 => [one, zero],
        _ => return Err(domain(format!("{label:?} is not an origin branch"))),
    };
    let (v, d) = match label {
        Label::Phi1 | Label::Phi2 => {
            let a2 = scale(mul(a0), 1.0 / 8.0);
            let a4 = scale(add(mul(a2), [m2[0] * a0[0], m2[1] * a0[1]], 1.0), 1.0 / 24.0);
            let (r2, r4) = (r * r, r.powi(4));
            let p = r.powf(1.5);
            let v = add(add(scale(a0, p), a2, p * r2), a4, p * r4);
            let d = add(add(scale(a0, 1.5 * r.sqrt()), a2, 3.5 * r.powf(2.5)), a4, 5.5 * r.powf(4.5));
            (v, d)
        }
        _ => {
            let b = scale(mul(a0), 0.5);
            let cc = scale(mul(b), 1.0 / 8.0);
            let a2 = scale(add([m2[0] * a0[0], m2[1] * a0[1]], cc, -6.0), 1.0 / 8.0);
            let l = r.ln();
            let v = add(add(add(scale(a0, r.powf(-0.5)), b, r.powf(1.5) * l), cc, r.powf(3.5) * l), a2, r.powf(3.5));
            let d = add(
                add(add(scale(a0, -0.5 * r.powf(-1.5)), b, r.sqrt() * (1.5 * l + 1.0)), cc, r.powf(2.5) * (3.5 * l + 1.0)),
                a2,
                3.5 * r.powf(2.5),
            );
            (v, d)
        }
    };
    Ok(StateVector::new(v[0], v[1], d[0], d[1]))
}

/// Start radius of the Frobenius series for spectral parameter `z`.
pub fn origin_radius(z: Complex64) -> f64 {
    (1e-3f64).min(0.1 / (1.0 + z.norm()).sqrt())
}

/// Outward solve of `φ_j` from its Frobenius seed.
pub fn solve_origin<P: Potential + ?Sized>(
    z: Complex64,
    label: Label,
    pot: &P,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<SolutionBranch> {
    let r_init = origin_radius(z);
    let nodes = grid.nodes();
    let split = nodes.partition_point(|&r| r <= r_init);
    let mut states = nodes[..split].iter().map(|&r| origin_seed(z, label, pot, r)).collect::<Result<Vec<_>>>()?;
    let integ = opts.integrator();
    let f = |r: f64, y: &StateVector| rhs_unchecked(r, y, z, pot);
    let mut r = r_init;
    let mut y = origin_seed(z, label, pot, r_init)?;
    let mut h = integ.h_init.min(0.1 * r_init);
    let mut cutoff = None;
    for &target in &nodes[split..] {
        let (_, yn, hn) = integ.advance(f, r, y, target, h, |_, y| {
            if y.sup_norm() > opts.overflow {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        if yn.sup_norm() > opts.overflow {
            cutoff = Some(target);
            break;
        }
        y = yn;
        r = target;
        h = hn;
        states.push(y);
    }
    let halfplane = if z.im < 0.0 { HalfPlane::Minus } else { HalfPlane::Plus };
    Ok(SolutionBranch {
        label,
        tail: Tail::Origin,
        halfplane,
        z,
        grid: grid.clone(),
        states,
        normalization: Complex64::new(1.0, 0.0),
        cutoff,
    })
}

fn halfplane_of(pt: &SpectralPoint) -> HalfPlane {
    match pt.side {
        Side::UpperHalf | Side::BoundaryPlus => HalfPlane::Plus,
        Side::LowerHalf | Side::BoundaryMinus => HalfPlane::Minus,
    }
}

/// Asymptotic seed `(1, c)·s(k r)` for decaying branch `j ∈ {0, 1}`.
fn infinity_seed(pt: &SpectralPoint, j: usize, r: f64, seed: Seed) -> Result<StateVector> {
    let k = pt.k[j];
    let c = pt.c[j];
    let (v, d) = match seed {
        Seed::Exponential => {
            let e = (I * k * r).exp();
            (e, I * k * e)
        }
        Seed::Hankel => {
            let h = hankel_pair(k * r)?;
            (h.hp, k * h.dhp)
        }
    };
    Ok(StateVector::new(v, c * v, d, c * d))
}

/// Seeding radius for the infinity branches. Grid nodes beyond it take the
/// asymptotic form directly.
pub fn seed_radius<P: Potential + ?Sized>(pot: &P, opts: &SolveOptions) -> f64 {
    opts.r_seed_min.max(pot.decay_radius(opts.potential_eps))
}

/// Decaying branches `(Ψ₁, Ψ₂)` at `pt`, integrated inward from the seeding
/// radius. `Ψ₁` is kept free of the inward-growing `Ψ₂` direction by
/// periodic projection; it is therefore fixed only modulo `Ψ₂`.
pub fn solve_infinity_pair<P: Potential + ?Sized>(
    pt: &SpectralPoint,
    pot: &P,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<(SolutionBranch, SolutionBranch)> {
    let z = pt.z;
    if pt.k[0].im < -1e-12 || pt.k[1].im <= 0.0 {
        return Err(domain(format!("roots at z = {z} are not on the decaying side")));
    }
    let r_seed = seed_radius(pot, opts);
    let decay = pt.k[1].im;
    let spacing = (3.0 / decay).min(2.0);
    let mut proj = Vec::new();
    let mut rp = r_seed - spacing;
    while rp > grid.r_min() {
        proj.push(rp);
        rp -= spacing;
    }
    let all = grid.with_extra(&proj)?;
    let mut inward: Vec<f64> = all.nodes().iter().rev().copied().collect();
    let n_far = inward.iter().take_while(|&&r| r >= r_seed).count();
    let far: Vec<f64> = inward.drain(..n_far).collect();
    let integ = opts.integrator();
    let f = |r: f64, y: &StateVector| rhs_unchecked(r, y, z, pot);

    let psi2_seed = infinity_seed(pt, 1, r_seed, opts.seed)?;
    let psi2_all = integ.through(f, r_seed, psi2_seed, &inward)?;

    let mut y = infinity_seed(pt, 0, r_seed, opts.seed)?;
    let mut r = r_seed;
    let mut h = integ.h_init;
    let mut psi1_all = Vec::with_capacity(inward.len());
    let mut beta_at = vec![Complex64::new(0.0, 0.0); inward.len()];
    let mut pi = 0usize;
    for (idx, &target) in inward.iter().enumerate() {
        let (_, yn, hn) = integ.advance(f, r, y, target, h, |_, _| Flow::Continue)?;
        y = yn;
        r = target;
        h = hn;
        psi1_all.push(y);
        if pi < proj.len() && (target - proj[pi]).abs() <= 1e-12 * target.max(1.0) {
            let p2 = &psi2_all[idx];
            // Real denominator: complex division would square it and underflow.
            let beta = p2.hdot(&y) / p2.hdot(p2).re;
            y = y - beta * *p2;
            beta_at[idx] = beta;
            pi += 1;
        }
    }
    // Each stored state still carries the projections applied further in.
    // The coefficients shrink rapidly inward, so sum them from the inner end.
    let mut tail = Complex64::new(0.0, 0.0);
    for ((s, b), p2) in psi1_all.iter_mut().zip(&beta_at).zip(&psi2_all).rev() {
        tail += *b;
        *s = *s - tail * *p2;
    }
    // Keep grid nodes only, in increasing order.
    let mut psi1 = Vec::with_capacity(grid.len());
    let mut psi2 = Vec::with_capacity(grid.len());
    for (i, &r) in inward.iter().enumerate().rev() {
        if grid.find(r).is_some() {
            psi1.push(psi1_all[i]);
            psi2.push(psi2_all[i]);
        }
    }
    for &r in far.iter().rev() {
        psi1.push(infinity_seed(pt, 0, r, opts.seed)?);
        psi2.push(infinity_seed(pt, 1, r, opts.seed)?);
    }
    if psi1.len() != grid.len() {
        return Err(Error::Numerical("projection radii collided with grid nodes".into()));
    }
    let make = |label, states| SolutionBranch {
        label,
        tail: Tail::Infinity,
        halfplane: halfplane_of(pt),
        z,
        grid: grid.clone(),
        states,
        normalization: Complex64::new(1.0, 0.0),
        cutoff: None,
    };
    Ok((make(Label::Psi1, psi1), make(Label::Psi2, psi2)))
}

/// Single decaying branch; `Ψ₃`, `Ψ₄` grow at infinity and are obtained by
/// reflection in [`crate::connection`].
pub fn solve_infinity<P: Potential + ?Sized>(
    pt: &SpectralPoint,
    label: Label,
    pot: &P,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<SolutionBranch> {
    let (p1, p2) = solve_infinity_pair(pt, pot, grid, opts)?;
    match label {
        Label::Psi1 => Ok(p1),
        Label::Psi2 => Ok(p2),
        other => Err(domain(format!("{other:?} is not a decaying infinity branch"))),
    }
}
