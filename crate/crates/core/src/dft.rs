//! Distorted Fourier basis `Θ(r, λ)`, the forward transform and the spectral
//! synthesis of `e^{tℒ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{connection_from, BranchSet, ConnectionData, ConnectionOptions};
use crate::error::{domain, Error, Result};
use crate::grid::RadialGrid;
use crate::ode_engine::{wronskian_states, Potential, StateVector};
use crate::quadrature::{lambda_mesh, LambdaMesh, MeshOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-component radial data `(φ, ψ)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub grid: RadialGrid,
    pub phi: Vec<Complex64>,
    pub psi: Vec<Complex64>,
}

impl FieldPair {
    pub fn new(grid: RadialGrid, phi: Vec<Complex64>, psi: Vec<Complex64>) -> Result<Self> {
        if phi.len() != grid.len() || psi.len() != grid.len() {
            return Err(domain("field samples do not match the grid"));
        }
        if !phi.iter().chain(&psi).all(|v| v.is_finite()) {
            return Err(domain("field samples are not finite"));
        }
        Ok(Self { grid, phi, psi })
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let (phi, psi) = grid.nodes().iter().map(|&r| f(r)).unzip();
        Self { grid: grid.clone(), phi, psi }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self::from_fn(grid, |_| (ZERO, ZERO))
    }

    /// Trapezoid `L²(dr)` norm of both components.
    pub fn norm(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        w.iter()
            .zip(self.phi.iter().zip(&self.psi))
            .map(|(w, (a, b))| w * (a.norm_sqr() + b.norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − other‖` on a shared grid.
    pub fn distance(&self, other: &FieldPair) -> Result<f64> {
        if self.grid != other.grid {
            return Err(domain("fields live on different grids"));
        }
        let diff = FieldPair {
            grid: self.grid.clone(),
            phi: self.phi.iter().zip(&other.phi).map(|(a, b)| a - b).collect(),
            psi: self.psi.iter().zip(&other.psi).map(|(a, b)| a - b).collect(),
        };
        Ok(diff.norm())
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: Complex64, other: &FieldPair, b: Complex64) -> Result<FieldPair> {
        if self.grid != other.grid {
            return Err(domain("fields live on different grids"));
        }
        Ok(FieldPair {
            grid: self.grid.clone(),
            phi: self.phi.iter().zip(&other.phi).map(|(x, y)| a * x + b * y).collect(),
            psi: self.psi.iter().zip(&other.psi).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// Modulus at the outer node relative to the norm.
    pub fn boundary_leak(&self) -> f64 {
        let n = self.grid.len() - 1;
        (self.phi[n].norm() + self.psi[n].norm()) / self.norm().max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisOptions {
    pub mesh: MeshOptions,
    pub connection: ConnectionOptions,
    /// Largest share of the synthesized field allowed from the top 5% of the
    /// spectral range.
    pub tail_tol: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self { mesh: MeshOptions::default(), connection: ConnectionOptions::default(), tail_tol: 1e-2 }
    }
}

/// `Θ` sampled on `r_grid` at every node of a symmetric spectral mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortedBasis {
    /// Ascending; entry `i` and `len − 1 − i` are `∓λ`.
    pub lambda_grid: Vec<f64>,
    pub quad_weights: Vec<f64>,
    pub r_grid: RadialGrid,
    pub theta: Vec<Vec<[Complex64; 2]>>,
    /// `κ/(d⁺d⁻)`
    pub weight: Vec<Complex64>,
    pub max_drift: f64,
    pub tail_tol: f64,
}

/// `Θ = ω⁺₂₂φ₁ − ω⁺₂₁φ₂` on the grid of `set.psi1`. Past the matching radius
/// the same solution is expanded in `Ψ₁, Ψ₂` and the reflected slow branch.
pub fn build_theta(set: &BranchSet, mirror: &BranchSet, data: &ConnectionData) -> Result<Vec<StateVector>> {
    let (w22, w21) = (data.omega_plus[1][1], data.omega_plus[1][0]);
    let inner = |r: f64| -> Result<StateVector> {
        match (set.phi[0].state_at(r), set.phi[1].state_at(r)) {
            (Some(a), Some(b)) => Ok(a.scale(w22) - b.scale(w21)),
            _ => Err(domain(format!("origin branches do not reach r = {r}"))),
        }
    };
    let psi3 = mirror.psi1.reflect();
    let rm = set.r_match;
    let at = |b: &crate::ode_engine::SolutionBranch| {
        b.state_at(rm).ok_or_else(|| Error::Numerical(format!("branch misses matching radius {rm}")))
    };
    let (t, p1, p2, p3) = (inner(rm)?, at(&set.psi1)?, at(&set.psi2)?, at(&psi3)?);
    let a = wronskian_states(&p3, &t) / wronskian_states(&p3, &p1);
    let b = wronskian_states(&p1, &t) / wronskian_states(&p1, &p3);
    let rest = t - a * p1 - b * p3;
    let c = p2.hdot(&rest) / p2.hdot(&p2);
    set.psi1
        .grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if r <= rm {
                inner(r)
            } else {
                Ok(a * set.psi1.states[i] + b * psi3.states[i] + c * set.psi2.states[i])
            }
        })
        .collect()
}

struct Sample {
    theta_pos: Vec<[Complex64; 2]>,
    theta_neg: Vec<[Complex64; 2]>,
    weight_pos: Complex64,
    weight_neg: Complex64,
    drift: f64,
}

fn restrict(states: &[StateVector], full: &RadialGrid, r_grid: &RadialGrid) -> Result<Vec<[Complex64; 2]>> {
    r_grid
        .nodes()
        .iter()
        .map(|&r| {
            full.find(r)
                .map(|i| [states[i].phi, states[i].psi])
                .ok_or_else(|| Error::Numerical(format!("radius {r} lost while assembling Θ")))
        })
        .collect()
}

fn sample<P: Potential + ?Sized>(lambda: f64, pot: &P, r_grid: &RadialGrid, opts: &ConnectionOptions) -> Result<Sample> {
    let set = BranchSet::solve(lambda, pot, Some(r_grid), opts)?;
    let mirror = set.conjugate()?;
    let pos = connection_from(&set, &mirror, opts)?;
    let neg = connection_from(&mirror, &set, opts)?;
    let full = &set.psi1.grid;
    Ok(Sample {
        theta_pos: restrict(&build_theta(&set, &mirror, &pos)?, full, r_grid)?,
        theta_neg: restrict(&build_theta(&mirror, &set, &neg)?, full, r_grid)?,
        weight_pos: pos.weight,
        weight_neg: neg.weight,
        drift: pos.max_drift.max(neg.max_drift),
    })
}

impl DistortedBasis {
    /// Assemble `Θ` and the spectral weight over the mesh, in parallel over `λ`.
    pub fn build<P: Potential + ?Sized>(pot: &P, r_grid: &RadialGrid, opts: &BasisOptions) -> Result<Self> {
        let mesh = lambda_mesh(&opts.mesh)?;
        Self::build_on(pot, r_grid, &mesh, opts)
    }

    pub fn build_on<P: Potential + ?Sized>(
        pot: &P,
        r_grid: &RadialGrid,
        mesh: &LambdaMesh,
        opts: &BasisOptions,
    ) -> Result<Self> {
        let samples = mesh
            .nodes
            .par_iter()
            .map(|&l| sample(l, pot, r_grid, &opts.connection))
            .collect::<Result<Vec<_>>>()?;
        let n = mesh.len();
        let max_drift = samples.iter().fold(0.0f64, |m, s| m.max(s.drift));
        let mut lambda_grid = Vec::with_capacity(2 * n);
        let mut quad_weights = Vec::with_capacity(2 * n);
        let mut theta = Vec::with_capacity(2 * n);
        let mut weight = Vec::with_capacity(2 * n);
        for (i, s) in samples.iter().enumerate().rev() {
            lambda_grid.push(-mesh.nodes[i]);
            quad_weights.push(mesh.weights[i]);
            theta.push(s.theta_neg.clone());
            weight.push(s.weight_neg);
        }
        for (i, s) in samples.into_iter().enumerate() {
            lambda_grid.push(mesh.nodes[i]);
            quad_weights.push(mesh.weights[i]);
            theta.push(s.theta_pos);
            weight.push(s.weight_pos);
        }
        Ok(Self { lambda_grid, quad_weights, r_grid: r_grid.clone(), theta, weight, max_drift, tail_tol: opts.tail_tol })
    }

    pub fn len(&self) -> usize {
        self.lambda_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_grid.is_empty()
    }

    fn check_grid(&self, f: &FieldPair) -> Result<()> {
        if f.grid != self.r_grid {
            return Err(domain("field and basis use different radial grids"));
        }
        Ok(())
    }

    /// Largest relative violation of `Θ₁` odd, `Θ₂` even and the weight odd.
    pub fn parity_report(&self) -> ParityReport {
        let n = self.len();
        let mut rep = ParityReport::default();
        for i in n / 2..n {
            let j = n - 1 - i;
            let (a, b) = (&self.theta[i], &self.theta[j]);
            let s0 = a.iter().fold(0.0f64, |m, v| m.max(v[0].norm()));
            let s1 = a.iter().fold(0.0f64, |m, v| m.max(v[1].norm()));
            let e0 = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x[0] + y[0]).norm()));
            let e1 = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x[1] - y[1]).norm()));
            rep.theta1_odd = rep.theta1_odd.max(e0 / s0.max(f64::MIN_POSITIVE));
            rep.theta2_even = rep.theta2_even.max(e1 / s1.max(f64::MIN_POSITIVE));
            let w = (self.weight[i] + self.weight[j]).norm() / self.weight[i].norm();
            rep.weight_odd = rep.weight_odd.max(w);
        }
        rep
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub theta1_odd: f64,
    pub theta2_even: f64,
    pub weight_odd: f64,
}

impl ParityReport {
    pub fn worst(&self) -> f64 {
        self.theta1_odd.max(self.theta2_even).max(self.weight_odd)
    }
}

/// `⟨Θ(·, λ), σ₁Φ⟩ = ∫ (Θ₁Φ₂ + Θ₂Φ₁) dr` at every basis node, without
/// complex conjugation.
pub fn forward(phi: &FieldPair, basis: &DistortedBasis) -> Result<Vec<Complex64>> {
    basis.check_grid(phi)?;
    let w = basis.r_grid.trapezoid_weights();
    Ok(basis
        .theta
        .par_iter()
        .map(|th| {
            th.iter()
                .zip(&w)
                .zip(phi.phi.iter().zip(&phi.psi))
                .map(|((t, w), (a, b))| *w * (t[0] * b + t[1] * a))
                .sum()
        })
        .collect())
}

/// Share of `Σ |q w c|·‖Θ‖` carried by the top 5% of `|λ|`.
pub fn tail_estimate(coefficients: &[Complex64], basis: &DistortedBasis) -> f64 {
    let w = basis.r_grid.trapezoid_weights();
    let top = 0.95 * basis.lambda_grid.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let (mut all, mut tail) = (0.0, 0.0);
    for (i, c) in coefficients.iter().enumerate() {
        let th: f64 =
            basis.theta[i].iter().zip(&w).map(|(t, w)| w * (t[0].norm_sqr() + t[1].norm_sqr())).sum::<f64>().sqrt();
        let m = basis.quad_weights[i] * (basis.weight[i] * c).norm() * th;
        all += m;
        if basis.lambda_grid[i].abs() >= top {
            tail += m;
        }
    }
    tail / all.max(f64::MIN_POSITIVE)
}

/// `e^{tℒ}Φ = (1/π) ∫ e^{−itλ} κ/(d⁺d⁻) ⟨Θ, σ₁Φ⟩ Θ dλ` over the mesh.
pub fn evolve(phi: &FieldPair, t: f64, basis: &DistortedBasis) -> Result<FieldPair> {
    if !t.is_finite() {
        return Err(domain("time must be finite"));
    }
    let coef = forward(phi, basis)?;
    let tail = tail_estimate(&coef, basis);
    if tail > basis.tail_tol {
        return Err(Error::Numerical(format!(
            "spectral tail carries {tail:.2e} of the field; raise the cutoff or node count"
        )));
    }
    let n_r = basis.r_grid.len();
    let acc = coef
        .par_iter()
        .enumerate()
        .fold(
            || vec![[ZERO; 2]; n_r],
            |mut acc, (i, c)| {
                let phase = Complex64::from_polar(1.0, -t * basis.lambda_grid[i]);
                let s = phase * basis.weight[i] * c * (basis.quad_weights[i] / PI);
                for (a, th) in acc.iter_mut().zip(&basis.theta[i]) {
                    a[0] += s * th[0];
                    a[1] += s * th[1];
                }
                acc
            },
        )
        .reduce(
            || vec![[ZERO; 2]; n_r],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x[0] += y[0];
                    x[1] += y[1];
                }
                a
            },
        );
    let (p, q) = acc.into_iter().map(|v| (v[0], v[1])).unzip();
    FieldPair::new(basis.r_grid.clone(), p, q)
}

/// As [`evolve`], folding `±λ` together through the parity of `Θ` and of the
/// weight so that only `λ > √17/8` is visited.
pub fn sine_cosine_split(phi: &FieldPair, t: f64, basis: &DistortedBasis, parity_tol: f64) -> Result<FieldPair> {
    basis.check_grid(phi)?;
    let rep = basis.parity_report();
    if rep.worst() > parity_tol {
        return Err(Error::Invariant(format!("basis parity violated at {:.2e}", rep.worst())));
    }
    let w = basis.r_grid.trapezoid_weights();
    let n = basis.len();
    let n_r = basis.r_grid.len();
    let mut out = vec![[ZERO; 2]; n_r];
    for i in n / 2..n {
        let th = &basis.theta[i];
        let (mut a, mut b) = (ZERO, ZERO);
        for ((t, w), (p, q)) in th.iter().zip(&w).zip(phi.phi.iter().zip(&phi.psi)) {
            a += *w * t[0] * q;
            b += *w * t[1] * p;
        }
        let lt = t * basis.lambda_grid[i];
        let (cos, sin) = (lt.cos(), lt.sin());
        let s = basis.weight[i] * (basis.quad_weights[i] / PI);
        let i2 = Complex64::new(0.0, 2.0);
        let f0 = s * (2.0 * b * cos - i2 * a * sin);
        let f1 = s * (2.0 * a * cos - i2 * b * sin);
        for (o, t) in out.iter_mut().zip(th) {
            o[0] += f0 * t[0];
            o[1] += f1 * t[1];
        }
    }
    let (p, q) = out.into_iter().map(|v| (v[0], v[1])).unzip();
    FieldPair::new(basis.r_grid.clone(), p, q)
}
