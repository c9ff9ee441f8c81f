//! Brute-force validators: a finite-difference discretization of `iℒ`, a
//! Crank–Nicolson stepper, the explicit free resolvent kernel and a limiting
//! absorption spot check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::FieldPair;
use crate::dispersion::{roots, THRESHOLD};
use crate::error::{domain, Error, Result};
use crate::grid::RadialGrid;
use crate::ode_engine::{
    coefficients, free_pair, solve_infinity_pair, solve_origin, wronskian_states, FreePotential, Label, Potential,
    SolveOptions, StateVector,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Second-order centered discretization of `L₁`, `L₂` on a uniform interior
/// grid with homogeneous Dirichlet ends.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteOperator {
    pub grid: RadialGrid,
    pub h: f64,
    /// Diagonal potential of `L₂` (acts on `φ`).
    pub q_phi: Vec<f64>,
    /// Diagonal potential of `L₁` (acts on `ψ`).
    pub q_psi: Vec<f64>,
}

impl DiscreteOperator {
    /// Interior nodes of `[r_min, r_max]` at spacing close to `h`.
    pub fn new<P: Potential + ?Sized>(pot: &P, r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) || !(h > 0.0) {
            return Err(domain(format!("bad discretization [{r_min}, {r_max}] with h = {h}")));
        }
        let cells = ((r_max - r_min) / h).round().max(2.0) as usize;
        let h = (r_max - r_min) / cells as f64;
        let nodes: Vec<f64> = (1..cells).map(|i| r_min + i as f64 * h).collect();
        let (q_phi, q_psi) = nodes.iter().map(|&r| coefficients(r, pot)).unzip();
        Ok(Self { grid: RadialGrid::new(nodes)?, h, q_phi, q_psi })
    }

    pub fn len(&self) -> usize {
        self.q_phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_phi.is_empty()
    }

    fn apply_with(&self, q: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let c = 0.5 / (self.h * self.h);
        (0..n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { ZERO };
                let right = if i + 1 < n { v[i + 1] } else { ZERO };
                c * (2.0 * v[i] - left - right) + q[i] * v[i]
            })
            .collect()
    }

    /// `L₁ψ`.
    pub fn apply_l1(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.apply_with(&self.q_psi, v)
    }

    /// `L₂φ`.
    pub fn apply_l2(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.apply_with(&self.q_phi, v)
    }

    /// `ℒu = (L₁ψ, −L₂φ)`.
    pub fn apply(&self, u: &FieldPair) -> Result<FieldPair> {
        self.check(u)?;
        let a = self.apply_l1(&u.psi);
        let b = self.apply_l2(&u.phi).into_iter().map(|v| -v).collect();
        FieldPair::new(self.grid.clone(), a, b)
    }

    /// Gershgorin bound on the spectral radius of `iℒ`.
    pub fn norm_estimate(&self) -> f64 {
        let d = 2.0 / (self.h * self.h);
        let qa = self.q_phi.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        let qb = self.q_psi.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        ((d + qa) * (d + qb)).sqrt()
    }

    fn check(&self, u: &FieldPair) -> Result<()> {
        if u.grid != self.grid {
            return Err(domain("field is not sampled on the operator grid"));
        }
        Ok(())
    }

    /// Real tridiagonal `(sub, diag, sup)` of `L₁` or `L₂`.
    fn tridiagonal(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 / (self.h * self.h);
        (q.iter().map(|q| 2.0 * c + q).collect(), vec![-c; q.len().saturating_sub(1)])
    }
}

/// Eigenvalue scan of the discretized `iℒ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// The `count` eigenvalues of smallest modulus, sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    pub max_imag: f64,
    /// Largest eigenvalue modulus.
    pub scale: f64,
    /// Smallest `|Re λ|` over the whole spectrum.
    pub eta: f64,
    /// Eigenvalues with `|Re λ| < √17/8 − 0.05`.
    pub gap_candidates: Vec<Complex64>,
}

/// Dense eigenvalues of `iℒ` through `L₁L₂`: `iℒ` has eigenvalues `±√μ`
/// for `μ ∈ σ(L₁L₂)`.
pub fn spectrum_scan(op: &DiscreteOperator, count: usize) -> Result<SpectrumReport> {
    let n = op.len();
    if n == 0 {
        return Err(domain("empty discretization"));
    }
    let (d1, e) = op.tridiagonal(&op.q_psi);
    let (d2, _) = op.tridiagonal(&op.q_phi);
    let c = e.first().copied().unwrap_or(0.0);
    // (L₁L₂)_{ij} with both factors tridiagonal.
    let m = DMatrix::from_fn(n, n, |i, j| {
        let l1 = |a: usize, b: usize| if a == b { d1[a] } else if a.abs_diff(b) == 1 { c } else { 0.0 };
        let l2 = |a: usize, b: usize| if a == b { d2[a] } else if a.abs_diff(b) == 1 { c } else { 0.0 };
        if i.abs_diff(j) > 2 {
            return 0.0;
        }
        let lo = i.saturating_sub(1).max(j.saturating_sub(1));
        let hi = (i + 1).min(j + 1).min(n - 1);
        (lo..=hi).map(|k| l1(i, k) * l2(k, j)).sum()
    });
    let mu = m.complex_eigenvalues();
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigenvalue iteration did not converge".into()));
    }
    let mut all: Vec<Complex64> = mu.iter().flat_map(|&m| [m.sqrt(), -m.sqrt()]).collect();
    let max_imag = all.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
    let scale = all.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let eta = all.iter().fold(f64::INFINITY, |a, v| a.min(v.re.abs()));
    let gap_candidates = all.iter().copied().filter(|v| v.re.abs() < THRESHOLD - 0.05).collect();
    all.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    all.truncate(count);
    all.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(SpectrumReport { eigenvalues: all, max_imag, scale, eta, gap_candidates })
}

/// Real banded matrix with `p` sub- and superdiagonals, LU without pivoting.
struct Banded {
    n: usize,
    p: usize,
    a: Vec<f64>,
}

impl Banded {
    fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, a: vec![0.0; n * (2 * p + 1)] }
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (2 * self.p + 1) + (j + self.p - i)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * (2 * self.p + 1) + (j + self.p - i)]
    }

    fn factor(&mut self) -> Result<()> {
        let (n, p) = (self.n, self.p);
        for k in 0..n {
            let piv = self.get(k, k);
            if piv.abs() < 1e-300 {
                return Err(Error::Singular(format!("zero pivot at row {k}")));
            }
            for i in k + 1..(k + p + 1).min(n) {
                let l = self.get(i, k) / piv;
                *self.at(i, k) = l;
                for j in k + 1..(k + p + 1).min(n) {
                    let v = self.get(k, j);
                    *self.at(i, j) -= l * v;
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [Complex64]) {
        let (n, p) = (self.n, self.p);
        for i in 0..n {
            for k in i.saturating_sub(p)..i {
                let bk = b[k];
                b[i] -= self.get(i, k) * bk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + p + 1).min(n) {
                let bk = b[k];
                b[i] -= self.get(i, k) * bk;
            }
            b[i] /= self.get(i, i);
        }
    }
}

/// Crank–Nicolson propagation of `∂ₜU = ℒU` up to time `t`.
pub fn time_step(op: &DiscreteOperator, phi0: &FieldPair, t: f64, dt: f64) -> Result<FieldPair> {
    op.check(phi0)?;
    if !(dt > 0.0) || !t.is_finite() {
        return Err(domain(format!("bad time step dt = {dt}, t = {t}")));
    }
    let steps = (t.abs() / dt).ceil() as usize;
    if steps == 0 {
        return Ok(phi0.clone());
    }
    let tau = 0.5 * t / steps as f64;
    let n = op.len();
    let (d1, e) = op.tridiagonal(&op.q_psi);
    let (d2, _) = op.tridiagonal(&op.q_phi);
    let c = e.first().copied().unwrap_or(0.0);
    // M = I + τ²L₂L₁, pentadiagonal.
    let mut m = Banded::zeros(n, 2);
    let l = |d: &[f64], a: usize, b: usize| if a == b { d[a] } else { c };
    for i in 0..n {
        for j in i.saturating_sub(2)..(i + 3).min(n) {
            let lo = i.saturating_sub(1).max(j.saturating_sub(1));
            let hi = (i + 1).min(j + 1).min(n - 1);
            let s: f64 = (lo..=hi).filter(|&k| k.abs_diff(i) <= 1 && k.abs_diff(j) <= 1).map(|k| l(&d2, i, k) * l(&d1, k, j)).sum();
            *m.at(i, j) = tau * tau * s + if i == j { 1.0 } else { 0.0 };
        }
    }
    m.factor()?;
    let mut a = phi0.phi.clone();
    let mut b = phi0.psi.clone();
    for _ in 0..steps {
        // (I + τℒ)U, then b ← M⁻¹(g − τL₂f), a ← f + τL₁b.
        let l1b = op.apply_l1(&b);
        let l2a = op.apply_l2(&a);
        let f: Vec<Complex64> = a.iter().zip(&l1b).map(|(x, y)| x + tau * y).collect();
        let g: Vec<Complex64> = b.iter().zip(&l2a).map(|(x, y)| x - tau * y).collect();
        let l2f = op.apply_l2(&f);
        b = g.iter().zip(&l2f).map(|(x, y)| x - tau * y).collect();
        m.solve(&mut b);
        let l1b = op.apply_l1(&b);
        a = f.iter().zip(&l1b).map(|(x, y)| x + tau * y).collect();
    }
    FieldPair::new(op.grid.clone(), a, b)
}

/// Errors of `dt`, `dt/2` against `dt/4` and their ratio (≈ 4 for a
/// second-order scheme).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
}

pub fn richardson(op: &DiscreteOperator, phi0: &FieldPair, t: f64, dt: f64) -> Result<Richardson> {
    let u1 = time_step(op, phi0, t, dt)?;
    let u2 = time_step(op, phi0, t, 0.5 * dt)?;
    let u4 = time_step(op, phi0, t, 0.25 * dt)?;
    let coarse = u1.distance(&u2)?;
    let fine = u2.distance(&u4)?;
    Ok(Richardson { coarse, fine, ratio: coarse / fine })
}

/// `u = (iℒ − z)⁻¹f` with its derivative, sampled on the grid of `f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventSolution {
    pub z: Complex64,
    pub u: FieldPair,
    pub du: FieldPair,
    /// Diagonal Wronskians `W(Ψⱼ, φⱼ)` in the kernel.
    pub mu: [Complex64; 2],
}

fn uniform_step(grid: &RadialGrid) -> Result<f64> {
    let r = grid.nodes();
    if r.len() < 8 {
        return Err(domain("resolvent grid needs at least 8 nodes"));
    }
    let h = (r[r.len() - 1] - r[0]) / (r.len() - 1) as f64;
    if r.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-8 * h) {
        return Err(domain("resolvent grid must be uniform"));
    }
    Ok(h)
}

/// Running integrals `∫_{r₀}^{rᵢ} g` with a fourth-order rule.
fn cumulative(g: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = g.len();
    let mut out = vec![ZERO; n];
    for i in 0..n - 1 {
        let s = if i == 0 {
            9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
        } else if i == n - 2 {
            g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]
        } else {
            -g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]
        };
        out[i + 1] = out[i] + h / 24.0 * s;
    }
    out
}

fn pair_sigma1(s: &StateVector, phi: Complex64, psi: Complex64) -> Complex64 {
    s.phi * psi + s.psi * phi
}

/// Variation of parameters with decaying columns `Ψ`, regular columns `F` and
/// `D = W(Ψᵢ, Fⱼ)`:
/// `u = 2i[Ψ(r)D⁻ᵗ∫₀ʳFᵗσ₁f + F(r)D⁻¹∫ᵣ^∞Ψᵗσ₁f]`.
fn green_apply(
    z: Complex64,
    psi: [&[StateVector]; 2],
    reg: [&[StateVector]; 2],
    d: [[Complex64; 2]; 2],
    f: &FieldPair,
) -> Result<ResolventSolution> {
    let h = uniform_step(&f.grid)?;
    let n = f.grid.len();
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    if det.norm() < 1e-300 || !det.is_finite() {
        return Err(Error::Singular(format!("Wronskian matrix is singular at z = {z}")));
    }
    let inv = [[d[1][1] / det, -d[0][1] / det], [-d[1][0] / det, d[0][0] / det]];
    let pair = |cols: [&[StateVector]; 2], j: usize| -> Vec<Complex64> {
        (0..n).map(|i| pair_sigma1(&cols[j][i], f.phi[i], f.psi[i])).collect()
    };
    let a: [Vec<Complex64>; 2] = [cumulative(&pair(reg, 0), h), cumulative(&pair(reg, 1), h)];
    let b: [Vec<Complex64>; 2] = {
        let mk = |j| {
            let c = cumulative(&pair(psi, j), h);
            let total = c[n - 1];
            c.into_iter().map(|v| total - v).collect::<Vec<_>>()
        };
        [mk(0), mk(1)]
    };
    let mut u = vec![StateVector::default(); n];
    for (i, out) in u.iter_mut().enumerate() {
        let mut s = StateVector::default();
        for p in 0..2 {
            // (D⁻ᵗA)_p = Σ_q inv[q][p] A_q, (D⁻¹B)_p = Σ_q inv[p][q] B_q.
            let ca = inv[0][p] * a[0][i] + inv[1][p] * a[1][i];
            let cb = inv[p][0] * b[0][i] + inv[p][1] * b[1][i];
            s = s + ca * psi[p][i] + cb * reg[p][i];
        }
        *out = (2.0 * I) * s;
    }
    let field = |g: fn(&StateVector) -> Complex64, k: fn(&StateVector) -> Complex64| {
        FieldPair::new(f.grid.clone(), u.iter().map(g).collect(), u.iter().map(k).collect())
    };
    Ok(ResolventSolution {
        z,
        u: field(|s| s.phi, |s| s.psi)?,
        du: field(|s| s.dphi, |s| s.dpsi)?,
        mu: [d[0][0], d[1][1]],
    })
}

/// Kernel application of `(iℒ₀ − z)⁻¹` built from the free scalar pairs at
/// `k₁`, `k₂`. `f` must vanish near both ends of its uniform grid.
pub fn free_resolvent_apply(z: Complex64, f: &FieldPair) -> Result<ResolventSolution> {
    if z.im == 0.0 {
        return Err(domain(format!("z = {z} lies on the real axis")));
    }
    let pt = roots(z)?;
    let integ = SolveOptions::default().integrator();
    let mut psi_cols: [Vec<StateVector>; 2] = Default::default();
    let mut reg_cols: [Vec<StateVector>; 2] = Default::default();
    let mut mu = [ZERO; 2];
    for j in 0..2 {
        let fp = free_pair(pt.k[j], &f.grid, &integ)?;
        let c = pt.c[j];
        let lift = |[v, d]: [Complex64; 2]| StateVector::new(v, c * v, d, c * d);
        psi_cols[j] = fp.psi0.iter().copied().map(lift).collect();
        reg_cols[j] = fp.phi0.iter().copied().map(lift).collect();
        mu[j] = (1.0 - c * c) * fp.wronskian_at(f.grid.len() / 2);
    }
    // Cross Wronskians carry the factor 1 − c₁c₂ = 0.
    let d = [[mu[0], ZERO], [ZERO, mu[1]]];
    green_apply(z, [&psi_cols[0], &psi_cols[1]], [&reg_cols[0], &reg_cols[1]], d, f)
}

/// `(iℒ − z)⁻¹f` for a general potential from the decaying and regular
/// branches at `z`.
pub fn resolvent_apply<P: Potential + ?Sized>(pot: &P, z: Complex64, f: &FieldPair, opts: &SolveOptions) -> Result<ResolventSolution> {
    if z.im == 0.0 {
        return Err(domain(format!("z = {z} lies on the real axis")));
    }
    let pt = roots(z)?;
    let (p1, p2) = solve_infinity_pair(&pt, pot, &f.grid, opts)?;
    let f1 = solve_origin(z, Label::Phi1, pot, &f.grid, opts)?;
    let f2 = solve_origin(z, Label::Phi2, pot, &f.grid, opts)?;
    if f1.cutoff.is_some() || f2.cutoff.is_some() {
        return Err(Error::Numerical(format!("regular branches overflow on the grid at z = {z}")));
    }
    let at = f.grid.nodes().partition_point(|&r| r < 1.0).min(f.grid.len() - 1);
    let cols = [&p1.states, &p2.states];
    let regs = [&f1.states, &f2.states];
    let mut d = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] = wronskian_states(&cols[i][at], &regs[j][at]);
        }
    }
    green_apply(z, [&p1.states, &p2.states], [&f1.states, &f2.states], d, f)
}

impl ResolventSolution {
    /// `‖(iℒ − z)u − f‖₂/‖f‖₂` on nodes with `r ≥ 1/4`, with `u''` from
    /// fourth-order differences of the kernel derivative. Closer in `u ∝ r^{3/2}`
    /// defeats the difference stencil, and `f` is expected to vanish there.
    pub fn residual<P: Potential + ?Sized>(&self, pot: &P, f: &FieldPair) -> Result<f64> {
        let h = uniform_step(&f.grid)?;
        let r = f.grid.nodes();
        let n = r.len();
        let d2 = |v: &[Complex64], i: usize| (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
        let iz = I * self.z;
        let (mut num, mut den) = (0.0, 0.0);
        for i in r.partition_point(|&r| r < 0.25).max(2)..n - 2 {
            let (qa, qb) = coefficients(r[i], pot);
            let (u1, u2) = (self.u.phi[i], self.u.psi[i]);
            let rho_phi = d2(&self.du.phi, i) - 2.0 * (qa * u1 - iz * u2) + 2.0 * I * f.psi[i];
            let rho_psi = d2(&self.du.psi, i) - 2.0 * (qb * u2 + iz * u1) - 2.0 * I * f.phi[i];
            num += 0.25 * (rho_phi.norm_sqr() + rho_psi.norm_sqr());
            den += f.phi[i].norm_sqr() + f.psi[i].norm_sqr();
        }
        if den == 0.0 {
            return Err(domain("zero right-hand side"));
        }
        Ok((num / den).sqrt())
    }
}

/// Denominators `W(Ψⱼ, φⱼ)` of the free kernel at `z`.
pub fn free_mu(z: Complex64) -> Result<[Complex64; 2]> {
    let grid = RadialGrid::uniform(0.01, 6.0, 600)?;
    let f = FieldPair::from_fn(&grid, |r| ((-(r - 3.0).powi(2)).exp().into(), ZERO));
    Ok(free_resolvent_apply(z, &f)?.mu)
}

/// Sparse solve of the discretized `(iℒ − z)u = f` on the operator grid.
pub fn discrete_resolvent(op: &DiscreteOperator, z: Complex64, f: &FieldPair) -> Result<FieldPair> {
    op.check(f)?;
    let n = op.len();
    let (d1, e) = op.tridiagonal(&op.q_psi);
    let (d2, _) = op.tridiagonal(&op.q_phi);
    let c = e.first().copied().unwrap_or(0.0);
    // Interleave (φᵢ, ψᵢ): rows iL₁ψ − zφ = f₁ and −iL₂φ − zψ = f₂.
    let m = 2 * n;
    let mut band = vec![[ZERO; 7]; m];
    let idx = |i: usize, j: usize| j + 3 - i;
    for i in 0..n {
        let (rp, rs) = (2 * i, 2 * i + 1);
        band[rp][idx(rp, rp)] = -z;
        band[rp][idx(rp, rs)] = I * d1[i];
        band[rs][idx(rs, rs)] = -z;
        band[rs][idx(rs, rp)] = -I * d2[i];
        if i > 0 {
            band[rp][idx(rp, rs - 2)] = I * c;
            band[rs][idx(rs, rp - 2)] = -I * c;
        }
        if i + 1 < n {
            band[rp][idx(rp, rs + 2)] = I * c;
            band[rs][idx(rs, rp + 2)] = -I * c;
        }
    }
    let mut rhs: Vec<Complex64> = (0..n).flat_map(|i| [f.phi[i], f.psi[i]]).collect();
    // Banded Gaussian elimination with partial pivoting inside the band would
    // widen it; the system is diagonally safe for Im z ≠ 0 at these sizes.
    for k in 0..m {
        let piv = band[k][3];
        if piv.norm() < 1e-300 {
            return Err(Error::Singular(format!("zero pivot at row {k}")));
        }
        for i in k + 1..(k + 4).min(m) {
            let l = band[i][idx(i, k)] / piv;
            if l == ZERO {
                continue;
            }
            for j in k..(k + 4).min(m) {
                let v = band[k][idx(k, j)];
                band[i][idx(i, j)] -= l * v;
            }
            let v = rhs[k];
            rhs[i] -= l * v;
        }
    }
    for k in (0..m).rev() {
        let mut s = rhs[k];
        for j in k + 1..(k + 4).min(m) {
            s -= band[k][idx(k, j)] * rhs[j];
        }
        rhs[k] = s / band[k][3];
    }
    let (phi, psi) = (0..n).map(|i| (rhs[2 * i], rhs[2 * i + 1])).unzip();
    FieldPair::new(op.grid.clone(), phi, psi)
}

/// One row of the limiting absorption table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LapRow {
    pub z: Complex64,
    pub sigma: f64,
    /// `|z|^{1/2}‖⟨r⟩^{−σ}u‖/‖⟨r⟩^{σ}f‖`.
    pub value: f64,
}

/// Weighted resolvent norms on the sweep `re × im`. The far tail of `u` is
/// added analytically from its modulus at the last node.
pub fn lap_check<P: Potential + ?Sized>(
    pot: &P,
    sigma: f64,
    re: &[f64],
    im: &[f64],
    f: &FieldPair,
    opts: &SolveOptions,
) -> Result<Vec<LapRow>> {
    if !(sigma > 0.5) {
        return Err(domain(format!("weight exponent {sigma} must exceed 1/2")));
    }
    let w = f.grid.trapezoid_weights();
    let r = f.grid.nodes();
    let bracket = |r: f64| (1.0 + r * r).sqrt();
    let fnorm: f64 = (0..r.len())
        .map(|i| w[i] * bracket(r[i]).powf(2.0 * sigma) * (f.phi[i].norm_sqr() + f.psi[i].norm_sqr()))
        .sum::<f64>()
        .sqrt();
    let mut rows = Vec::new();
    for &x in re {
        for &y in im {
            let z = Complex64::new(x, y);
            let sol = resolvent_apply(pot, z, f, opts)?;
            let u = &sol.u;
            let mut s: f64 =
                (0..r.len()).map(|i| w[i] * bracket(r[i]).powf(-2.0 * sigma) * (u.phi[i].norm_sqr() + u.psi[i].norm_sqr())).sum();
            let last = r.len() - 1;
            let amp = u.phi[last].norm_sqr() + u.psi[last].norm_sqr();
            s += amp * r[last].powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0);
            rows.push(LapRow { z, sigma, value: z.norm().sqrt() * s.sqrt() / fnorm });
        }
    }
    Ok(rows)
}

/// Free-case counterpart of [`resolvent_apply`] through the general branch
/// solver, for cross-checking the explicit kernel.
pub fn free_resolvent_via_branches(z: Complex64, f: &FieldPair) -> Result<ResolventSolution> {
    resolvent_apply(&FreePotential, z, f, &SolveOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(r: f64, c: f64, w: f64) -> f64 {
        (-((r - c) / w).powi(2)).exp()
    }

    #[test]
    fn banded_lu_solves() {
        let n = 7;
        let mut m = Banded::zeros(n, 2);
        let dense = |i: usize, j: usize| if i == j { 5.0 + i as f64 } else if i.abs_diff(j) <= 2 { 1.0 / (1.0 + i as f64 + j as f64) } else { 0.0 };
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                *m.at(i, j) = dense(i, j);
            }
        }
        m.factor().unwrap();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| dense(i, j) * x[j]).sum()).collect();
        m.solve(&mut b);
        for (a, b) in x.iter().zip(&b) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let g: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64 * h).cos(), 0.0)).collect();
            let c = cumulative(&g, h);
            (0..n).map(|i| (c[i].re - (i as f64 * h).sin()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn free_kernel_solves() {
        let grid = RadialGrid::uniform(0.01, 12.0, 2400).unwrap();
        let f = FieldPair::from_fn(&grid, |r| (bump(r, 3.0, 0.6).into(), Complex64::new(0.0, 0.5 * bump(r, 4.0, 0.5))));
        for z in [Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.3), Complex64::new(0.2, -1.5)] {
            let sol = free_resolvent_apply(z, &f).unwrap();
            let res = sol.residual(&FreePotential, &f).unwrap();
            assert!(res < 1e-5, "z = {z}: residual {res}");
        }
    }

    #[test]
    fn branch_resolvent_matches_kernel() {
        let grid = RadialGrid::uniform(0.01, 12.0, 1200).unwrap();
        let f = FieldPair::from_fn(&grid, |r| (bump(r, 3.0, 0.6).into(), ZERO));
        let z = Complex64::new(1.5, 0.2);
        let a = free_resolvent_apply(z, &f).unwrap();
        let b = free_resolvent_via_branches(z, &f).unwrap();
        let rel = a.u.distance(&b.u).unwrap() / a.u.norm();
        assert!(rel < 1e-6, "rel {rel}");
    }
}
