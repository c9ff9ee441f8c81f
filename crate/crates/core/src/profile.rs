//! Degree-n vortex profile by shooting, and the derived kernel functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::RadialGrid;
use crate::ode_engine::{Flow, Integrator, Potential};

/// `u''` for `½u'' + ½coth(r)u' − n²u/(2sinh²r) + u − u³ = 0`.
pub fn vortex_rhs(r: f64, u: f64, du: f64, n: u32) -> Result<f64> {
    if r <= 0.0 || r.is_nan() {
        return Err(domain(format!("profile equation evaluated at r = {r}")));
    }
    Ok(rhs(r, u, du, n))
}

#[inline]
fn rhs(r: f64, u: f64, du: f64, n: u32) -> f64 {
    let sh = r.sinh();
    let nn = (n * n) as f64;
    -du * r.cosh() / sh + nn * u / (sh * sh) - 2.0 * u + 2.0 * u * u * u
}

/// `u ≈ α(rⁿ + β r^{n+2})` near the origin.
fn series_beta(n: u32) -> f64 {
    let nf = n as f64;
    -(2.0 + nf * (nf + 1.0) / 3.0) / (4.0 * (nf + 1.0))
}

fn series(alpha: f64, n: u32, r: f64) -> (f64, f64) {
    let nf = n as f64;
    let b = series_beta(n);
    let rn = r.powi(n as i32);
    (alpha * rn * (1.0 + b * r * r), alpha * r.powi(n as i32 - 1) * (nf + (nf + 2.0) * b * r * r))
}

/// Decay rate `(1 + √17)/2` of the homogeneous linearization about ρ = 1.
pub const TAIL_RATE: f64 = 2.561_552_812_808_830_3;

/// Far field `1 − 2n²e^{−2r} + 2n⁴e^{−4r} + K e^{−γr}` with two derivatives.
fn far_field(n: u32, k_tail: f64, r: f64) -> (f64, f64, f64) {
    let nn = (n * n) as f64;
    let c = 2.0 * nn * (-2.0 * r).exp();
    let d = 2.0 * nn * nn * (-4.0 * r).exp();
    let e = k_tail * (-TAIL_RATE * r).exp();
    (
        1.0 - c + d + e,
        2.0 * c - 4.0 * d - TAIL_RATE * e,
        -4.0 * c + 16.0 * d + TAIL_RATE * TAIL_RATE * e,
    )
}

const R_INIT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShootOutcome {
    Oscillates,
    BlowsUp,
    MonotoneBounded,
}

/// Margin above 1 that counts as blow-up.
pub const BLOW_MARGIN: f64 = 1e-6;

fn shooting_integrator() -> Integrator {
    Integrator { h_max: 0.1, ..Integrator::with_tol(1e-300, 1e-14) }
}

/// Classify the solution started from `α rⁿ` up to `r_cap`.
pub fn shoot(alpha: f64, n: u32, r_cap: f64) -> Result<ShootOutcome> {
    if !(alpha > 0.0) || n == 0 {
        return Err(domain(format!("shooting needs α > 0 and n ≥ 1, got α = {alpha}, n = {n}")));
    }
    let turning = (n as f64 / std::f64::consts::SQRT_2).asinh();
    if !(r_cap > turning) {
        return Err(domain(format!("r_cap = {r_cap} must exceed asinh(n/√2) = {turning:.4}")));
    }
    let (u0, du0) = series(alpha, n, R_INIT);
    let mut outcome = ShootOutcome::MonotoneBounded;
    let res = shooting_integrator().run(
        |r, y: &[f64; 2]| [y[1], rhs(r, y[0], y[1], n)],
        R_INIT,
        [u0, du0],
        r_cap,
        |_, y| {
            if y[1] <= 0.0 && y[0] < 1.0 {
                outcome = ShootOutcome::Oscillates;
                Flow::Stop
            } else if y[0] > 1.0 + BLOW_MARGIN {
                outcome = ShootOutcome::BlowsUp;
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    );
    match res {
        Ok((_, y)) => {
            if outcome == ShootOutcome::MonotoneBounded && y[0] > 1.0 {
                Ok(ShootOutcome::BlowsUp)
            } else {
                Ok(outcome)
            }
        }
        Err(e) => {
            if outcome == ShootOutcome::BlowsUp {
                Ok(outcome)
            } else {
                Err(e)
            }
        }
    }
}

/// Bisection bracket for the shooting parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBracket {
    pub alpha_star: f64,
    pub lo: f64,
    pub hi: f64,
}

const SHOOT_CAP: f64 = 30.0;

/// Bisect the boundary between oscillating and blowing-up shots.
pub fn find_alpha(n: u32, tol: f64) -> Result<AlphaBracket> {
    if !(tol > 0.0) {
        return Err(domain("find_alpha needs tol > 0"));
    }
    let ladder: Vec<f64> = (0..30).map(|k| 0.02 * 1.5f64.powi(k)).collect();
    let classes = ladder.par_iter().map(|&a| shoot(a, n, SHOOT_CAP)).collect::<Result<Vec<_>>>()?;
    let pos = classes
        .windows(2)
        .position(|w| w[0] == ShootOutcome::Oscillates && w[1] == ShootOutcome::BlowsUp)
        .ok_or_else(|| {
            let report: Vec<String> = ladder.iter().zip(&classes).map(|(a, c)| format!("{a:.4}:{c:?}")).collect();
            Error::NoBracket(report.join(", "))
        })?;
    let (mut lo, mut hi) = (ladder[pos], ladder[pos + 1]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, n, SHOOT_CAP)? {
            ShootOutcome::Oscillates => lo = mid,
            ShootOutcome::BlowsUp => hi = mid,
            ShootOutcome::MonotoneBounded => return Ok(AlphaBracket { alpha_star: mid, lo, hi }),
        }
    }
    Ok(AlphaBracket { alpha_star: 0.5 * (lo + hi), lo, hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Bisection tolerance on α; the default bisects to machine precision.
    pub tol: f64,
    /// Far-field continuation starts at `switch_fraction · r_max`, capped by `switch_cap`.
    pub switch_fraction: f64,
    pub switch_cap: f64,
    /// Width of the smooth blend into the far field.
    pub blend: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { tol: 1e-15, switch_fraction: 0.75, switch_cap: 6.0, blend: 1.0 }
    }
}

/// Sampled vortex profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VortexProfile {
    pub n: u32,
    pub alpha_star: f64,
    pub grid: RadialGrid,
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    /// Radius where the far-field blend begins.
    pub r_switch: f64,
    /// Coefficient of the homogeneous `e^{−γr}` tail fitted at `r_switch`.
    pub k_tail: f64,
}

/// `C²` step from 0 to 1 on `[0, 1]`.
fn smoothstep(x: f64) -> (f64, f64, f64) {
    let x = x.clamp(0.0, 1.0);
    let x2 = x * x;
    (x2 * x * (10.0 - 15.0 * x + 6.0 * x2), 30.0 * x2 * (1.0 - x) * (1.0 - x), 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x))
}

/// Profile on `grid` from the shooting parameter.
pub fn build_profile(n: u32, grid: &RadialGrid, opts: &ProfileOptions) -> Result<VortexProfile> {
    let bracket = find_alpha(n, opts.tol)?;
    profile_from_alpha(n, bracket.alpha_star, grid, opts)
}

/// Profile on `grid` for a given shooting parameter.
pub fn profile_from_alpha(n: u32, alpha: f64, grid: &RadialGrid, opts: &ProfileOptions) -> Result<VortexProfile> {
    let r_switch = (opts.switch_fraction * grid.r_max()).min(opts.switch_cap);
    let r_end = r_switch + opts.blend;
    let r_init = R_INIT.min(grid.r_min());
    let nodes = grid.nodes();
    let near: Vec<f64> = nodes.iter().copied().filter(|&r| r > r_init && r <= r_end).collect();
    let (u0, du0) = series(alpha, n, r_init);
    let integ = shooting_integrator();
    let sol = integ.through(|r, y: &[f64; 2]| [y[1], rhs(r, y[0], y[1], n)], r_init, [u0, du0], &near)?;
    let (u_s, _) = if r_switch <= r_init {
        series(alpha, n, r_switch)
    } else {
        let y = integ.through(|r, y: &[f64; 2]| [y[1], rhs(r, y[0], y[1], n)], r_init, [u0, du0], &[r_switch])?[0];
        (y[0], y[1])
    };
    let k_tail = (u_s - far_field(n, 0.0, r_switch).0) * (TAIL_RATE * r_switch).exp();
    let mut rho = Vec::with_capacity(grid.len());
    let mut rho_prime = Vec::with_capacity(grid.len());
    let mut it = sol.iter();
    for &r in nodes {
        let (u, du) = if r <= r_init {
            series(alpha, n, r)
        } else if r <= r_end {
            let y = it.next().expect("one state per near node");
            (y[0], y[1])
        } else {
            (0.0, 0.0)
        };
        let (f, df, _) = far_field(n, k_tail, r);
        let (w, dw, _) = smoothstep((r - r_switch) / opts.blend);
        let dw = dw / opts.blend;
        rho.push((1.0 - w) * u + w * f);
        rho_prime.push((1.0 - w) * du + w * df + dw * (f - u));
    }
    let profile = VortexProfile { n, alpha_star: alpha, grid: grid.clone(), rho, rho_prime, r_switch, k_tail };
    profile.check_invariants()?;
    Ok(profile)
}

/// Residual statistics of a sampled profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_interior: f64,
    pub at_radius: f64,
}

impl VortexProfile {
    fn check_invariants(&self) -> Result<()> {
        for (i, (&u, &du)) in self.rho.iter().zip(&self.rho_prime).enumerate() {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::Invariant(format!("ρ = {u} outside (0, 1) at node {i} (r = {})", self.grid.nodes()[i])));
            }
            if !(du > 0.0) {
                return Err(Error::Invariant(format!("ρ' = {du} not positive at node {i} (r = {})", self.grid.nodes()[i])));
            }
        }
        Ok(())
    }

    /// `(ρ, ρ', ρ'')` at any `r > 0`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let nodes = self.grid.nodes();
        if r <= nodes[0] {
            let (u, du) = series(self.alpha_star, self.n, r);
            return (u, du, rhs(r, u, du, self.n));
        }
        if r >= self.grid.r_max() {
            return far_field(self.n, self.k_tail, r);
        }
        let i = nodes.partition_point(|&x| x <= r).saturating_sub(1).min(nodes.len() - 2);
        let (a, b) = (nodes[i], nodes[i + 1]);
        let h = b - a;
        let t = (r - a) / h;
        let dd = |j: usize| rhs(nodes[j], self.rho[j], self.rho_prime[j], self.n);
        let (p0, p1) = (self.rho[i], self.rho[i + 1]);
        let (m0, m1) = (self.rho_prime[i] * h, self.rho_prime[i + 1] * h);
        let (a0, a1) = (dd(i) * h * h, dd(i + 1) * h * h);
        let (v, d1, d2) = quintic_hermite(t, p0, p1, m0, m1, a0, a1);
        (v, d1 / h, d2 / (h * h))
    }

    /// ODE residual at grid nodes from sixth-order differences of `ρ'`,
    /// skipping the first `skip` and last three nodes.
    pub fn residual(&self, skip: usize) -> ResidualReport {
        let r = self.grid.nodes();
        let n = r.len();
        let mut worst = ResidualReport { max_interior: 0.0, at_radius: r[0] };
        for i in skip.max(3)..n.saturating_sub(3) {
            let h = r[i + 1] - r[i];
            let uniform = (-3..3).all(|k: i64| {
                let a = (i as i64 + k) as usize;
                ((r[a + 1] - r[a]) - h).abs() <= 1e-9 * h
            });
            let d2 = if uniform {
                let p = |k: i64| self.rho_prime[(i as i64 + k) as usize];
                (-p(-3) + 9.0 * p(-2) - 45.0 * p(-1) + 45.0 * p(1) - 9.0 * p(2) + p(3)) / (60.0 * h)
            } else {
                let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
                (self.rho_prime[i + 1] - self.rho_prime[i - 1]) / (hm + hp)
            };
            let res = (d2 - rhs(r[i], self.rho[i], self.rho_prime[i], self.n)).abs();
            if res > worst.max_interior {
                worst = ResidualReport { max_interior: res, at_radius: r[i] };
            }
        }
        worst
    }
}

fn quintic_hermite(t: f64, p0: f64, p1: f64, m0: f64, m1: f64, a0: f64, a1: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let dh = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let d2h = [
        -60.0 * t + 180.0 * t2 - 120.0 * t3,
        -36.0 * t + 96.0 * t2 - 60.0 * t3,
        1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
        3.0 * t - 12.0 * t2 + 10.0 * t3,
        -24.0 * t + 84.0 * t2 - 60.0 * t3,
        60.0 * t - 180.0 * t2 + 120.0 * t3,
    ];
    let c = [p0, m0, a0, a1, m1, p1];
    let dot = |b: &[f64; 6]| b.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>();
    (dot(&h), dot(&dh), dot(&d2h))
}

impl Potential for VortexProfile {
    fn eval(&self, r: f64) -> (f64, f64) {
        let (u, _, _) = VortexProfile::eval(self, r);
        let v1 = u * u - 1.0;
        (v1, 3.0 * v1)
    }

    fn origin_series(&self) -> [f64; 4] {
        let v12 = if self.n == 1 { self.alpha_star * self.alpha_star } else { 0.0 };
        [-1.0, v12, -3.0, 3.0 * v12]
    }

    fn decay_radius(&self, eps: f64) -> f64 {
        0.5 * (12.0 * (self.n * self.n) as f64 / eps).ln()
    }

    fn fingerprint(&self) -> String {
        format!(
            "vortex:n={}:alpha={:016x}:nodes={}:rmin={:016x}:rmax={:016x}:switch={:016x}:tail={:016x}",
            self.n,
            self.alpha_star.to_bits(),
            self.grid.len(),
            self.grid.r_min().to_bits(),
            self.grid.r_max().to_bits(),
            self.r_switch.to_bits(),
            self.k_tail.to_bits()
        )
    }
}

/// `ρ̃ = sinh^{1/2}(r)·ρ` and `g = 2ρ̃∫_r^∞ ρ̃⁻²`, both solving `𝔏₁f = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuxSolutions {
    pub grid: RadialGrid,
    /// `(ρ̃, ρ̃')` per node.
    pub rho_tilde: Vec<[f64; 2]>,
    /// `(g, g')` per node.
    pub g: Vec<[f64; 2]>,
}

impl AuxSolutions {
    /// `ρ̃g' − ρ̃'g` at node `i`.
    pub fn wronskian_at(&self, i: usize) -> f64 {
        self.rho_tilde[i][0] * self.g[i][1] - self.rho_tilde[i][1] * self.g[i][0]
    }
}

fn rho_tilde_at(p: &VortexProfile, r: f64) -> (f64, f64) {
    let (u, du, _) = p.eval(r);
    let s = r.sinh().sqrt();
    (s * u, 0.5 * r.cosh() / s * u + s * du)
}

pub fn aux_solutions(profile: &VortexProfile) -> Result<AuxSolutions> {
    let nodes = profile.grid.nodes();
    let rule = gauss_quad::GaussLegendre::new(8).map_err(|e| Error::Numerical(e.to_string()))?;
    let r_max = profile.grid.r_max();
    let nn = (profile.n * profile.n) as f64;
    let mut tail = 2.0 * (-r_max).exp() + (2.0 / 3.0) * (1.0 + 4.0 * nn) * (-3.0 * r_max).exp();
    let mut integral = vec![0.0; nodes.len()];
    integral[nodes.len() - 1] = tail;
    for i in (0..nodes.len() - 1).rev() {
        tail += rule.integrate(nodes[i], nodes[i + 1], |s| {
            let (rt, _) = rho_tilde_at(profile, s);
            1.0 / (rt * rt)
        });
        integral[i] = tail;
    }
    let mut rho_tilde = Vec::with_capacity(nodes.len());
    let mut g = Vec::with_capacity(nodes.len());
    for (&r, &int) in nodes.iter().zip(&integral) {
        let (rt, drt) = rho_tilde_at(profile, r);
        rho_tilde.push([rt, drt]);
        g.push([2.0 * rt * int, 2.0 * drt * int - 2.0 / rt]);
    }
    Ok(AuxSolutions { grid: profile.grid.clone(), rho_tilde, g })
}

/// Coefficient of `𝔏₁ = −½∂² + 3/(8sinh²r) + 1/8 + V₁`.
pub fn l1_coefficient(profile: &VortexProfile, r: f64) -> f64 {
    let sh = r.sinh();
    let (v1, _) = Potential::eval(profile, r);
    0.375 / (sh * sh) + 0.125 + v1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_spot_values() {
        assert_eq!(vortex_rhs(1.0, 0.0, 0.0, 1).unwrap(), 0.0);
        assert!(vortex_rhs(40.0, 1.0, 0.0, 1).unwrap().abs() < 1e-30);
        assert!(vortex_rhs(0.0, 0.5, 0.0, 1).is_err());
    }

    #[test]
    fn series_coefficient_matches_tanh() {
        assert!((series_beta(1) + 1.0 / 3.0).abs() < 1e-15);
        let (u, du) = series(1.0, 1, 1e-3);
        assert!((u - 1e-3f64.tanh()).abs() < 5e-16);
        assert!((du - 1.0 / 1e-3f64.cosh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn shooting_extremes() {
        assert_eq!(shoot(0.01, 1, 12.0).unwrap(), ShootOutcome::Oscillates);
        assert_eq!(shoot(20.0, 1, 12.0).unwrap(), ShootOutcome::BlowsUp);
        assert!(shoot(1.0, 1, 0.5).is_err());
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) + 0.3 * x.powi(4) - 0.7 * x.powi(5);
        let df = |x: f64| 1.0 - 4.0 * x + 1.5 * x * x + 1.2 * x.powi(3) - 3.5 * x.powi(4);
        let d2f = |x: f64| -4.0 + 3.0 * x + 3.6 * x * x - 14.0 * x.powi(3);
        for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let (v, d, dd) = quintic_hermite(t, f(0.0), f(1.0), df(0.0), df(1.0), d2f(0.0), d2f(1.0));
            assert!((v - f(t)).abs() < 1e-13 && (d - df(t)).abs() < 1e-12 && (dd - d2f(t)).abs() < 1e-11);
        }
    }
}
