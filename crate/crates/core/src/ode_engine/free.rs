//! Scalar solutions of `−h'' + 3/(4 sinh²r)·h = k²h`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::RadialGrid;

use super::Integrator;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Regular solution `φ₀ ≈ (kr)^{3/2}` at the origin and outgoing
/// `ψ₀ ≈ e^{ikr}` at infinity, as `(value, derivative)` per node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreePair {
    pub k: Complex64,
    pub grid: RadialGrid,
    pub phi0: Vec<[Complex64; 2]>,
    pub psi0: Vec<[Complex64; 2]>,
}

impl FreePair {
    /// `ψ₀φ₀' − ψ₀'φ₀` at node `i`.
    pub fn wronskian_at(&self, i: usize) -> Complex64 {
        let [p, dp] = self.psi0[i];
        let [f, df] = self.phi0[i];
        p * df - dp * f
    }
}

fn rhs(k: Complex64) -> impl Fn(f64, &[Complex64; 2]) -> [Complex64; 2] {
    move |r, y| {
        let sh = r.sinh();
        [y[1], (0.75 / (sh * sh) - k * k) * y[0]]
    }
}

/// Frobenius data at `r`: `(kr)^{3/2}(1 + a₂r² + a₄r⁴)`.
fn regular_seed(k: Complex64, r: f64) -> [Complex64; 2] {
    let e = -0.25 - k * k;
    let a2 = e / 8.0;
    let a4 = (e * a2 + 1.0 / 20.0) / 24.0;
    let lead = k.powf(1.5);
    let r2 = r * r;
    let v = lead * r.powf(1.5) * (1.0 + a2 * r2 + a4 * r2 * r2);
    let d = lead * (1.5 * r.sqrt() + 3.5 * a2 * r.powf(2.5) + 5.5 * a4 * r.powf(4.5));
    [v, d]
}

/// `e^{ikr}(1 + 3e^{−2r}/(4 − 4ik))` and its derivative.
fn outgoing_seed(k: Complex64, r: f64) -> [Complex64; 2] {
    let a = 3.0 / (4.0 - 4.0 * I * k);
    let e = (I * k * r).exp();
    let t = (-2.0 * r).exp();
    [e * (1.0 + a * t), e * (I * k * (1.0 + a * t) - 2.0 * a * t)]
}

/// Free scalar pair on `grid`.
pub fn free_pair(k: Complex64, grid: &RadialGrid, integrator: &Integrator) -> Result<FreePair> {
    if k.norm() == 0.0 || !k.is_finite() {
        return Err(domain("free pair requires k ≠ 0"));
    }
    let f = rhs(k);
    let r_init = (1e-3f64).min(0.1 / (1.0 + k.norm()));
    let nodes = grid.nodes();
    let split = nodes.partition_point(|&r| r <= r_init);
    let mut phi0: Vec<[Complex64; 2]> = nodes[..split].iter().map(|&r| regular_seed(k, r)).collect();
    phi0.extend(integrator.through(&f, r_init, regular_seed(k, r_init), &nodes[split..])?);

    let r_seed = grid.r_max().max(20.0);
    let mut inward: Vec<f64> = nodes.iter().rev().copied().collect();
    let n_far = inward.iter().take_while(|&&r| r >= r_seed).count();
    let far: Vec<_> = inward.drain(..n_far).map(|r| outgoing_seed(k, r)).collect();
    let mut psi0 = far;
    psi0.extend(integrator.through(&f, r_seed, outgoing_seed(k, r_seed), &inward)?);
    psi0.reverse();
    Ok(FreePair { k, grid: grid.clone(), phi0, psi0 })
}
