//! Wronskian tables between origin and infinity branches on the spectrum.

mod exact;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{boundary_roots, prefactors, Limit, SpectralPoint};
use crate::error::{domain, Error, Result};
use crate::grid::RadialGrid;
use crate::ode_engine::{
    solve_infinity_pair, solve_origin, wronskian_states, Label, Potential, SolutionBranch, SolveOptions, StateVector,
};

pub use exact::{Exact, Rational};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mean Wronskian over a set of radii with its spread.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WronskianValue {
    pub value: Complex64,
    /// `max |W(r) − W̄| / |W̄|` over the evaluation radii.
    pub drift: f64,
    /// Mean of `|F(r)|·|G(r)|`; `|W̄|` far below it signals cancellation.
    pub scale: f64,
}

impl WronskianValue {
    /// Drift measured against `max(|W̄|, floor·scale)`, usable for
    /// Wronskians that vanish identically.
    pub fn drift_floored(&self, floor: f64) -> f64 {
        let v = self.value.norm();
        if v >= floor * self.scale {
            self.drift
        } else {
            self.drift * v / (floor * self.scale)
        }
    }
}

fn wronskian_of_states(pairs: impl Iterator<Item = (StateVector, StateVector)>) -> WronskianValue {
    let (mut ws, mut scale) = (Vec::new(), 0.0);
    for (f, g) in pairs {
        ws.push(wronskian_states(&f, &g));
        scale += f.norm() * g.norm();
    }
    let n = ws.len().max(1) as f64;
    let mean = ws.iter().sum::<Complex64>() / n;
    let spread = ws.iter().fold(0.0f64, |m, w| m.max((w - mean).norm()));
    let drift = if mean.norm() > 0.0 { spread / mean.norm() } else if spread > 0.0 { f64::INFINITY } else { 0.0 };
    WronskianValue { value: mean, drift, scale: scale / n }
}

/// Wronskian of two branches averaged over `r_eval`.
pub fn wronskian(f: &SolutionBranch, g: &SolutionBranch, r_eval: &[f64]) -> Result<WronskianValue> {
    if (f.z - g.z).norm() > 1e-14 * (1.0 + f.z.norm()) {
        return Err(domain(format!("branches at different spectral parameters {} and {}", f.z, g.z)));
    }
    if r_eval.is_empty() {
        return Err(domain("no evaluation radii"));
    }
    let states = r_eval
        .iter()
        .map(|&r| match (f.state_at(r), g.state_at(r)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(domain(format!("radius {r} not carried by both {:?} and {:?}", f.label, g.label))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(wronskian_of_states(states.into_iter()))
}

/// Geometric ladder of evaluation radii where both branch families are accurate.
pub fn ladder(pt: &SpectralPoint, points: usize) -> Vec<f64> {
    let r_b = (8.0 / pt.k2().im).min(4.0);
    let r_a = 0.25 * r_b;
    let q = (r_b / r_a).powf(1.0 / (points.max(2) - 1) as f64);
    (0..points.max(2)).map(|i| r_a * q.powi(i as i32)).collect()
}

/// Radius beyond which the distorted basis is continued with infinity branches.
pub fn matching_radius(pt: &SpectralPoint) -> f64 {
    (9.0 / pt.k2().im).clamp(1.0, 6.0)
}

/// Closed-form fundamental system at `z = ±√17/8`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSystem {
    pub limit: Limit,
    /// `(value, derivative)` coefficient vectors of `f_j = (u + r·u') e^{i k_j r}`
    /// written as `u`, `u'`, and the exponent `k_j`.
    pub vectors: [ThresholdVector; 4],
    /// `W(f_i, f_j)`, `None` when the pairing depends on `r`.
    pub gram: [[Option<Exact>; 4]; 4],
    pub d1: Exact,
    pub d2: Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdVector {
    pub value: [Exact; 2],
    /// Coefficient of the secular term `r·value`, zero or one.
    pub secular: bool,
    pub k: Exact,
}

impl ThresholdVector {
    /// Numerical state at radius `r`.
    pub fn state(&self, r: f64) -> StateVector {
        let k = self.k.to_complex();
        let e = (Complex64::i() * k * r).exp();
        let [a, b] = [self.value[0].to_complex(), self.value[1].to_complex()];
        let (v, d) = if self.secular { (r, 1.0) } else { (1.0, 0.0) };
        let ik = Complex64::i() * k;
        StateVector::new(a * v * e, b * v * e, a * (d + ik * v) * e, b * (d + ik * v) * e)
    }
}

/// Exact Wronskian of two threshold vectors when it is constant in `r`.
fn exact_wronskian(f: &ThresholdVector, g: &ThresholdVector) -> Option<Exact> {
    let i = Exact::i();
    let bil = |a: &[Exact; 2], b: &[Exact; 2]| &(&a[0] * &b[0]) - &(&a[1] * &b[1]);
    let form = bil(&f.value, &g.value);
    // W = e^{i(k_f+k_g)r}·form·[(v_f d_g − d_f v_g) + i(k_g − k_f) v_f v_g], v = r or 1.
    let ksum = &f.k + &g.k;
    let kdiff = &(&g.k - &f.k) * &i;
    if form.is_zero() || f == g {
        return Some(Exact::zero());
    }
    if !ksum.is_zero() {
        return None;
    }
    match (f.secular, g.secular) {
        (false, false) => Some(&form * &kdiff),
        (false, true) | (true, false) if kdiff.is_zero() => {
            let s = if g.secular { Exact::int(1) } else { Exact::int(-1) };
            Some(&form * &s)
        }
        (true, true) if kdiff.is_zero() => Some(Exact::zero()),
        _ => None,
    }
}

/// Fundamental system at the threshold `±√17/8` selected by `limit`, with the
/// inverse Wronskians `d₁ = 1/W(f₁, f₃)`, `d₂ = 1/W(f₂, f₄)`.
pub fn threshold_system(limit: Limit) -> ThresholdSystem {
    let s = match limit {
        Limit::Plus => 1,
        Limit::Minus => -1,
    };
    let one = Exact::int(1);
    let c1 = Exact::surd(Rational::int(-s), 17, true);
    let c2 = Exact::surd(Rational::new(s, 17), 17, true);
    let k2 = Exact::surd(Rational::new(3, 2), 2, true);
    let slow = [one.clone(), c1];
    let fast = [one, c2];
    let vectors = [
        ThresholdVector { value: slow.clone(), secular: false, k: Exact::zero() },
        ThresholdVector { value: fast.clone(), secular: false, k: k2.clone() },
        ThresholdVector { value: slow, secular: true, k: Exact::zero() },
        ThresholdVector { value: fast, secular: false, k: -&k2 },
    ];
    let gram: [[Option<Exact>; 4]; 4] =
        std::array::from_fn(|i| std::array::from_fn(|j| exact_wronskian(&vectors[i], &vectors[j])));
    let inv = |w: &Option<Exact>| w.as_ref().and_then(Exact::recip).expect("threshold Wronskian is a single surd");
    let d1 = inv(&gram[0][2]);
    let d2 = inv(&gram[1][3]);
    ThresholdSystem { limit, vectors, gram, d1, d2 }
}

/// Per-point solver configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionOptions {
    pub solve: SolveOptions,
    pub ladder_points: usize,
    /// Reject `|d| < singular_floor·(|ω₁₁ω₂₂| + |ω₁₂ω₂₁|)`.
    pub singular_floor: f64,
}

impl Default for ConnectionOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), ladder_points: 5, singular_floor: 1e-10 }
    }
}

/// Decaying and origin branches at one `λ + i0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSet {
    pub lambda: f64,
    pub point: SpectralPoint,
    pub psi1: SolutionBranch,
    pub psi2: SolutionBranch,
    /// `φ₁..φ₄`
    pub phi: [SolutionBranch; 4],
    pub ladder: Vec<f64>,
    pub r_match: f64,
}

impl BranchSet {
    /// Integrate all branches at `λ + i0`. Infinity branches cover `outer`
    /// (if given) together with the Wronskian ladder; origin branches stop at
    /// the larger of the ladder top and the matching radius.
    pub fn solve<P: Potential + ?Sized>(
        lambda: f64,
        pot: &P,
        outer: Option<&RadialGrid>,
        opts: &ConnectionOptions,
    ) -> Result<Self> {
        let point = prefactors(boundary_roots(lambda, Limit::Plus)?)?;
        let ladder = ladder(&point, opts.ladder_points);
        let r_match = matching_radius(&point);
        let mut extra = ladder.clone();
        extra.push(r_match);
        let full = match outer {
            Some(g) => g.with_extra(&extra)?,
            None => {
                extra.sort_by(f64::total_cmp);
                RadialGrid::new(extra.clone())?.with_extra(&[])?
            }
        };
        let r_inner = r_match.max(ladder[ladder.len() - 1]);
        let inner_nodes: Vec<f64> = full.nodes().iter().copied().filter(|&r| r <= r_inner * (1.0 + 1e-12)).collect();
        let inner = RadialGrid::new(inner_nodes)?;
        let (psi1, psi2) = solve_infinity_pair(&point, pot, &full, &opts.solve)?;
        let z = point.z;
        let phi = [Label::Phi1, Label::Phi2, Label::Phi3, Label::Phi4]
            .map(|l| solve_origin(z, l, pot, &inner, &opts.solve));
        let [p1, p2, p3, p4] = phi;
        let phi = [p1?, p2?, p3?, p4?];
        if let Some(b) = phi.iter().find(|b| b.cutoff.is_some()) {
            return Err(Error::Numerical(format!("{:?} overflowed before r = {r_inner}", b.label)));
        }
        Ok(Self { lambda, point, psi1, psi2, phi, ladder, r_match })
    }

    /// The set at `−λ + i0`, from `F(·, −λ) = conj F(·, λ)` for real potentials.
    pub fn conjugate(&self) -> Result<Self> {
        let point = prefactors(boundary_roots(-self.lambda, Limit::Plus)?)?;
        Ok(Self {
            lambda: -self.lambda,
            point,
            psi1: self.psi1.conjugate(),
            psi2: self.psi2.conjugate(),
            phi: self.phi.clone().map(|b| b.conjugate()),
            ladder: self.ladder.clone(),
            r_match: self.r_match,
        })
    }
}

/// Wronskians among the decaying branches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuTable {
    pub mu11: Complex64,
    pub mu12: Complex64,
    pub mu13: Complex64,
    pub mu22: Complex64,
    pub mu23: Complex64,
    /// From the asymptotic normalization of `Ψ₄`, which is not integrated.
    pub mu24: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionData {
    pub lambda: f64,
    pub point: SpectralPoint,
    /// `ω⁺_ij = W(Ψ⁺_i, φ_j)`, `i = 1, 2`, `j = 1..4`.
    pub omega_plus: [[Complex64; 4]; 2],
    pub omega_minus: [[Complex64; 4]; 2],
    pub mu: MuTable,
    /// `Λ_ij = W(φ_i, φ_j)`
    pub lambda_table: [[Complex64; 4]; 4],
    pub d_plus_matrix: [[Complex64; 2]; 2],
    pub d_minus_matrix: [[Complex64; 2]; 2],
    pub d_plus: Complex64,
    pub d_minus: Complex64,
    /// `(|ω₁₁ω₂₂| + |ω₁₂ω₂₁|)/|d|` for each side.
    pub condition: [f64; 2],
    pub kappa: Complex64,
    /// `κ/(d⁺d⁻)`
    pub weight: Complex64,
    /// Largest relative drift over the Wronskians that do not vanish identically.
    pub max_drift: f64,
    pub ladder: Vec<f64>,
}

impl ConnectionData {
    /// `min |d^±|` in units of the uncertainty implied by the Wronskian drift.
    pub fn determinant_margin(&self) -> f64 {
        let drift = self.max_drift.max(f64::EPSILON);
        1.0 / (drift * self.condition[0].max(self.condition[1]))
    }
}

fn det2(m: &[[Complex64; 2]; 2]) -> (Complex64, f64) {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0] * m[1][1]).norm() + (m[0][1] * m[1][0]).norm();
    (d, scale)
}

/// Connection data at `λ` from the sets at `λ` and `−λ`.
pub fn connection_from(set: &BranchSet, mirror: &BranchSet, opts: &ConnectionOptions) -> Result<ConnectionData> {
    if (set.lambda + mirror.lambda).abs() > 1e-14 * set.lambda.abs() {
        return Err(domain("mirror branch set is not at −λ"));
    }
    let r = &set.ladder;
    let mut drift: f64 = 0.0;
    let mut w = |f: &SolutionBranch, g: &SolutionBranch| -> Result<Complex64> {
        let v = wronskian(f, g, r)?;
        if v.value.norm() > 1e-8 * v.scale {
            drift = drift.max(v.drift);
        }
        Ok(v.value)
    };
    // Ψ⁻_i(λ) = σ₃Ψ⁺_i(−λ), a solution at λ.
    let minus1 = mirror.psi1.reflect();
    let minus2 = mirror.psi2.reflect();
    let mut omega_plus = [[ZERO; 4]; 2];
    let mut omega_minus = [[ZERO; 4]; 2];
    for j in 0..4 {
        omega_plus[0][j] = w(&set.psi1, &set.phi[j])?;
        omega_plus[1][j] = w(&set.psi2, &set.phi[j])?;
        omega_minus[0][j] = w(&minus1, &set.phi[j])?;
        omega_minus[1][j] = w(&minus2, &set.phi[j])?;
    }
    let mut lambda_table = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            lambda_table[i][j] = w(&set.phi[i], &set.phi[j])?;
            lambda_table[j][i] = -lambda_table[i][j];
        }
    }
    // Ψ₃ realized as −σ₃Ψ⁺₁(−λ), the reflected slow branch.
    let psi3 = minus1.scaled(Complex64::new(-1.0, 0.0));
    let mu = MuTable {
        mu11: ZERO,
        mu12: wronskian(&set.psi1, &set.psi2, r)?.value,
        mu13: w(&set.psi1, &psi3)?,
        mu22: ZERO,
        mu23: wronskian(&set.psi2, &psi3, r)?.value,
        mu24: set.point.alpha,
    };
    let kappa = w(&minus1, &set.psi1)?;
    let pick = |o: &[[Complex64; 4]; 2]| [[o[0][0], o[0][1]], [o[1][0], o[1][1]]];
    let d_plus_matrix = pick(&omega_plus);
    let d_minus_matrix = pick(&omega_minus);
    let (d_plus, sp) = det2(&d_plus_matrix);
    let (d_minus, sm) = det2(&d_minus_matrix);
    for (d, s, name) in [(d_plus, sp, "d⁺"), (d_minus, sm, "d⁻")] {
        if !(d.norm() > opts.singular_floor * s) {
            return Err(Error::Singular(format!(
                "{name}({}) = {d:.3e} below {:.1e} of its scale: possible embedded eigenvalue",
                set.lambda, opts.singular_floor
            )));
        }
    }
    Ok(ConnectionData {
        lambda: set.lambda,
        point: set.point,
        omega_plus,
        omega_minus,
        mu,
        lambda_table,
        d_plus_matrix,
        d_minus_matrix,
        d_plus,
        d_minus,
        condition: [sp / d_plus.norm(), sm / d_minus.norm()],
        kappa,
        weight: kappa / (d_plus * d_minus),
        max_drift: drift,
        ladder: r.clone(),
    })
}

/// Connection data at `±|λ|` from one integration at `|λ|`.
pub fn connection_pair<P: Potential + ?Sized>(
    lambda: f64,
    pot: &P,
    opts: &ConnectionOptions,
) -> Result<(ConnectionData, ConnectionData)> {
    let set = BranchSet::solve(lambda.abs(), pot, None, opts)?;
    let mirror = set.conjugate()?;
    Ok((connection_from(&set, &mirror, opts)?, connection_from(&mirror, &set, opts)?))
}

/// Connection data at a single `λ`.
pub fn connection<P: Potential + ?Sized>(lambda: f64, pot: &P, opts: &ConnectionOptions) -> Result<ConnectionData> {
    let (pos, neg) = connection_pair(lambda, pot, opts)?;
    Ok(if lambda > 0.0 { pos } else { neg })
}

/// `D^±(λ)` and `d^±(λ)`.
pub fn connection_matrix(data: &ConnectionData, limit: Limit) -> ([[Complex64; 2]; 2], Complex64) {
    match limit {
        Limit::Plus => (data.d_plus_matrix, data.d_plus),
        Limit::Minus => (data.d_minus_matrix, data.d_minus),
    }
}

/// `κ(λ) = W(σ₃Ψ⁺₁(·, −λ), Ψ⁺₁(·, λ))`
pub fn kappa<P: Potential + ?Sized>(lambda: f64, pot: &P, opts: &ConnectionOptions) -> Result<Complex64> {
    connection(lambda, pot, opts).map(|d| d.kappa)
}

/// `μ^±` table at `λ`.
pub fn mu_table(data: &ConnectionData) -> MuTable {
    data.mu
}
