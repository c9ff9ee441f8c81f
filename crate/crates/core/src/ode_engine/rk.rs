//! Adaptive embedded Runge–Kutta integration (Verner 6(5), FSAL).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vector space operations needed by the stepper.
pub trait OdeVec: Copy {
    fn zero() -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// Largest component modulus.
    fn sup_norm(&self) -> f64;
}

impl<const N: usize> OdeVec for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl<const N: usize> OdeVec for [Complex64; N] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); N]
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += v * a;
        }
    }
    fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

const STAGES: usize = 9;

const C: [f64; STAGES] = [0.0, 0.06, 0.095_933_333_333_333_33, 0.1439, 0.4973, 0.9725, 0.9995, 1.0, 1.0];

const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [0.06, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.019_239_962_962_962_962, 0.076_693_370_370_370_37, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.035975, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.318_683_415_233_148_4, 0.0, -5.042_058_063_628_562, 4.220_674_648_395_414, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-41.872_591_664_327_516, 0.0, 159.432_562_163_137_5, -122.119_213_565_010_03, 5.531_743_066_200_054, 0.0, 0.0, 0.0, 0.0],
    [
        -54.430_156_935_316_504,
        0.0,
        207.067_251_365_018_48,
        -158.610_813_784_59,
        6.991_816_585_950_242,
        -0.018_597_231_062_203_234,
        0.0,
        0.0,
        0.0,
    ],
    [
        -54.663_741_787_281_98,
        0.0,
        207.952_806_255_389_36,
        -159.288_957_474_499_5,
        7.018_743_740_796_944,
        -0.018_338_785_905_045_722,
        -0.000_511_948_499_788_209_9,
        0.0,
        0.0,
    ],
    B6,
];

const B6: [f64; STAGES] = [
    0.034_389_578_683_570_36,
    0.0,
    0.0,
    0.258_262_455_563_350_3,
    0.420_937_118_967_353_7,
    4.405_396_469_669_31,
    -176.483_119_024_298_65,
    172.364_133_401_415_07,
    0.0,
];

const B5: [f64; STAGES] = [
    0.049_099_676_483_824_9,
    0.0,
    0.0,
    0.225_111_222_951_652_42,
    0.469_468_225_302_956_2,
    0.806_579_224_998_886_8,
    0.0,
    -0.607_119_489_177_796,
    0.056_861_139_440_475_696,
];

/// Integration tolerances: a step is accepted when
/// `|err| <= atol + rtol * max(|y_n|, |y_{n+1}|)` in the sup norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { atol: 1e-300, rtol: 1e-12 }
    }
}

/// Observer verdict after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug)]
pub struct Integrator {
    pub tol: Tolerance,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { tol: Tolerance::default(), h_init: 1e-3, h_min: 1e-14, h_max: 0.5, max_steps: 2_000_000 }
    }
}

impl Integrator {
    pub fn with_tol(atol: f64, rtol: f64) -> Self {
        Self { tol: Tolerance { atol, rtol }, ..Self::default() }
    }

    /// One step of size `h` from `(r, y)` with first stage `k0 = f(r, y)`.
    /// Returns the new state, its derivative and the error estimate.
    fn step<V: OdeVec, F: FnMut(f64, &V) -> V>(&self, f: &mut F, r: f64, y: &V, k0: &V, h: f64) -> (V, V, f64) {
        let mut k = [V::zero(); STAGES];
        k[0] = *k0;
        for s in 1..STAGES {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys.axpy(h * A[s][j], kj);
                }
            }
            if s == STAGES - 1 {
                k[s] = f(r + h, &ys);
                let mut err = V::zero();
                for (j, kj) in k.iter().enumerate() {
                    let d = B6[j] - B5[j];
                    if d != 0.0 {
                        err.axpy(h * d, kj);
                    }
                }
                let scale = self.tol.atol + self.tol.rtol * y.sup_norm().max(ys.sup_norm());
                return (ys, k[s], err.sup_norm() / scale);
            }
            k[s] = f(r + C[s] * h, &ys);
        }
        unreachable!()
    }

    /// Integrate from `r0` to `r1` (either direction). The observer sees every
    /// accepted step and may stop early. Returns the final radius and state.
    pub fn run<V, F, O>(&self, f: F, r0: f64, y0: V, r1: f64, observe: O) -> Result<(f64, V)>
    where
        V: OdeVec,
        F: FnMut(f64, &V) -> V,
        O: FnMut(f64, &V) -> Flow,
    {
        self.advance(f, r0, y0, r1, self.h_init, observe).map(|(r, y, _)| (r, y))
    }

    /// As [`Integrator::run`] starting from step `h0`; also returns the step
    /// size to use next.
    pub fn advance<V, F, O>(&self, mut f: F, r0: f64, y0: V, r1: f64, h0: f64, mut observe: O) -> Result<(f64, V, f64)>
    where
        V: OdeVec,
        F: FnMut(f64, &V) -> V,
        O: FnMut(f64, &V) -> Flow,
    {
        let dir = if r1 >= r0 { 1.0 } else { -1.0 };
        let mut r = r0;
        let mut y = y0;
        let mut h = h0.clamp(self.h_min, self.h_max);
        if r1 == r0 {
            return Ok((r, y, h));
        }
        let mut k0 = f(r, &y);
        let mut steps = 0usize;
        while (r1 - r) * dir > 0.0 {
            if steps >= self.max_steps {
                return Err(Error::Integrator { r, msg: "step budget exhausted".into() });
            }
            steps += 1;
            let last = h >= (r1 - r).abs();
            let hs = if last { r1 - r } else { dir * h };
            let (yn, kn, err) = self.step(&mut f, r, &y, &k0, hs);
            if !err.is_finite() || !yn.sup_norm().is_finite() {
                if h <= self.h_min {
                    return Err(Error::Integrator { r, msg: "non-finite state".into() });
                }
                h = (0.25 * h).max(self.h_min);
                continue;
            }
            if err <= 1.0 {
                r = if last { r1 } else { r + hs };
                y = yn;
                k0 = kn;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 6.0)).clamp(0.2, 5.0) };
                // A clipped final step says nothing about the natural step size.
                if !last || grow < 1.0 {
                    h = (h * grow).clamp(self.h_min, self.h_max);
                }
                if observe(r, &y) == Flow::Stop {
                    return Ok((r, y, h));
                }
            } else {
                if h <= self.h_min {
                    return Err(Error::Integrator { r, msg: format!("step size underflow (err {err:.3e})") });
                }
                h = (h * (0.9 * err.powf(-1.0 / 6.0)).clamp(0.1, 0.9)).max(self.h_min);
            }
        }
        Ok((r, y, h))
    }

    /// Integrate from `(r0, y0)` through every radius in `nodes` (monotone in
    /// the direction of travel) and return the state at each node.
    pub fn through<V, F>(&self, mut f: F, r0: f64, y0: V, nodes: &[f64]) -> Result<Vec<V>>
    where
        V: OdeVec,
        F: FnMut(f64, &V) -> V,
    {
        let mut out = Vec::with_capacity(nodes.len());
        let mut r = r0;
        let mut y = y0;
        let mut h = self.h_init;
        for &target in nodes {
            let (_, yn, hn) = self.advance(&mut f, r, y, target, h, |_, _| Flow::Continue)?;
            y = yn;
            r = target;
            h = hn;
            out.push(y);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        for (s, row) in A.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - C[s]).abs() < 1e-12, "row {s}");
        }
        for q in 0..6 {
            let b6: f64 = B6.iter().zip(C).map(|(b, c)| b * c.powi(q)).sum();
            assert!((b6 - 1.0 / (q as f64 + 1.0)).abs() < 1e-12, "order cond {q}");
        }
    }

    #[test]
    fn exponential_decay() {
        let it = Integrator::with_tol(1e-300, 1e-12);
        let (_, y) = it.run(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, |_, _| Flow::Continue).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn harmonic_oscillator_complex_backwards() {
        let it = Integrator::with_tol(1e-300, 1e-12);
        let i = Complex64::i();
        let nodes = [3.0, 2.0, 0.5];
        let ys = it
            .through(|_, y: &[Complex64; 1]| [i * 2.0 * y[0]], 4.0, [(i * 8.0).exp()], &nodes)
            .unwrap();
        for (y, r) in ys.iter().zip(nodes) {
            assert!((y[0] - (i * 2.0 * r).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn global_error_scales_with_order() {
        let run = |h: f64| {
            let it = Integrator { h_init: h, h_max: h, tol: Tolerance { atol: 1.0, rtol: 1.0 }, ..Integrator::default() };
            let (_, y) = it.run(|r, y: &[f64; 1]| [r.cos() * y[0]], 0.0, [1.0], 2.0, |_, _| Flow::Continue).unwrap();
            (y[0] - 2f64.sin().exp()).abs()
        };
        let ratio = run(0.2) / run(0.1);
        assert!(ratio > 40.0, "observed ratio {ratio}");
    }
}
