#![allow(dead_code)]

use gpvortex::profile::{build_profile, ProfileOptions};
use gpvortex::{RadialGrid, VortexProfile};
use num_complex::Complex64;

pub fn vortex() -> VortexProfile {
    let grid = RadialGrid::uniform(1e-3, 12.0, 4096).unwrap();
    build_profile(1, &grid, &ProfileOptions::default()).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gauss(r: f64, center: f64, width: f64) -> f64 {
    (-(r - center).powi(2) / (2.0 * width * width)).exp()
}

/// Relative distance of two complex numbers.
pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}
