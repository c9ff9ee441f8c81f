//! Radial grids on the half-line (0, ∞).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Strictly increasing set of radii with `nodes[0] = r_min > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(domain("radial grid needs at least two nodes"));
        }
        if !(nodes[0] > 0.0) || !nodes.iter().all(|r| r.is_finite()) {
            return Err(domain(format!("radial grid must start at r_min > 0, got {}", nodes[0])));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(domain(format!("radial grid not strictly increasing at node {}", i + 1)));
        }
        Ok(Self { nodes })
    }

    /// `n` equispaced nodes covering `[r_min, r_max]`.
    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(r_max > r_min) {
            return Err(domain(format!("bad uniform grid [{r_min}, {r_max}] with {n} nodes")));
        }
        let h = (r_max - r_min) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| r_min + h * i as f64).collect();
        nodes[n - 1] = r_max;
        Self::new(nodes)
    }

    /// `n` nodes in geometric progression from `r_a` to `r_b`.
    pub fn geometric(r_a: f64, r_b: f64, n: usize) -> Result<Self> {
        if n < 2 || !(r_b > r_a) || !(r_a > 0.0) {
            return Err(domain(format!("bad geometric ladder [{r_a}, {r_b}] with {n} nodes")));
        }
        let q = (r_b / r_a).powf(1.0 / (n - 1) as f64);
        let mut nodes: Vec<f64> = (0..n).map(|i| r_a * q.powi(i as i32)).collect();
        nodes[n - 1] = r_b;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of a node equal to `r` up to a relative 1e-12.
    pub fn find(&self, r: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < r);
        [i.wrapping_sub(1), i]
            .into_iter()
            .filter(|&j| j < self.nodes.len())
            .find(|&j| (self.nodes[j] - r).abs() <= 1e-12 * r.abs().max(1.0))
    }

    /// Merge with extra radii, dropping duplicates.
    pub fn with_extra(&self, extra: &[f64]) -> Result<Self> {
        let mut all: Vec<f64> = self.nodes.iter().chain(extra).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        Self::new(all)
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        w
    }
}
