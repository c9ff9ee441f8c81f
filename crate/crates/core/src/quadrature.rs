//! Composite Gauss–Legendre meshes on the positive spectral half-line.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::dispersion::THRESHOLD;
use crate::error::{domain, Error, Result};

/// `panels` equal Gauss–Legendre panels of `order` nodes on `[a, b]`.
pub fn gauss_legendre_panels(a: f64, b: f64, panels: usize, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if panels == 0 || !(b > a) {
        return Err(domain(format!("bad panel layout on [{a}, {b}] with {panels} panels")));
    }
    let rule = GaussLegendre::new(order).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * order);
    let mut w = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(t, wt) in pairs.iter() {
            x.push(mid + 0.5 * h * t);
            w.push(0.5 * h * wt);
        }
    }
    Ok((x, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    /// Upper end of the spectral integral.
    pub r_cut: f64,
    /// Target node count on `(√17/8, r_cut]`.
    pub nodes: usize,
    /// Boundary between the graded and the uniform part.
    pub knee: f64,
    pub order: usize,
    /// Share of the nodes spent below `knee`.
    pub near_fraction: f64,
    /// Largest time the mesh must resolve; node spacing beyond `knee` is kept
    /// below `1/(4 t_max)` once `t_max > 5`.
    pub t_max: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { r_cut: 40.0, nodes: 1000, knee: 2.0, order: 16, near_fraction: 0.2, t_max: 0.0 }
    }
}

/// Quadrature nodes and weights for `∫_{√17/8}^{r_cut} f(λ) dλ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LambdaMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Graded mesh: `λ = √17/8 + s²` with Gauss–Legendre panels in `s` up to the
/// knee, uniform panels in `λ` above it.
pub fn lambda_mesh(opts: &MeshOptions) -> Result<LambdaMesh> {
    if !(opts.r_cut > opts.knee) || !(opts.knee > THRESHOLD) || opts.order == 0 {
        return Err(domain(format!("bad spectral mesh: knee {} cut {}", opts.knee, opts.r_cut)));
    }
    let near = ((opts.nodes as f64 * opts.near_fraction) / opts.order as f64).ceil().max(1.0) as usize;
    let mut far_nodes = opts.nodes.saturating_sub(near * opts.order) as f64;
    if opts.t_max > 5.0 {
        far_nodes = far_nodes.max((opts.r_cut - opts.knee) * 4.0 * opts.t_max);
    }
    let far = (far_nodes / opts.order as f64).ceil().max(1.0) as usize;
    let (s, ws) = gauss_legendre_panels(0.0, (opts.knee - THRESHOLD).sqrt(), near, opts.order)?;
    let (l, wl) = gauss_legendre_panels(opts.knee, opts.r_cut, far, opts.order)?;
    let mut nodes: Vec<f64> = s.iter().map(|s| THRESHOLD + s * s).collect();
    let mut weights: Vec<f64> = s.iter().zip(&ws).map(|(s, w)| 2.0 * s * w).collect();
    nodes.extend(l);
    weights.extend(wl);
    Ok(LambdaMesh { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_threshold_singularity() {
        let mesh = lambda_mesh(&MeshOptions::default()).unwrap();
        // ∫ √(λ−η) dλ and ∫ 1/√(λ−η) dλ
        let a = mesh.integrate(|x| (x - THRESHOLD).sqrt());
        let b = mesh.integrate(|x| 1.0 / (x - THRESHOLD).sqrt());
        let len = 40.0 - THRESHOLD;
        assert!((a - 2.0 / 3.0 * len.powf(1.5)).abs() < 1e-10);
        assert!((b - 2.0 * len.sqrt()).abs() < 1e-10);
        assert!(mesh.nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(mesh.nodes[0] - THRESHOLD > 1e-8);
    }

    #[test]
    fn long_times_refine() {
        let a = lambda_mesh(&MeshOptions::default()).unwrap();
        let b = lambda_mesh(&MeshOptions { t_max: 10.0, ..MeshOptions::default() }).unwrap();
        assert!(b.len() > a.len());
        let spacing = (40.0 - 2.0) / (b.len() - 16 * 13) as f64;
        assert!(spacing <= 1.0 / 40.0 + 1e-12);
    }
}
