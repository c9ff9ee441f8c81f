//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use gpvortex::connection::ConnectionOptions;
use gpvortex::dft::BasisOptions;
use gpvortex::ode_engine::SolveOptions;
use gpvortex::quadrature::MeshOptions;
use gpvortex::THRESHOLD;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub n: u32,
    pub r_max: f64,
    pub nodes: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { n: 1, r_max: 12.0, nodes: 4096 }
    }
}

/// Branch integration tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub rtol: f64,
    pub atol: f64,
    pub r_seed_min: f64,
    pub potential_eps: f64,
    pub ladder_points: usize,
    pub singular_floor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let s = SolveOptions::default();
        let c = ConnectionOptions::default();
        Self {
            rtol: s.rtol,
            atol: s.atol,
            r_seed_min: s.r_seed_min,
            potential_eps: s.potential_eps,
            ladder_points: c.ladder_points,
            singular_floor: c.singular_floor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub lambda_max: f64,
    /// Nodes per sign of `λ`.
    pub lambda_nodes: usize,
    pub knee: f64,
    pub order: usize,
    pub near_fraction: f64,
    pub tail_tol: f64,
    /// `|Re z|` from which the large-energy regime applies.
    pub regime_switch: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        let m = MeshOptions::default();
        Self {
            lambda_max: m.r_cut,
            lambda_nodes: m.nodes,
            knee: m.knee,
            order: m.order,
            near_fraction: m.near_fraction,
            tail_tol: BasisOptions::default().tail_tol,
            regime_switch: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Largest spatial step of the finite-difference operator.
    pub h: f64,
    pub dt: f64,
    /// Relative discrepancy accepted by `evolve --compare-oracle`.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { h: 0.0125, dt: 1e-3, tolerance: 1e-2 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileConfig,
    pub solve: SolveConfig,
    pub spectral: SpectralConfig,
    pub oracle: OracleConfig,
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, "reading config", e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("solve.rtol", self.solve.rtol),
            ("solve.atol", self.solve.atol),
            ("solve.potential_eps", self.solve.potential_eps),
            ("solve.singular_floor", self.solve.singular_floor),
            ("spectral.tail_tol", self.spectral.tail_tol),
            ("spectral.near_fraction", self.spectral.near_fraction),
            ("oracle.h", self.oracle.h),
            ("oracle.dt", self.oracle.dt),
            ("oracle.tolerance", self.oracle.tolerance),
            ("profile.r_max", self.profile.r_max),
            ("solve.r_seed_min", self.solve.r_seed_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(THRESHOLD < self.spectral.knee && self.spectral.knee < self.spectral.lambda_max) {
            return Err(CliError::Config(format!(
                "spectral bounds must satisfy {THRESHOLD} < knee ({}) < lambda_max ({})",
                self.spectral.knee, self.spectral.lambda_max
            )));
        }
        if self.profile.nodes < 16 || self.spectral.lambda_nodes == 0 || self.spectral.order == 0 {
            return Err(CliError::Config("node counts too small".into()));
        }
        if self.solve.ladder_points < 2 {
            return Err(CliError::Config("solve.ladder_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            rtol: self.solve.rtol,
            atol: self.solve.atol,
            r_seed_min: self.solve.r_seed_min,
            potential_eps: self.solve.potential_eps,
            ..SolveOptions::default()
        }
    }

    pub fn connection_options(&self) -> ConnectionOptions {
        ConnectionOptions {
            solve: self.solve_options(),
            ladder_points: self.solve.ladder_points,
            singular_floor: self.solve.singular_floor,
        }
    }

    pub fn basis_options(&self, t_max: f64) -> BasisOptions {
        BasisOptions {
            mesh: MeshOptions {
                r_cut: self.spectral.lambda_max,
                nodes: self.spectral.lambda_nodes,
                knee: self.spectral.knee,
                order: self.spectral.order,
                near_fraction: self.spectral.near_fraction,
                t_max,
            },
            connection: self.connection_options(),
            tail_tol: self.spectral.tail_tol,
        }
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.solve.atol = 1e-300;
        cfg.spectral.lambda_max = 37.25;
        cfg.oracle.dt = 1.0 / 3.0;
        cfg.cache_dir = Some("/tmp/cache".into());
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = RunConfig::from_toml("seed = 3\n[spectral]\nlambda_nodes = 200\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.spectral.lambda_nodes, 200);
        assert_eq!(cfg.profile, ProfileConfig::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("[solve]\nrtol = -1.0\n").is_err());
        assert!(RunConfig::from_toml("[spectral]\nknee = 50.0\n").is_err());
        assert!(RunConfig::from_toml("[spectral]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("seed = \"x\"").is_err());
    }
}
