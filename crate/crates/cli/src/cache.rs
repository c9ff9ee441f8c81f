//! On-disk cache of branch solves.

use std::fs;
use std::path::{Path, PathBuf};

use gpvortex::ode_engine::SolveOptions;
use gpvortex::{Label, RadialGrid, SolutionBranch};
use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliResult};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "GPVORTEX_CACHE";

/// Content hash of everything a branch solve depends on.
pub fn cache_key(z: Complex64, label: Label, potential: &str, opts: &SolveOptions, grid: &RadialGrid) -> String {
    let text = format!(
        "z={:016x},{:016x};label={label:?};potential={potential};rtol={:016x};atol={:016x};seed={:?};r_seed={:016x};eps={:016x};overflow={:016x};grid={}:{:016x}:{:016x}",
        z.re.to_bits(),
        z.im.to_bits(),
        opts.rtol.to_bits(),
        opts.atol.to_bits(),
        opts.seed,
        opts.r_seed_min.to_bits(),
        opts.potential_eps.to_bits(),
        opts.overflow.to_bits(),
        grid.len(),
        grid.r_min().to_bits(),
        grid.r_max().to_bits(),
    );
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    for r in grid.nodes() {
        h.update(r.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    branch: SolutionBranch,
}

#[derive(Clone, Debug)]
pub struct BranchCache {
    dir: PathBuf,
}

impl BranchCache {
    pub fn open(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, "creating cache", e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Stored branch for `key`. Unreadable or mismatched entries are removed
    /// with a warning and reported as misses.
    pub fn get(&self, key: &str) -> Option<SolutionBranch> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<Entry>(&bytes) {
            Ok(e) if e.key == key => Some(e.branch),
            Ok(_) => {
                warn!("cache entry {} holds a different key; recomputing", path.display());
                let _ = fs::remove_file(&path);
                None
            }
            Err(err) => {
                warn!("cache entry {} is corrupt ({err}); recomputing", path.display());
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    pub fn put(&self, key: &str, branch: &SolutionBranch) -> CliResult<()> {
        let path = self.path(key);
        let entry = Entry { key: key.to_string(), branch: branch.clone() };
        let bytes = serde_json::to_vec(&entry).expect("branches serialize");
        // Write-then-rename so a concurrent reader never sees half an entry.
        let tmp = self.dir.join(format!("{key}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| io_error(&tmp, "writing", e))?;
        fs::rename(&tmp, &path).map_err(|e| io_error(&path, "writing", e))
    }

    /// Returns whether an entry was removed.
    pub fn evict(&self, key: &str) -> bool {
        fs::remove_file(self.path(key)).is_ok()
    }

    pub fn clear(&self) -> CliResult<usize> {
        let mut n = 0;
        let rd = fs::read_dir(&self.dir).map_err(|e| io_error(&self.dir, "listing", e))?;
        for entry in rd.flatten() {
            let p = entry.path();
            if p.extension().is_some_and(|x| x == "json") && fs::remove_file(&p).is_ok() {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Cached value or `compute()`, storing fresh results. The flag reports a hit.
    pub fn get_or_compute<F>(&self, key: &str, compute: F) -> CliResult<(SolutionBranch, bool)>
    where
        F: FnOnce() -> CliResult<SolutionBranch>,
    {
        if let Some(b) = self.get(key) {
            return Ok((b, true));
        }
        let b = compute()?;
        self.put(key, &b)?;
        Ok((b, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gpvortex::dispersion::roots;
    use gpvortex::ode_engine::solve_infinity;
    use gpvortex::FreePotential;

    fn branch() -> (String, SolutionBranch) {
        let grid = RadialGrid::uniform(0.5, 4.0, 20).unwrap();
        let opts = SolveOptions::default();
        let pt = roots(Complex64::new(1.0, 0.5)).unwrap();
        let b = solve_infinity(&pt, Label::Psi2, &FreePotential, &grid, &opts).unwrap();
        (cache_key(pt.z, Label::Psi2, "free", &opts, &grid), b)
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BranchCache::open(dir.path()).unwrap();
        let (key, b) = branch();
        assert!(cache.get(&key).is_none());
        let (_, hit) = cache.get_or_compute(&key, || Ok(b.clone())).unwrap();
        assert!(!hit);
        let (again, hit) = cache.get_or_compute(&key, || panic!("must not recompute")).unwrap();
        assert!(hit);
        assert_eq!(again.states, b.states);
        assert_eq!(again.grid, b.grid);
    }

    #[test]
    fn eviction() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BranchCache::open(dir.path()).unwrap();
        let (key, b) = branch();
        cache.put(&key, &b).unwrap();
        assert!(cache.evict(&key));
        assert!(!cache.evict(&key));
        assert!(cache.get(&key).is_none());
        cache.put(&key, &b).unwrap();
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.get(&key).is_none());
    }

    #[test]
    fn corrupt_entry_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BranchCache::open(dir.path()).unwrap();
        let (key, b) = branch();
        fs::write(dir.path().join(format!("{key}.json")), b"{ not json").unwrap();
        let (_, hit) = cache.get_or_compute(&key, || Ok(b.clone())).unwrap();
        assert!(!hit);
        assert!(cache.get(&key).is_some());
    }

    #[test]
    fn keys_separate_inputs() {
        let grid = RadialGrid::uniform(0.5, 4.0, 20).unwrap();
        let opts = SolveOptions::default();
        let z = Complex64::new(1.0, 0.5);
        let base = cache_key(z, Label::Psi1, "free", &opts, &grid);
        assert_ne!(base, cache_key(z, Label::Psi2, "free", &opts, &grid));
        assert_ne!(base, cache_key(z.conj(), Label::Psi1, "free", &opts, &grid));
        assert_ne!(base, cache_key(z, Label::Psi1, "vortex", &opts, &grid));
        assert_ne!(base, cache_key(z, Label::Psi1, "free", &SolveOptions { rtol: 1e-9, ..opts }, &grid));
        assert_eq!(base, cache_key(z, Label::Psi1, "free", &opts, &grid));
    }
}
