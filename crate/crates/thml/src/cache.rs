//! On-disk caches: binary dlog tables and JSON theta batches.
//!
//! Theta batches are keyed by (p, x-bits, parity, precision, code version);
//! a version bump invalidates them. All writes go through write-then-rename.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::char_group::{CharacterGroup, Parity};
use crate::error::Result;
use crate::theta::ThetaValue;
use crate::CODE_VERSION;

pub const ENV_CACHE_DIR: &str = "THML_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct CacheDir {
    root: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThetaBatchFile {
    version: String,
    p: u64,
    x: f64,
    parity: Parity,
    precision_bits: u32,
    values: Vec<ThetaValue>,
}

impl CacheDir {
    pub fn new(root: PathBuf) -> Result<CacheDir> {
        std::fs::create_dir_all(&root)?;
        Ok(CacheDir { root })
    }

    /// Resolve from an explicit flag or the THML_CACHE_DIR environment
    /// variable; None disables caching.
    pub fn resolve(flag: Option<PathBuf>) -> Result<Option<CacheDir>> {
        let chosen = flag.or_else(|| std::env::var_os(ENV_CACHE_DIR).map(PathBuf::from));
        chosen.map(CacheDir::new).transpose()
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dlog_path(&self, p: u64) -> PathBuf {
        self.root.join(format!("dlog_{p}.thml"))
    }

    fn theta_path(&self, p: u64, x: f64, parity: Parity, precision_bits: u32) -> PathBuf {
        self.root.join(format!(
            "theta_p{p}_x{:016x}_{}_b{precision_bits}_v{}.json",
            x.to_bits(),
            parity.as_str(),
            CODE_VERSION
        ))
    }

    /// Group from cache, falling back to a rebuild (and refreshing the cache).
    /// Unreadable or stale cache entries are rebuilt, not fatal.
    pub fn load_or_build_group(&self, p: u64) -> Result<CharacterGroup> {
        let path = self.dlog_path(p);
        if path.exists() {
            if let Ok(group) = CharacterGroup::read_dlog_cache_file(&path) {
                if group.p() == p {
                    return Ok(group);
                }
            }
        }
        let group = CharacterGroup::build(p)?;
        group.write_dlog_cache_file(&path)?;
        Ok(group)
    }

    pub fn load_theta_batch(
        &self,
        p: u64,
        x: f64,
        parity: Parity,
        precision_bits: u32,
    ) -> Option<Vec<ThetaValue>> {
        let path = self.theta_path(p, x, parity, precision_bits);
        let data = std::fs::read(path).ok()?;
        let file: ThetaBatchFile = serde_json::from_slice(&data).ok()?;
        if file.version == CODE_VERSION && file.p == p && file.parity == parity {
            Some(file.values)
        } else {
            None
        }
    }

    pub fn store_theta_batch(
        &self,
        p: u64,
        x: f64,
        parity: Parity,
        precision_bits: u32,
        values: &[ThetaValue],
    ) -> Result<()> {
        let path = self.theta_path(p, x, parity, precision_bits);
        let file = ThetaBatchFile {
            version: CODE_VERSION.to_string(),
            p,
            x,
            parity,
            precision_bits,
            values: values.to_vec(),
        };
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(&file)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}
