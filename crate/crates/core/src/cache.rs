//! On-disk cache of constructed codes, keyed by (distribution, n, seed).

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::ldpc::{build_code, load_alist, save_alist, DegreeDistribution, LdpcCode, CONSTRUCTION_VERSION};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "MBSC_CACHE_DIR";

const DEFAULT_CACHE_DIR: &str = ".mbsc-cache";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Cache file name for a code.
pub fn cache_key(dist: &DegreeDistribution, n: usize, seed: u64) -> String {
    let hash = sha256_hex(dist.canonical().as_bytes());
    format!("code-{}-peg{CONSTRUCTION_VERSION}-n{n}-s{seed}.alist", &hash[..16])
}

/// A code together with where it came from.
#[derive(Debug, Clone)]
pub struct CachedCode {
    pub code: LdpcCode,
    pub path: PathBuf,
    pub hit: bool,
    pub alist_sha256: String,
}

/// Loads the code from `dir` or builds and stores it.
pub fn load_or_build(dir: &Path, dist: &DegreeDistribution, n: usize, seed: u64) -> Result<CachedCode> {
    let path = dir.join(cache_key(dist, n, seed));
    if let Ok(text) = std::fs::read_to_string(&path) {
        match load_alist(&text) {
            Ok(code) => {
                let code = code.with_metadata(dist.design_rate(), seed);
                return Ok(CachedCode { code, path, hit: true, alist_sha256: sha256_hex(text.as_bytes()) });
            }
            Err(e) => log::warn!("ignoring unreadable cache file {}: {e}", path.display()),
        }
    }
    log::info!("building code n = {n}, seed = {seed}");
    let code = build_code(dist, n, seed)?;
    let text = save_alist(&code);
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("alist.tmp");
    std::fs::write(&tmp, &text)?;
    std::fs::rename(&tmp, &path)?;
    Ok(CachedCode { code, path, hit: false, alist_sha256: sha256_hex(text.as_bytes()) })
}
