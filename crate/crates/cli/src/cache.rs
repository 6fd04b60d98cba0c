//! Kernel tables reused across runs through the `LMSM_LAB_CACHE` directory.

use std::path::{Path, PathBuf};

use lmsm_core::kernel::{build_kernel_table, KernelTable, TableGrid, TABLE_MAGIC};
use lmsm_core::Wavelet;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, CliResult};

pub const CACHE_ENV: &str = "LMSM_LAB_CACHE";

/// Name of the cached file for a table layout.
pub fn cache_key(grid: &TableGrid, wavelet_order: usize) -> String {
    let desc = serde_json::json!({
        "magic": String::from_utf8_lossy(TABLE_MAGIC),
        "core": lmsm_core::VERSION,
        "grid": grid,
        "wavelet_order": wavelet_order,
        "scalar": "f64",
    });
    let digest = Sha256::digest(desc.to_string().as_bytes());
    format!("kernel-{}.lmsmkt", &hex(&digest)[..24])
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Loads the table from `dir` when a matching one is there, otherwise builds
/// it and stores it. Unreadable or mismatched entries are rebuilt.
pub fn cached_table(dir: &Path, w: &Wavelet, grid: &TableGrid) -> CliResult<KernelTable> {
    let path = dir.join(cache_key(grid, w.order));
    if let Ok(t) = KernelTable::load(&path) {
        if &t.grid == grid && t.wavelet_order == w.order {
            return Ok(t);
        }
    }
    let mut table = build_kernel_table(w, grid)?;
    table.provenance = serde_json::json!({ "cache_key": cache_key(grid, w.order), "core": lmsm_core::VERSION });
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    // Write then rename, so a concurrent reader never sees half a file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    table.save(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(table)
}

/// Table for `grid`, through the cache when `LMSM_LAB_CACHE` is set.
pub fn kernel_table(w: &Wavelet, grid: &TableGrid) -> CliResult<KernelTable> {
    match cache_dir() {
        Some(dir) => cached_table(&dir, w, grid),
        None => Ok(build_kernel_table(w, grid)?),
    }
}
