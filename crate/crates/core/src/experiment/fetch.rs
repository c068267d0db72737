//! Downloads LIBSVM benchmark files into a local cache and pins their
//! SHA-256 in a lock file next to them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::write_atomic;
use crate::data::{parse_libsvm, ParseOptions};
use crate::{Error, Result};

/// Overrides the dataset cache directory.
pub const DATA_DIR_ENV: &str = "DPOEM_DATA_DIR";
/// Overrides the download base URL.
pub const DATA_URL_ENV: &str = "DPOEM_DATA_URL";
pub const DEFAULT_BASE_URL: &str = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary";
pub const LOCK_FILE: &str = "datasets.lock.json";
pub const KNOWN_DATASETS: [&str; 3] = ["mushrooms", "a9a", "w8a"];

const MAX_BYTES: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockEntry {
    pub url: String,
    pub sha256: String,
    pub bytes: u64,
}

/// `name → entry`.
pub type LockFile = BTreeMap<String, LockEntry>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FetchRecord {
    pub name: String,
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
    /// True when the cached copy already matched the lock.
    pub cached: bool,
}

pub fn base_url() -> String {
    std::env::var(DATA_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string())
}

pub fn read_lock(dir: &Path) -> Result<LockFile> {
    let path = dir.join(LOCK_FILE);
    match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| Error::Fetch(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(LockFile::new()),
        Err(source) => Err(Error::Io { path: path.display().to_string(), source }),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Fetches `name` from `base_url` into `dir`.
///
/// A cached file whose hash matches the lock is reused. A download whose hash
/// disagrees with an existing lock entry is rejected and nothing is written.
pub fn fetch_dataset(name: &str, dir: &Path, base_url: &str) -> Result<FetchRecord> {
    if !KNOWN_DATASETS.contains(&name) {
        return Err(Error::Fetch(format!("unknown dataset {name:?}; known: {}", KNOWN_DATASETS.join(", "))));
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut lock = read_lock(dir)?;
    let path = dir.join(name);

    if let (Some(entry), Ok(bytes)) = (lock.get(name), std::fs::read(&path)) {
        if sha256_hex(&bytes) == entry.sha256 {
            return Ok(FetchRecord {
                name: name.to_string(),
                path,
                sha256: entry.sha256.clone(),
                bytes: bytes.len() as u64,
                cached: true,
            });
        }
    }

    let url = format!("{}/{name}", base_url.trim_end_matches('/'));
    let body = download(&url)?;
    let sha256 = sha256_hex(&body);
    if let Some(entry) = lock.get(name) {
        if entry.sha256 != sha256 {
            return Err(Error::Fetch(format!(
                "checksum mismatch for {name}: lock has {}, download has {sha256}",
                entry.sha256
            )));
        }
    }
    parse_libsvm(body.as_slice(), ParseOptions::default())
        .map_err(|e| Error::Fetch(format!("{url} is not a LIBSVM file: {e}")))?;

    write_atomic(&path, &body)?;
    let bytes = body.len() as u64;
    lock.insert(name.to_string(), LockEntry { url, sha256: sha256.clone(), bytes });
    let json = serde_json::to_vec_pretty(&lock).expect("lock serializes");
    write_atomic(&dir.join(LOCK_FILE), &json)?;
    Ok(FetchRecord { name: name.to_string(), path, sha256, bytes, cached: false })
}

fn download(url: &str) -> Result<Vec<u8>> {
    let mut resp = ureq::get(url).call().map_err(|e| Error::Fetch(format!("{url}: {e}")))?;
    resp.body_mut()
        .with_config()
        .limit(MAX_BYTES)
        .read_to_vec()
        .map_err(|e| Error::Fetch(format!("{url}: {e}")))
}
