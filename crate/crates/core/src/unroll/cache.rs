use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::UnrollError;
use crate::table::{render_markdown, Table};

/// Identifies one unroll request: table content, prompt revision and model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnrollCacheKey {
    pub table_digest: String,
    pub prompt_version: String,
    pub model_id: String,
}

impl UnrollCacheKey {
    pub fn new(table: &Table, prompt_version: &str, model_id: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(render_markdown(table).as_bytes());
        hasher.update([0u8]);
        hasher.update(table.intent.as_bytes());
        Self {
            table_digest: hex::encode(hasher.finalize()),
            prompt_version: prompt_version.to_string(),
            model_id: model_id.to_string(),
        }
    }

    /// Hex digest used as the cache file name.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for part in [&self.table_digest, &self.prompt_version, &self.model_id] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// On-disk record. Raw responses are stored so they can be re-parsed later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub prompt: String,
    pub raw_response: String,
    pub model_id: String,
    pub prompt_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl CacheEntry {
    pub fn new(prompt: String, raw_response: String, key: &UnrollCacheKey) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            prompt,
            raw_response,
            model_id: key.model_id.clone(),
            prompt_version: key.prompt_version.clone(),
            timestamp,
        }
    }
}

/// Content-addressed response cache: one JSON file per key.
///
/// Reads go straight to disk and may run concurrently. Writers and misses
/// for the same key serialize on a per-key lock, so two concurrent misses
/// produce a single fetch.
#[derive(Debug)]
pub struct UnrollCache {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl UnrollCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, UnrollError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| UnrollError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &UnrollCacheKey) -> PathBuf {
        self.dir.join(key.digest())
    }

    pub fn get(&self, key: &UnrollCacheKey) -> Option<CacheEntry> {
        let path = self.path_for(key);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(entry) => Some(entry),
            Err(e) => {
                log::warn!("ignoring corrupt cache file {}: {e}", path.display());
                None
            }
        }
    }

    /// Atomic write: temp file in the cache dir, then rename.
    pub fn put(&self, key: &UnrollCacheKey, entry: &CacheEntry) -> Result<(), UnrollError> {
        let path = self.path_for(key);
        let io_err = |e: std::io::Error| UnrollError::Cache(format!("{}: {e}", path.display()));
        let json =
            serde_json::to_vec_pretty(entry).map_err(|e| UnrollError::Cache(e.to_string()))?;
        let tmp = self.dir.join(format!(
            ".{}.{}.{:?}.tmp",
            key.digest(),
            std::process::id(),
            std::thread::current().id()
        ));
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(&json).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
        fs::rename(&tmp, &path).map_err(io_err)
    }

    /// Runs `f` while holding the per-key lock.
    pub fn with_key_lock<T>(&self, key: &UnrollCacheKey, f: impl FnOnce() -> T) -> T {
        let lock = {
            let mut locks = self.locks.lock().expect("cache lock map poisoned");
            locks.entry(key.digest()).or_default().clone()
        };
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        f()
    }
}
