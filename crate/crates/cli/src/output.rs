//! Deterministic, cache-aware output plumbing.
//!
//! A run's identity is the SHA-256 of (subcommand, canonical config JSON,
//! crate version). Outputs embed that hash and are written atomically; when
//! `FRACLAB_CACHE_DIR` is set and holds files for the same identity, the
//! cached bytes are reused verbatim.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct RunContext {
    pub out_dir: PathBuf,
    /// parsed config-file overrides, when --config was given
    pub overrides: Option<serde_json::Value>,
    cache_dir: Option<PathBuf>,
}

impl RunContext {
    pub fn new(out_dir: PathBuf, config: Option<&Path>) -> std::io::Result<RunContext> {
        let overrides = match config {
            Some(path) => Some(serde_json::from_str(&fs::read_to_string(path)?)?),
            None => None,
        };
        let cache_dir = std::env::var_os("FRACLAB_CACHE_DIR").map(PathBuf::from);
        Ok(RunContext {
            out_dir,
            overrides,
            cache_dir,
        })
    }

    /// Merge config-file fields over the flag-derived config (the file wins),
    /// returning the effective config. Unknown fields in the file are schema
    /// violations and error out by name.
    pub fn effective<T: Serialize + serde::de::DeserializeOwned>(
        &self,
        flags: T,
    ) -> Result<T, Box<dyn std::error::Error>> {
        let mut value = serde_json::to_value(&flags)?;
        if let Some(over) = &self.overrides {
            if let (Some(base), Some(top)) = (value.as_object_mut(), over.as_object()) {
                for (k, v) in top {
                    if !base.contains_key(k) {
                        return Err(format!("unknown config field `{k}`").into());
                    }
                    base.insert(k.clone(), v.clone());
                }
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Identity hash of (subcommand, config, version).
    pub fn config_hash<T: Serialize>(&self, subcommand: &str, config: &T) -> String {
        let mut hasher = Sha256::new();
        hasher.update(subcommand.as_bytes());
        hasher.update(b"\0");
        hasher.update(
            serde_json::to_string(config)
                .expect("config serializes")
                .as_bytes(),
        );
        hasher.update(b"\0");
        hasher.update(crate::VERSION.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn cache_path(&self, hash: &str, name: &str) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(hash).join(name))
    }

    /// Write one output file: served from cache on identity match, computed
    /// by `produce` otherwise; always written atomically.
    pub fn emit(
        &self,
        hash: &str,
        name: &str,
        produce: impl FnOnce() -> Vec<u8>,
    ) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        let target = self.out_dir.join(name);
        let bytes = match self.cache_path(hash, name) {
            Some(cached) if cached.is_file() => fs::read(&cached)?,
            maybe_cache => {
                let bytes = produce();
                if let Some(cached) = maybe_cache {
                    if let Some(parent) = cached.parent() {
                        fs::create_dir_all(parent)?;
                    }
                    write_atomic(&cached, &bytes)?;
                }
                bytes
            }
        };
        write_atomic(&target, &bytes)?;
        Ok(target)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Standard CSV header comment carrying the run identity.
pub fn csv_header(hash: &str, seed: u64) -> String {
    format!(
        "# fraclab v{} config_hash={hash} seed={seed}\n",
        crate::VERSION
    )
}

/// Wrap a JSON-serializable result with the run identity metadata.
pub fn json_document<T: Serialize>(hash: &str, seed: u64, result: &T) -> Vec<u8> {
    #[derive(Serialize)]
    struct Meta<'a> {
        version: &'a str,
        config_hash: &'a str,
        seed: u64,
    }
    #[derive(Serialize)]
    struct Doc<'a, T> {
        meta: Meta<'a>,
        result: &'a T,
    }
    let doc = Doc {
        meta: Meta {
            version: crate::VERSION,
            config_hash: hash,
            seed,
        },
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("results serialize");
    bytes.push(b'\n');
    bytes
}
