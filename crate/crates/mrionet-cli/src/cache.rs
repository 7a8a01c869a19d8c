//! Content-hash cache: each output file is keyed by a digest of the inputs
//! and config subsection that produced it. A rerun rewrites a file only
//! when its key changed or the file on disk no longer matches the recorded
//! output hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn to_hex(digest: &[u8]) -> String {
    let mut out = String::with_capacity(digest.len() * 2);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    to_hex(&hasher.finalize())
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes =
        fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Digest over a set of input files plus an arbitrary config blob.
pub fn input_key(paths: &[PathBuf], config_blob: &str) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        hasher.update(path.file_name().unwrap_or_default().as_encoded_bytes());
        let bytes =
            fs::read(path).with_context(|| format!("hashing input {}", path.display()))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    hasher.update(config_blob.as_bytes());
    Ok(to_hex(&hasher.finalize()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    input_key: String,
    output_sha256: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CacheFile {
    entries: BTreeMap<String, CacheEntry>,
}

/// On-disk cache manifest, keyed by output path relative to the out dir.
#[derive(Debug)]
pub struct Cache {
    manifest_path: PathBuf,
    file: CacheFile,
    dirty: bool,
}

impl Cache {
    pub fn open(dir: &Path) -> Cache {
        let manifest_path = dir.join("manifest.json");
        let file = fs::read(&manifest_path)
            .ok()
            .and_then(|bytes| serde_json::from_slice(&bytes).ok())
            .unwrap_or_default();
        Cache {
            manifest_path,
            file,
            dirty: false,
        }
    }

    /// True when the recorded entry matches `key` and the file at `path`
    /// still hashes to the recorded output digest.
    pub fn is_fresh(&self, rel: &str, key: &str, path: &Path) -> bool {
        let Some(entry) = self.file.entries.get(rel) else {
            return false;
        };
        if entry.input_key != key || !path.exists() {
            return false;
        }
        matches!(hash_file(path), Ok(h) if h == entry.output_sha256)
    }

    pub fn record(&mut self, rel: &str, key: &str, output_sha256: String) {
        self.file.entries.insert(
            rel.to_string(),
            CacheEntry {
                input_key: key.to_string(),
                output_sha256,
            },
        );
        self.dirty = true;
    }

    pub fn store(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        if let Some(parent) = self.manifest_path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating cache dir {}", parent.display()))?;
        }
        let mut bytes = serde_json::to_vec_pretty(&self.file)?;
        bytes.push(b'\n');
        fs::write(&self.manifest_path, bytes)
            .with_context(|| format!("writing {}", self.manifest_path.display()))?;
        self.dirty = false;
        Ok(())
    }
}

/// Writes `bytes` to `out_root/rel` unless the cache proves the file is
/// already the product of the same inputs. Returns true on a cache hit.
pub fn write_cached(
    cache: &mut Cache,
    out_root: &Path,
    rel: &str,
    key: &str,
    bytes: &[u8],
) -> Result<bool> {
    let path = out_root.join(rel);
    if cache.is_fresh(rel, key, &path) {
        return Ok(true);
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    cache.record(rel, key, sha256_hex(bytes));
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rerun_is_a_cache_hit_and_deletion_rebuilds() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let mut cache = Cache::open(&out.join(".cache"));
        let key = "k1";

        let hit = write_cached(&mut cache, &out, "a/file.csv", key, b"payload").unwrap();
        assert!(!hit);
        let hit = write_cached(&mut cache, &out, "a/file.csv", key, b"payload").unwrap();
        assert!(hit);

        fs::remove_file(out.join("a/file.csv")).unwrap();
        let hit = write_cached(&mut cache, &out, "a/file.csv", key, b"payload").unwrap();
        assert!(!hit, "deleted output must be regenerated");

        let hit = write_cached(&mut cache, &out, "a/file.csv", "k2", b"payload2").unwrap();
        assert!(!hit, "changed inputs must invalidate");
    }

    #[test]
    fn cache_survives_store_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let cache_dir = out.join(".cache");
        let mut cache = Cache::open(&cache_dir);
        write_cached(&mut cache, &out, "x.csv", "key", b"1,2,3\n").unwrap();
        cache.store().unwrap();

        let cache = Cache::open(&cache_dir);
        assert!(cache.is_fresh("x.csv", "key", &out.join("x.csv")));
        assert!(!cache.is_fresh("x.csv", "other", &out.join("x.csv")));
    }

    #[test]
    fn input_key_tracks_file_content() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "1").unwrap();
        let k1 = input_key(std::slice::from_ref(&a), "cfg").unwrap();
        fs::write(&a, "2").unwrap();
        let k2 = input_key(std::slice::from_ref(&a), "cfg").unwrap();
        assert_ne!(k1, k2);
        let k3 = input_key(&[a], "cfg2").unwrap();
        assert_ne!(k2, k3);
    }
}
