//! One JSON file per canonical parameter key, written atomically.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub result: serde_json::Value,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
}

/// `command` followed by `key=value` pairs in key order; the map keeps it
/// independent of flag order.
pub fn canonical_key(command: &str, params: &BTreeMap<String, String>) -> String {
    let mut key = String::from(command);
    for (k, v) in params {
        key.push('\n');
        key.push_str(k);
        key.push('=');
        key.push_str(v);
    }
    key
}

pub fn key_hash(command: &str, params: &BTreeMap<String, String>) -> String {
    hex::encode(Sha256::digest(canonical_key(command, params).as_bytes()))
}

pub fn render(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("record serializes");
    s.push('\n');
    s
}

pub struct Cache {
    dir: PathBuf,
    enabled: bool,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>, enabled: bool) -> Self {
        Cache {
            dir: dir.into(),
            enabled,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, command: &str, params: &BTreeMap<String, String>) -> PathBuf {
        self.dir.join(format!("{}.json", key_hash(command, params)))
    }

    /// The stored text, if it is a record for exactly this key and tool version.
    pub fn lookup(&self, command: &str, params: &BTreeMap<String, String>) -> Option<String> {
        if !self.enabled {
            return None;
        }
        let text = fs::read_to_string(self.path_for(command, params)).ok()?;
        let record: RunRecord = serde_json::from_str(&text).ok()?;
        (record.command == command
            && record.params == *params
            && record.tool_version == TOOL_VERSION)
            .then_some(text)
    }

    pub fn store(&self, record: &RunRecord) -> Result<String> {
        let text = render(record);
        if !self.enabled {
            return Ok(text);
        }
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.path_for(&record.command, &record.params);
        let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
        fs::write(&tmp, &text).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("renaming to {}", path.display()))?;
        Ok(text)
    }

    /// Returns the cached text or computes, records and stores a new run.
    pub fn run(
        &self,
        command: &str,
        params: BTreeMap<String, String>,
        seed: Option<u64>,
        compute: impl FnOnce() -> Result<serde_json::Value>,
    ) -> Result<String> {
        if let Some(text) = self.lookup(command, &params) {
            return Ok(text);
        }
        let result = compute()?;
        let record = RunRecord {
            command: command.to_string(),
            params,
            result,
            seed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: TOOL_VERSION.to_string(),
        };
        self.store(&record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn key_ignores_insertion_order() {
        let a = params(&[("N", "10"), ("k", "2")]);
        let b = params(&[("k", "2"), ("N", "10")]);
        assert_eq!(key_hash("moment", &a), key_hash("moment", &b));
        assert_ne!(key_hash("moment", &a), key_hash("euler", &a));
        assert_ne!(
            key_hash("moment", &a),
            key_hash("moment", &params(&[("N", "11"), ("k", "2")]))
        );
        assert_eq!(key_hash("x", &a).len(), 64);
    }

    #[test]
    fn hit_is_byte_identical_and_version_checked() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path(), true);
        let p = params(&[("N", "3")]);
        let first = cache
            .run("moment", p.clone(), None, || {
                Ok(serde_json::json!({"v": 1}))
            })
            .unwrap();
        let second = cache
            .run("moment", p.clone(), None, || panic!("recomputed"))
            .unwrap();
        assert_eq!(first, second);

        let path = cache.path_for("moment", &p);
        let mut record: RunRecord = serde_json::from_str(&first).unwrap();
        record.tool_version = "0.0.0-other".into();
        fs::write(&path, render(&record)).unwrap();
        assert!(cache.lookup("moment", &p).is_none());
        let third = cache
            .run("moment", p, None, || Ok(serde_json::json!({"v": 2})))
            .unwrap();
        assert!(third.contains("\"v\": 2"));
    }

    #[test]
    fn disabled_cache_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("r"), false);
        cache
            .run("a", BTreeMap::new(), None, || Ok(serde_json::json!(1)))
            .unwrap();
        assert!(!dir.path().join("r").exists());
    }
}
