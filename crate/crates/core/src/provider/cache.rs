//! Append-only JSON-lines cache of provider responses.
//!
//! Each line is `{"provider", "src", "tgt", "text", "result", "ts"}`. Later
//! lines win on load. Lookups take a read lock; appends are serialized.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub provider: String,
    pub src: String,
    pub tgt: String,
    pub text: String,
}

impl CacheKey {
    pub fn new(provider: &str, src: &str, tgt: &str, text: &str) -> Self {
        Self {
            provider: provider.to_string(),
            src: src.to_string(),
            tgt: tgt.to_string(),
            text: text.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheRecord {
    pub provider: String,
    pub src: String,
    pub tgt: String,
    pub text: String,
    pub result: String,
    pub ts: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CacheStats {
    pub entries: usize,
    pub lines: usize,
    pub malformed_lines: usize,
    pub bytes: u64,
    pub per_provider: BTreeMap<String, usize>,
}

#[derive(Debug, Default)]
pub struct TranslationCache {
    entries: RwLock<HashMap<CacheKey, String>>,
    file: Mutex<Option<File>>,
    path: Option<PathBuf>,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a cache file and loads its entries.
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let (entries, _) = read_records(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Mutex::new(Some(file)),
            path: Some(path),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &CacheKey) -> Option<String> {
        self.entries.read().expect("cache lock poisoned").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, key: CacheKey, result: &str) -> std::io::Result<()> {
        let mut file = self.file.lock().expect("cache file lock poisoned");
        if let Some(f) = file.as_mut() {
            let record = CacheRecord {
                provider: key.provider.clone(),
                src: key.src.clone(),
                tgt: key.tgt.clone(),
                text: key.text.clone(),
                result: result.to_string(),
                ts: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            };
            let mut line = serde_json::to_string(&record).map_err(std::io::Error::other)?;
            line.push('\n');
            f.write_all(line.as_bytes())?;
        }
        self.entries
            .write()
            .expect("cache lock poisoned")
            .insert(key, result.to_string());
        Ok(())
    }
}

fn read_records(path: &Path) -> std::io::Result<(HashMap<CacheKey, String>, (usize, usize))> {
    let mut entries = HashMap::new();
    let (mut lines, mut malformed) = (0, 0);
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((entries, (0, 0))),
        Err(e) => return Err(e),
    };
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<CacheRecord>(&line) {
            Ok(r) => {
                entries.insert(CacheKey::new(&r.provider, &r.src, &r.tgt, &r.text), r.result);
            }
            Err(e) => {
                malformed += 1;
                log::warn!("{}: skipping malformed cache line: {e}", path.display());
            }
        }
    }
    Ok((entries, (lines, malformed)))
}

pub fn cache_stats(path: impl AsRef<Path>) -> std::io::Result<CacheStats> {
    let path = path.as_ref();
    let (entries, (lines, malformed_lines)) = read_records(path)?;
    let mut per_provider = BTreeMap::new();
    for key in entries.keys() {
        *per_provider.entry(key.provider.clone()).or_insert(0) += 1;
    }
    Ok(CacheStats {
        entries: entries.len(),
        lines,
        malformed_lines,
        bytes: fs::metadata(path).map_or(0, |m| m.len()),
        per_provider,
    })
}

/// Removes the cache file. Missing files are not an error.
pub fn clear_cache(path: impl AsRef<Path>) -> std::io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let key = CacheKey::new("mock", "en", "de", "marginal gloss");
        {
            let cache = TranslationCache::open(&path).unwrap();
            assert!(cache.get(&key).is_none());
            cache.insert(key.clone(), "Marginalie").unwrap();
            cache
                .insert(CacheKey::new("other", "en", "de", "marginal gloss"), "Randnotiz")
                .unwrap();
        }
        let text = fs::read_to_string(&path).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for field in ["provider", "src", "tgt", "text", "result", "ts"] {
            assert!(first.get(field).is_some(), "{field}");
        }

        let cache = TranslationCache::open(&path).unwrap();
        assert_eq!(cache.get(&key).as_deref(), Some("Marginalie"));
        // every key component matters
        assert!(cache
            .get(&CacheKey::new("mock", "en", "fr", "marginal gloss"))
            .is_none());
        assert!(cache
            .get(&CacheKey::new("mock", "de", "de", "marginal gloss"))
            .is_none());

        let stats = cache_stats(&path).unwrap();
        assert_eq!(stats.entries, 2);
        assert_eq!(stats.per_provider["mock"], 1);
        clear_cache(&path).unwrap();
        assert!(!path.exists());
        clear_cache(&path).unwrap();
    }

    #[test]
    fn tolerates_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        fs::write(
            &path,
            "not json\n{\"provider\":\"p\",\"src\":\"en\",\"tgt\":\"de\",\"text\":\"a\",\"result\":\"b\",\"ts\":1}\n",
        )
        .unwrap();
        let stats = cache_stats(&path).unwrap();
        assert_eq!((stats.entries, stats.lines, stats.malformed_lines), (1, 2, 1));
    }
}
