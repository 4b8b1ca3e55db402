//! Sidecar cache of definition models and guards, keyed by corpus content.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lemma_mill::cluster::Cluster;
use lemma_mill::corpus::raw_term;
use lemma_mill::sexpr::read_all;
use lemma_mill::{ClusterConfig, Clustering, DefinitionModel, Symbol, Term, ValueMap};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const NO_CACHE_ENV: &str = "LEMMA_MILL_NO_CACHE";

/// Floats are kept as raw bits so that a warm run sees exactly the values
/// a cold run computes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct StoredModel {
    config: String,
    values: Vec<(String, u64)>,
    vectors: Vec<(String, Vec<u64>)>,
    clusters: Vec<(Vec<String>, Vec<u64>)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct CacheFile {
    tool_version: String,
    corpus_hash: String,
    models: Vec<StoredModel>,
    guard_memo: Vec<(String, String)>,
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

fn floats(xs: &[u64]) -> Vec<f64> {
    xs.iter().map(|&x| f64::from_bits(x)).collect()
}

fn names(xs: &[Symbol]) -> Vec<String> {
    xs.iter().map(|s| s.lower()).collect()
}

fn config_key(cfg: &ClusterConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

impl StoredModel {
    fn new(cfg: &ClusterConfig, m: &DefinitionModel) -> StoredModel {
        StoredModel {
            config: config_key(cfg),
            values: m
                .values
                .entries()
                .map(|(k, v)| (k.lower(), v.to_bits()))
                .collect(),
            vectors: m
                .vectors
                .iter()
                .map(|(k, v)| (k.lower(), bits(v)))
                .collect(),
            clusters: m
                .clustering
                .clusters
                .iter()
                .map(|c| (names(&c.members), bits(&c.centroid)))
                .collect(),
        }
    }

    fn model(&self) -> DefinitionModel {
        let mut values = ValueMap::new();
        for (k, v) in &self.values {
            values.insert(Symbol::new(k), f64::from_bits(*v));
        }
        DefinitionModel {
            values,
            vectors: self
                .vectors
                .iter()
                .map(|(k, v)| (Symbol::new(k), floats(v)))
                .collect(),
            clustering: Clustering {
                clusters: self
                    .clusters
                    .iter()
                    .map(|(m, c)| Cluster {
                        members: m.iter().map(|s| Symbol::new(s)).collect(),
                        centroid: floats(c),
                    })
                    .collect(),
            },
        }
    }
}

pub fn corpus_hash(sources: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (_, text) in sources {
        h.update((text.len() as u64).to_le_bytes());
        h.update(text.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn default_path(first: &Path) -> PathBuf {
    let mut name = first
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".lemma-mill-cache.json");
    first.with_file_name(name)
}

pub struct Cache {
    path: Option<PathBuf>,
    file: CacheFile,
    dirty: bool,
}

impl Cache {
    /// A cache bound to `path`; a missing, unreadable or stale file yields an
    /// empty cache. `None` disables persistence.
    pub fn open(path: Option<PathBuf>, hash: &str) -> Cache {
        let fresh = CacheFile {
            tool_version: TOOL_VERSION.into(),
            corpus_hash: hash.into(),
            ..Default::default()
        };
        let file = path
            .as_ref()
            .and_then(|p| fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str::<CacheFile>(&s).ok())
            .filter(|f| f.tool_version == TOOL_VERSION && f.corpus_hash == hash)
            .unwrap_or(fresh);
        Cache {
            path,
            file,
            dirty: false,
        }
    }

    pub fn model(&self, cfg: &ClusterConfig) -> Option<DefinitionModel> {
        let key = config_key(cfg);
        self.file
            .models
            .iter()
            .find(|m| m.config == key)
            .map(StoredModel::model)
    }

    pub fn store_model(&mut self, cfg: &ClusterConfig, m: &DefinitionModel) {
        let key = config_key(cfg);
        self.file.models.retain(|s| s.config != key);
        self.file.models.push(StoredModel::new(cfg, m));
        self.dirty = true;
    }

    pub fn guards(&self) -> BTreeMap<Symbol, Term> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.file.guard_memo {
            let Ok(forms) = read_all(v, "<cache>") else {
                return BTreeMap::new();
            };
            let Some(Ok(t)) = forms.first().map(raw_term) else {
                return BTreeMap::new();
            };
            out.insert(Symbol::new(k), t);
        }
        out
    }

    pub fn store_guards(&mut self, memo: &BTreeMap<Symbol, Term>) {
        let new: Vec<(String, String)> = memo
            .iter()
            .map(|(k, v)| (k.lower(), v.to_string()))
            .collect();
        if new != self.file.guard_memo {
            self.file.guard_memo = new;
            self.dirty = true;
        }
    }

    /// Writes a temporary file next to the target and renames it over.
    pub fn save(&self) -> std::io::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if !self.dirty {
            return Ok(());
        }
        let mut tmp = path.clone().into_os_string();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        fs::write(
            &tmp,
            serde_json::to_vec(&self.file).expect("cache serializes"),
        )?;
        fs::rename(&tmp, path).inspect_err(|_| {
            let _ = fs::remove_file(&tmp);
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lemma_mill::recurrent::recurrent_cluster_definitions;
    use lemma_mill::Corpus;

    #[test]
    fn model_round_trips_bit_for_bit() {
        let c = Corpus::parse_str(
            "(defun f (x) (if (zp x) 0 (f (- x 1)))) (defun g (x) (f x)) (defun h (x) (* x x))",
        )
        .unwrap();
        let cfg = ClusterConfig {
            granularity: 1,
            ..Default::default()
        };
        let m = recurrent_cluster_definitions(&c, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let mut cache = Cache::open(Some(path.clone()), "abc");
        cache.store_model(&cfg, &m);
        cache.save().unwrap();
        let back = Cache::open(Some(path.clone()), "abc");
        assert_eq!(back.model(&cfg), Some(m));
        assert!(back.model(&cfg.with_seed(1)).is_none());
        assert!(Cache::open(Some(path), "other").model(&cfg).is_none());
    }

    #[test]
    fn guards_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let t = raw_term(&read_all("(and (integerp n) (not (< n 0)))", "t").unwrap()[0]).unwrap();
        let memo: BTreeMap<Symbol, Term> = [(Symbol::new("f"), t)].into_iter().collect();
        let mut cache = Cache::open(Some(path.clone()), "h");
        cache.store_guards(&memo);
        cache.save().unwrap();
        assert_eq!(Cache::open(Some(path), "h").guards(), memo);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            default_path(Path::new("/a/b/fig2.lisp")),
            PathBuf::from("/a/b/fig2.lisp.lemma-mill-cache.json")
        );
    }
}
