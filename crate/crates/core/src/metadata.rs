//! DOI → paper title resolution with a persistent on-disk cache.
//!
//! The endpoint is a URL template containing `{doi}`, e.g.
//! `https://api.crossref.org/works/{doi}`. The title is read from the JSON
//! response at a configurable path (default `message.title[0]`).
//!
//! The cache holds one file per DOI, named by the percent-encoded DOI:
//! `<doi>.title` holds the title, `<doi>.unknown` marks a DOI the endpoint
//! answered with 404.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

pub const ENDPOINT_ENV: &str = "SCITWEET_META_ENDPOINT";
pub const CACHE_ENV: &str = "SCITWEET_META_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".meta-cache";
pub const DEFAULT_FIELD_PATH: &str = "message.title[0]";
pub const DOI_PLACEHOLDER: &str = "{doi}";

const FILENAME_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_');
const URL_PATH_SET: &AsciiSet = &FILENAME_SET.remove(b'~').remove(b'/');

#[derive(Debug, thiserror::Error)]
pub enum MetaError {
    #[error("network failure resolving {doi}: {message}")]
    Network { doi: String, message: String },

    #[error("HTTP {status} resolving {doi}")]
    Http { doi: String, status: u16 },

    #[error("unknown DOI {0}")]
    UnknownDoi(String),

    #[error("malformed metadata for {doi}: {message}")]
    Malformed { doi: String, message: String },

    #[error("no metadata endpoint configured and {0} is not cached")]
    Offline(String),

    #[error("metadata cache {}: {source}", path.display())]
    Cache {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid metadata endpoint: {0}")]
    BadEndpoint(String),
}

impl MetaError {
    /// Failures worth retrying: transport errors, 429 and 5xx.
    pub fn is_retryable(&self) -> bool {
        match self {
            MetaError::Network { .. } => true,
            MetaError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub doi: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheEntry {
    Title(String),
    Unknown,
}

/// Directory-backed DOI cache. Writes go through a temporary file and a
/// rename, so readers never see partial titles.
#[derive(Debug, Clone)]
pub struct MetaCache {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

impl MetaCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        MetaCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file(&self, doi: &str, ext: &str) -> PathBuf {
        let name: String = utf8_percent_encode(doi, FILENAME_SET).collect();
        self.dir.join(format!("{name}.{ext}"))
    }

    pub fn lookup(&self, doi: &str) -> Result<Option<CacheEntry>, MetaError> {
        let title_path = self.file(doi, "title");
        match fs::read_to_string(&title_path) {
            Ok(t) => return Ok(Some(CacheEntry::Title(t))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(source) => {
                return Err(MetaError::Cache {
                    path: title_path,
                    source,
                })
            }
        }
        Ok(self.file(doi, "unknown").exists().then_some(CacheEntry::Unknown))
    }

    fn write(&self, path: &Path, content: &str) -> Result<(), MetaError> {
        let err = |source| MetaError::Cache {
            path: path.to_path_buf(),
            source,
        };
        fs::create_dir_all(&self.dir).map_err(err)?;
        let tmp = self.dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, content).map_err(err)?;
        fs::rename(&tmp, path).map_err(err)
    }

    pub fn store_title(&self, doi: &str, title: &str) -> Result<(), MetaError> {
        self.write(&self.file(doi, "title"), title)
    }

    pub fn store_unknown(&self, doi: &str) -> Result<(), MetaError> {
        self.write(&self.file(doi, "unknown"), "")
    }

    /// DOIs with a cached title.
    pub fn cached_dois(&self) -> Vec<String> {
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return Vec::new();
        };
        let mut dois: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let stem = name.strip_suffix(".title")?;
                Some(percent_decode_str(stem).decode_utf8().ok()?.into_owned())
            })
            .collect();
        dois.sort();
        dois
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PathStep {
    Key(String),
    Index(usize),
}

fn parse_field_path(path: &str) -> Result<Vec<PathStep>, MetaError> {
    let bad = || MetaError::BadEndpoint(format!("invalid field path {path:?}"));
    let mut steps = Vec::new();
    for segment in path.split('.') {
        let (key, mut rest) = match segment.find('[') {
            Some(i) => (&segment[..i], &segment[i..]),
            None => (segment, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        steps.push(PathStep::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            let idx = rest[1..close].parse().map_err(|_| bad())?;
            steps.push(PathStep::Index(idx));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(bad());
            }
        }
    }
    Ok(steps)
}

fn extract<'a>(value: &'a serde_json::Value, steps: &[PathStep]) -> Option<&'a serde_json::Value> {
    steps.iter().try_fold(value, |v, step| match step {
        PathStep::Key(k) => v.get(k.as_str()),
        PathStep::Index(i) => v.get(*i),
    })
}

#[derive(Debug, Clone)]
pub struct MetadataConfig {
    /// URL template with a `{doi}` placeholder; `None` means offline.
    pub endpoint: Option<String>,
    pub cache_dir: PathBuf,
    pub field_path: String,
    pub timeout: Duration,
    pub retries: u32,
    pub backoff: Duration,
    /// Maximum concurrent requests during bulk resolution.
    pub parallelism: usize,
}

impl Default for MetadataConfig {
    fn default() -> Self {
        MetadataConfig {
            endpoint: None,
            cache_dir: PathBuf::from(DEFAULT_CACHE_DIR),
            field_path: DEFAULT_FIELD_PATH.to_string(),
            timeout: Duration::from_secs(10),
            retries: 2,
            backoff: Duration::from_millis(500),
            parallelism: 4,
        }
    }
}

impl MetadataConfig {
    /// Defaults overridden by `SCITWEET_META_ENDPOINT` and `SCITWEET_META_CACHE`.
    pub fn from_env() -> Self {
        let mut cfg = MetadataConfig::default();
        if let Ok(e) = std::env::var(ENDPOINT_ENV) {
            if !e.is_empty() {
                cfg.endpoint = Some(e);
            }
        }
        if let Ok(c) = std::env::var(CACHE_ENV) {
            if !c.is_empty() {
                cfg.cache_dir = PathBuf::from(c);
            }
        }
        cfg
    }
}

/// Titles found for a corpus plus the DOIs that could not be resolved.
#[derive(Debug, Default)]
pub struct BulkResolution {
    pub titles: BTreeMap<String, String>,
    pub failures: Vec<(String, MetaError)>,
}

pub struct MetadataClient {
    config: MetadataConfig,
    steps: Vec<PathStep>,
    cache: MetaCache,
    agent: ureq::Agent,
    requests: AtomicUsize,
}

impl MetadataClient {
    pub fn new(config: MetadataConfig) -> Result<Self, MetaError> {
        if let Some(ep) = &config.endpoint {
            if !ep.contains(DOI_PLACEHOLDER) {
                return Err(MetaError::BadEndpoint(format!(
                    "{ep:?} lacks the {DOI_PLACEHOLDER} placeholder"
                )));
            }
        }
        let steps = parse_field_path(&config.field_path)?;
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Ok(MetadataClient {
            cache: MetaCache::new(config.cache_dir.clone()),
            steps,
            agent,
            requests: AtomicUsize::new(0),
            config,
        })
    }

    pub fn cache(&self) -> &MetaCache {
        &self.cache
    }

    pub fn is_online(&self) -> bool {
        self.config.endpoint.is_some()
    }

    /// HTTP requests issued so far, retries included.
    pub fn requests_made(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    fn fetch_once(&self, template: &str, doi: &str) -> Result<String, MetaError> {
        let encoded: String = utf8_percent_encode(doi, URL_PATH_SET).collect();
        let url = template.replace(DOI_PLACEHOLDER, &encoded);
        self.requests.fetch_add(1, Ordering::Relaxed);
        debug!("GET {url}");
        let response = match self.agent.get(&url).call() {
            Ok(r) => r,
            Err(ureq::Error::Status(404, _)) => return Err(MetaError::UnknownDoi(doi.to_string())),
            Err(ureq::Error::Status(status, _)) => {
                return Err(MetaError::Http {
                    doi: doi.to_string(),
                    status,
                })
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(MetaError::Network {
                    doi: doi.to_string(),
                    message: t.to_string(),
                })
            }
        };
        let body = response.into_string().map_err(|e| MetaError::Network {
            doi: doi.to_string(),
            message: e.to_string(),
        })?;
        let malformed = |message: String| MetaError::Malformed {
            doi: doi.to_string(),
            message,
        };
        let json: serde_json::Value = serde_json::from_str(&body).map_err(|e| malformed(e.to_string()))?;
        match extract(&json, &self.steps) {
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(malformed(format!("{} is not a string", self.config.field_path))),
            None => Err(malformed(format!("missing {}", self.config.field_path))),
        }
    }

    fn fetch(&self, template: &str, doi: &str) -> Result<String, MetaError> {
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            match self.fetch_once(template, doi) {
                Err(e) if e.is_retryable() && attempt < self.config.retries => {
                    warn!("{e}; retrying in {delay:?}");
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    /// Cached title if present, otherwise one lookup (with retries) that
    /// populates the cache. 404 answers are cached as unknown.
    pub fn resolve_title(&self, doi: &str) -> Result<PaperMeta, MetaError> {
        match self.cache.lookup(doi)? {
            Some(CacheEntry::Title(title)) => {
                return Ok(PaperMeta {
                    doi: doi.to_string(),
                    title,
                })
            }
            Some(CacheEntry::Unknown) => return Err(MetaError::UnknownDoi(doi.to_string())),
            None => {}
        }
        let template = self
            .config
            .endpoint
            .as_deref()
            .ok_or_else(|| MetaError::Offline(doi.to_string()))?;
        match self.fetch(template, doi) {
            Ok(title) => {
                self.cache.store_title(doi, &title)?;
                Ok(PaperMeta {
                    doi: doi.to_string(),
                    title,
                })
            }
            Err(MetaError::UnknownDoi(d)) => {
                self.cache.store_unknown(&d)?;
                Err(MetaError::UnknownDoi(d))
            }
            Err(e) => Err(e),
        }
    }

    /// Resolves every distinct DOI of the corpus once. Inline titles win and
    /// are never looked up. Per-DOI failures are collected, not raised.
    pub fn bulk_resolve(&self, corpus: &Corpus) -> BulkResolution {
        let mut out = BulkResolution::default();
        for t in corpus {
            if let (Some(doi), Some(title)) = (&t.doi, &t.title) {
                out.titles.entry(doi.clone()).or_insert_with(|| title.clone());
            }
        }
        let mut seen = HashSet::new();
        let pending: Vec<&str> = corpus
            .iter()
            .filter_map(|t| t.doi.as_deref())
            .filter(|d| !out.titles.contains_key(*d) && seen.insert(*d))
            .collect();

        let results: Vec<Mutex<Option<Result<PaperMeta, MetaError>>>> =
            pending.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.parallelism.max(1).min(pending.len());
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(doi) = pending.get(i) else { break };
                    let r = self.resolve_title(doi);
                    *results[i].lock().expect("result slot") = Some(r);
                });
            }
        });

        for (doi, slot) in pending.iter().zip(results) {
            match slot.into_inner().expect("result slot").expect("every DOI attempted") {
                Ok(meta) => {
                    out.titles.insert(meta.doi, meta.title);
                }
                Err(e) => out.failures.push((doi.to_string(), e)),
            }
        }
        out
    }
}
