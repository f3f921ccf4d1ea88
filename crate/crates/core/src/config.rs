//! Flat `key=value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! seed = 42
//! forum = leaves
//! paths.dump = data/leaves.jsonl
//! paths.annotations = data/annotations.csv
//! lda.K = 20
//! forest.n_trees = 500
//! labels.topic_0 = Quitting and withdrawal
//! ```
//!
//! Recognised keys are listed in [`KNOWN_KEYS`]; `labels.topic_<i>` keys name
//! topics in reports. `seed` has no default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::lexicons::{CategoryLexicon, DrugLexicon, Lexicons, SubjectivityLexicon};
use crate::textproc::Tagger;
use crate::topics::{LdaParams, Stoplist};

pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "forum",
    "paths.dump",
    "paths.corpus",
    "paths.annotations",
    "paths.out",
    "paths.categories",
    "paths.subjectivity",
    "paths.drugs",
    "paths.tagger",
    "paths.stopwords",
    "lda.K",
    "lda.alpha",
    "lda.beta",
    "lda.iterations",
    "lda.min_df",
    "lda.fold_in_sweeps",
    "forest.n_trees",
    "forest.mtry",
    "forest.min_leaf",
    "analysis.k_min",
    "summary.window_start",
    "summary.window_end",
    "sample.n",
    "report.top_features",
    "report.top_words",
];

const INPUT_PATH_KEYS: &[&str] = &[
    "paths.dump",
    "paths.corpus",
    "paths.annotations",
    "paths.categories",
    "paths.subjectivity",
    "paths.tagger",
    "paths.stopwords",
];

/// Raw key/value pairs, sorted by key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_pair(line).map_err(|message| Error::Parse { line: i + 1, message })?;
            check_key(&k)?;
            if values.insert(k.clone(), v).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key {k}"),
                });
            }
        }
        Ok(Self { values })
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (k, v) = split_pair(pair).map_err(Error::Argument)?;
        self.set(&k, v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// One `key=value` line per entry, sorted.
    pub fn render(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse \"{v}\"")))
            })
            .transpose()
    }
}

fn split_pair(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got \"{s}\""))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in \"{s}\""));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn check_key(key: &str) -> Result<()> {
    let label_ok = key
        .strip_prefix("labels.topic_")
        .is_some_and(|i| !i.is_empty() && i.bytes().all(|b| b.is_ascii_digit()));
    if label_ok || KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown config key {key}")))
    }
}

/// Validated, typed view of a [`RawConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub seed: u64,
    pub forum: String,
    pub dump: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub out: PathBuf,
    pub categories: Option<PathBuf>,
    pub subjectivity: Option<PathBuf>,
    pub drugs: Vec<PathBuf>,
    pub tagger: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lda: LdaParams,
    pub forest: ForestParams,
    pub k_min: usize,
    pub window: Option<(i64, i64)>,
    pub sample_n: usize,
    pub top_features: usize,
    pub top_words: usize,
    pub topic_labels: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let seed: u64 = raw
            .parsed("seed")?
            .ok_or_else(|| Error::Config("seed is required".into()))?;
        let forum = raw
            .get("forum")
            .ok_or_else(|| Error::Config("forum is required".into()))?
            .to_string();
        if forum.is_empty() {
            return Err(Error::Config("forum must not be empty".into()));
        }
        for key in INPUT_PATH_KEYS {
            if let Some(p) = raw.get(key) {
                if !Path::new(p).exists() {
                    return Err(Error::Config(format!("{key}: {p} does not exist")));
                }
            }
        }
        let drugs: Vec<PathBuf> = raw
            .get("paths.drugs")
            .map(|v| v.split(',').map(|s| PathBuf::from(s.trim())).collect())
            .unwrap_or_default();
        if let Some(missing) = drugs.iter().find(|p| !p.exists()) {
            return Err(Error::Config(format!("paths.drugs: {} does not exist", missing.display())));
        }
        let path = |k: &str| raw.get(k).map(PathBuf::from);

        let mut lda = LdaParams::new(raw.parsed("lda.K")?.unwrap_or(20), seed);
        lda.alpha = raw.parsed("lda.alpha")?;
        if let Some(b) = raw.parsed("lda.beta")? {
            lda.beta = b;
        }
        if let Some(n) = raw.parsed("lda.iterations")? {
            lda.iterations = n;
        }
        if let Some(n) = raw.parsed("lda.min_df")? {
            lda.min_doc_freq = n;
        }
        if let Some(n) = raw.parsed("lda.fold_in_sweeps")? {
            lda.fold_in_sweeps = n;
        }
        lda.validate()?;

        let mut forest = ForestParams::default();
        if let Some(n) = raw.parsed("forest.n_trees")? {
            forest.n_trees = n;
        }
        forest.mtry = raw.parsed("forest.mtry")?;
        if let Some(n) = raw.parsed("forest.min_leaf")? {
            forest.min_leaf = n;
        }
        if forest.n_trees == 0 || forest.min_leaf == 0 || forest.mtry == Some(0) {
            return Err(Error::Config("forest.n_trees, forest.mtry and forest.min_leaf must be >= 1".into()));
        }

        let k_min = raw.parsed("analysis.k_min")?.unwrap_or(crate::pipeline::DEFAULT_MIN_USER_POSTS);
        if k_min == 0 {
            return Err(Error::Config("analysis.k_min must be >= 1".into()));
        }
        let window = match (raw.parsed::<i64>("summary.window_start")?, raw.parsed::<i64>("summary.window_end")?) {
            (Some(s), Some(e)) if s <= e => Some((s, e)),
            (Some(s), Some(e)) => {
                return Err(Error::Config(format!("summary window is inverted: {s} > {e}")))
            }
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "summary.window_start and summary.window_end must be set together".into(),
                ))
            }
        };
        let topic_labels = raw
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("labels.").map(|t| (t.to_string(), v.to_string())))
            .collect();

        Ok(Self {
            seed,
            forum,
            dump: path("paths.dump"),
            corpus: path("paths.corpus"),
            annotations: path("paths.annotations"),
            out: path("paths.out").unwrap_or_else(|| PathBuf::from("out")),
            categories: path("paths.categories"),
            subjectivity: path("paths.subjectivity"),
            drugs,
            tagger: path("paths.tagger"),
            stopwords: path("paths.stopwords"),
            lda,
            forest,
            k_min,
            window,
            sample_n: raw.parsed("sample.n")?.unwrap_or(1000),
            top_features: raw.parsed("report.top_features")?.unwrap_or(5),
            top_words: raw.parsed("report.top_words")?.unwrap_or(5),
            topic_labels,
            raw,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(RawConfig::parse(text)?)
    }

    /// Configured lexicons, falling back to the bundled ones per file.
    pub fn lexicons(&self) -> Result<Lexicons> {
        let categories = match &self.categories {
            Some(p) => CategoryLexicon::load(p)?,
            None => CategoryLexicon::bundled(),
        };
        let subjectivity = match &self.subjectivity {
            Some(p) => SubjectivityLexicon::load(p)?,
            None => SubjectivityLexicon::bundled(),
        };
        let drugs = if self.drugs.is_empty() {
            DrugLexicon::bundled()
        } else {
            DrugLexicon::load_all(&self.drugs)?
        };
        Ok(Lexicons {
            categories,
            subjectivity,
            drugs,
        })
    }

    pub fn tagger(&self) -> Result<Tagger> {
        match &self.tagger {
            Some(p) => Tagger::load(p),
            None => Ok(Tagger::bundled()),
        }
    }

    pub fn stoplist(&self) -> Result<Stoplist> {
        match &self.stopwords {
            Some(p) => Stoplist::load(p),
            None => Ok(Stoplist::bundled()),
        }
    }
}
