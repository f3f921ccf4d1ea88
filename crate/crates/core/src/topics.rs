//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeededRng, RNG_ID};
use crate::textproc::{tokenize, Tag};

pub const TOPIC_MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_FOLD_IN_SWEEPS: usize = 20;
pub const DEFAULT_MIN_DOC_FREQ: usize = 2;

// Mixed into the training seed for fold-in inference.
const INFERENCE_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Words dropped before topic modelling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");

impl Stoplist {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercased word tokens of a title, minus numbers, punctuation,
/// single letters and stopwords.
pub fn topic_terms(text: &str, stoplist: &Stoplist) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.tag == Tag::Other && t.lower.chars().any(char::is_alphabetic))
        .filter(|t| t.lower.chars().count() >= 2 && !stoplist.contains(&t.lower))
        .map(|t| t.lower)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaParams {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means 50 / K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub min_doc_freq: usize,
    pub fold_in_sweeps: usize,
}

impl LdaParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            alpha: None,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed,
            min_doc_freq: DEFAULT_MIN_DOC_FREQ,
            fold_in_sweeps: DEFAULT_FOLD_IN_SWEEPS,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("topic count K must be >= 1".into()));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "alpha and beta must be positive, got {alpha} and {}",
                self.beta
            )));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.min_doc_freq < 1 {
            return Err(Error::Config("min_doc_freq must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sorted vocabulary with a reverse index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_words(mut words: Vec<String>) -> Result<Self> {
        let n = words.len();
        words.sort();
        words.dedup();
        if words.len() != n {
            return Err(Error::Validation("vocabulary contains duplicates".into()));
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self { words, index })
    }

    /// Words passing the stoplist that occur in at least `min_df` documents.
    pub fn build(docs: &[Vec<String>], stoplist: &Stoplist, min_df: usize) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let uniq: HashSet<&str> = doc.iter().map(String::as_str).collect();
            for w in uniq {
                if !stoplist.contains(w) {
                    *df.entry(w).or_default() += 1;
                }
            }
        }
        let words: Vec<String> = df
            .into_iter()
            .filter(|(_, n)| *n >= min_df)
            .map(|(w, _)| w.to_string())
            .collect();
        Self::from_words(words).expect("document-frequency keys are unique")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn encode(&self, doc: &[String]) -> Vec<usize> {
        doc.iter().filter_map(|w| self.id(w)).collect()
    }
}

/// Collapsed Gibbs sampler state: assignments plus the three count tables.
#[derive(Debug, Clone)]
pub struct TopicAssignmentState {
    k: usize,
    alpha: f64,
    beta: f64,
    vocab: Vocabulary,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic_total: Vec<u32>,
}

impl TopicAssignmentState {
    fn init(docs: Vec<Vec<usize>>, vocab: Vocabulary, params: &LdaParams, rng: &mut SeededRng) -> Self {
        let k = params.k;
        let v = vocab.len();
        let mut state = Self {
            k,
            alpha: params.alpha(),
            beta: params.beta,
            vocab,
            assignments: Vec::with_capacity(docs.len()),
            doc_topic: vec![0; docs.len() * k],
            topic_word: vec![0; k * v],
            topic_total: vec![0; k],
            docs: Vec::new(),
        };
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let topic = rng.below(k);
                state.doc_topic[d * k + topic] += 1;
                state.topic_word[topic * v + w] += 1;
                state.topic_total[topic] += 1;
                z.push(topic);
            }
            state.assignments.push(z);
        }
        state.docs = docs;
        state
    }

    fn sweep(&mut self, rng: &mut SeededRng, weights: &mut [f64]) {
        let k = self.k;
        let v = self.vocab.len();
        let v_beta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d * k + old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;

                for (t, weight) in weights.iter_mut().enumerate() {
                    *weight = (f64::from(self.doc_topic[d * k + t]) + self.alpha)
                        * (f64::from(self.topic_word[t * v + w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + v_beta);
                }
                let new = rng.weighted(weights);

                self.doc_topic[d * k + new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
                self.assignments[d][i] = new;
            }
        }
    }

    /// Verifies that all three count tables agree with the assignments.
    pub fn check_conservation(&self) -> Result<()> {
        let k = self.k;
        let v = self.vocab.len();
        let total_tokens: usize = self.docs.iter().map(Vec::len).sum();
        for (d, doc) in self.docs.iter().enumerate() {
            let row: u64 = self.doc_topic[d * k..(d + 1) * k].iter().map(|&c| u64::from(c)).sum();
            if row != doc.len() as u64 {
                return Err(Error::Numerical(format!(
                    "doc {d}: doc-topic counts sum to {row}, document has {} tokens",
                    doc.len()
                )));
            }
        }
        for t in 0..k {
            let row: u64 = self.topic_word[t * v..(t + 1) * v].iter().map(|&c| u64::from(c)).sum();
            if row != u64::from(self.topic_total[t]) {
                return Err(Error::Numerical(format!(
                    "topic {t}: topic-word counts sum to {row}, topic total is {}",
                    self.topic_total[t]
                )));
            }
        }
        let dk: u64 = self.doc_topic.iter().map(|&c| u64::from(c)).sum();
        let nk: u64 = self.topic_total.iter().map(|&c| u64::from(c)).sum();
        if dk != total_tokens as u64 || nk != total_tokens as u64 {
            return Err(Error::Numerical(format!(
                "token totals disagree: doc-topic {dk}, topic {nk}, tokens {total_tokens}"
            )));
        }
        Ok(())
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn n_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.k + topic]
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[topic * self.vocab.len() + word]
    }

    pub fn topic_total(&self, topic: usize) -> u32 {
        self.topic_total[topic]
    }

    /// Smoothed topic-word distribution from the current counts.
    pub fn phi(&self) -> Vec<f64> {
        let v = self.vocab.len();
        let v_beta = v as f64 * self.beta;
        let mut phi = Vec::with_capacity(self.k * v);
        for t in 0..self.k {
            let denom = f64::from(self.topic_total[t]) + v_beta;
            for w in 0..v {
                phi.push((f64::from(self.topic_word[t * v + w]) + self.beta) / denom);
            }
        }
        phi
    }

    /// Freezes the current counts into a model.
    pub fn to_model(&self, params: &LdaParams) -> TopicModel {
        TopicModel::from_parts(
            params,
            self.vocab.clone(),
            self.phi(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopicModelFile {
    format_version: u32,
    #[serde(rename = "K")]
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterations: usize,
    fold_in_sweeps: usize,
    vocab: Vec<String>,
    phi: Vec<f64>,
    rng_id: String,
}

/// Trained topic-word distributions plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterations: usize,
    fold_in_sweeps: usize,
    vocab: Vocabulary,
    phi: Vec<f64>,
}

impl TopicModel {
    fn from_parts(params: &LdaParams, vocab: Vocabulary, phi: Vec<f64>) -> Self {
        Self {
            k: params.k,
            alpha: params.alpha(),
            beta: params.beta,
            seed: params.seed,
            iterations: params.iterations,
            fold_in_sweeps: params.fold_in_sweeps,
            vocab,
            phi,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.vocab.len();
        &self.phi[topic * v..(topic + 1) * v]
    }

    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        self.phi[topic * self.vocab.len() + word]
    }

    /// Document-topic proportions by fold-in Gibbs with `phi` held fixed.
    /// Titles with no in-vocabulary term get the uniform vector.
    pub fn infer(&self, terms: &[String]) -> Vec<f64> {
        let doc = self.vocab.encode(terms);
        let k = self.k;
        if doc.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let mut rng = SeededRng::new(self.seed ^ INFERENCE_SEED_SALT);
        let mut counts = vec![0u32; k];
        let mut weights = vec![0.0; k];
        let mut z: Vec<usize> = doc
            .iter()
            .map(|&w| {
                for (t, weight) in weights.iter_mut().enumerate() {
                    *weight = self.phi(t, w);
                }
                let t = rng.weighted(&weights);
                counts[t] += 1;
                t
            })
            .collect();
        for _ in 0..self.fold_in_sweeps {
            for (i, &w) in doc.iter().enumerate() {
                counts[z[i]] -= 1;
                for (t, weight) in weights.iter_mut().enumerate() {
                    *weight = (f64::from(counts[t]) + self.alpha) * self.phi(t, w);
                }
                z[i] = rng.weighted(&weights);
                counts[z[i]] += 1;
            }
        }
        let denom = doc.len() as f64 + k as f64 * self.alpha;
        let mut theta: Vec<f64> = counts
            .iter()
            .map(|&c| (f64::from(c) + self.alpha) / denom)
            .collect();
        // Renormalize so the slots sum to one to within rounding.
        let s: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|p| *p /= s);
        theta
    }

    /// Highest-probability words of a topic; ties go to the alphabetically
    /// earlier word.
    pub fn top_words(&self, topic: usize, k: usize) -> Result<Vec<String>> {
        if topic >= self.k {
            return Err(Error::Argument(format!(
                "topic {topic} out of range for K={}",
                self.k
            )));
        }
        if k == 0 {
            return Err(Error::Argument("top_words needs k >= 1".into()));
        }
        let row = self.phi_row(topic);
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        Ok(ids
            .into_iter()
            .take(k)
            .map(|i| self.vocab.word(i).to_string())
            .collect())
    }

    /// exp of the mean negative log-likelihood per in-vocabulary token.
    pub fn perplexity(&self, docs: &[Vec<String>]) -> f64 {
        let mut log_lik = 0.0;
        let mut n = 0usize;
        for doc in docs {
            let theta = self.infer(doc);
            for w in self.vocab.encode(doc) {
                let p: f64 = (0..self.k).map(|t| theta[t] * self.phi(t, w)).sum();
                log_lik += p.ln();
                n += 1;
            }
        }
        if n == 0 {
            return f64::NAN;
        }
        (-log_lik / n as f64).exp()
    }

    pub fn to_json(&self) -> String {
        let file = TopicModelFile {
            format_version: TOPIC_MODEL_FORMAT_VERSION,
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations: self.iterations,
            fold_in_sweeps: self.fold_in_sweeps,
            vocab: self.vocab.words().to_vec(),
            phi: self.phi.clone(),
            rng_id: RNG_ID.to_string(),
        };
        serde_json::to_string_pretty(&file).expect("topic model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::ModelLoad(e.to_string()))?;
        let version = raw
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::ModelLoad("missing format_version".into()))?;
        if version != u64::from(TOPIC_MODEL_FORMAT_VERSION) {
            return Err(Error::Version {
                found: version as u32,
                supported: vec![TOPIC_MODEL_FORMAT_VERSION],
            });
        }
        let file: TopicModelFile =
            serde_json::from_value(raw).map_err(|e| Error::ModelLoad(e.to_string()))?;
        if file.rng_id != RNG_ID {
            return Err(Error::ModelLoad(format!(
                "model was trained with rng \"{}\", this build provides \"{RNG_ID}\"",
                file.rng_id
            )));
        }
        let vocab = Vocabulary::from_words(file.vocab.clone())
            .map_err(|e| Error::ModelLoad(e.to_string()))?;
        if vocab.words() != file.vocab.as_slice() {
            return Err(Error::ModelLoad("vocabulary is not sorted".into()));
        }
        if file.k < 1 || file.phi.len() != file.k * vocab.len() {
            return Err(Error::ModelLoad(format!(
                "phi has {} entries, expected K x |V| = {} x {}",
                file.phi.len(),
                file.k,
                vocab.len()
            )));
        }
        let v = vocab.len();
        for t in 0..file.k {
            let row = &file.phi[t * v..(t + 1) * v];
            if row.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                return Err(Error::ModelLoad(format!("phi row {t} has entries outside (0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::ModelLoad(format!("phi row {t} sums to {s}")));
            }
        }
        Ok(Self {
            k: file.k,
            alpha: file.alpha,
            beta: file.beta,
            seed: file.seed,
            iterations: file.iterations,
            fold_in_sweeps: file.fold_in_sweeps,
            vocab,
            phi: file.phi,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Trains LDA over pre-tokenized documents.
pub fn train_lda(docs: &[Vec<String>], params: &LdaParams, stoplist: &Stoplist) -> Result<TopicModel> {
    train_lda_with_observer(docs, params, stoplist, |_, _| {})
}

/// As [`train_lda`], calling `observer(sweep, state)` after every sweep.
pub fn train_lda_with_observer<F>(
    docs: &[Vec<String>],
    params: &LdaParams,
    stoplist: &Stoplist,
    mut observer: F,
) -> Result<TopicModel>
where
    F: FnMut(usize, &TopicAssignmentState),
{
    params.validate()?;
    let vocab = Vocabulary::build(docs, stoplist, params.min_doc_freq);
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| vocab.encode(d))
        .filter(|d| !d.is_empty())
        .collect();
    if encoded.is_empty() || vocab.is_empty() {
        return Err(Error::Training(
            "no documents with in-vocabulary terms after stopword and frequency filtering".into(),
        ));
    }
    let mut rng = SeededRng::new(params.seed);
    let mut state = TopicAssignmentState::init(encoded, vocab, params, &mut rng);
    let mut weights = vec![0.0; params.k];
    for sweep in 0..params.iterations {
        state.sweep(&mut rng, &mut weights);
        if cfg!(debug_assertions) {
            if let Err(e) = state.check_conservation() {
                panic!("count conservation violated after sweep {sweep}: {e}");
            }
        }
        observer(sweep, &state);
    }
    Ok(state.to_model(params))
}

pub fn infer_topics(model: &TopicModel, terms: &[String]) -> Vec<f64> {
    model.infer(terms)
}

pub fn top_words(model: &TopicModel, topic: usize, k: usize) -> Result<Vec<String>> {
    model.top_words(topic, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn small_corpus() -> Vec<Vec<String>> {
        vec![
            doc("day clean day sober"),
            doc("day weed quit"),
            doc("sober clean week"),
            doc("quit weed day"),
            doc("week day"),
        ]
    }

    #[test]
    fn single_topic_is_smoothed_unigram() {
        let mut params = LdaParams::new(1, 3);
        params.iterations = 5;
        let docs = small_corpus();
        let model = train_lda(&docs, &params, &Stoplist::empty()).unwrap();
        // all words appear in >= 2 docs: clean day quit sober week weed
        assert_eq!(model.vocab().len(), 6);
        let counts = [("clean", 2.0), ("day", 5.0), ("quit", 2.0), ("sober", 2.0), ("week", 2.0), ("weed", 2.0)];
        let total = 15.0;
        for (w, c) in counts {
            let id = model.vocab().id(w).unwrap();
            let expected = (c + 0.01) / (total + 6.0 * 0.01);
            assert!((model.phi(0, id) - expected).abs() < 1e-15);
        }
        assert_eq!(model.infer(&doc("day clean")), vec![1.0]);
        assert_eq!(model.top_words(0, 1).unwrap(), ["day"]);
    }

    #[test]
    fn top_words_boundaries() {
        let mut params = LdaParams::new(1, 3);
        params.iterations = 2;
        let model = train_lda(&small_corpus(), &params, &Stoplist::empty()).unwrap();
        let all = model.top_words(0, 100).unwrap();
        assert_eq!(all, ["day", "clean", "quit", "sober", "weed", "week"]);
        assert!(model.top_words(1, 3).is_err());
        assert!(model.top_words(0, 0).is_err());
    }

    #[test]
    fn oov_title_is_uniform() {
        let mut params = LdaParams::new(20, 1);
        params.iterations = 3;
        let model = train_lda(&small_corpus(), &params, &Stoplist::empty()).unwrap();
        let theta = model.infer(&doc("zebra xylophone"));
        assert_eq!(theta, vec![0.05; 20]);
    }

    #[test]
    fn empty_after_filtering_fails() {
        let params = LdaParams::new(2, 1);
        let docs = vec![doc("alpha"), doc("beta")];
        assert!(matches!(
            train_lda(&docs, &params, &Stoplist::empty()),
            Err(Error::Training(_))
        ));
        let docs = vec![doc("the the"), doc("the")];
        assert!(train_lda(&docs, &params, &Stoplist::bundled()).is_err());
    }

    #[test]
    fn invalid_params() {
        let docs = small_corpus();
        let mut p = LdaParams::new(0, 1);
        assert!(matches!(train_lda(&docs, &p, &Stoplist::empty()), Err(Error::Config(_))));
        p = LdaParams::new(2, 1);
        p.beta = 0.0;
        assert!(train_lda(&docs, &p, &Stoplist::empty()).is_err());
        p = LdaParams::new(2, 1);
        p.iterations = 0;
        assert!(train_lda(&docs, &p, &Stoplist::empty()).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut params = LdaParams::new(3, 9);
        params.iterations = 10;
        let model = train_lda(&small_corpus(), &params, &Stoplist::empty()).unwrap();
        let json = model.to_json();
        let back = TopicModel::from_json(&json).unwrap();
        assert_eq!(back, model);

        let bad_version = json.replace("\"format_version\": 1", "\"format_version\": 0");
        assert!(matches!(TopicModel::from_json(&bad_version), Err(Error::Version { .. })));
        assert!(TopicModel::from_json(&json[..json.len() / 2]).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["phi"][0] = serde_json::json!(0.9);
        assert!(TopicModel::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn topic_terms_filtering() {
        let terms = topic_terms("I can't stop smoking weed, 30 days!", &Stoplist::bundled());
        assert_eq!(terms, ["can't", "stop", "smoking", "weed", "days"]);
    }
}
