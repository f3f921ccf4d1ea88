//! Fixed-schema feature vectors for post titles.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lexicons::{Lexicons, Strength};
use crate::textproc::{Sentence, Tag, Tagger};
use crate::topics::{topic_terms, Stoplist, TopicModel};

/// Structural features between the category block and the POS block.
pub const STRUCTURAL_FEATURES: [&str; 4] = [
    "n_sentences",
    "mean_words_per_sentence",
    "n_negation_sentences",
    "n_question_sentences",
];

/// Features between the POS block and the topic block.
pub const LEXICAL_FEATURES: [&str; 6] = [
    "strong_subjectivity_count",
    "weak_subjectivity_count",
    "advice_request_count",
    "drug_mention_count",
    "mean_word_length",
    "title_word_count",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub category_names: Vec<String>,
    pub n_topics: usize,
}

impl FeatureConfig {
    pub fn new(lexicons: &Lexicons, topic_model: &TopicModel) -> Self {
        Self {
            category_names: lexicons.categories.category_names().map(str::to_string).collect(),
            n_topics: topic_model.k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    n_categories: usize,
    n_topics: usize,
}

pub fn pos_feature_name(tag: Tag) -> String {
    format!("pos_{}", tag.as_str().to_lowercase())
}

/// Layout: categories, structural counts, POS counts, lexical counts, topics.
pub fn feature_schema(config: &FeatureConfig) -> Result<FeatureSchema> {
    if config.n_topics < 1 {
        return Err(Error::Config("topic count K must be >= 1".into()));
    }
    let mut names: Vec<String> = config
        .category_names
        .iter()
        .map(|c| format!("cat_{c}"))
        .collect();
    names.extend(STRUCTURAL_FEATURES.iter().map(|s| s.to_string()));
    names.extend(Tag::ALL.iter().map(|t| pos_feature_name(*t)));
    names.extend(LEXICAL_FEATURES.iter().map(|s| s.to_string()));
    names.extend((0..config.n_topics).map(|k| format!("topic_{k}")));

    let mut sorted = names.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate feature name \"{}\"", w[0])));
    }
    Ok(FeatureSchema {
        names,
        n_categories: config.category_names.len(),
        n_topics: config.n_topics,
    })
}

impl FeatureSchema {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn structural_offset(&self) -> usize {
        self.n_categories
    }

    fn pos_offset(&self) -> usize {
        self.n_categories + STRUCTURAL_FEATURES.len()
    }

    fn lexical_offset(&self) -> usize {
        self.pos_offset() + Tag::ALL.len()
    }

    fn topic_offset(&self) -> usize {
        self.lexical_offset() + LEXICAL_FEATURES.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    schema: Arc<FeatureSchema>,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema.index_of(name).map(|i| self.values[i])
    }

    pub fn topics(&self) -> &[f64] {
        &self.values[self.schema.topic_offset()..]
    }
}

/// Sentences opening with "you" + modal, or "please" + verb/modal.
pub fn count_advice_requests(sentences: &[Sentence]) -> usize {
    sentences
        .iter()
        .filter(|s| {
            let mut words = s.words();
            let (Some(first), Some(second)) = (words.next(), words.next()) else {
                return false;
            };
            match first.lower.as_str() {
                "you" => second.tag == Tag::Modal,
                "please" => matches!(second.tag, Tag::Verb | Tag::Modal),
                _ => false,
            }
        })
        .count()
}

/// Owns everything needed to featurize titles under one schema.
#[derive(Debug, Clone)]
pub struct Featurizer {
    lexicons: Lexicons,
    tagger: Tagger,
    topic_model: TopicModel,
    schema: Arc<FeatureSchema>,
}

impl Featurizer {
    pub fn new(lexicons: Lexicons, tagger: Tagger, topic_model: TopicModel) -> Result<Self> {
        let schema = feature_schema(&FeatureConfig::new(&lexicons, &topic_model))?;
        Ok(Self {
            lexicons,
            tagger,
            topic_model,
            schema: Arc::new(schema),
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }

    pub fn topic_model(&self) -> &TopicModel {
        &self.topic_model
    }

    pub fn extract(&self, title: &str) -> FeatureVector {
        let schema = &self.schema;
        let mut v = vec![0.0; schema.dimension()];
        let sentences = self.tagger.analyze(title);
        let tokens = sentences.iter().flat_map(|s| s.tokens.iter());

        let pos = schema.pos_offset();
        let lex = schema.lexical_offset();
        let mut word_chars = 0usize;
        let mut alpha_words = 0usize;
        let mut n_words = 0usize;
        for t in tokens.clone() {
            for c in self.lexicons.categories.match_indices(&t.lower) {
                v[c] += 1.0;
            }
            v[pos + t.tag.index()] += 1.0;
            match self.lexicons.subjectivity.get(&t.lower) {
                Some(Strength::Strong) => v[lex] += 1.0,
                Some(Strength::Weak) => v[lex + 1] += 1.0,
                None => {}
            }
            if !t.is_punct() {
                n_words += 1;
                if t.surface.chars().any(char::is_alphabetic) {
                    alpha_words += 1;
                    word_chars += t.surface.chars().count();
                }
            }
        }

        let st = schema.structural_offset();
        let n_sent = sentences.len();
        v[st] = n_sent as f64;
        v[st + 1] = if n_sent == 0 {
            0.0
        } else {
            sentences.iter().map(Sentence::word_count).sum::<usize>() as f64 / n_sent as f64
        };
        v[st + 2] = sentences.iter().filter(|s| s.has_negation).count() as f64;
        v[st + 3] = sentences.iter().filter(|s| s.is_question).count() as f64;

        let all_tokens: Vec<_> = tokens.cloned().collect();
        v[lex + 2] = count_advice_requests(&sentences) as f64;
        v[lex + 3] = self.lexicons.drugs.count_mentions(&all_tokens) as f64;
        v[lex + 4] = if alpha_words == 0 {
            0.0
        } else {
            word_chars as f64 / alpha_words as f64
        };
        v[lex + 5] = n_words as f64;

        let theta = self
            .topic_model
            .infer(&topic_terms(title, &Stoplist::empty()));
        let top = schema.topic_offset();
        v[top..].copy_from_slice(&theta);

        FeatureVector {
            values: v,
            schema: Arc::clone(&self.schema),
        }
    }

    pub fn extract_many(&self, titles: &[&str]) -> Vec<FeatureVector> {
        use rayon::prelude::*;
        titles.par_iter().map(|t| self.extract(t)).collect()
    }
}

/// Standalone form: checks the schema against the lexicons and model first.
pub fn extract_features(
    title: &str,
    lexicons: &Lexicons,
    tagger: &Tagger,
    topic_model: &TopicModel,
    schema: &FeatureSchema,
) -> Result<FeatureVector> {
    let featurizer = Featurizer::new(lexicons.clone(), tagger.clone(), topic_model.clone())?;
    if featurizer.schema() != schema {
        return Err(Error::Config(format!(
            "schema ({} features, K={}) does not match lexicons/topic model ({} features, K={})",
            schema.dimension(),
            schema.n_topics(),
            featurizer.schema().dimension(),
            topic_model.k()
        )));
    }
    Ok(featurizer.extract(title))
}

/// CSV with a header row of schema names and one row per vector.
pub fn write_feature_csv(
    schema: &FeatureSchema,
    rows: &[FeatureVector],
    out: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.names())?;
    for row in rows {
        if row.schema() != schema {
            return Err(Error::Config("feature vector from a different schema".into()));
        }
        w.write_record(row.values().iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))?;
    Ok(())
}
