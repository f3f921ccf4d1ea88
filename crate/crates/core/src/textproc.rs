//! Tokenization, sentence segmentation and coarse part-of-speech tagging.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Noun,
    Verb,
    Modal,
    Pronoun,
    Adj,
    Adv,
    Punct,
    Num,
    Other,
}

impl Tag {
    /// Fixed order used by the feature schema.
    pub const ALL: [Tag; 9] = [
        Tag::Noun,
        Tag::Verb,
        Tag::Modal,
        Tag::Pronoun,
        Tag::Adj,
        Tag::Adv,
        Tag::Punct,
        Tag::Num,
        Tag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Noun => "NOUN",
            Tag::Verb => "VERB",
            Tag::Modal => "MODAL",
            Tag::Pronoun => "PRONOUN",
            Tag::Adj => "ADJ",
            Tag::Adv => "ADV",
            Tag::Punct => "PUNCT",
            Tag::Num => "NUM",
            Tag::Other => "OTHER",
        }
    }

    pub fn index(self) -> usize {
        Tag::ALL.iter().position(|t| *t == self).unwrap()
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown tag \"{s}\"")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub tag: Tag,
    pub is_negation: bool,
}

impl Token {
    fn new(surface: &str) -> Self {
        let lower = normalize(surface);
        let tag = shape_tag(surface);
        let is_negation = is_negation_word(&lower);
        Self {
            surface: surface.to_string(),
            lower,
            tag,
            is_negation,
        }
    }

    pub fn is_punct(&self) -> bool {
        self.tag == Tag::Punct
    }
}

/// Lowercase with typographic apostrophes folded to ASCII.
fn normalize(s: &str) -> String {
    s.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

fn shape_tag(surface: &str) -> Tag {
    if !surface.chars().any(char::is_alphanumeric) {
        Tag::Punct
    } else if is_numeric(surface) {
        Tag::Num
    } else {
        Tag::Other
    }
}

fn is_numeric(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_digit() || ".,:/-".contains(c))
}

const NEGATIONS: &[&str] = &[
    "not", "no", "never", "nothing", "nobody", "none", "neither", "nor", "cannot",
];

pub fn is_negation_word(lower: &str) -> bool {
    NEGATIONS.contains(&lower) || lower.ends_with("n't")
}

const MODALS: &[&str] = &[
    "may", "might", "can", "could", "will", "would", "shall", "should", "must", "can't",
    "cannot", "couldn't", "won't", "wouldn't", "shouldn't", "mustn't", "mightn't", "shan't",
];

const PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he",
    "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us",
    "our", "ours", "ourselves", "they", "them", "their", "theirs", "themselves", "who", "whom",
    "whose", "i'm", "i've", "i'd", "i'll", "im", "ive", "you're", "you've", "you'll", "you'd",
    "he's", "she's", "it's", "we're", "we've", "we'll", "they're", "they've", "they'll",
    "anyone", "someone", "everyone", "anybody", "somebody", "everybody", "u",
];

const INTERROGATIVES: &[&str] = &[
    "how", "what", "why", "when", "where", "who", "which", "should", "can", "could", "would",
    "is", "are", "do", "does", "did", "am", "will",
];

const SENTENCE_END: [char; 3] = ['.', '!', '?'];

/// Whitespace split, then leading/trailing non-alphanumeric characters are
/// peeled off one per token. Interior punctuation ("can't", "3.5") stays.
pub fn tokenize(text: &str) -> Vec<Token> {
    chunk_tokens(text).into_iter().flatten().collect()
}

fn chunk_tokens(text: &str) -> Vec<Vec<Token>> {
    text.split_whitespace().map(split_chunk).collect()
}

fn split_chunk(chunk: &str) -> Vec<Token> {
    let first = chunk.char_indices().find(|(_, c)| c.is_alphanumeric());
    let Some((start, _)) = first else {
        return chunk
            .char_indices()
            .map(|(i, c)| Token::new(&chunk[i..i + c.len_utf8()]))
            .collect();
    };
    let (last, last_ch) = chunk
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .unwrap();
    let end = last + last_ch.len_utf8();
    let mut out = Vec::new();
    for (i, c) in chunk[..start].char_indices() {
        out.push(Token::new(&chunk[i..i + c.len_utf8()]));
    }
    out.push(Token::new(&chunk[start..end]));
    for (i, c) in chunk[end..].char_indices() {
        out.push(Token::new(&chunk[end + i..end + i + c.len_utf8()]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub is_question: bool,
    pub has_negation: bool,
}

impl Sentence {
    fn from_tokens(tokens: Vec<Token>) -> Self {
        let mut s = Self {
            tokens,
            is_question: false,
            has_negation: false,
        };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        self.has_negation = self.tokens.iter().any(|t| t.is_negation);
        let trailing_question = self
            .tokens
            .iter()
            .rev()
            .take_while(|t| t.is_punct())
            .any(|t| t.surface == "?");
        let leading_interrogative = self
            .words()
            .next()
            .is_some_and(|t| INTERROGATIVES.contains(&t.lower.as_str()));
        self.is_question = trailing_question || leading_interrogative;
    }

    /// Non-punctuation tokens.
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| !t.is_punct())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

/// Sentences end after a whitespace chunk whose trailing punctuation holds
/// `.`, `!` or `?`. Punctuation-only fragments attach to a neighbour.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut groups: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for chunk in chunk_tokens(text) {
        let ends = chunk
            .iter()
            .rev()
            .take_while(|t| t.is_punct())
            .any(|t| t.surface.contains(SENTENCE_END));
        current.extend(chunk);
        if ends {
            groups.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }

    let mut merged: Vec<Vec<Token>> = Vec::new();
    let mut pending: Vec<Token> = Vec::new();
    for group in groups {
        if group.iter().all(Token::is_punct) {
            match merged.last_mut() {
                Some(prev) => prev.extend(group),
                None => pending.extend(group),
            }
        } else {
            let mut g = std::mem::take(&mut pending);
            g.extend(group);
            merged.push(g);
        }
    }
    if !pending.is_empty() {
        merged.push(pending);
    }
    merged.into_iter().map(Sentence::from_tokens).collect()
}

/// Lexicon-plus-suffix tagger over the coarse tag set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tagger {
    lexicon: HashMap<String, Tag>,
}

const BUNDLED_TAG_LEXICON: &str = include_str!("../data/pos_lexicon.tsv");

impl Tagger {
    pub fn new(lexicon: HashMap<String, Tag>) -> Self {
        Self { lexicon }
    }

    /// The shipped ~5k-word lexicon.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TAG_LEXICON).expect("bundled tag lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `word<TAB>TAG` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected word<TAB>TAG".into(),
            })?;
            let tag: Tag = tag.trim().parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            lexicon.insert(normalize(word.trim()), tag);
        }
        Ok(Self { lexicon })
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn tag_word(&self, lower: &str) -> Tag {
        match shape_tag(lower) {
            Tag::Other => {}
            t => return t,
        }
        if MODALS.contains(&lower) {
            return Tag::Modal;
        }
        if PRONOUNS.contains(&lower) {
            return Tag::Pronoun;
        }
        if let Some(t) = self.lexicon.get(lower) {
            return *t;
        }
        if lower.ends_with("n't") {
            return Tag::Verb;
        }
        if !lower.chars().any(char::is_alphabetic) {
            return Tag::Other;
        }
        suffix_tag(lower, &self.lexicon)
    }

    pub fn tag_tokens(&self, tokens: &mut [Token]) {
        for t in tokens {
            t.tag = self.tag_word(&t.lower);
        }
    }

    /// Segments and tags in one pass.
    pub fn analyze(&self, text: &str) -> Vec<Sentence> {
        let mut sentences = split_sentences(text);
        for s in &mut sentences {
            self.tag_tokens(&mut s.tokens);
        }
        sentences
    }
}

fn suffix_tag(lower: &str, lexicon: &HashMap<String, Tag>) -> Tag {
    if let Some(stem) = lower.strip_suffix("'s") {
        if let Some(Tag::Noun) | None = lexicon.get(stem) {
            return Tag::Noun;
        }
    }
    if lower.ends_with("ly") {
        return Tag::Adv;
    }
    if lower.ends_with("ing") || lower.ends_with("ed") {
        return Tag::Verb;
    }
    if let Some(stem) = lower.strip_suffix("es").or_else(|| lower.strip_suffix('s')) {
        match lexicon.get(stem) {
            Some(Tag::Verb) => return Tag::Verb,
            Some(Tag::Noun) => return Tag::Noun,
            _ => {}
        }
    }
    const ADJ_SUFFIXES: [&str; 6] = ["ful", "ous", "ive", "less", "able", "ible"];
    if ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
        return Tag::Adj;
    }
    Tag::Noun
}

/// Free-function form over an explicit tagger.
pub fn tag_tokens(tokens: &[Token], tagger: &Tagger) -> Vec<Token> {
    let mut out = tokens.to_vec();
    tagger.tag_tokens(&mut out);
    out
}
