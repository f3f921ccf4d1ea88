//! Category (LIWC-style), subjectivity and drug-name lexicons.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::textproc::Token;

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn is_comment_or_blank(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: String,
    pub name: String,
}

/// Word and prefix patterns mapped onto declared categories.
///
/// File format: `id<TAB>name` declarations, a `%%` line, then
/// `pattern<TAB>id[,id...]` entries. A pattern ending in `*` matches any
/// word with that prefix; matches from every applicable pattern are unioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    categories: Vec<Category>,
    exact: HashMap<String, BTreeSet<usize>>,
    prefixes: HashMap<String, BTreeSet<usize>>,
}

const BUNDLED_CATEGORIES: &str = include_str!("../data/categories_default.dic");

impl CategoryLexicon {
    /// Small open lexicon over the eighteen default categories.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CATEGORIES).expect("bundled category lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut categories: Vec<Category> = Vec::new();
        let mut by_id: HashMap<String, usize> = HashMap::new();
        let mut exact: HashMap<String, BTreeSet<usize>> = HashMap::new();
        let mut prefixes: HashMap<String, BTreeSet<usize>> = HashMap::new();
        let mut in_entries = false;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if is_comment_or_blank(raw) {
                continue;
            }
            let line = raw.trim();
            if line == "%%" {
                if in_entries {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "second %% separator".into(),
                    });
                }
                in_entries = true;
                continue;
            }
            let (left, right) = line
                .split_once('\t')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected two tab-separated fields".into(),
                })?;
            if !in_entries {
                if by_id.contains_key(left) {
                    return Err(Error::Validation(format!("category id \"{left}\" declared twice")));
                }
                if categories.iter().any(|c| c.name == right) {
                    return Err(Error::Validation(format!(
                        "category name \"{right}\" declared twice"
                    )));
                }
                by_id.insert(left.to_string(), categories.len());
                categories.push(Category {
                    id: left.to_string(),
                    name: right.to_string(),
                });
                continue;
            }

            let pattern = left.to_lowercase();
            let mut cats = BTreeSet::new();
            for id in right.split([',', ' ', '\t']).filter(|s| !s.is_empty()) {
                let idx = by_id.get(id).ok_or_else(|| {
                    Error::Validation(format!(
                        "line {line_no}: entry \"{pattern}\" references undeclared category id \"{id}\""
                    ))
                })?;
                cats.insert(*idx);
            }
            if cats.is_empty() {
                return Err(Error::Validation(format!(
                    "line {line_no}: entry \"{pattern}\" has no categories"
                )));
            }
            let stars = pattern.matches('*').count();
            if stars == 0 {
                exact.entry(pattern).or_default().extend(cats);
            } else if stars == 1 && pattern.ends_with('*') && pattern.len() > 1 {
                let stem = pattern.trim_end_matches('*').to_string();
                prefixes.entry(stem).or_default().extend(cats);
            } else {
                return Err(Error::Validation(format!(
                    "line {line_no}: malformed pattern \"{pattern}\" (a single * is allowed, only at the end)"
                )));
            }
        }
        Ok(Self {
            categories,
            exact,
            prefixes,
        })
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category_names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }

    /// Indices (declaration order) of every category the word signals.
    pub fn match_indices(&self, token_lower: &str) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if let Some(c) = self.exact.get(token_lower) {
            out.extend(c);
        }
        for (i, ch) in token_lower.char_indices() {
            let end = i + ch.len_utf8();
            if let Some(c) = self.prefixes.get(&token_lower[..end]) {
                out.extend(c);
            }
        }
        out
    }

    pub fn match_categories(&self, token_lower: &str) -> BTreeSet<&str> {
        self.match_indices(token_lower)
            .into_iter()
            .map(|i| self.categories[i].name.as_str())
            .collect()
    }
}

pub fn match_categories<'a>(token_lower: &str, lex: &'a CategoryLexicon) -> BTreeSet<&'a str> {
    lex.match_categories(token_lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strength {
    Strong,
    Weak,
}

/// Word-level subjectivity clues. Conflicting duplicates resolve to strong.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubjectivityLexicon {
    entries: HashMap<String, Strength>,
}

const BUNDLED_SUBJECTIVITY: &str = include_str!("../data/subjectivity_clues.tff");

impl SubjectivityLexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_SUBJECTIVITY).expect("bundled subjectivity lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_file(path.as_ref())?)
    }

    /// Reads clue lines of whitespace-separated `key=value` fields.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: HashMap<String, Strength> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            if is_comment_or_blank(raw) {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let mut kind = None;
            let mut word = None;
            for field in raw.split_whitespace() {
                let Some((k, v)) = field.split_once('=') else {
                    continue;
                };
                match k {
                    "type" => kind = Some(v),
                    "word1" => word = Some(v),
                    _ => {}
                }
            }
            let strength = match kind {
                Some("strongsubj") => Strength::Strong,
                Some("weaksubj") => Strength::Weak,
                Some(other) => return Err(parse_err(format!("unknown type \"{other}\""))),
                None => return Err(parse_err("missing type= field".into())),
            };
            let word = word
                .filter(|w| !w.is_empty())
                .ok_or_else(|| parse_err("missing word1= field".into()))?
                .to_lowercase();
            entries
                .entry(word)
                .and_modify(|s| *s = (*s).min(strength))
                .or_insert(strength);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, word_lower: &str) -> Option<Strength> {
        self.entries.get(word_lower).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Drug names and nicknames, single words or multiword phrases.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DrugLexicon {
    // first token -> phrases starting with it, longest first then alphabetical
    by_first: BTreeMap<String, Vec<Vec<String>>>,
}

const BUNDLED_MEDICINES: &str = include_str!("../data/drugs_medicines.txt");
const BUNDLED_NICKNAMES: &str = include_str!("../data/drugs_nicknames.txt");

impl DrugLexicon {
    /// Medicine names merged with street nicknames.
    pub fn bundled() -> Self {
        let mut lex = Self::parse(BUNDLED_MEDICINES).expect("bundled medicine list is valid");
        lex.merge(&Self::parse(BUNDLED_NICKNAMES).expect("bundled nickname list is valid"));
        lex
    }

    pub fn from_entries<S: AsRef<str>>(entries: impl IntoIterator<Item = S>) -> Self {
        let mut lex = Self::default();
        for e in entries {
            lex.insert(e.as_ref());
        }
        lex
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_file(path.as_ref())?)
    }

    /// Loads and merges several files (e.g. medicines plus nicknames).
    pub fn load_all<P: AsRef<Path>>(paths: &[P]) -> Result<Self> {
        let mut lex = Self::default();
        for p in paths {
            lex.merge(&Self::load(p)?);
        }
        Ok(lex)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = Self::default();
        for raw in text.lines() {
            if is_comment_or_blank(raw) {
                continue;
            }
            lex.insert(raw);
        }
        Ok(lex)
    }

    fn insert(&mut self, entry: &str) {
        let phrase: Vec<String> = entry
            .split_whitespace()
            .map(|w| w.to_lowercase().replace('\u{2019}', "'"))
            .collect();
        if phrase.is_empty() {
            return;
        }
        let list = self.by_first.entry(phrase[0].clone()).or_default();
        if !list.contains(&phrase) {
            list.push(phrase);
            list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        }
    }

    pub fn merge(&mut self, other: &DrugLexicon) {
        for phrases in other.by_first.values() {
            for p in phrases {
                self.insert(&p.join(" "));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.by_first.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_first.is_empty()
    }

    /// Greedy left-to-right, longest match first, non-overlapping.
    pub fn count_mentions(&self, tokens: &[Token]) -> usize {
        let mut count = 0;
        let mut i = 0;
        while i < tokens.len() {
            let matched = self.by_first.get(&tokens[i].lower).and_then(|phrases| {
                phrases.iter().find(|p| {
                    i + p.len() <= tokens.len()
                        && p.iter().zip(&tokens[i..]).all(|(w, t)| *w == t.lower)
                })
            });
            match matched {
                Some(p) => {
                    count += 1;
                    i += p.len();
                }
                None => i += 1,
            }
        }
        count
    }
}

pub fn count_drug_mentions(tokens: &[Token], lex: &DrugLexicon) -> usize {
    lex.count_mentions(tokens)
}

/// The three lexicon families used by feature extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub categories: CategoryLexicon,
    pub subjectivity: SubjectivityLexicon,
    pub drugs: DrugLexicon,
}

impl Lexicons {
    pub fn bundled() -> Self {
        Self {
            categories: CategoryLexicon::bundled(),
            subjectivity: SubjectivityLexicon::bundled(),
            drugs: DrugLexicon::bundled(),
        }
    }
}
