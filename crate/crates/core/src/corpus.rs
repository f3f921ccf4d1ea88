//! Loading, validating, filtering and summarizing forum post dumps.
//!
//! Input is JSON Lines, one submission per line:
//!
//! ```text
//! {"id": "abc", "author": "u1", "created_utc": 1450000000, "title": "Day 3",
//!  "selftext": null, "num_comments": 4, "subreddit": "leaves"}
//! ```
//!
//! Author strings are taken verbatim; sentinels such as `[deleted]` are
//! ordinary authors.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author: String,
    pub created_utc: i64,
    pub title: String,
    pub selftext: Option<String>,
    pub num_comments: u64,
    #[serde(rename = "subreddit")]
    pub forum: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    forum: String,
    posts: Vec<Post>,
}

impl Corpus {
    /// Builds a corpus, enforcing forum consistency, unique ids and
    /// non-blank titles.
    pub fn new(forum: impl Into<String>, posts: Vec<Post>) -> Result<Self> {
        let forum = forum.into();
        let mut seen = HashSet::with_capacity(posts.len());
        for p in &posts {
            if p.id.is_empty() {
                return Err(Error::Validation("post with empty id".into()));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(Error::Validation(format!("duplicate post id \"{}\"", p.id)));
            }
            if p.title.trim().is_empty() {
                return Err(Error::Validation(format!("post \"{}\" has an empty title", p.id)));
            }
            if !same_forum(&p.forum, &forum) {
                return Err(Error::Validation(format!(
                    "post \"{}\" belongs to forum \"{}\", not \"{forum}\"",
                    p.id, p.forum
                )));
            }
        }
        Ok(Self { forum, posts })
    }

    pub fn forum(&self) -> &str {
        &self.forum
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.id == id)
    }
}

fn same_forum(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SkipReason {
    EmptyTitle,
    MissingField,
    ForumMismatch,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::EmptyTitle => "empty_title",
            SkipReason::MissingField => "missing_or_invalid_field",
            SkipReason::ForumMismatch => "forum_mismatch",
        })
    }
}

/// Records that were read but not admitted into the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkipReport {
    /// (1-based line number, reason)
    pub skipped: Vec<(usize, SkipReason)>,
}

impl SkipReport {
    pub fn total(&self) -> usize {
        self.skipped.len()
    }

    pub fn count(&self, reason: SkipReason) -> usize {
        self.skipped.iter().filter(|(_, r)| *r == reason).count()
    }

    pub fn is_empty(&self) -> bool {
        self.skipped.is_empty()
    }
}

impl fmt::Display for SkipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "skipped={}", self.total())?;
        for reason in [
            SkipReason::EmptyTitle,
            SkipReason::MissingField,
            SkipReason::ForumMismatch,
        ] {
            write!(f, " {reason}={}", self.count(reason))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub skipped: SkipReport,
}

/// Reads a JSONL dump. Skipped records are reported on stderr and returned.
pub fn load_posts(path: impl AsRef<Path>, forum: &str) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let loaded = read_posts(BufReader::new(file), forum)?;
    if !loaded.skipped.is_empty() {
        eprintln!("{}: {}", path.display(), loaded.skipped);
    }
    Ok(loaded)
}

/// Reader-based variant of [`load_posts`]; does not print.
pub fn read_posts(reader: impl BufRead, forum: &str) -> Result<LoadedCorpus> {
    let mut posts = Vec::new();
    let mut skipped = SkipReport::default();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(Error::Parse {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };
        let Some(post) = post_from_object(&obj) else {
            skipped.skipped.push((line_no, SkipReason::MissingField));
            continue;
        };
        if post.title.trim().is_empty() {
            skipped.skipped.push((line_no, SkipReason::EmptyTitle));
            continue;
        }
        if !same_forum(&post.forum, forum) {
            skipped.skipped.push((line_no, SkipReason::ForumMismatch));
            continue;
        }
        if !seen.insert(post.id.clone()) {
            return Err(Error::Validation(format!(
                "duplicate post id \"{}\" at line {line_no}",
                post.id
            )));
        }
        posts.push(post);
    }
    Ok(LoadedCorpus {
        corpus: Corpus::new(forum, posts)?,
        skipped,
    })
}

fn post_from_object(obj: &serde_json::Map<String, Value>) -> Option<Post> {
    let string = |key: &str| obj.get(key).and_then(Value::as_str).map(str::to_owned);
    let int = |key: &str| match obj.get(key)? {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0).map(|f| f as i64)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    let id = string("id").filter(|s| !s.is_empty())?;
    let selftext = match obj.get("selftext") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return None,
    };
    let num_comments = int("num_comments")?;
    Some(Post {
        id,
        author: string("author")?,
        created_utc: int("created_utc")?,
        title: string("title")?,
        selftext,
        num_comments: u64::try_from(num_comments).ok()?,
        forum: string("subreddit")?,
    })
}

/// Writes the corpus back out in the ingestion schema.
pub fn write_posts(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_posts_to(corpus, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_posts_to(corpus: &Corpus, out: &mut impl Write) -> std::io::Result<()> {
    for p in corpus.posts() {
        serde_json::to_writer(&mut *out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_unique_users: usize,
    pub n_posts: usize,
    pub n_comments: u64,
}

pub fn corpus_summary(c: &Corpus) -> CorpusSummary {
    let users: HashSet<&str> = c.posts.iter().map(|p| p.author.as_str()).collect();
    CorpusSummary {
        n_unique_users: users.len(),
        n_posts: c.posts.len(),
        n_comments: c.posts.iter().map(|p| p.num_comments).sum(),
    }
}

/// Inclusive range of `created_utc` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::Argument(format!(
                "inverted time window: start {start} > end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: i64) -> bool {
        (self.start..=self.end).contains(&t)
    }

    /// Smallest window covering every post, or `None` for an empty corpus.
    pub fn covering(c: &Corpus) -> Option<Self> {
        let start = c.posts.iter().map(|p| p.created_utc).min()?;
        let end = c.posts.iter().map(|p| p.created_utc).max()?;
        Some(Self { start, end })
    }
}

/// Fraction of posts in the window that drew no comments. `None` when the
/// window holds no posts.
pub fn no_comment_rate(c: &Corpus, window: TimeWindow) -> Option<f64> {
    let (total, zero) = c
        .posts
        .iter()
        .filter(|p| window.contains(p.created_utc))
        .fold((0usize, 0usize), |(t, z), p| {
            (t + 1, z + usize::from(p.num_comments == 0))
        });
    (total > 0).then(|| zero as f64 / total as f64)
}

/// Keeps posts whose author wrote at least `k` posts, in original order.
pub fn filter_users_min_posts(c: &Corpus, k: usize) -> Result<Corpus> {
    if k == 0 {
        return Err(Error::Argument("minimum post count must be >= 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for p in &c.posts {
        *counts.entry(p.author.as_str()).or_default() += 1;
    }
    let posts = c
        .posts
        .iter()
        .filter(|p| counts[p.author.as_str()] >= k)
        .cloned()
        .collect();
    Ok(Corpus {
        forum: c.forum.clone(),
        posts,
    })
}

/// Seeded uniform sample of `n` posts without replacement, in corpus order.
pub fn sample_posts(c: &Corpus, n: usize, seed: u64) -> Vec<&Post> {
    crate::rng::sample_indices(c.posts.len(), n, seed)
        .into_iter()
        .map(|i| &c.posts[i])
        .collect()
}

/// Formats an integer with thousands separators, as in "35,961".
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Dataset summary laid out like the forum overview table.
pub fn render_summary_table(forum: &str, s: &CorpusSummary, no_comment: Option<f64>) -> String {
    let rows = [
        ("Number of unique users", group_thousands(s.n_unique_users as u64)),
        ("Number of posts", group_thousands(s.n_posts as u64)),
        ("Number of comments", group_thousands(s.n_comments)),
        (
            "Posts with no comments",
            match no_comment {
                Some(rate) => format!("{:.1}%", rate * 100.0),
                None => "undefined".to_string(),
            },
        ),
    ];
    let header = format!("/r/{forum}");
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Attribute".len());
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(header.len());
    let rule = format!("+{}+{}+\n", "-".repeat(w0 + 2), "-".repeat(w1 + 2));
    let mut out = String::new();
    out.push_str(&rule);
    out.push_str(&format!("| {:<w0$} | {:>w1$} |\n", "Attribute", header));
    out.push_str(&rule);
    for (label, value) in &rows {
        out.push_str(&format!("| {label:<w0$} | {value:>w1$} |\n"));
    }
    out.push_str(&rule);
    out
}
