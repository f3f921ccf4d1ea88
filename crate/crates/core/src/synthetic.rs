//! Seeded fixture generators: planted-signal forums, a corpus-statistics
//! dump and a two-topic LDA corpus.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use crate::corpus::{Corpus, Post};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const QUESTIONS: &[&str] = &[
    "how do i deal with {x}?",
    "any tips for {x}?",
    "what helped you get through {x}?",
    "is it normal to have {x}?",
    "does anyone else get {x}?",
    "should i see a doctor about {x}?",
    "when does {x} stop?",
    "can someone recommend something for {x}?",
];

const STATEMENTS: &[&str] = &[
    "day {n} without weed",
    "{n} days clean today",
    "finally made it to day {n}",
    "threw out my stash after {n} years",
    "{x} started on day {n}",
    "just a quick update on day {n}",
    "celebrating {n} weeks sober",
    "cooked dinner for my family tonight",
];

const THINGS: &[&str] = &[
    "the cravings",
    "night sweats",
    "insomnia",
    "vivid dreams",
    "the boredom",
    "withdrawal headaches",
    "the restlessness",
    "low appetite",
];

const EMOTIONAL: &[&str] = &[
    "feeling anxious and depressed.",
    "i am struggling so much.",
    "so lonely and scared right now.",
    "i feel hopeless and sad.",
    "crying again tonight.",
];

/// One generated title with its planted indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedTitle {
    pub text: String,
    pub is_info: bool,
    pub is_emo: bool,
}

/// Draws a title whose question form and emotional prefix are independent.
pub fn planted_title(rng: &mut SeededRng, p_info: f64, p_emo: f64) -> PlantedTitle {
    let is_info = rng.bernoulli(p_info);
    let is_emo = rng.bernoulli(p_emo);
    let pool = if is_info { QUESTIONS } else { STATEMENTS };
    let body = pool[rng.below(pool.len())]
        .replace("{x}", THINGS[rng.below(THINGS.len())])
        .replace("{n}", &(2 + rng.below(98)).to_string());
    let text = if is_emo {
        format!("{} {body}", EMOTIONAL[rng.below(EMOTIONAL.len())])
    } else {
        body
    };
    PlantedTitle { text, is_info, is_emo }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub forum: String,
    /// +1 when informational titles attract comments, -1 for the negated variant.
    pub info_sign: f64,
    pub info_weight: f64,
    pub emo_weight: f64,
    pub base_comments: f64,
    pub noise_sd: f64,
    pub n_users: usize,
    /// Users with fewer posts than the analysis threshold.
    pub n_light_users: usize,
    pub min_posts: usize,
    pub max_posts: usize,
    pub n_annotated: usize,
    pub n_annotators: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            forum: "leaves".into(),
            info_sign: 1.0,
            info_weight: 8.0,
            emo_weight: 3.0,
            base_comments: 12.0,
            noise_sd: 2.0,
            n_users: 60,
            n_light_users: 15,
            min_posts: 5,
            max_posts: 12,
            n_annotated: 80,
            n_annotators: 3,
        }
    }
}

impl PlantedConfig {
    pub fn negated() -> Self {
        Self {
            forum: "opiatesrecovery".into(),
            info_sign: -1.0,
            ..Self::default()
        }
    }
}

/// A planted-signal forum plus its annotation sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedFixture {
    pub corpus: Corpus,
    /// Rows of `(title, annotator_id, emo_rating, info_rating)`.
    pub annotations: Vec<(String, String, f64, f64)>,
}

pub fn planted_fixture(cfg: &PlantedConfig, seed: u64) -> Result<PlantedFixture> {
    if cfg.min_posts == 0 || cfg.max_posts < cfg.min_posts {
        return Err(Error::Argument("invalid post-count range".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut posts = Vec::new();
    let mut t = 1_500_000_000i64;
    let total_users = cfg.n_users + cfg.n_light_users;
    for u in 0..total_users {
        let n_posts = if u < cfg.n_users {
            cfg.min_posts + rng.below(cfg.max_posts - cfg.min_posts + 1)
        } else {
            1 + rng.below(cfg.min_posts.saturating_sub(1).max(1))
        };
        let p_info = rng.uniform();
        let p_emo = rng.uniform();
        for _ in 0..n_posts {
            let title = planted_title(&mut rng, p_info, p_emo);
            let mean = cfg.base_comments
                + cfg.info_sign * cfg.info_weight * f64::from(u8::from(title.is_info))
                + cfg.emo_weight * f64::from(u8::from(title.is_emo))
                + cfg.noise_sd * rng.normal();
            t += 600 + rng.below(7200) as i64;
            posts.push(Post {
                id: format!("p{:05}", posts.len()),
                author: format!("user{u:03}"),
                created_utc: t,
                title: title.text,
                selftext: None,
                num_comments: mean.round().max(0.0) as u64,
                forum: cfg.forum.clone(),
            });
        }
    }
    let corpus = Corpus::new(cfg.forum.clone(), posts)?;

    let mut seen = BTreeSet::new();
    let mut annotations = Vec::new();
    let mut attempts = 0;
    while seen.len() < cfg.n_annotated {
        attempts += 1;
        if attempts > cfg.n_annotated * 100 {
            return Err(Error::Argument("could not draw enough distinct titles".into()));
        }
        let title = planted_title(&mut rng, 0.5, 0.5);
        if !seen.insert(title.text.clone()) {
            continue;
        }
        let emo_target = 1.0 + 6.0 * f64::from(u8::from(title.is_emo));
        let info_target = 1.0 + 6.0 * f64::from(u8::from(title.is_info));
        for a in 0..cfg.n_annotators {
            let jitter = |rng: &mut SeededRng| rng.below(3) as f64 - 1.0;
            let emo = (emo_target + jitter(&mut rng)).clamp(1.0, 7.0);
            let info = (info_target + jitter(&mut rng)).clamp(1.0, 7.0);
            annotations.push((title.text.clone(), format!("a{a}"), emo, info));
        }
    }
    Ok(PlantedFixture { corpus, annotations })
}

impl PlantedFixture {
    /// Writes `posts.jsonl` (raw dump, with two empty-title records) and
    /// `annotations.csv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let dump = dir.join("posts.jsonl");
        let mut f = std::fs::File::create(&dump).map_err(|e| Error::io(&dump, e))?;
        crate::corpus::write_posts_to(&self.corpus, &mut f).map_err(|e| Error::io(&dump, e))?;
        for i in 0..2 {
            writeln!(
                f,
                "{{\"id\":\"blank{i}\",\"author\":\"ghost\",\"created_utc\":1500000000,\"title\":\"\",\"num_comments\":0,\"subreddit\":\"{}\"}}",
                self.corpus.forum()
            )
            .map_err(|e| Error::io(&dump, e))?;
        }
        let ann = dir.join("annotations.csv");
        let file = std::fs::File::create(&ann).map_err(|e| Error::io(&ann, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["title", "annotator_id", "emo_rating", "info_rating"])?;
        for (t, a, e, i) in &self.annotations {
            w.write_record([t.clone(), a.clone(), e.to_string(), i.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&ann, e))?;
        Ok(())
    }
}

/// 1,000 posts with `author = user{i % 137}`, `num_comments = i % 7` and
/// hourly timestamps from 1,500,000,000.
pub fn stats_dump() -> Corpus {
    let posts = (0..1000u64)
        .map(|i| Post {
            id: format!("s{i:04}"),
            author: format!("user{}", i % 137),
            created_utc: 1_500_000_000 + i as i64 * 3600,
            title: format!("synthetic post {i}"),
            selftext: None,
            num_comments: i % 7,
            forum: "synthetic".into(),
        })
        .collect();
    Corpus::new("synthetic", posts).expect("generated ids are unique")
}

pub const FRUIT: [&str; 10] = [
    "apple", "banana", "cherry", "grape", "lemon", "mango", "melon", "peach", "pear", "plum",
];
pub const TOOLS: [&str; 10] = [
    "anvil", "bolt", "chisel", "drill", "hammer", "lathe", "nail", "rivet", "saw", "wrench",
];

/// Documents drawn from two disjoint ten-word topics with Zipf-like word
/// weights. Each document leans 90% towards one topic.
pub fn two_topic_corpus(n_docs: usize, doc_len: usize, seed: u64) -> Vec<String> {
    let mut rng = SeededRng::new(seed);
    let zipf: Vec<f64> = (0..10).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    (0..n_docs)
        .map(|d| {
            let lean = d % 2;
            (0..doc_len)
                .map(|_| {
                    let topic = if rng.bernoulli(0.9) { lean } else { 1 - lean };
                    let w = rng.weighted(&zipf);
                    if topic == 0 { FRUIT[w] } else { TOOLS[w] }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}
