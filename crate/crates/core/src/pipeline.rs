//! Annotation handling, support-model training, corpus scoring and the
//! engagement analysis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{group_thousands, Corpus};
use crate::error::{Error, Result};
use crate::features::Featurizer;
use crate::forest::{train_forest, ForestModel, ForestParams};
use crate::stats::{icc, pearson, split_dataset, CorrelationResult, IccForm, RatingsMatrix, DEFAULT_SPLIT};
use crate::topics::TopicModel;

/// Likert bounds used for both support dimensions.
pub const LIKERT_MIN: f64 = 1.0;
pub const LIKERT_MAX: f64 = 7.0;

/// Fewest annotated titles accepted for an 80/10/10 split.
pub const MIN_ANNOTATED_TITLES: usize = 30;

pub const DEFAULT_MIN_USER_POSTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Emotional,
    Informational,
}

impl Dimension {
    /// Report order.
    pub const ALL: [Dimension; 2] = [Dimension::Emotional, Dimension::Informational];

    pub fn label(self) -> &'static str {
        match self {
            Dimension::Emotional => "Emotional Support Sought",
            Dimension::Informational => "Informational Support Sought",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Dimension::Emotional => "emo",
            Dimension::Informational => "info",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered key=value records; rendered one per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunLog {
    entries: Vec<(String, String)>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Appends the rendered records to a file, creating it if needed.
    pub fn append_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        f.write_all(self.render().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

/// One title with every annotator's 1-7 ratings.
///
/// Scale anchors: 1 = support not expressed in the title, 7 = expressed a lot.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedTitle {
    pub title: String,
    pub annotators: Vec<String>,
    pub emo_ratings: Vec<f64>,
    pub info_ratings: Vec<f64>,
    pub emo_mean: f64,
    pub info_mean: f64,
}

impl AnnotatedTitle {
    pub fn target(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Emotional => self.emo_mean,
            Dimension::Informational => self.info_mean,
        }
    }

    pub fn ratings(&self, dim: Dimension) -> &[f64] {
        match dim {
            Dimension::Emotional => &self.emo_ratings,
            Dimension::Informational => &self.info_ratings,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotations {
    pub titles: Vec<AnnotatedTitle>,
    /// Average-measures ICC per dimension over the complete-rater subset.
    pub icc_emo: Option<f64>,
    pub icc_info: Option<f64>,
}

/// (annotators, emotional ratings, informational ratings)
type RatingColumns = (Vec<String>, Vec<f64>, Vec<f64>);

#[derive(Debug, Deserialize)]
struct AnnotationRow {
    title: String,
    annotator_id: String,
    emo_rating: f64,
    info_rating: f64,
}

pub fn load_annotations(path: impl AsRef<Path>, log: &mut RunLog) -> Result<Annotations> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(file, log)
}

/// Reads `title,annotator_id,emo_rating,info_rating` rows, grouping by title
/// in first-appearance order.
pub fn read_annotations(reader: impl Read, log: &mut RunLog) -> Result<Annotations> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::Fields).from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, RatingColumns> = HashMap::new();
    for (i, rec) in rdr.deserialize::<AnnotationRow>().enumerate() {
        let row_no = i + 1;
        let row = rec.map_err(|e| Error::Parse {
            line: row_no + 1,
            message: e.to_string(),
        })?;
        for (name, v) in [("emo_rating", row.emo_rating), ("info_rating", row.info_rating)] {
            if !(LIKERT_MIN..=LIKERT_MAX).contains(&v) {
                return Err(Error::Validation(format!(
                    "row {row_no}: {name} {v} outside [1, 7]"
                )));
            }
        }
        if row.title.trim().is_empty() {
            return Err(Error::Validation(format!("row {row_no}: empty title")));
        }
        let entry = grouped.entry(row.title.clone()).or_insert_with(|| {
            order.push(row.title.clone());
            Default::default()
        });
        entry.0.push(row.annotator_id);
        entry.1.push(row.emo_rating);
        entry.2.push(row.info_rating);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let titles: Vec<AnnotatedTitle> = order
        .into_iter()
        .map(|t| {
            let (annotators, emo, info) = grouped.remove(&t).unwrap();
            AnnotatedTitle {
                emo_mean: mean(&emo),
                info_mean: mean(&info),
                title: t,
                annotators,
                emo_ratings: emo,
                info_ratings: info,
            }
        })
        .collect();

    log.record("annotations.titles", titles.len());
    log.record(
        "annotations.ratings",
        titles.iter().map(|t| t.annotators.len()).sum::<usize>(),
    );
    let mut iccs = [None, None];
    for (slot, dim) in iccs.iter_mut().zip(Dimension::ALL) {
        let summary = reliability(&titles, dim);
        log.record(format!("icc.{}.items", dim.short()), summary.items);
        log.record(format!("icc.{}.raters", dim.short()), summary.raters);
        log.record(format!("icc.{}.average", dim.short()), fmt_opt(summary.average));
        log.record(format!("icc.{}.single", dim.short()), fmt_opt(summary.single));
        *slot = summary.average;
    }
    Ok(Annotations {
        titles,
        icc_emo: iccs[0],
        icc_info: iccs[1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reliability {
    pub items: usize,
    pub raters: usize,
    pub average: Option<f64>,
    pub single: Option<f64>,
}

/// One-way ICC over the titles carrying the most common rating count.
pub fn reliability(titles: &[AnnotatedTitle], dim: Dimension) -> Reliability {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for t in titles {
        *freq.entry(t.ratings(dim).len()).or_default() += 1;
    }
    let k = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
        .map(|(k, _)| *k)
        .unwrap_or(0);
    let rows: Vec<Vec<f64>> = titles
        .iter()
        .filter(|t| t.ratings(dim).len() == k)
        .map(|t| t.ratings(dim).to_vec())
        .collect();
    let matrix = RatingsMatrix::from_rows(&rows).ok();
    let compute = |form| matrix.as_ref().and_then(|m| icc(m, form).ok());
    Reliability {
        items: rows.len(),
        raters: k,
        average: compute(IccForm::Average),
        single: compute(IccForm::Single),
    }
}

/// Writes annotations back out in the input CSV layout.
pub fn write_annotations(titles: &[AnnotatedTitle], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["title", "annotator_id", "emo_rating", "info_rating"])?;
    for t in titles {
        for ((a, e), i) in t.annotators.iter().zip(&t.emo_ratings).zip(&t.info_ratings) {
            w.write_record([t.title.clone(), a.clone(), e.to_string(), i.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<annotations csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportModelFit {
    pub dimension: Dimension,
    pub model: ForestModel,
    /// Test-set Pearson correlation; `None` when undefined.
    pub eval: Option<CorrelationResult>,
    pub validation: Option<CorrelationResult>,
    pub split_sizes: (usize, usize, usize),
}

/// Featurize, split 80/10/10, fit on the training part, and report the
/// validation and test correlations. Validation is informational only.
pub fn train_support_model(
    annotations: &[AnnotatedTitle],
    dimension: Dimension,
    featurizer: &Featurizer,
    params: &ForestParams,
    seed: u64,
    log: &mut RunLog,
) -> Result<SupportModelFit> {
    if annotations.len() < MIN_ANNOTATED_TITLES {
        return Err(Error::Training(format!(
            "need at least {MIN_ANNOTATED_TITLES} annotated titles, got {}",
            annotations.len()
        )));
    }
    let titles: Vec<&str> = annotations.iter().map(|a| a.title.as_str()).collect();
    let rows: Vec<Vec<f64>> = featurizer
        .extract_many(&titles)
        .into_iter()
        .map(|v| v.into_values())
        .collect();
    let targets: Vec<f64> = annotations.iter().map(|a| a.target(dimension)).collect();

    let indices: Vec<usize> = (0..annotations.len()).collect();
    let split = split_dataset(&indices, DEFAULT_SPLIT, seed)?;
    let gather = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            idx.iter().map(|&i| rows[i].clone()).collect(),
            idx.iter().map(|&i| targets[i]).collect(),
        )
    };
    let (x_train, y_train) = gather(&split.train);
    let params = ForestParams {
        target_bounds: Some((LIKERT_MIN, LIKERT_MAX)),
        ..params.clone()
    };
    let model = train_forest(&x_train, &y_train, featurizer.schema().names(), &params, seed)?;

    let key = |name: &str| format!("model.{}.{name}", dimension.short());
    log.record(key("split.train"), split.train.len());
    log.record(key("split.validation"), split.validation.len());
    log.record(key("split.test"), split.test.len());
    if model.importances_degenerate {
        log.record(key("warning"), "constant training targets; degenerate model");
    }

    let evaluate = |idx: &[usize]| -> Result<Option<CorrelationResult>> {
        let (x, y) = gather(idx);
        let preds = x.iter().map(|r| model.predict(r)).collect::<Result<Vec<_>>>()?;
        match pearson(&preds, &y) {
            Ok(c) => Ok(Some(c)),
            Err(Error::Undefined(_)) | Err(Error::Argument(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let validation = evaluate(&split.validation)?;
    let eval = if model.importances_degenerate {
        None
    } else {
        evaluate(&split.test)?
    };
    log.record(key("validation.r"), fmt_opt(validation.map(|c| c.r)));
    log.record(key("test.r"), fmt_opt(eval.map(|c| c.r)));
    log.record(key("test.p"), fmt_opt(eval.map(|c| c.p_two_tailed)));

    Ok(SupportModelFit {
        dimension,
        model,
        eval,
        validation,
        split_sizes: (split.train.len(), split.validation.len(), split.test.len()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportModels {
    pub emotional: ForestModel,
    pub informational: ForestModel,
}

impl SupportModels {
    pub fn get(&self, dim: Dimension) -> &ForestModel {
        match dim {
            Dimension::Emotional => &self.emotional,
            Dimension::Informational => &self.informational,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPost {
    pub id: String,
    pub author: String,
    pub num_comments: u64,
    pub emo_score: f64,
    pub info_score: f64,
}

/// Scores every title with both models.
pub fn score_corpus(
    models: &SupportModels,
    corpus: &Corpus,
    featurizer: &Featurizer,
) -> Result<Vec<ScoredPost>> {
    for dim in Dimension::ALL {
        if models.get(dim).schema_names != featurizer.schema().names() {
            return Err(Error::Config(format!(
                "{} model was trained on a different feature schema",
                dim.short()
            )));
        }
    }
    corpus
        .posts()
        .par_iter()
        .map(|p| {
            let x = featurizer.extract(&p.title);
            Ok(ScoredPost {
                id: p.id.clone(),
                author: p.author.clone(),
                num_comments: p.num_comments,
                emo_score: models.emotional.predict(x.values())?,
                info_score: models.informational.predict(x.values())?,
            })
        })
        .collect()
}

pub fn write_scores_csv(scored: &[ScoredPost], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "emo_score", "info_score"])?;
    for s in scored {
        w.write_record([s.id.clone(), s.emo_score.to_string(), s.info_score.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<scores csv>", e))?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    id: String,
    emo_score: f64,
    info_score: f64,
}

/// Reads a scores CSV and joins it to the corpus by post id.
pub fn read_scores_csv(reader: impl Read, corpus: &Corpus) -> Result<Vec<ScoredPost>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut by_id: HashMap<String, (f64, f64)> = HashMap::new();
    for (i, rec) in rdr.deserialize::<ScoreRow>().enumerate() {
        let row = rec.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        by_id.insert(row.id, (row.emo_score, row.info_score));
    }
    corpus
        .posts()
        .iter()
        .map(|p| {
            let (emo, info) = by_id.get(&p.id).ok_or_else(|| {
                Error::Validation(format!("no score for post \"{}\"", p.id))
            })?;
            Ok(ScoredPost {
                id: p.id.clone(),
                author: p.author.clone(),
                num_comments: p.num_comments,
                emo_score: *emo,
                info_score: *info,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserAggregate {
    pub user: String,
    pub n_posts: usize,
    pub mean_comments: f64,
    pub mean_emo: f64,
    pub mean_info: f64,
}

/// Per-user means over users with at least `k_min` posts, sorted by user.
pub fn aggregate_users(scored: &[ScoredPost], k_min: usize) -> Result<Vec<UserAggregate>> {
    if k_min == 0 {
        return Err(Error::Argument("k_min must be >= 1".into()));
    }
    let mut by_user: BTreeMap<&str, Vec<&ScoredPost>> = BTreeMap::new();
    for s in scored {
        by_user.entry(s.author.as_str()).or_default().push(s);
    }
    let out: Vec<UserAggregate> = by_user
        .into_iter()
        .filter(|(_, posts)| posts.len() >= k_min)
        .map(|(user, posts)| {
            let n = posts.len() as f64;
            UserAggregate {
                user: user.to_string(),
                n_posts: posts.len(),
                mean_comments: posts.iter().map(|p| p.num_comments as f64).sum::<f64>() / n,
                mean_emo: posts.iter().map(|p| p.emo_score).sum::<f64>() / n,
                mean_info: posts.iter().map(|p| p.info_score).sum::<f64>() / n,
            }
        })
        .collect();
    if out.is_empty() {
        return Err(Error::Undefined(format!("no users with at least {k_min} posts")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Defined(CorrelationResult),
    Undefined(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementRow {
    pub dimension: Dimension,
    pub outcome: RowOutcome,
}

impl EngagementRow {
    pub fn r(&self) -> Option<f64> {
        match &self.outcome {
            RowOutcome::Defined(c) => Some(c.r),
            RowOutcome::Undefined(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngagementReport {
    pub forum: String,
    pub n_users: usize,
    /// Emotional first, informational second.
    pub rows: [EngagementRow; 2],
}

/// Correlates each user's mean support score with mean comments received.
pub fn engagement_report(aggregates: &[UserAggregate], forum: &str) -> Result<EngagementReport> {
    if aggregates.len() < 3 {
        return Err(Error::Argument(format!(
            "need at least 3 users for a correlation, got {}",
            aggregates.len()
        )));
    }
    let comments: Vec<f64> = aggregates.iter().map(|a| a.mean_comments).collect();
    let row = |dimension: Dimension| {
        let scores: Vec<f64> = aggregates
            .iter()
            .map(|a| match dimension {
                Dimension::Emotional => a.mean_emo,
                Dimension::Informational => a.mean_info,
            })
            .collect();
        let outcome = match pearson(&scores, &comments) {
            Ok(c) => RowOutcome::Defined(c),
            Err(e) => RowOutcome::Undefined(e.to_string()),
        };
        EngagementRow { dimension, outcome }
    };
    Ok(EngagementReport {
        forum: forum.to_string(),
        n_users: aggregates.len(),
        rows: [row(Dimension::Emotional), row(Dimension::Informational)],
    })
}

impl EngagementReport {
    pub fn row(&self, dim: Dimension) -> &EngagementRow {
        &self.rows[dim as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["forum", "feature", "pearson_r", "p_value", "n_users", "note"])
            .expect("in-memory csv");
        for row in &self.rows {
            let (r, p, note) = match &row.outcome {
                RowOutcome::Defined(c) => (c.r.to_string(), c.p_two_tailed.to_string(), String::new()),
                RowOutcome::Undefined(why) => ("undefined".into(), "undefined".into(), why.clone()),
            };
            w.write_record([
                self.forum.clone(),
                row.dimension.label().to_string(),
                r,
                p,
                self.n_users.to_string(),
                note,
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        let mut forum = String::new();
        let mut n_users = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |j: usize| rec.get(j).unwrap_or("").to_string();
            let bad = |m: &str| Error::Parse {
                line: i + 2,
                message: m.to_string(),
            };
            forum = field(0);
            let dimension = Dimension::ALL
                .into_iter()
                .find(|d| d.label() == field(1))
                .ok_or_else(|| bad("unknown feature label"))?;
            n_users = field(4).parse().map_err(|_| bad("bad n_users"))?;
            let outcome = if field(2) == "undefined" {
                RowOutcome::Undefined(field(5))
            } else {
                RowOutcome::Defined(CorrelationResult {
                    r: field(2).parse().map_err(|_| bad("bad pearson_r"))?,
                    p_two_tailed: field(3).parse().map_err(|_| bad("bad p_value"))?,
                    n: n_users,
                })
            };
            rows.push(EngagementRow { dimension, outcome });
        }
        let [a, b]: [EngagementRow; 2] = rows
            .try_into()
            .map_err(|_| Error::Validation("engagement report must have exactly two rows".into()))?;
        if a.dimension != Dimension::Emotional || b.dimension != Dimension::Informational {
            return Err(Error::Validation("engagement rows out of order".into()));
        }
        Ok(Self {
            forum,
            n_users,
            rows: [a, b],
        })
    }

    /// Two-row text table with a caption, a p flag and the user count.
    pub fn render_table(&self) -> String {
        let cells: Vec<(String, String, String)> = self
            .rows
            .iter()
            .map(|row| match &row.outcome {
                RowOutcome::Defined(c) => (
                    row.dimension.label().to_string(),
                    format!("{:.2}", c.r),
                    format!("{:.3e}", c.p_two_tailed),
                ),
                RowOutcome::Undefined(_) => (
                    row.dimension.label().to_string(),
                    "undefined".to_string(),
                    "-".to_string(),
                ),
            })
            .collect();
        let headers = ("Feature", "Pearson r", "p");
        let w0 = cells.iter().map(|c| c.0.len()).max().unwrap().max(headers.0.len());
        let w1 = cells.iter().map(|c| c.1.len()).max().unwrap().max(headers.1.len());
        let w2 = cells.iter().map(|c| c.2.len()).max().unwrap().max(headers.2.len());
        let rule = format!("+{}+{}+{}+\n", "-".repeat(w0 + 2), "-".repeat(w1 + 2), "-".repeat(w2 + 2));

        let mut out = format!(
            "Correlation between social support sought and number of comments: /r/{}\n",
            self.forum
        );
        out.push_str(&rule);
        out.push_str(&format!("| {:<w0$} | {:<w1$} | {:<w2$} |\n", headers.0, headers.1, headers.2));
        out.push_str(&rule);
        for (a, b, c) in &cells {
            out.push_str(&format!("| {a:<w0$} | {b:>w1$} | {c:>w2$} |\n"));
        }
        out.push_str(&rule);
        let all_flagged = self.rows.iter().all(|r| match &r.outcome {
            RowOutcome::Defined(c) => c.is_flagged(),
            RowOutcome::Undefined(_) => false,
        });
        if all_flagged {
            out.push_str("p<0.001. ");
        }
        out.push_str(&format!(
            "Number of users = {}\n",
            group_thousands(self.n_users as u64)
        ));
        for row in &self.rows {
            if let RowOutcome::Undefined(why) = &row.outcome {
                out.push_str(&format!("{}: undefined ({why})\n", row.dimension.label()));
            }
        }
        out
    }
}

/// Side-by-side top-k feature importances for both models.
pub fn render_importance_table(models: &SupportModels, k: usize, labels: &BTreeMap<String, String>) -> String {
    let show = |(name, imp): &(String, f64)| {
        let shown = labels.get(name).cloned().unwrap_or_else(|| name.clone());
        format!("{shown} - ({imp:.3})")
    };
    let left: Vec<String> = models.emotional.importance_report(k).iter().map(show).collect();
    let right: Vec<String> = models.informational.importance_report(k).iter().map(show).collect();
    let h = ("Emotional Support", "Informational Support");
    let w0 = left.iter().map(String::len).max().unwrap_or(0).max(h.0.len());
    let w1 = right.iter().map(String::len).max().unwrap_or(0).max(h.1.len());
    let rule = format!("+{}+{}+\n", "-".repeat(w0 + 2), "-".repeat(w1 + 2));
    let mut out = format!("Top {k} most important features as ranked by the random forest model\n");
    out.push_str(&rule);
    out.push_str(&format!("| {:<w0$} | {:<w1$} |\n", h.0, h.1));
    out.push_str(&rule);
    for i in 0..left.len().max(right.len()) {
        let a = left.get(i).map_or("", String::as_str);
        let b = right.get(i).map_or("", String::as_str);
        out.push_str(&format!("| {a:<w0$} | {b:<w1$} |\n"));
    }
    out.push_str(&rule);
    if models.emotional.importances_degenerate || models.informational.importances_degenerate {
        out.push_str("note: a model had constant targets; its importances are uniform\n");
    }
    out
}

/// Topic themes (from `labels`, keyed `topic_i`) with their top words.
pub fn render_topic_table(model: &TopicModel, n_words: usize, labels: &BTreeMap<String, String>) -> Result<String> {
    let mut rows = Vec::with_capacity(model.k());
    for t in 0..model.k() {
        let key = format!("topic_{t}");
        let label = labels.get(&key).cloned().unwrap_or(key);
        rows.push((label, model.top_words(t, n_words)?.join(", ")));
    }
    let h = ("LDA topic themes", "Highly correlated words");
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(h.0.len());
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(h.1.len());
    let rule = format!("+{}+{}+\n", "-".repeat(w0 + 2), "-".repeat(w1 + 2));
    let mut out = format!("LDA topic themes and top {n_words} words per topic\n");
    out.push_str(&rule);
    out.push_str(&format!("| {:<w0$} | {:<w1$} |\n", h.0, h.1));
    out.push_str(&rule);
    for (a, b) in &rows {
        out.push_str(&format!("| {a:<w0$} | {b:<w1$} |\n"));
    }
    out.push_str(&rule);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn scored(author: &str, comments: u64, emo: f64, info: f64, id: usize) -> ScoredPost {
        ScoredPost {
            id: id.to_string(),
            author: author.into(),
            num_comments: comments,
            emo_score: emo,
            info_score: info,
        }
    }

    #[test]
    fn annotation_means_and_icc_log() {
        let csv = "title,annotator_id,emo_rating,info_rating\n\
                   a title,x,7,1\na title,y,7,4\na title,z,7,7\n\
                   another,x,2,3\nanother,y,2,3\nanother,z,2,3\n";
        let mut log = RunLog::new();
        let ann = read_annotations(csv.as_bytes(), &mut log).unwrap();
        assert_eq!(ann.titles.len(), 2);
        assert_eq!(ann.titles[0].emo_mean, 7.0);
        assert_eq!(ann.titles[0].info_mean, 4.0);
        assert_eq!(ann.icc_emo, Some(1.0));
        assert_eq!(log.get("icc.emo.average"), Some("1"));
        assert_eq!(log.get("icc.emo.raters"), Some("3"));
    }

    #[test]
    fn annotation_out_of_range_names_row() {
        let csv = "title,annotator_id,emo_rating,info_rating\nt,a,3,3\nt,b,9,3\n";
        let err = read_annotations(csv.as_bytes(), &mut RunLog::new()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn annotation_round_trip() {
        let csv = "title,annotator_id,emo_rating,info_rating\n\"Hi, all\",a,3,4\n\"Hi, all\",b,5,6\n";
        let ann = read_annotations(csv.as_bytes(), &mut RunLog::new()).unwrap();
        let mut buf = Vec::new();
        write_annotations(&ann.titles, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), csv);
    }

    #[test]
    fn aggregates() {
        let posts = vec![
            scored("a", 0, 1.0, 2.0, 0),
            scored("a", 10, 3.0, 4.0, 1),
            scored("b", 5, 1.0, 1.0, 2),
        ];
        let agg = aggregate_users(&posts, 2).unwrap();
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].user, "a");
        assert_eq!(agg[0].mean_comments, 5.0);
        assert_eq!(agg[0].mean_emo, 2.0);
        assert_eq!(agg[0].mean_info, 3.0);
        assert!(matches!(aggregate_users(&posts, 5), Err(Error::Undefined(_))));
    }

    fn population(sign: f64, seed: u64) -> Vec<UserAggregate> {
        let mut rng = SeededRng::new(seed);
        (0..200)
            .map(|i| {
                let info = 1.0 + 6.0 * rng.uniform();
                let emo = 1.0 + 6.0 * rng.uniform();
                let comments = 30.0 + sign * 3.0 * info + 1.5 * rng.normal();
                UserAggregate {
                    user: format!("u{i:03}"),
                    n_posts: 5,
                    mean_comments: comments,
                    mean_emo: emo,
                    mean_info: info,
                }
            })
            .collect()
    }

    #[test]
    fn planted_engagement_correlation() {
        let rep = engagement_report(&population(1.0, 4), "leaves").unwrap();
        assert!(rep.row(Dimension::Informational).r().unwrap() > 0.8);
        assert!(rep.row(Dimension::Emotional).r().unwrap().abs() < 0.3);
        let neg = engagement_report(&population(-1.0, 4), "opiatesrecovery").unwrap();
        assert!(neg.row(Dimension::Informational).r().unwrap() < 0.0);
        assert_eq!(rep.rows[0].dimension, Dimension::Emotional);
    }

    #[test]
    fn constant_scores_give_undefined_row() {
        let mut pop = population(1.0, 2);
        for a in &mut pop {
            a.mean_emo = 3.0;
        }
        let rep = engagement_report(&pop, "leaves").unwrap();
        assert!(matches!(rep.rows[0].outcome, RowOutcome::Undefined(_)));
        assert!(rep.rows[1].r().is_some());
        let table = rep.render_table();
        assert!(table.contains("undefined"));
        assert!(engagement_report(&pop[..2], "leaves").is_err());
    }

    #[test]
    fn report_csv_round_trip_and_table_layout() {
        let rep = engagement_report(&population(1.0, 9), "leaves").unwrap();
        let back = EngagementReport::from_csv(&rep.to_csv()).unwrap();
        assert_eq!(back, rep);
        let table = rep.render_table();
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].ends_with("/r/leaves"));
        assert!(lines[4].contains("Emotional Support Sought"));
        assert!(lines[5].contains("Informational Support Sought"));
        assert!(table.contains("Number of users = 200"));
    }
}
