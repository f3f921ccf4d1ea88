//! Command-line surface. [`run`] is what the binary calls; it can also be
//! driven in-process with explicit argument lists and writers.
//!
//! Every subcommand reads the config (`--config`, then `--set key=value`,
//! `--seed` and `--out` on top), appends to `<out>/run.log`, and writes its
//! artifacts under `<out>` with fixed names.

use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{RawConfig, RunConfig};
use crate::corpus::{
    corpus_summary, filter_users_min_posts, no_comment_rate, read_posts, render_summary_table,
    sample_posts, write_posts, Corpus, TimeWindow,
};
use crate::error::{Error, Result};
use crate::features::Featurizer;
use crate::forest::ForestModel;
use crate::pipeline::{
    aggregate_users, engagement_report, load_annotations, read_scores_csv, render_importance_table,
    render_topic_table, score_corpus, train_support_model, write_scores_csv, Dimension,
    EngagementReport, RunLog, SupportModels,
};
use crate::topics::{topic_terms, train_lda, TopicModel};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const LDA_FILE: &str = "lda.json";
pub const MODEL_EMO_FILE: &str = "model_emo.json";
pub const MODEL_INFO_FILE: &str = "model_info.json";
pub const SCORES_FILE: &str = "scores.csv";
pub const ENGAGEMENT_FILE: &str = "engagement_report.csv";
pub const ENGAGEMENT_TABLE_FILE: &str = "engagement_report.txt";
pub const REPORT_FILE: &str = "report.txt";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SAMPLE_FILE: &str = "sampled_titles.csv";
pub const RUN_LOG_FILE: &str = "run.log";

#[derive(Debug, Parser)]
#[command(name = "support-signal", version, about = "Support-seeking signals in recovery forum titles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key=value config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `paths.out`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides any config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate a raw JSONL dump and write corpus.jsonl.
    Ingest,
    /// Draw a seeded sample of titles for annotation.
    SampleTitles,
    /// Train the topic model on corpus titles.
    TrainLda,
    /// Train the emotional and informational support models.
    TrainModel,
    /// Score every post with both support models.
    Score,
    /// Aggregate per user and correlate support with comments.
    Analyze,
    /// Render topic, importance and engagement tables.
    Report,
    /// Corpus counts and no-comment rate.
    Summary,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::SampleTitles => "sample-titles",
            Command::TrainLda => "train-lda",
            Command::TrainModel => "train-model",
            Command::Score => "score",
            Command::Analyze => "analyze",
            Command::Report => "report",
            Command::Summary => "summary",
        }
    }
}

/// Runs with process stdout/stderr and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Exit codes: 0 success, 1 run failure, 2 usage error.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", error_line(&e));
            1
        }
    }
}

/// Single-line machine-readable form of an error.
pub fn error_line(e: &Error) -> String {
    format!("error kind={} message={:?}", e.kind(), e.to_string())
}

/// Builds the effective config: file, then `--set`, then `--seed`/`--out`.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for pair in &cli.overrides {
        raw.apply_override(pair)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        raw.set("paths.out", out.to_string_lossy())?;
    }
    RunConfig::from_raw(raw)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = effective_config(cli)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let mut log = RunLog::new();
    log.record("run.command", cli.command.name());
    for (k, v) in cfg.raw.iter() {
        log.record(format!("config.{k}"), v);
    }
    let result = dispatch(cli.command, &cfg, &mut log, out, err);
    match &result {
        Ok(()) => log.record("run.status", "ok"),
        Err(e) => log.record("run.status", error_line(e)),
    }
    log.append_to(cfg.out.join(RUN_LOG_FILE))?;
    result
}

fn dispatch(
    command: Command,
    cfg: &RunConfig,
    log: &mut RunLog,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    match command {
        Command::Ingest => ingest(cfg, log, out, err),
        Command::SampleTitles => sample_titles(cfg, log, out),
        Command::TrainLda => train_topics(cfg, log, out),
        Command::TrainModel => train_models(cfg, log, out),
        Command::Score => score(cfg, log, out),
        Command::Analyze => analyze(cfg, log, out),
        Command::Report => report(cfg, log, out),
        Command::Summary => summary(cfg, log, out),
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn artifact(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_corpus_file(path: &Path, forum: &str, log: &mut RunLog, err: &mut dyn Write) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let loaded = read_posts(BufReader::new(file), forum)?;
    if !loaded.skipped.is_empty() {
        writeln!(err, "{}: {}", path.display(), loaded.skipped).map_err(|e| Error::io("<stderr>", e))?;
    }
    log.record("corpus.skip_report", &loaded.skipped);
    log.record("corpus.posts", loaded.corpus.len());
    Ok(loaded.corpus)
}

/// `paths.corpus` if set, else the ingested corpus in the out dir.
fn corpus_path(cfg: &RunConfig) -> PathBuf {
    cfg.corpus.clone().unwrap_or_else(|| artifact(cfg, CORPUS_FILE))
}

fn load_corpus(cfg: &RunConfig, log: &mut RunLog) -> Result<Corpus> {
    read_corpus_file(&corpus_path(cfg), &cfg.forum, log, &mut std::io::sink())
}

fn featurizer(cfg: &RunConfig) -> Result<Featurizer> {
    let lda = TopicModel::load(artifact(cfg, LDA_FILE))?;
    Featurizer::new(cfg.lexicons()?, cfg.tagger()?, lda)
}

fn load_models(cfg: &RunConfig) -> Result<SupportModels> {
    Ok(SupportModels {
        emotional: ForestModel::load(artifact(cfg, MODEL_EMO_FILE))?,
        informational: ForestModel::load(artifact(cfg, MODEL_INFO_FILE))?,
    })
}

fn ingest(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let dump = cfg
        .dump
        .as_ref()
        .ok_or_else(|| Error::Config("ingest needs paths.dump".into()))?;
    let corpus = read_corpus_file(dump, &cfg.forum, log, err)?;
    let dest = artifact(cfg, CORPUS_FILE);
    write_posts(&corpus, &dest)?;
    writeln!(out, "ingested {} posts into {}", corpus.len(), dest.display()).map_err(stdout_err)
}

fn sample_titles(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(cfg, log)?;
    let sample = sample_posts(&corpus, cfg.sample_n, cfg.seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "title"])?;
    for p in &sample {
        w.write_record([p.id.as_str(), p.title.as_str()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(SAMPLE_FILE, e.into_error()))?;
    write_file(&artifact(cfg, SAMPLE_FILE), &bytes)?;
    log.record("sample.drawn", sample.len());
    writeln!(out, "sampled {} of {} titles", sample.len(), corpus.len()).map_err(stdout_err)
}

fn train_topics(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(cfg, log)?;
    let stoplist = cfg.stoplist()?;
    let docs: Vec<Vec<String>> = corpus
        .posts()
        .iter()
        .map(|p| topic_terms(&p.title, &stoplist))
        .collect();
    let model = train_lda(&docs, &cfg.lda, &stoplist)?;
    model.save(artifact(cfg, LDA_FILE))?;
    log.record("lda.vocab", model.vocab().len());
    log.record("lda.K", model.k());
    log.record("lda.alpha", model.alpha());
    writeln!(out, "trained {} topics over {} terms", model.k(), model.vocab().len()).map_err(stdout_err)
}

fn train_models(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let path = cfg
        .annotations
        .as_ref()
        .ok_or_else(|| Error::Config("train-model needs paths.annotations".into()))?;
    let annotations = load_annotations(path, log)?;
    let featurizer = featurizer(cfg)?;
    for (dim, file) in [
        (Dimension::Emotional, MODEL_EMO_FILE),
        (Dimension::Informational, MODEL_INFO_FILE),
    ] {
        let fit = train_support_model(&annotations.titles, dim, &featurizer, &cfg.forest, cfg.seed, log)?;
        fit.model.save(artifact(cfg, file))?;
        let r = fit.eval.map_or_else(|| "undefined".to_string(), |c| format!("{:.3}", c.r));
        writeln!(out, "{}: test r = {r}", dim.label()).map_err(stdout_err)?;
    }
    Ok(())
}

fn score(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(cfg, log)?;
    let models = load_models(cfg)?;
    let scored = score_corpus(&models, &corpus, &featurizer(cfg)?)?;
    let mut bytes = Vec::new();
    write_scores_csv(&scored, &mut bytes)?;
    write_file(&artifact(cfg, SCORES_FILE), &bytes)?;
    log.record("score.posts", scored.len());
    writeln!(out, "scored {} posts", scored.len()).map_err(stdout_err)
}

fn analyze(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(cfg, log)?;
    let scores_path = artifact(cfg, SCORES_FILE);
    let file = std::fs::File::open(&scores_path).map_err(|e| Error::io(&scores_path, e))?;
    let scored = read_scores_csv(BufReader::new(file), &corpus)?;
    let aggregates = aggregate_users(&scored, cfg.k_min)?;
    log.record(
        "analysis.filtered_posts",
        filter_users_min_posts(&corpus, cfg.k_min)?.len(),
    );
    let report = engagement_report(&aggregates, &cfg.forum)?;
    log.record("analysis.n_users", report.n_users);
    for row in &report.rows {
        let key = format!("analysis.{}.r", row.dimension.short());
        match row.r() {
            Some(r) => log.record(key, r),
            None => log.record(key, "undefined"),
        }
    }
    write_file(&artifact(cfg, ENGAGEMENT_FILE), report.to_csv().as_bytes())?;
    let table = report.render_table();
    write_file(&artifact(cfg, ENGAGEMENT_TABLE_FILE), table.as_bytes())?;
    out.write_all(table.as_bytes()).map_err(stdout_err)
}

fn report(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let models = load_models(cfg)?;
    let lda = TopicModel::load(artifact(cfg, LDA_FILE))?;
    let engagement_path = artifact(cfg, ENGAGEMENT_FILE);
    let engagement = EngagementReport::from_csv(
        &std::fs::read_to_string(&engagement_path).map_err(|e| Error::io(&engagement_path, e))?,
    )?;
    let text = format!(
        "{}\n{}\n{}",
        render_topic_table(&lda, cfg.top_words, &cfg.topic_labels)?,
        render_importance_table(&models, cfg.top_features, &cfg.topic_labels),
        engagement.render_table()
    );
    write_file(&artifact(cfg, REPORT_FILE), text.as_bytes())?;
    log.record("report.file", artifact(cfg, REPORT_FILE).display());
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

fn summary(cfg: &RunConfig, log: &mut RunLog, out: &mut dyn Write) -> Result<()> {
    let corpus = load_corpus(cfg, log)?;
    let s = corpus_summary(&corpus);
    let window = match cfg.window {
        Some((a, b)) => Some(TimeWindow::new(a, b)?),
        None => TimeWindow::covering(&corpus),
    };
    let rate = window.and_then(|w| no_comment_rate(&corpus, w));
    log.record("summary.users", s.n_unique_users);
    log.record("summary.posts", s.n_posts);
    log.record("summary.comments", s.n_comments);
    log.record("summary.no_comment_rate", rate.map_or_else(|| "undefined".into(), |r| r.to_string()));
    let table = render_summary_table(&cfg.forum, &s, rate);
    write_file(&artifact(cfg, SUMMARY_FILE), table.as_bytes())?;
    out.write_all(table.as_bytes()).map_err(stdout_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, _, err) = run_capture(&["support-signal", "frobnicate"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());
    }

    #[test]
    fn missing_seed_is_single_line_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out_dir = dir.path().to_str().unwrap();
        let (code, _, err) = run_capture(&["support-signal", "summary", "--out", out_dir, "--set", "forum=leaves"]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
        assert!(err.starts_with("error kind=config message="), "{err}");
    }

    #[test]
    fn summary_on_three_posts() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("three.jsonl");
        std::fs::write(
            &corpus,
            "{\"id\":\"a\",\"author\":\"u1\",\"created_utc\":10,\"title\":\"Day 1\",\"num_comments\":0,\"subreddit\":\"leaves\"}\n\
             {\"id\":\"b\",\"author\":\"u2\",\"created_utc\":20,\"title\":\"Day 2\",\"num_comments\":3,\"subreddit\":\"leaves\"}\n\
             {\"id\":\"c\",\"author\":\"u1\",\"created_utc\":30,\"title\":\"Day 3\",\"num_comments\":1,\"subreddit\":\"leaves\"}\n",
        )
        .unwrap();
        let out_dir = dir.path().join("out");
        let (code, stdout, err) = run_capture(&[
            "support-signal",
            "summary",
            "--seed",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
            "--set",
            "forum=leaves",
            "--set",
            &format!("paths.corpus={}", corpus.display()),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(stdout.contains("Number of unique users"));
        assert!(stdout.contains("33.3%"), "{stdout}");
        let log = std::fs::read_to_string(out_dir.join(RUN_LOG_FILE)).unwrap();
        assert!(log.contains("config.seed=1\n"));
        assert!(log.contains("summary.posts=3\n"));
    }
}
