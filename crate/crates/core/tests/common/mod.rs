//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use statrs::function::gamma::ln_gamma;

/// Definitional two-pass Pearson r.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

fn t_density(x: f64, df: f64) -> f64 {
    (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln()
        - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln())
    .exp()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Two-tailed Student-t p by numerical integration of the density.
/// Small |t| integrates the centre; otherwise the tail is mapped onto (0, 1]
/// with x = |t| / s.
pub fn t_two_tailed_oracle(t: f64, df: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 {
        1.0 - 2.0 * simpson(|x| t_density(x, df), 0.0, a, 20_000)
    } else {
        let g = |s: f64| {
            if s == 0.0 {
                0.0
            } else {
                t_density(a / s, df) * a / (s * s)
            }
        };
        let tail = if df == 1.0 {
            // integrand tends to 1/(pi a) at s = 0
            simpson(|s| if s == 0.0 { 1.0 / (std::f64::consts::PI * a) } else { g(s) }, 0.0, 1.0, 20_000)
        } else {
            simpson(g, 0.0, 1.0, 20_000)
        };
        2.0 * tail
    }
}

/// One-way ANOVA ICC from sums of squares: (average, single).
pub fn icc_oracle(rows: &[Vec<f64>]) -> (f64, f64) {
    let n = rows.len() as f64;
    let k = rows[0].len() as f64;
    let grand = rows.iter().flatten().sum::<f64>() / (n * k);
    let means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / k).collect();
    let ssb: f64 = means.iter().map(|m| k * (m - grand).powi(2)).sum();
    let ssw: f64 = rows
        .iter()
        .zip(&means)
        .map(|(r, m)| r.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    let msb = ssb / (n - 1.0);
    let msw = ssw / (n * (k - 1.0));
    ((msb - msw) / msb, (msb - msw) / (msb + (k - 1.0) * msw))
}

/// Greedy regression tree over one feature: every split between distinct
/// sorted values is scored by direct SSE; the first best split wins.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleTree {
    Leaf(f64),
    Split(f64, Box<OracleTree>, Box<OracleTree>),
}

fn sse(ys: &[f64]) -> f64 {
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - m).powi(2)).sum()
}

pub fn cart_oracle(points: &[(f64, f64)], min_leaf: usize) -> OracleTree {
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    if points.len() < 2 * min_leaf || ys.iter().all(|y| *y == ys[0]) {
        return OracleTree::Leaf(mean);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let parent = sse(&ys);
    let mut best: Option<(f64, f64)> = None;
    for i in 1..sorted.len() {
        if sorted[i - 1].0 == sorted[i].0 || i < min_leaf || sorted.len() - i < min_leaf {
            continue;
        }
        let left: Vec<f64> = sorted[..i].iter().map(|p| p.1).collect();
        let right: Vec<f64> = sorted[i..].iter().map(|p| p.1).collect();
        let gain = parent - sse(&left) - sse(&right);
        if gain > 1e-12 && best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, (sorted[i - 1].0 + sorted[i].0) / 2.0));
        }
    }
    match best {
        None => OracleTree::Leaf(mean),
        Some((_, thr)) => {
            let (l, r): (Vec<_>, Vec<_>) = points.iter().partition(|p| p.0 <= thr);
            OracleTree::Split(thr, Box::new(cart_oracle(&l, min_leaf)), Box::new(cart_oracle(&r, min_leaf)))
        }
    }
}

impl OracleTree {
    pub fn predict(&self, x: f64) -> f64 {
        match self {
            OracleTree::Leaf(v) => *v,
            OracleTree::Split(t, l, r) => {
                if x <= *t {
                    l.predict(x)
                } else {
                    r.predict(x)
                }
            }
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        match self {
            OracleTree::Leaf(_) => vec![],
            OracleTree::Split(t, l, r) => {
                let mut v = l.thresholds();
                v.push(*t);
                v.extend(r.thresholds());
                v
            }
        }
    }
}

/// Writes a small run config for the planted fixture stored in `dir`.
pub fn write_chain_config(dir: &Path, forum: &str, seed: u64, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(
        &path,
        format!(
            "seed = {seed}\nforum = {forum}\npaths.dump = {}\npaths.annotations = {}\n{extra}",
            dir.join("posts.jsonl").display(),
            dir.join("annotations.csv").display(),
        ),
    )
    .unwrap();
    path
}

pub const CHAIN: [&str; 5] = ["ingest", "train-lda", "train-model", "score", "analyze"];

/// Runs the CLI chain in-process; returns the first failing step, if any.
pub fn run_chain(config: &Path, out: &Path) -> Result<(), String> {
    for step in CHAIN {
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        let code = support_signal::cli::run_with(
            [
                "support-signal",
                step,
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            &mut stdout,
            &mut stderr,
        );
        if code != 0 {
            return Err(format!("{step} exited {code}: {}", String::from_utf8_lossy(&stderr)));
        }
    }
    Ok(())
}

pub const FEATURE_TITLES: &str = include_str!("../fixtures/feature_titles.tsv");
pub const FEATURE_COLUMNS: [&str; 9] = [
    "n_sentences",
    "n_question_sentences",
    "n_negation_sentences",
    "advice_request_count",
    "drug_mention_count",
    "cat_negemo",
    "cat_you",
    "cat_time",
    "cat_feel",
];

/// Featurizer over the small fixture lexicons and a one-topic model.
pub fn fixture_featurizer() -> support_signal::features::Featurizer {
    use support_signal::lexicons::{CategoryLexicon, DrugLexicon, Lexicons, SubjectivityLexicon};
    use support_signal::topics::{train_lda, LdaParams, Stoplist};
    let lexicons = Lexicons {
        categories: CategoryLexicon::parse(include_str!("../fixtures/feature_categories.dic")).unwrap(),
        subjectivity: SubjectivityLexicon::bundled(),
        drugs: DrugLexicon::parse(include_str!("../fixtures/feature_drugs.txt")).unwrap(),
    };
    let docs: Vec<Vec<String>> = ["sleep cravings", "sleep weed", "cravings weed"]
        .iter()
        .map(|d| d.split(' ').map(String::from).collect())
        .collect();
    let mut params = LdaParams::new(1, 0);
    params.iterations = 5;
    params.min_doc_freq = 1;
    let lda = train_lda(&docs, &params, &Stoplist::empty()).unwrap();
    support_signal::features::Featurizer::new(lexicons, support_signal::textproc::Tagger::bundled(), lda).unwrap()
}

/// Mismatches between the fixture labels and extracted features.
pub fn feature_fixture_mismatches() -> (usize, Vec<String>) {
    let f = fixture_featurizer();
    let mut failures = Vec::new();
    let mut n = 0;
    for row in FEATURE_TITLES.lines().filter(|l| !l.starts_with('#')) {
        n += 1;
        let mut cols = row.split('\t');
        let title = cols.next().unwrap();
        let expected: Vec<f64> = cols.map(|c| c.parse().unwrap()).collect();
        assert_eq!(expected.len(), FEATURE_COLUMNS.len(), "{title}");
        let v = f.extract(title);
        for (name, want) in FEATURE_COLUMNS.iter().zip(&expected) {
            let got = v.get(name).unwrap();
            if got != *want {
                failures.push(format!("{title:?} {name}: expected {want}, got {got}"));
            }
        }
    }
    (n, failures)
}
