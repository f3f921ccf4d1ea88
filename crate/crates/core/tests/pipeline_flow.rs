use std::collections::HashMap;

use support_signal::corpus::{filter_users_min_posts, Corpus};
use support_signal::features::Featurizer;
use support_signal::forest::ForestParams;
use support_signal::lexicons::Lexicons;
use support_signal::pipeline::{
    aggregate_users, score_corpus, train_support_model, AnnotatedTitle, Dimension, RunLog, SupportModels,
};
use support_signal::rng::SeededRng;
use support_signal::synthetic::{planted_fixture, planted_title, PlantedConfig};
use support_signal::textproc::Tagger;
use support_signal::topics::{topic_terms, train_lda, LdaParams, Stoplist};
use support_signal::Error;

fn featurizer(corpus: &Corpus, k: usize) -> Featurizer {
    let stop = Stoplist::bundled();
    let docs: Vec<Vec<String>> = corpus.posts().iter().map(|p| topic_terms(&p.title, &stop)).collect();
    let mut params = LdaParams::new(k, 1);
    params.iterations = 100;
    let lda = train_lda(&docs, &params, &stop).unwrap();
    Featurizer::new(Lexicons::bundled(), Tagger::bundled(), lda).unwrap()
}

/// info_mean = 1 + 6 * [title contains '?'], emo_mean = 1 + 6 * [emotional prefix].
fn planted_annotations(n: usize, seed: u64) -> Vec<AnnotatedTitle> {
    let mut rng = SeededRng::new(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let t = planted_title(&mut rng, 0.5, 0.5);
        if !seen.insert(t.text.clone()) {
            continue;
        }
        let info = 1.0 + 6.0 * f64::from(u8::from(t.text.contains('?')));
        let emo = 1.0 + 6.0 * f64::from(u8::from(t.is_emo));
        out.push(AnnotatedTitle {
            title: t.text,
            annotators: vec!["a".into(), "b".into(), "c".into()],
            emo_ratings: vec![emo; 3],
            info_ratings: vec![info; 3],
            emo_mean: emo,
            info_mean: info,
        });
    }
    out
}

fn params() -> ForestParams {
    ForestParams { n_trees: 100, ..ForestParams::default() }
}

fn fixture() -> (Corpus, Featurizer, SupportModels) {
    let fx = planted_fixture(&PlantedConfig::default(), 21).unwrap();
    let f = featurizer(&fx.corpus, 5);
    let ann = planted_annotations(120, 4);
    let mut log = RunLog::new();
    let emo = train_support_model(&ann, Dimension::Emotional, &f, &params(), 7, &mut log).unwrap();
    let info = train_support_model(&ann, Dimension::Informational, &f, &params(), 7, &mut log).unwrap();
    let models = SupportModels {
        emotional: emo.model,
        informational: info.model,
    };
    (fx.corpus, f, models)
}

#[test]
fn planted_question_signal_is_learned() {
    let fx = planted_fixture(&PlantedConfig::default(), 21).unwrap();
    let f = featurizer(&fx.corpus, 5);
    let ann = planted_annotations(120, 4);
    let mut log = RunLog::new();
    let fit = train_support_model(&ann, Dimension::Informational, &f, &params(), 7, &mut log).unwrap();
    let r = fit.eval.expect("defined test r").r;
    assert!(r >= 0.9, "test r {r}");
    assert_eq!(fit.split_sizes, (96, 12, 12));
    assert!(log.get("model.info.validation.r").is_some());
    assert_eq!(log.get("model.info.split.test"), Some("12"));

    let again = train_support_model(&ann, Dimension::Informational, &f, &params(), 7, &mut RunLog::new()).unwrap();
    assert_eq!(again.eval.unwrap().r.to_bits(), r.to_bits());
}

#[test]
fn too_few_titles_and_constant_targets() {
    let fx = planted_fixture(&PlantedConfig::default(), 1).unwrap();
    let f = featurizer(&fx.corpus, 3);
    let ann = planted_annotations(29, 1);
    assert!(matches!(
        train_support_model(&ann, Dimension::Emotional, &f, &params(), 1, &mut RunLog::new()),
        Err(Error::Training(_))
    ));

    let mut flat = planted_annotations(40, 2);
    for a in &mut flat {
        a.info_mean = 4.0;
        a.info_ratings = vec![4.0; 3];
    }
    let mut log = RunLog::new();
    let fit = train_support_model(&flat, Dimension::Informational, &f, &params(), 1, &mut log).unwrap();
    assert!(fit.eval.is_none());
    assert!(fit.model.importances_degenerate);
    assert!(log.get("model.info.warning").is_some());
    assert_eq!(log.get("model.info.test.r"), Some("undefined"));
}

#[test]
fn scores_separate_questions_and_stay_in_range() {
    let (corpus, f, models) = fixture();
    let scored = score_corpus(&models, &corpus, &f).unwrap();
    assert_eq!(scored.len(), corpus.len());
    let (mut q, mut nq) = (Vec::new(), Vec::new());
    for (s, p) in scored.iter().zip(corpus.posts()) {
        assert!((1.0..=7.0).contains(&s.emo_score) && (1.0..=7.0).contains(&s.info_score));
        if p.title.contains('?') {
            q.push(s.info_score);
        } else {
            nq.push(s.info_score);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&q) - mean(&nq) > 1.0, "{} vs {}", mean(&q), mean(&nq));
}

#[test]
fn scoring_is_order_independent() {
    let (corpus, f, models) = fixture();
    let a: HashMap<String, (u64, u64)> = score_corpus(&models, &corpus, &f)
        .unwrap()
        .into_iter()
        .map(|s| (s.id, (s.emo_score.to_bits(), s.info_score.to_bits())))
        .collect();
    let mut posts = corpus.posts().to_vec();
    SeededRng::new(3).shuffle(&mut posts);
    let shuffled = Corpus::new(corpus.forum(), posts).unwrap();
    for s in score_corpus(&models, &shuffled, &f).unwrap() {
        assert_eq!(a[&s.id], (s.emo_score.to_bits(), s.info_score.to_bits()));
    }
}

#[test]
fn aggregates_partition_the_filtered_corpus() {
    let (corpus, f, models) = fixture();
    let scored = score_corpus(&models, &corpus, &f).unwrap();
    for k in [1, 3, 5, 8] {
        let agg = aggregate_users(&scored, k).unwrap();
        let total: usize = agg.iter().map(|a| a.n_posts).sum();
        assert_eq!(total, filter_users_min_posts(&corpus, k).unwrap().len());
        assert!(agg.windows(2).all(|w| w[0].user < w[1].user));
        assert!(agg.iter().all(|a| a.n_posts >= k));
    }
}

#[test]
fn schema_mismatch_is_a_config_error() {
    let (corpus, _, models) = fixture();
    let other = featurizer(&corpus, 4);
    assert!(matches!(score_corpus(&models, &corpus, &other), Err(Error::Config(_))));
}
