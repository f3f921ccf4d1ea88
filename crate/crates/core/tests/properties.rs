use proptest::prelude::*;

use support_signal::corpus::{filter_users_min_posts, read_posts, write_posts_to, Corpus, Post};
use support_signal::forest::{train_forest, ForestParams};
use support_signal::stats::{correlation_p_value, icc_average, icc_single, pearson, split_dataset, RatingsMatrix};
use support_signal::textproc::{split_sentences, tokenize, Tag};

fn arb_post() -> impl Strategy<Value = (String, i64, String, Option<String>, u64)> {
    (
        "[a-z]{1,6}",
        0i64..2_000_000_000,
        "[A-Za-z0-9 ?.!,']{0,30}[A-Za-z]",
        proptest::option::of("[ -~]{0,20}"),
        0u64..500,
    )
}

fn corpus_from(rows: Vec<(String, i64, String, Option<String>, u64)>) -> Corpus {
    let posts = rows
        .into_iter()
        .enumerate()
        .map(|(i, (author, t, title, selftext, n))| Post {
            id: format!("id{i}"),
            author,
            created_utc: t,
            title,
            selftext,
            num_comments: n,
            forum: "leaves".into(),
        })
        .collect();
    Corpus::new("leaves", posts).unwrap()
}

proptest! {
    #[test]
    fn corpus_round_trips(rows in proptest::collection::vec(arb_post(), 0..30)) {
        let c = corpus_from(rows);
        let mut buf = Vec::new();
        write_posts_to(&c, &mut buf).unwrap();
        let back = read_posts(buf.as_slice(), "leaves").unwrap();
        prop_assert!(back.skipped.is_empty());
        prop_assert_eq!(back.corpus, c);
    }

    #[test]
    fn user_filter_is_idempotent(rows in proptest::collection::vec(arb_post(), 0..40), k in 1usize..4) {
        let c = corpus_from(rows);
        let once = filter_users_min_posts(&c, k).unwrap();
        let twice = filter_users_min_posts(&once, k).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.len() <= c.len());
    }

    #[test]
    fn pearson_symmetric_and_affine_invariant(
        pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60),
        a in 0.1f64..10.0,
        b in -100f64..100.0,
        c in 0.1f64..10.0,
        d in -100f64..100.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let (Ok(xy), Ok(yx)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((xy.r - yx.r).abs() < 1e-12);
            prop_assert!(xy.r.abs() <= 1.0);
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let t = pearson(&xs, &ys).unwrap();
            prop_assert!((t.r - xy.r).abs() < 1e-9, "{} vs {}", t.r, xy.r);
        }
    }

    #[test]
    fn p_value_decreases_with_abs_r(r1 in 0.0f64..0.99, r2 in 0.0f64..0.99, n in 3usize..2000) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p_lo = correlation_p_value(lo, n).unwrap();
        let p_hi = correlation_p_value(hi, n).unwrap();
        prop_assert!(p_hi <= p_lo + 1e-15);
        prop_assert!((0.0..=1.0).contains(&p_lo));
        prop_assert_eq!(correlation_p_value(-hi, n).unwrap(), p_hi);
    }

    #[test]
    fn icc_never_exceeds_one(rows in proptest::collection::vec(proptest::collection::vec(1u8..=7, 3), 2..25)) {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
        let m = RatingsMatrix::from_rows(&rows).unwrap();
        for v in [icc_average(&m), icc_single(&m)].into_iter().flatten() {
            prop_assert!(v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn sentences_concatenate_to_tokens(text in "[A-Za-z0-9 ,.!?'-]{0,80}") {
        let flat: Vec<String> = split_sentences(&text)
            .into_iter()
            .flat_map(|s| s.tokens)
            .map(|t| t.surface)
            .collect();
        let direct: Vec<String> = tokenize(&text).into_iter().map(|t| t.surface).collect();
        prop_assert_eq!(flat, direct);
    }

    #[test]
    fn punct_iff_no_alphanumerics(text in "\\PC{0,40}") {
        for t in tokenize(&text) {
            prop_assert!(!t.surface.is_empty());
            let alnum = t.surface.chars().any(char::is_alphanumeric);
            prop_assert_eq!(t.tag == Tag::Punct, !alnum, "{:?}", t.surface);
        }
    }

    #[test]
    fn split_is_a_partition(n in 10usize..300, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let s = split_dataset(&items, (0.8, 0.1, 0.1), seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, items);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forest_predictions_stay_in_target_range(
        rows in proptest::collection::vec((0f64..1.0, 0f64..1.0, 1f64..7.0), 12..60),
        seed in any::<u64>(),
        queries in proptest::collection::vec((-5f64..5.0, -5f64..5.0), 1..20),
    ) {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let params = ForestParams { n_trees: 10, ..ForestParams::default() };
        let model = train_forest(&x, &y, &names, &params, seed).unwrap();
        let (lo, hi) = model.target_range;
        for q in queries {
            let v = model.predict(&[q.0, q.1]).unwrap();
            prop_assert!(lo <= v && v <= hi);
        }
        let total: f64 = model.importances.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
