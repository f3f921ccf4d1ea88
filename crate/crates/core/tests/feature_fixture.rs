mod common;

use common::{feature_fixture_mismatches, fixture_featurizer, FEATURE_TITLES};

#[test]
fn fifty_hand_labeled_titles_match_exactly() {
    let (n, failures) = feature_fixture_mismatches();
    assert_eq!(n, 50);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn structural_counts_never_exceed_sentences() {
    let f = fixture_featurizer();
    for row in FEATURE_TITLES.lines().filter(|l| !l.starts_with('#')) {
        let v = f.extract(row.split('\t').next().unwrap());
        let n = v.get("n_sentences").unwrap();
        for k in ["n_question_sentences", "n_negation_sentences", "advice_request_count"] {
            assert!(v.get(k).unwrap() <= n);
        }
    }
}

#[test]
fn worked_example_from_the_feature_rules() {
    let f = fixture_featurizer();
    let v = f.extract("You should quit weed. Any tips?");
    assert_eq!(v.get("advice_request_count"), Some(1.0));
    assert_eq!(v.get("n_question_sentences"), Some(1.0));
    assert_eq!(v.get("drug_mention_count"), Some(1.0));
    assert_eq!(v.get("n_sentences"), Some(2.0));
}
