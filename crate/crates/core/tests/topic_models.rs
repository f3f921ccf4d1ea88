use support_signal::synthetic::{two_topic_corpus, FRUIT, TOOLS};
use support_signal::topics::{topic_terms, train_lda, LdaParams, Stoplist, TopicModel};

fn docs(seed: u64) -> Vec<Vec<String>> {
    let stop = Stoplist::bundled();
    two_topic_corpus(200, 20, seed).iter().map(|d| topic_terms(d, &stop)).collect()
}

fn sparse_params(seed: u64) -> LdaParams {
    let mut p = LdaParams::new(2, seed);
    p.alpha = Some(0.1);
    p.iterations = 300;
    p
}

#[test]
fn fold_in_concentrates_on_the_right_topic() {
    let model = train_lda(&docs(1), &sparse_params(3), &Stoplist::bundled()).unwrap();
    let fruit_topic = (0..2)
        .max_by(|&a, &b| {
            let w = model.vocab().id("apple").unwrap();
            model.phi(a, w).total_cmp(&model.phi(b, w))
        })
        .unwrap();
    let doc: Vec<String> = FRUIT[..5].iter().map(|s| s.to_string()).collect();
    let theta = model.infer(&doc);
    assert!(theta[fruit_topic] > 0.8, "{theta:?}");
    let tools: Vec<String> = TOOLS[..5].iter().map(|s| s.to_string()).collect();
    assert!(model.infer(&tools)[1 - fruit_topic] > 0.8);
    assert_eq!(model.infer(&["zebra".to_string()]), vec![0.5, 0.5]);
}

#[test]
fn learned_model_beats_uniform_perplexity() {
    let d = docs(2);
    let model = train_lda(&d, &sparse_params(4), &Stoplist::bundled()).unwrap();
    let uniform = model.vocab().len() as f64;
    let px = model.perplexity(&d);
    assert!(px < 0.75 * uniform, "perplexity {px} vs uniform {uniform}");
}

#[test]
fn json_round_trip_and_determinism() {
    let d = docs(5);
    let a = train_lda(&d, &sparse_params(6), &Stoplist::bundled()).unwrap();
    let b = train_lda(&d, &sparse_params(6), &Stoplist::bundled()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let back = TopicModel::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    let probe: Vec<String> = vec!["hammer".into(), "apple".into(), "drill".into()];
    assert_eq!(back.infer(&probe), a.infer(&probe));
}

#[test]
fn corrupted_phi_is_rejected() {
    let d = docs(7);
    let json = train_lda(&d, &sparse_params(1), &Stoplist::bundled()).unwrap().to_json();
    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let first = value["phi"].get_mut(0).unwrap();
    *first = serde_json::json!(first.as_f64().map_or(0.9, |v| v + 0.1));
    assert!(TopicModel::from_json(&value.to_string()).is_err());
}

#[test]
fn top_words_out_of_range() {
    let model = train_lda(&docs(8), &sparse_params(1), &Stoplist::bundled()).unwrap();
    assert!(model.top_words(2, 5).is_err());
    assert_eq!(model.top_words(0, 100).unwrap().len(), model.vocab().len());
}
