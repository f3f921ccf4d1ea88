//! Collapsed Gibbs LDA on a generated two-topic corpus.
//!
//!     cargo run --release --example topic_model

use support_signal::synthetic::two_topic_corpus;
use support_signal::topics::{topic_terms, train_lda_with_observer, LdaParams, Stoplist};

fn main() -> support_signal::Result<()> {
    let stoplist = Stoplist::bundled();
    let docs: Vec<Vec<String>> = two_topic_corpus(200, 20, 11)
        .iter()
        .map(|d| topic_terms(d, &stoplist))
        .collect();

    let mut params = LdaParams::new(2, 42);
    params.alpha = Some(0.1);
    params.iterations = 500;
    let model = train_lda_with_observer(&docs, &params, &stoplist, |sweep, state| {
        if sweep % 100 == 0 {
            println!("sweep {sweep}: {} tokens, conservation {:?}", state.n_tokens(), state.check_conservation());
        }
    })?;

    for t in 0..model.k() {
        println!("topic {t}: {}", model.top_words(t, 5)?.join(", "));
    }
    println!("perplexity: {:.3}", model.perplexity(&docs));
    let probe: Vec<String> = ["hammer", "drill", "apple"].map(String::from).to_vec();
    println!("theta(hammer drill apple) = {:?}", model.infer(&probe));
    Ok(())
}
