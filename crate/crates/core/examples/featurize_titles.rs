//! Feature vectors for a few titles, written as CSV to stdout.
//!
//!     cargo run --release --example featurize_titles > features.csv

use support_signal::features::{write_feature_csv, Featurizer};
use support_signal::lexicons::Lexicons;
use support_signal::synthetic::two_topic_corpus;
use support_signal::textproc::Tagger;
use support_signal::topics::{topic_terms, train_lda, LdaParams, Stoplist};

fn main() -> support_signal::Result<()> {
    let stoplist = Stoplist::bundled();
    let docs: Vec<Vec<String>> = two_topic_corpus(50, 12, 1)
        .iter()
        .map(|d| topic_terms(d, &stoplist))
        .collect();
    let mut params = LdaParams::new(2, 1);
    params.iterations = 100;
    let lda = train_lda(&docs, &params, &stoplist)?;

    let featurizer = Featurizer::new(Lexicons::bundled(), Tagger::bundled(), lda)?;
    let titles = [
        "How do you deal with the cravings? Please help",
        "Day 30 and I don't miss weed at all.",
        "You should never mix xanax with alcohol",
    ];
    let rows = featurizer.extract_many(&titles);
    for (title, row) in titles.iter().zip(&rows) {
        let nonzero: Vec<String> = featurizer
            .schema()
            .names()
            .iter()
            .zip(row.values())
            .filter(|(_, v)| **v != 0.0)
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        eprintln!("{title}\n  {}", nonzero.join(" "));
    }
    write_feature_csv(featurizer.schema(), &rows, std::io::stdout())
}
