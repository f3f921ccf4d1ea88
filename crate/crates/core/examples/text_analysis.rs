//! Tokens, sentences, coarse tags and lexicon hits for a title.
//!
//!     cargo run --example text_analysis -- "Can't sleep. Any tips for night sweats?"

use support_signal::lexicons::Lexicons;
use support_signal::textproc::Tagger;

fn main() {
    let title = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Day 12 without weed. I feel anxious, should I try melatonin?".into());
    let tagger = Tagger::bundled();
    let lex = Lexicons::bundled();

    let sentences = tagger.analyze(&title);
    for (i, s) in sentences.iter().enumerate() {
        println!(
            "sentence {i}: question={} negation={} words={}",
            s.is_question,
            s.has_negation,
            s.word_count()
        );
        for t in &s.tokens {
            let cats: Vec<&str> = lex.categories.match_categories(&t.lower).into_iter().collect();
            let subj = lex
                .subjectivity
                .get(&t.lower)
                .map_or(String::new(), |s| format!(" subj={s:?}"));
            println!("  {:<14} {:<7} {}{subj}", t.surface, t.tag.as_str(), cats.join(","));
        }
    }
    let tokens: Vec<_> = sentences.into_iter().flat_map(|s| s.tokens).collect();
    println!("drug mentions: {}", lex.drugs.count_mentions(&tokens));
}
