//! Summary table and no-comment rate for a JSONL dump.
//!
//!     cargo run --example corpus_summary -- path/to/posts.jsonl leaves
//!
//! Without arguments a generated 1,000-post dump is summarized.

use support_signal::corpus::{
    corpus_summary, filter_users_min_posts, load_posts, no_comment_rate, render_summary_table, TimeWindow,
};
use support_signal::synthetic::stats_dump;

fn main() -> support_signal::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let corpus = match args.as_slice() {
        [path, forum] => load_posts(path, forum)?.corpus,
        _ => stats_dump(),
    };
    let summary = corpus_summary(&corpus);
    let rate = TimeWindow::covering(&corpus).and_then(|w| no_comment_rate(&corpus, w));
    print!("{}", render_summary_table(corpus.forum(), &summary, rate));

    let active = filter_users_min_posts(&corpus, 5)?;
    let active_users = corpus_summary(&active).n_unique_users;
    println!("{} posts by {active_users} users with 5+ posts", active.len());
    Ok(())
}
