//! Full chain on a generated forum: ingest, train-lda, train-model, score,
//! analyze, report.
//!
//!     cargo run --release --example support_pipeline -- [seed] [negated]

use support_signal::cli;
use support_signal::synthetic::{planted_fixture, PlantedConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse())?;
    let negated = args.next().is_some_and(|s| s == "negated");
    let cfg = if negated { PlantedConfig::negated() } else { PlantedConfig::default() };

    let dir = tempfile::tempdir()?;
    planted_fixture(&cfg, seed)?.write_to(dir.path())?;
    let out = dir.path().join("out");
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        format!(
            "seed = {seed}\nforum = {}\npaths.dump = {}\npaths.annotations = {}\n\
             lda.K = 5\nlda.iterations = 200\nforest.n_trees = 100\n\
             labels.topic_0 = First theme\n",
            cfg.forum,
            dir.path().join("posts.jsonl").display(),
            dir.path().join("annotations.csv").display(),
        ),
    )?;

    for step in ["ingest", "train-lda", "train-model", "score", "analyze", "report"] {
        let code = cli::run([
            "support-signal",
            step,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return Err(format!("{step} exited with {code}").into());
        }
    }
    print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
    eprintln!("artifacts and run.log were written to {}", out.display());
    Ok(())
}
