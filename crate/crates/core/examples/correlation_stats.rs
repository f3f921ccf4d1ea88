//! Pearson r with its two-tailed p, one-way ICC, and the seeded split.
//!
//!     cargo run --example correlation_stats

use support_signal::rng::SeededRng;
use support_signal::stats::{icc_average, icc_single, pearson, split_dataset, RatingsMatrix, DEFAULT_SPLIT};

fn main() -> support_signal::Result<()> {
    let mut rng = SeededRng::new(5);
    let x: Vec<f64> = (0..300).map(|_| rng.normal()).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.2 * v + rng.normal()).collect();
    let c = pearson(&x, &y)?;
    println!("r = {:.4}, p = {:.3e}, n = {}, p<0.001: {}", c.r, c.p_two_tailed, c.n, c.is_flagged());

    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let truth = 1.0 + 6.0 * rng.uniform();
            (0..3)
                .map(|_| (truth + 0.5 * rng.normal()).clamp(1.0, 7.0))
                .collect()
        })
        .collect();
    let m = RatingsMatrix::from_rows(&rows)?;
    println!("ICC average = {:.3}, single = {:.3}", icc_average(&m)?, icc_single(&m)?);

    let items: Vec<usize> = (0..1000).collect();
    let split = split_dataset(&items, DEFAULT_SPLIT, 42)?;
    println!(
        "split: train {} / validation {} / test {}",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    Ok(())
}
