//! Random-forest regression on a planted signal, with importances and a
//! save/load round trip.
//!
//!     cargo run --release --example forest_regression

use support_signal::forest::{train_forest, ForestModel, ForestParams};
use support_signal::rng::SeededRng;

fn main() -> support_signal::Result<()> {
    let mut rng = SeededRng::new(3);
    let names: Vec<String> = (0..6).map(|i| format!("x{i}")).collect();
    let x: Vec<Vec<f64>> = (0..400).map(|_| (0..6).map(|_| rng.uniform()).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 1.0 + 6.0 * r[2]).collect();

    let params = ForestParams {
        n_trees: 200,
        target_bounds: Some((1.0, 7.0)),
        ..ForestParams::default()
    };
    let model = train_forest(&x, &y, &names, &params, 9)?;
    for (name, imp) in model.importance_report(3) {
        println!("{name}: {imp:.3}");
    }

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (row, t) in x.iter().zip(&y) {
        ss_res += (t - model.predict(row)?).powi(2);
        ss_tot += (t - mean).powi(2);
    }
    println!("training R^2 = {:.4}", 1.0 - ss_res / ss_tot);

    let restored = ForestModel::from_json(&model.to_json())?;
    println!("round trip identical: {}", restored == model);
    Ok(())
}
