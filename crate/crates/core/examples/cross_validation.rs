//! Stratified k-fold grid search over network width and activation on XOR
//! data, printing the per-point table and the selected configuration.
//!
//! cargo run --release --example cross_validation

use pauc::dataset::synth_xor_gmm;
use pauc::modelsel::{grid_search, HyperGrid};
use pauc::scoring::Activation;
use pauc::TrainConfig;

fn main() -> pauc::Result<()> {
    let data = synth_xor_gmm(100, 1000, 0.5, 0)?;
    let grid = HyperGrid::Mlp {
        layers: vec![1],
        widths: vec![1, 10, 50],
        activations: vec![Activation::Tanh, Activation::Selu],
        l1: vec![0.0, 1e-3],
    };
    let cfg = TrainConfig { max_epochs: 150, ..TrainConfig::default() };
    let result = grid_search(&grid, &data, 5, &cfg)?;

    result.write_csv(std::io::stdout())?;
    let best = result.best_row();
    println!("\nselected {:?}: {:.4} +- {:.4}", best.point, best.mean, best.std);
    Ok(())
}
