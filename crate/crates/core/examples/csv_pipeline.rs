//! File-based workflow without the CLI: write a dataset to CSV, read it
//! back, split, standardize on the training part, train a linear scorer
//! and save it as JSON.
//!
//! cargo run --release --example csv_pipeline

use pauc::dataset::{load_csv, save_csv, split_stratified, synth_asymmetric_overlap, CsvLabels};
use pauc::trainer::{evaluate, train};
use pauc::{Scorer, Standardizer, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("pauc-csv-pipeline");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("data.csv");
    save_csv(&synth_asymmetric_overlap(150, 1500, 1)?, &csv, &CsvLabels::default())?;

    let data = load_csv(&csv, "label", "1")?;
    println!("loaded {} positives, {} negatives, features {:?}", data.n_pos(), data.n_neg(), data.feature_names());

    let (train_raw, test_raw) = split_stratified(&data, 0.7, 1)?;
    let (fit_raw, valid_raw) = split_stratified(&train_raw, 0.8, 2)?;
    let st = Standardizer::fit(&fit_raw);
    let (fit, valid, test) = (st.apply(&fit_raw)?, st.apply(&valid_raw)?, st.apply(&test_raw)?);

    let model = train(&Scorer::init_linear(data.dim())?, &fit, &valid, &TrainConfig::default())?;
    let report = evaluate(&model, &test)?;
    println!(
        "best epoch {:?} of {}, test AUC {:.4}, test pAUC(0, 0.1) {:.4}",
        model.best_epoch,
        model.history.len(),
        report.auc,
        report.pauc_at(0.1).unwrap_or(f64::NAN)
    );

    let path = dir.join("scorer.json");
    std::fs::write(&path, serde_json::to_string_pretty(&model.scorer)?)?;
    let back: Scorer = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    assert_eq!(back, model.scorer);
    println!("wrote {}", path.display());
    Ok(())
}
