//! Linear versus nonlinear scorers on the XOR mixture, where no linear
//! score can rank positives above negatives.
//!
//! cargo run --release --example xor_nonlinear_vs_linear

use pauc::experiment::{holdout, HoldoutPlan, ScorerSpec};
use pauc::modelsel::EmSettings;
use pauc::trainer::{method_label, render_tables, ReportSummary};
use pauc::{Activation, PaucRange, TrainConfig};

fn main() -> pauc::Result<()> {
    let specs = [
        ScorerSpec::Linear,
        ScorerSpec::Mlp { hidden: vec![50], activation: Activation::Tanh },
        ScorerSpec::GmmRatio { k_pos: 2, k_neg: 2 },
    ];
    let range = PaucRange::upto(0.1)?;
    let mut rows = Vec::new();
    for spec in &specs {
        let mut reports = Vec::new();
        let mut family = None;
        for seed in 0..5 {
            let data = pauc::dataset::synth_xor_gmm(100, 2000, 0.5, seed)?;
            let cfg = TrainConfig { range, seed, ..TrainConfig::default() };
            let run = holdout(spec, &data, HoldoutPlan::default(), &cfg, EmSettings::default())?;
            family = Some(run.model.scorer.family());
            println!("{spec:?} seed {seed}: epochs {} auc {:.3}", run.model.history.len(), run.report.auc);
            reports.push(run.report);
        }
        rows.push(ReportSummary::new(method_label(family.unwrap(), range), &reports));
    }
    print!("{}", render_tables(&rows));
    Ok(())
}
